import math

import pytest

import surfdyn


def test_henon_fixed_point():
    m = surfdyn.Map("henon", {"a": 1.4, "b": 0.3})
    o = surfdyn.find_periodic(m, (0.6, 0.2))
    x = (-0.7 + math.sqrt(0.49 + 5.6)) / 2.8
    assert o["classification"] == "saddle"
    assert o["points"][0] == pytest.approx((x, 0.3 * x), abs=1e-12)
    assert m(o["points"][0]) == pytest.approx(o["points"][0], abs=1e-12)


def test_cat_certificate():
    c = surfdyn.certify_cones(surfdyn.Map("cat"), nx=16, ny=16)
    r5 = math.sqrt(5)
    assert c["pass"]
    assert c["lambda_worst"] == pytest.approx((3 - r5) / (3 + r5), abs=1e-9)


def test_pliss_constant_sequence():
    r = surfdyn.pliss_times([0.5] * 11, 0.5, 0.8)
    assert r["times"] == list(range(11))


def test_cat_homoclinic_events():
    r = surfdyn.manifolds(surfdyn.Map("cat"), (0.01, 0.01), target_arclength=3.0)
    assert any(e["kind"] == "transversal" for e in r["events"])


def test_forge_and_rejection():
    toy = surfdyn.Map("toy_saddle", {"lambda": 0.5, "sigma": 2.0, "shear": 0.01})
    r = surfdyn.forge_tangency(toy, (0.1, 0.1), x1=0.001)
    assert r["x0"] == pytest.approx(0.0015, abs=1e-15)
    assert r["tangency_residual"] < 1e-8
    steep = surfdyn.Map("toy_saddle", {"lambda": 0.5, "sigma": 2.0, "shear": 0.02})
    with pytest.raises(surfdyn.SurfdynError, match="ThresholdViolated"):
        surfdyn.forge_tangency(steep, (0.1, 0.1))


def test_inflate():
    step = ((0.9 ** 0.2, 0.0), (0.0, 1.1 ** 0.2))
    e = surfdyn.edit_cocycle([step] * 5, "inflate", 0.05, delta=0.01)
    assert e["lambda"] == pytest.approx(0.855891, abs=1e-6)
    assert e["sigma"] == pytest.approx(1.156111, abs=1e-6)


def test_unknown_family():
    with pytest.raises(surfdyn.SurfdynError, match="ConfigError"):
        surfdyn.Map("nope")


def test_run(tmp_path):
    code, report = surfdyn.run("domination-certify",
                               {"map": {"family": "cat"}, "domination_certify": {"nx": 8, "ny": 8}},
                               tmp_path)
    assert code == 0
    assert report["status"] == "pass"
    assert (tmp_path / "boxes.csv").exists()
