// Python module surfdyn._core. Results come back as plain dicts and tuples.
#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "surfdyn/cli.hpp"
#include "surfdyn/domination.hpp"
#include "surfdyn/forge.hpp"
#include "surfdyn/manifolds.hpp"
#include "surfdyn/maps.hpp"
#include "surfdyn/periodic.hpp"
#include "surfdyn/pliss.hpp"

namespace py = pybind11;
using namespace surfdyn;

namespace {

using Pair = std::pair<double, double>;
using Rows = std::array<Pair, 2>;

Pair tup(Vec2 v) { return {v.x, v.y}; }
Vec2 vec(Pair p) { return {p.first, p.second}; }
Rows rows(const Mat2& m) { return {Pair{m.a, m.b}, Pair{m.c, m.d}}; }
Mat2 mat(const Rows& r) { return {r[0].first, r[0].second, r[1].first, r[1].second}; }

py::dict orbit_dict(const PeriodicOrbit& o) {
  py::dict d;
  std::vector<Pair> pts;
  for (const auto& p : o.points) pts.push_back(tup(p));
  d["points"] = pts;
  d["period"] = o.period;
  d["monodromy"] = rows(o.monodromy);
  d["lambda"] = o.lambda;
  d["sigma"] = o.sigma;
  d["classification"] = std::string(to_string(o.classification));
  d["angles"] = o.angles;
  d["residual"] = o.residual;
  return d;
}

PeriodicOrbit saddle_at(const SurfaceMap& m, Pair seed, int period) {
  return classify_and_split(m, find_periodic(m, vec(seed), period));
}

py::dict polyline_dict(const SurfaceMap& m, const Polyline& p) {
  std::vector<Pair> pts;
  for (const auto& x : p.points) pts.push_back(tup(m.reduce(x)));
  py::dict d;
  d["points"] = pts;
  d["arclength"] = p.arclength;
  d["label"] = std::string(to_string(p.label));
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, mod) {
  mod.doc() = "dominated splittings and tangencies of surface maps";

  static py::exception<Error> error(mod, "SurfdynError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      PyErr_SetString(error.ptr(), (std::string(to_string(e.code())) + ": " + e.what()).c_str());
    }
  });

  py::class_<SurfaceMap>(mod, "Map")
      .def(py::init([](const std::string& family, const std::map<std::string, double>& params) {
             return make_map({family, params});
           }),
           py::arg("family"), py::arg("params") = std::map<std::string, double>{})
      .def("__call__", [](const SurfaceMap& m, Pair p) { return tup(m.eval(vec(p))); })
      .def("inverse", [](const SurfaceMap& m, Pair p) { return tup(m.eval_inverse(vec(p))); })
      .def("jacobian", [](const SurfaceMap& m, Pair p) { return rows(m.jacobian(vec(p))); })
      .def_property_readonly("family", [](const SurfaceMap& m) { return m.spec().family; })
      .def_property_readonly("params", [](const SurfaceMap& m) { return m.spec().params; })
      .def_property_readonly("is_torus", &SurfaceMap::is_torus);

  mod.def("map_families", &map_families);

  mod.def(
      "find_periodic",
      [](const SurfaceMap& m, Pair seed, int period) { return orbit_dict(saddle_at(m, seed, period)); },
      py::arg("map"), py::arg("seed"), py::arg("period") = 1);

  mod.def(
      "scan_periodic",
      [](const SurfaceMap& m, std::array<double, 4> region, int n_max, int nx, int ny) {
        ScanOptions o;
        o.region = {region[0], region[1], region[2], region[3]};
        o.n_max = n_max;
        o.nx = nx;
        o.ny = ny;
        py::list out;
        for (const auto& orb : scan_periodic(m, o)) out.append(orbit_dict(orb));
        return out;
      },
      py::arg("map"), py::arg("region"), py::arg("n_max") = 1, py::arg("nx") = 64, py::arg("ny") = 64);

  mod.def(
      "certify_cones",
      [](const SurfaceMap& m, std::array<double, 4> region, int nx, int ny, int T, double a) {
        CertifyOptions o;
        o.region = {region[0], region[1], region[2], region[3]};
        o.nx = nx;
        o.ny = ny;
        o.T = T;
        o.a = a;
        const auto c = certify_cones(m, o);
        py::dict d;
        d["pass"] = c.pass;
        d["lambda_worst"] = c.lambda_worst;
        d["padding_worst"] = c.padding_worst;
        d["fail_box"] = c.fail_box;
        d["boxes"] = c.boxes.size();
        return d;
      },
      py::arg("map"), py::arg("region") = std::array<double, 4>{0, 1, 0, 1}, py::arg("nx") = 64,
      py::arg("ny") = 64, py::arg("T") = 20, py::arg("a") = 0.5);

  mod.def(
      "pliss_times",
      [](const std::vector<double>& a, double g1, double g2) {
        const auto r = pliss_times(a, g1, g2);
        py::dict d;
        d["times"] = r.times;
        d["c"] = r.c;
        d["hypothesis"] = r.hypothesis;
        d["density_holds"] = r.density_holds;
        return d;
      },
      py::arg("norms"), py::arg("gamma1"), py::arg("gamma2"));

  mod.def(
      "manifolds",
      [](const SurfaceMap& m, Pair seed, int period, double target_arclength, double r0, double h_max) {
        const auto orbit = saddle_at(m, seed, period);
        GrowOptions g;
        g.target_arclength = target_arclength;
        g.h_max = h_max;
        const auto wu = grow(m, local_seed(m, orbit, Branch::unstable, r0, h_max), g);
        const auto ws = grow(m, local_seed(m, orbit, Branch::stable, r0, h_max), g);
        const auto res = intersections(wu, ws);
        py::list events;
        for (const auto& e : res.events) {
          py::dict ev;
          ev["point"] = tup(e.point);
          ev["s_u"] = e.s_u;
          ev["s_s"] = e.s_s;
          ev["angle"] = e.angle;
          ev["kind"] = std::string(to_string(e.kind));
          events.append(ev);
        }
        py::dict d;
        d["wu"] = polyline_dict(m, wu);
        d["ws"] = polyline_dict(m, ws);
        d["events"] = events;
        d["overlap"] = res.overlap;
        return d;
      },
      py::arg("map"), py::arg("seed"), py::arg("period") = 1, py::arg("target_arclength") = 3.0,
      py::arg("r0") = 0.1, py::arg("h_max") = 1e-3);

  mod.def(
      "forge_tangency",
      [](const SurfaceMap& m, Pair seed, int period, double eps, std::optional<double> x1) {
        ForgeOptions o;
        o.eps = eps;
        o.x1 = x1;
        const auto r = forge_tangency(m, saddle_at(m, seed, period), o);
        const auto& g = r.geometry;
        py::dict d;
        d["x0"] = g.x0;
        d["a"] = g.a;
        d["t0"] = g.t0;
        d["gamma"] = g.gamma;
        d["threshold"] = g.threshold;
        d["tangency_point"] = tup(r.tangency_point);
        d["tangency_residual"] = r.tangency_residual;
        d["c1_distance"] = r.c1_distance;
        d["p_fixed"] = r.p_fixed;
        d["derivative_unchanged"] = r.derivative_unchanged;
        return d;
      },
      py::arg("map"), py::arg("seed"), py::arg("period") = 1, py::arg("eps") = 0.1,
      py::arg("x1") = std::nullopt);

  mod.def(
      "edit_cocycle",
      [](const std::vector<Rows>& matrices, const std::string& mode, double eps, double delta,
         Pair u0, Pair v0, double beta1) {
        EditSpec s;
        if (mode == "inflate")
          s.mode = EditMode::inflate;
        else if (mode == "neutralize_and_tilt")
          s.mode = EditMode::neutralize_and_tilt;
        else
          throw Error(ErrorCode::ConfigError, "mode: expected inflate or neutralize_and_tilt");
        s.delta = delta;
        s.u0 = vec(u0);
        s.v0 = vec(v0);
        s.beta1 = beta1;
        std::vector<Mat2> ms;
        for (const auto& r : matrices) ms.push_back(mat(r));
        const auto e = edit_cocycle(ms, s, eps);
        std::vector<Rows> edited;
        for (const auto& m : e.edited) edited.push_back(rows(m));
        py::dict d;
        d["edited"] = edited;
        d["monodromy"] = rows(e.monodromy);
        d["lambda"] = e.lambda;
        d["sigma"] = e.sigma;
        d["angle"] = e.angle;
        d["deviation"] = e.deviation;
        return d;
      },
      py::arg("matrices"), py::arg("mode"), py::arg("eps"), py::arg("delta") = 0.0,
      py::arg("u0") = Pair{1.0, 0.0}, py::arg("v0") = Pair{0.0, 1.0}, py::arg("beta1") = 0.0);

  // Same as the command line runner; the report comes back as a JSON string.
  mod.def(
      "run",
      [](const std::string& command, const std::string& config, const std::filesystem::path& out,
         std::optional<std::uint64_t> seed) {
        const auto o = cli::run(command, cli::json::parse(config), out, seed);
        return std::make_pair(o.exit_code, o.report.dump());
      },
      py::arg("command"), py::arg("config"), py::arg("out"), py::arg("seed") = std::nullopt);
}
