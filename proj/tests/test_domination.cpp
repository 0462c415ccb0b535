#include <cmath>
#include <numbers>

#include "doctest.h"
#include "surfdyn/domination.hpp"
#include "surfdyn/forge.hpp"

using namespace surfdyn;

namespace {
const double kR5 = std::sqrt(5.0);
const double kLam = (3.0 - kR5) / 2.0;

SurfaceMap rotation() {
  const double c = std::cos(std::numbers::pi / 4), s = std::sin(std::numbers::pi / 4);
  return linear_map(Mat2{c, -s, s, c});
}

const Splitting kAxes(Direction::from(1, 0), Direction::from(0, 1));
}  // namespace

TEST_CASE("finite-time splitting of linear maps") {
  const auto s = finite_time_splitting(cat_map(), {0.3, 0.4}, 5);
  const auto f = Direction::from(1.0, (kR5 - 1.0) / 2.0);
  const auto e = Direction::from(1.0, -(kR5 + 1.0) / 2.0);
  CHECK(s.f().separation(f) < 1e-12);
  CHECK(s.e().separation(e) < 1e-12);

  const auto t = finite_time_splitting(linear_map(Mat2::diag(0.5, 2.0)), {1.0, 1.0}, 5);
  CHECK(t.e().separation(Direction::from(1, 0)) < 1e-14);
  CHECK(t.f().separation(Direction::from(0, 1)) < 1e-14);

  try {
    finite_time_splitting(rotation(), {0.1, 0.1}, 5);
    FAIL("expected DegenerateSingularValues");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::DegenerateSingularValues);
  }
}

TEST_CASE("past-window splitting matches the two-sided one on the cat map") {
  const auto map = cat_map();
  std::vector<Vec2> past{{0.31, 0.12}};
  for (int i = 0; i < 10; ++i) past.push_back(map.eval_lift(past.back()));
  const auto a = finite_time_splitting_past(map, past, 10);
  const auto b = finite_time_splitting(map, past.back(), 10);
  CHECK(a.f().separation(b.f()) < 1e-12);
  CHECK(a.e().separation(b.e()) < 1e-12);
}

TEST_CASE("envelope fit") {
  std::vector<double> r{1.0};
  for (int k = 1; k <= 20; ++k) r.push_back(2.0 * std::pow(0.3, k));
  const auto fit = fit_envelope(r);
  CHECK(fit.rate == doctest::Approx(std::pow(2.0, 1.0 / 5) * 0.3).epsilon(1e-12));
  CHECK(fit.decays);
  CHECK_FALSE(fit.unit_C);
  for (std::size_t k = 0; k < r.size(); ++k)
    CHECK(r[k] <= fit.C * std::pow(fit.rate, double(k)) * (1 + 1e-12));
  const auto flat = fit_envelope(std::vector<double>(10, 1.0));
  CHECK_FALSE(flat.decays);
}

TEST_CASE("orbit domination ratios") {
  const auto cat = orbit_domination(cat_map(), {0.2, 0.1}, SplittingSource::exact(), 12);
  const double q = (3.0 - kR5) / (3.0 + kR5);
  for (int k = 0; k <= 12; ++k)
    CHECK(cat.ratios[k] == doctest::Approx(std::pow(q, k)).epsilon(1e-9));
  CHECK(cat.fit.rate == doctest::Approx(q).epsilon(1e-10));
  CHECK(cat.fit.C == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(cat.dominated);

  const auto toy = orbit_domination(linear_map(Mat2::diag(0.5, 2.0)), {1, 1}, SplittingSource::exact(), 10);
  CHECK(toy.fit.rate == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(toy.ratios[3] == doctest::Approx(std::pow(0.25, 3)).epsilon(1e-14));

  const auto rot = orbit_domination(rotation(), {0.1, 0.2}, SplittingSource::from(kAxes), 10);
  CHECK_FALSE(rot.dominated);
  CHECK_FALSE(rot.fit.decays);
}

TEST_CASE("two-domination sequences") {
  const auto cat = two_domination_check(cat_map(), {0.2, 0.1}, SplittingSource::exact(), 8);
  for (int k = 0; k <= 8; ++k) {
    CHECK(cat.e_f2[k] == doctest::Approx(std::pow(kLam, 3 * k)).epsilon(1e-8));
    CHECK(cat.e2_f[k] == doctest::Approx(std::pow(kLam, 3 * k)).epsilon(1e-8));
  }
  CHECK(std::pow(kLam, 3) == doctest::Approx(0.0557281).epsilon(1e-6));
  const auto toy = two_domination_check(linear_map(Mat2::diag(0.5, 2.0)), {0, 0}, SplittingSource::exact(), 6);
  CHECK(toy.fit_e_f2.rate == doctest::Approx(0.125).epsilon(1e-14));
  const auto flat = two_domination_check(linear_map(Mat2::identity()), {0, 0}, SplittingSource::from(kAxes), 6);
  for (double v : flat.e_f2) CHECK(v == 1.0);
  CHECK_FALSE(flat.fit_e_f2.decays);
}

TEST_CASE("cone certificate on the cat map") {
  CertifyOptions o;
  o.nx = o.ny = 16;
  o.T = 5;
  o.a = 0.5;
  const auto c = certify_cones(cat_map(), o);
  CHECK(c.pass);
  CHECK(c.boxes.size() == 256);
  CHECK(c.lambda_worst == doctest::Approx((3.0 - kR5) / (3.0 + kR5)).epsilon(1e-9));
  CHECK(c.padding_worst == doctest::Approx(0.0));
  CHECK_FALSE(c.fail_box.has_value());
}

TEST_CASE("cone certificate fails for the identity") {
  CertifyOptions o;
  o.region = {-1, 1, -1, 1};
  o.nx = o.ny = 4;
  const auto c = certify_cones(identity_map(), o);
  CHECK_FALSE(c.pass);
  REQUIRE(c.fail_box.has_value());
  CHECK(*c.fail_box == 0);
  CHECK(std::isinf(c.lambda_worst));
}

TEST_CASE("cone certificate is independent of thread count") {
  CertifyOptions o;
  o.nx = o.ny = 24;
  o.T = 6;
  o.threads = 1;
  const auto a = certify_cones(cat_map(0.02), o);
  o.threads = 3;
  const auto b = certify_cones(cat_map(0.02), o);
  REQUIRE(a.boxes.size() == b.boxes.size());
  for (std::size_t i = 0; i < a.boxes.size(); ++i) {
    CHECK(a.boxes[i].lambda == b.boxes[i].lambda);
    CHECK(a.boxes[i].padding == b.boxes[i].padding);
  }
  CHECK(a.pass == b.pass);
  CHECK(a.lambda_worst == b.lambda_worst);
}

TEST_CASE("Henon certificate snapshot") {
  // Regression snapshot, not ground truth: the attractor has tangencies and
  // the 64x64 covering by attractor boxes leaves holes.
  const auto map = henon(1.4, 0.3);
  CertifyOptions o;
  o.region = {-1.8, 1.8, -0.55, 0.55};
  o.nx = o.ny = 64;
  o.T = 20;
  o.a = 0.5;
  o.attractor = attractor_orbit(map, {0.1, 0.1}, 1000, 20000);
  const auto c = certify_cones(map, o);
  CHECK(c.boxes.size() == 291);
  CHECK_FALSE(c.pass);
  CHECK(c.fail_box == 591);
}

TEST_CASE("hyperbolicity verdicts") {
  const double g1 = std::sqrt(kLam), g2 = std::pow(kLam, 1.0 / 3.0);
  const auto cat = hyperbolicity_verdict(cat_map(), {{0.1, 0.2}, {0.7, 0.3}},
                                         SplittingSource::finite(20), 40, g1, g2);
  CHECK(cat.verdict == Verdict::hyperbolic_evidence);
  for (const auto& p : cat.points) {
    CHECK(p.e_rate == doctest::Approx(kLam).epsilon(1e-6));
    CHECK(p.f_rate == doctest::Approx(kLam).epsilon(1e-6));
  }
  const auto rot = hyperbolicity_verdict(rotation(), {{0.1, 0.2}}, SplittingSource::finite(20), 40, g1, g2);
  CHECK(rot.verdict == Verdict::contradicted);
  const auto flat = hyperbolicity_verdict(linear_map(Mat2::diag(1.0, 2.0)), {{0.0, 0.0}},
                                          SplittingSource::exact(), 40, g1, g2);
  CHECK(flat.verdict == Verdict::contradicted);
  CHECK(flat.points[0].e_rate >= 1.0 - 1e-12);
}
