#include <cmath>

#include "doctest.h"
#include "surfdyn/forge.hpp"

using namespace surfdyn;

namespace {
PeriodicOrbit fixed(const SurfaceMap& m) { return classify_and_split(m, find_periodic(m, {0.1, 0.1}, 1)); }

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::InvalidArgument;
}
}  // namespace

TEST_CASE("bump functions") {
  CHECK(bump_phi(0.1, 0.0).value == 0.1);
  CHECK(bump_phi(0.1, 0.0).derivative == 0.0);
  CHECK(bump_phi(0.1, 3.0).value == 0.0);
  CHECK(bump_phi(0.1, 3.0).derivative == 0.0);
  CHECK(bump_phi(0.1, 1.25).value == doctest::Approx(0.05).epsilon(1e-15));
  CHECK(bump_phi(0.1, 1.25).derivative == doctest::Approx(-0.1).epsilon(1e-15));
  CHECK(bump_phi(0.1, -1.25).derivative == doctest::Approx(0.1).epsilon(1e-15));
  // bounds: 0 <= phi <= eps, |phi'| <= eps, derivative matches differences
  for (double t = -2.5; t <= 2.5; t += 0.01) {
    const auto b = bump_phi(0.1, t);
    CHECK(b.value >= 0.0);
    CHECK(b.value <= 0.1);
    CHECK(std::abs(b.derivative) <= 0.1 * (1 + 1e-15));
    const double fd = (bump_phi(0.1, t + 1e-6).value - bump_phi(0.1, t - 1e-6).value) / 2e-6;
    CHECK(b.derivative == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
  }
  CHECK(bump_psi(0.3).value == 1.0);
}

TEST_CASE("phi map") {
  const double a = 0.01, eps = 0.1;
  const Vec2 o = phi_map({0, 0}, a, eps);
  CHECK(o.x == 0.0);
  CHECK(o.y == doctest::Approx(a * eps).epsilon(1e-15));
  CHECK(phi_map({3 * a, 0.004}, a, eps) == Vec2{3 * a, 0.004});
  CHECK(phi_map({0.0, 3.0}, 1.0, eps) == Vec2{0.0, 3.0});
  // Jacobian against central differences
  const Vec2 p{0.013, -0.004};
  const Mat2 fd = finite_difference_jacobian([&](Vec2 x) { return phi_map(x, a, eps); }, p);
  CHECK((phi_map_jacobian(p, a, eps) - fd).max_abs() < 1e-7);
}

TEST_CASE("forge geometry on the toy saddle") {
  const auto m = toy_saddle(0.5, 2.0, 0.01);
  ForgeOptions o;
  o.eps = 0.1;
  o.x1 = 0.001;
  const auto r = forge_tangency(m, fixed(m), o);
  const auto& g = r.geometry;
  CHECK(g.gamma == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(g.threshold == doctest::Approx(0.0166667).epsilon(1e-6));
  CHECK(g.x0 == doctest::Approx(0.0015).epsilon(1e-12));
  CHECK(g.a == doctest::Approx(0.00025).epsilon(1e-12));
  CHECK(g.a_eps == doctest::Approx(2.5e-5).epsilon(1e-12));
  CHECK(g.gamma_x0 == doctest::Approx(1.5e-5).epsilon(1e-12));
  CHECK(g.reaches_stable);
  CHECK(g.t0 > 0.0);
  CHECK(g.t0 <= 1.0);
  CHECK(r.tangency_residual < 1e-8);
  CHECK(std::abs(r.tangency_gap) < 1e-12);
  CHECK(r.c1_distance <= 0.1 * (1.0 + 1e-3));
  CHECK(r.p_fixed);
  CHECK(r.derivative_unchanged);

  // tangency point sits on the stable line (1, 0.01) through p...
  const Vec2 es = Vec2{1.0, 0.01} / std::hypot(1.0, 0.01);
  CHECK(std::abs(cross(r.tangency_point, es)) < 1e-12);
  // ...and comes from the unstable axis: P^-1 = f o g^-1 lands on y = 0
  const Vec2 back = m.eval(r.perturbed.eval_inverse(r.tangency_point));
  CHECK(std::abs(back.y) < 1e-12);
  // g = f away from the support
  const Vec2 far{0.5, 0.3};
  CHECK(r.perturbed.eval(far) == m.eval(far));
  CHECK((r.perturbed.eval(r.perturbed.eval_inverse({0.0021, 0.00002})) - Vec2{0.0021, 0.00002}).norm() <
        1e-15);
}

TEST_CASE("automatic x1") {
  const auto m = toy_saddle(0.5, 2.0, 0.01);
  ForgeOptions o;
  const auto r = forge_tangency(m, fixed(m), o);
  CHECK(r.geometry.x1 == doctest::Approx(1e-3));
  CHECK(r.geometry.manifold_deviation == 0.0);
}

TEST_CASE("forge rejections") {
  ForgeOptions o;
  o.x1 = 0.001;
  const auto steep = toy_saddle(0.5, 2.0, 0.02);
  CHECK(code_of([&] { forge_tangency(steep, fixed(steep), o); }) == ErrorCode::ThresholdViolated);
  const auto area = toy_saddle(0.6, 2.0, 0.01);
  CHECK(code_of([&] { forge_tangency(area, fixed(area), o); }) == ErrorCode::DissipationViolated);
}

TEST_CASE("C1 distance") {
  const auto h = henon(1.4, 0.3);
  const Region r{-1, 1, -1, 1};
  CHECK(c1_distance(h, h, r, 32) == 0.0);
  const auto shifted = function_map([&](Vec2 x) { return h.eval_lift(x) + Vec2{0.0, 0.02}; },
                                    [&](Vec2 x) { return h.inverse_lift(x - Vec2{0.0, 0.02}); },
                                    [&](Vec2 x) { return h.jacobian(x); }, PhaseSpace::plane);
  CHECK(c1_distance(h, shifted, r, 32) == doctest::Approx(0.02).epsilon(1e-12));
}

TEST_CASE("inflate edit") {
  std::vector<Mat2> steps(5, Mat2::diag(std::pow(0.9, 0.2), std::pow(1.1, 0.2)));
  const auto e = edit_cocycle(steps, {EditMode::inflate, 0.01}, 0.05);
  CHECK(e.lambda == doctest::Approx(0.9 * std::pow(0.99, 5)).epsilon(1e-12));
  CHECK(e.sigma == doctest::Approx(1.1 * std::pow(1.01, 5)).epsilon(1e-12));
  CHECK(e.lambda * e.sigma < 1.0);
  CHECK(e.lambda * e.sigma == doctest::Approx(0.98949).epsilon(1e-5));
  for (double d : e.deviation) CHECK(d <= 0.05);

  const auto same = edit_cocycle(steps, {EditMode::inflate, 0.0}, 0.05);
  CHECK(same.lambda == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(same.sigma == doctest::Approx(1.1).epsilon(1e-12));
  for (double d : same.deviation) CHECK(d < 1e-15);
}

TEST_CASE("budget exceeded names the step") {
  std::vector<Mat2> steps(5, Mat2::diag(std::pow(0.9, 0.2), std::pow(1.1, 0.2)));
  try {
    edit_cocycle(steps, {EditMode::inflate, 0.2}, 0.05);
    FAIL("expected BudgetExceeded");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BudgetExceeded);
    REQUIRE(e.index().has_value());
    CHECK(*e.index() == 0);
  }
}

TEST_CASE("neutralize and tilt") {
  EditSpec t;
  t.mode = EditMode::neutralize_and_tilt;
  t.u0 = {1.0, 0.0};
  t.v0 = {1.0, 0.01};
  t.beta1 = 0.05;
  const auto e = edit_cocycle({Mat2{2.0, 1.0, 1.0, 1.0}}, t, 10.0);
  const Mat2 S{0.95, 10.0, 0.0, 1.05};
  CHECK((e.monodromy - S).max_abs() <= 1e-12);
  CHECK(e.lambda == doctest::Approx(0.95).epsilon(1e-12));
  CHECK(e.sigma == doctest::Approx(1.05).epsilon(1e-12));
  CHECK(e.angle == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(code_of([&] { edit_cocycle({Mat2{2.0, 1.0, 1.0, 1.0}}, t, 1.0); }) == ErrorCode::BudgetExceeded);
}

TEST_CASE("eigenvalue dichotomy") {
  CHECK(dichotomy_check(0.5, 1.0, 3, 0.1));
  CHECK_FALSE(dichotomy_check(0.99, 1.01, 1, 0.1));
  CHECK(dichotomy_check(0.99, 1.01, 1, 0.0));
  const auto m = toy_saddle(0.5, 2.0, 0.01);
  CHECK(dichotomy_check(fixed(m), 0.0));
}
