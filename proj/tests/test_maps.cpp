#include <cmath>

#include "doctest.h"
#include "surfdyn/maps.hpp"

using namespace surfdyn;

namespace {
bool near(Vec2 a, Vec2 b, double tol) { return (a - b).norm() <= tol; }
bool near(const Mat2& a, const Mat2& b, double tol) { return (a - b).max_abs() <= tol; }
}  // namespace

TEST_CASE("evaluations") {
  CHECK(cat_map().eval({0.5, 0.5}) == Vec2{0.5, 0.0});
  CHECK(henon(1.4, 0.3).eval({0.0, 0.0}) == Vec2{1.0, 0.0});
  CHECK(linear_map(Mat2::diag(0.5, 2.0)).eval({1.0, 1.0}) == Vec2{0.5, 2.0});
  // the lift is not reduced
  CHECK(cat_map().eval_lift({0.5, 0.5}) == Vec2{1.5, 1.0});
}

TEST_CASE("inverses round trip") {
  const Vec2 x{0.3, 0.17};
  for (const auto& m : {henon(1.4, 0.3), cat_map(), cat_map(0.03), standard_map(0.8),
                        toy_saddle(0.5, 2.0, 0.01)}) {
    CHECK(near(m.inverse_lift(m.eval_lift(x)), x, 1e-12));
    CHECK(near(m.eval_lift(m.inverse_lift(x)), x, 1e-12));
  }
}

TEST_CASE("jacobians") {
  CHECK(cat_map().jacobian({0.3, 0.9}) == Mat2{2.0, 1.0, 1.0, 1.0});
  CHECK(linear_map(Mat2::diag(0.5, 2.0)).jacobian({4.0, -1.0}) == Mat2::diag(0.5, 2.0));
  const double x = (0.3 - 1.0 + std::sqrt(0.49 + 5.6)) / 2.8;
  CHECK(near(henon(1.4, 0.3).jacobian({x, 0.3 * x}), Mat2{-1.7677926, 1.0, 0.3, 0.0}, 1e-7));
  // analytic derivatives against central differences
  const Vec2 p{0.21, 0.43};
  for (const auto& m : {henon(1.4, 0.3), cat_map(0.04), standard_map(1.1)}) {
    const Mat2 fd = finite_difference_jacobian([&](Vec2 y) { return m.eval_lift(y); }, p);
    CHECK(near(m.jacobian(p), fd, 1e-8));
    CHECK(near(m.inverse_jacobian(p) * m.jacobian(m.inverse_lift(p)), Mat2::identity(), 1e-12));
  }
}

TEST_CASE("toy saddle has the requested angle") {
  const auto m = toy_saddle(0.5, 2.0, 0.01);
  const Mat2 J = m.jacobian({0, 0});
  CHECK(near(J * Vec2{1.0, 0.0}, Vec2{2.0, 0.0}, 1e-15));
  CHECK(near(J * Vec2{1.0, 0.01}, Vec2{0.5, 0.005}, 1e-15));
  CHECK_THROWS_AS(toy_saddle(0.5, 2.0, 0.0), Error);
}

TEST_CASE("cocycle products") {
  const auto c = cocycle(cat_map(), {0.1, 0.2}, 2);
  CHECK(c.product == Mat2{5.0, 3.0, 3.0, 2.0});
  CHECK(c.steps.size() == 2);
  CHECK(c.orbit.size() == 3);
  CHECK(cocycle(henon(1.4, 0.3), {0.1, 0.1}, 0).product == Mat2::identity());
  CHECK(near(cocycle(linear_map(Mat2::diag(0.5, 2.0)), {1, 1}, 3).product, Mat2::diag(0.125, 8.0),
             1e-15));
  const auto back = cocycle(cat_map(), {0.1, 0.2}, -2);
  CHECK(near(back.product * Mat2{5.0, 3.0, 3.0, 2.0}, Mat2::identity(), 1e-12));
  CHECK_THROWS_AS(cocycle(cat_map(), {0, 0}, 50, 10), Error);
}

TEST_CASE("escape is reported with the step") {
  try {
    cocycle(henon(1.4, 0.3), {5.0, 5.0}, 40);
    FAIL("expected OrbitEscape");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OrbitEscape);
    REQUIRE(e.index().has_value());
    CHECK(*e.index() > 0);
  }
}

TEST_CASE("torus differences are shortest") {
  const auto m = cat_map();
  CHECK(near(m.difference({0.95, 0.05}, {0.05, 0.95}), Vec2{-0.1, 0.1}, 1e-12));
  CHECK(m.reduce({-0.25, 3.5}) == Vec2{0.75, 0.5});
}

TEST_CASE("declarative construction") {
  auto m = make_map({"henon", {}});
  CHECK(m.spec().params.at("a") == 1.4);
  CHECK(m.spec().params.at("b") == 0.3);
  CHECK(make_map({"cat", {{"eps", 0.01}}}).is_torus());
  try {
    make_map({"henon", {{"c", 1.0}}});
    FAIL("expected ConfigError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConfigError);
    CHECK(std::string(e.what()).rfind("map.params.c", 0) == 0);
  }
  CHECK_THROWS_AS(make_map({"tent", {}}), Error);
  CHECK_THROWS_AS(make_map({"cat", {{"eps", 0.2}}}), Error);
  CHECK(map_families().size() >= 5);
}
