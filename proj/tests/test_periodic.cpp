#include <cmath>

#include "doctest.h"
#include "surfdyn/periodic.hpp"

using namespace surfdyn;

namespace {
const double kX = (0.3 - 1.0 + std::sqrt(0.49 + 5.6)) / 2.8;
}

TEST_CASE("Henon fixed point by Newton") {
  const auto map = henon(1.4, 0.3);
  const auto o = classify_and_split(map, find_periodic(map, {0.6, 0.2}, 1));
  CHECK(o.period == 1);
  CHECK(o.points[0].x == doctest::Approx(kX).epsilon(1e-12));
  CHECK(o.points[0].y == doctest::Approx(0.3 * kX).epsilon(1e-12));
  CHECK(o.points[0].x == doctest::Approx(0.6313545).epsilon(1e-7));
  CHECK(o.classification == OrbitClass::saddle);
  // characteristic polynomial mu^2 + 2.8x mu - 0.3
  const double p = 2.8 * kX, disc = std::sqrt(p * p + 1.2);
  CHECK(o.lambda.real() == doctest::Approx((-p + disc) / 2).epsilon(1e-12));
  CHECK(o.sigma.real() == doctest::Approx((-p - disc) / 2).epsilon(1e-12));
  CHECK(o.residual < 1e-10);
  REQUIRE(o.subspaces.size() == 1);
  CHECK(o.angles[0] > 0.0);
}

TEST_CASE("cat and linear fixed points") {
  const auto cat = classify_and_split(cat_map(), find_periodic(cat_map(), {0.01, 0.01}, 1));
  CHECK(cat_map().distance(cat.points[0], {0, 0}) < 1e-12);
  CHECK(cat.lambda.real() == doctest::Approx(0.3819660).epsilon(1e-7));
  CHECK(cat.sigma.real() == doctest::Approx(2.6180340).epsilon(1e-7));
  CHECK(cat.classification == OrbitClass::saddle);
  // symmetric monodromy: orthogonal eigenlines
  CHECK(std::isinf(cat.angles[0]));

  const auto lin = linear_map(Mat2::diag(0.5, 2.0));
  const auto o = find_periodic(lin, {0.1, 0.1}, 1);
  CHECK(o.points[0].norm() < 1e-14);

  const auto flat = linear_map(Mat2::diag(1.0, 2.0));
  const auto n = classify_and_split(flat, find_periodic(flat, {0.0, 0.0}, 1));
  CHECK(n.classification == OrbitClass::nonhyperbolic);
}

TEST_CASE("singular Newton matrix") {
  const auto flat = linear_map(Mat2::diag(1.0, 2.0));
  try {
    find_periodic(flat, {0.3, 0.2}, 1);
    FAIL("expected SingularNewtonMatrix");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SingularNewtonMatrix);
  }
}

TEST_CASE("minimal period is reported") {
  // a fixed point sought as period 3 comes back with period 1
  const auto map = henon(1.4, 0.3);
  const auto o = find_periodic(map, {0.63, 0.19}, 3);
  CHECK(o.period == 1);
  CHECK(o.points.size() == 1);
}

TEST_CASE("period two orbit of Henon") {
  const auto map = henon(1.4, 0.3);
  ScanOptions so;
  so.region = {-2.0, 2.0, -2.0, 2.0};
  so.n_max = 2;
  so.nx = so.ny = 16;
  so.threads = 1;
  const auto orbits = scan_periodic(map, so);
  bool fixed = false, two = false;
  for (const auto& o : orbits) {
    if (o.period == 1 && std::abs(o.points[0].x - kX) < 1e-8) fixed = true;
    if (o.period == 2) {
      two = true;
      // each point maps to the other
      CHECK((map.eval(o.points[0]) - o.points[1]).norm() < 1e-9);
      CHECK((map.eval(o.points[1]) - o.points[0]).norm() < 1e-9);
      // the period-2 points of the Henon family satisfy x0 + x1 = (1-b)/a
      CHECK(o.points[0].x + o.points[1].x == doctest::Approx(0.5).epsilon(1e-9));
    }
  }
  CHECK(fixed);
  CHECK(two);
  // same result with threads
  so.threads = 4;
  const auto again = scan_periodic(map, so);
  REQUIRE(again.size() == orbits.size());
  for (std::size_t i = 0; i < orbits.size(); ++i) CHECK(again[i].points == orbits[i].points);
}

TEST_CASE("domination scan") {
  const auto cat = classify_and_split(cat_map(), find_periodic(cat_map(), {0.01, 0.01}, 1));
  auto s = domination_scan(cat_map(), {cat}, 5);
  CHECK(s[0].m == 1);

  const auto lin = linear_map(Mat2::diag(0.9, 1.1));
  const auto o = classify_and_split(lin, find_periodic(lin, {0.1, 0.1}, 1));
  CHECK(domination_scan(lin, {o}, 10)[0].m == 4);
  CHECK_FALSE(domination_scan(lin, {o}, 3)[0].m.has_value());
  // 0.8182^4 < 0.5 < 0.8182^3
  CHECK(std::pow(0.9 / 1.1, 4) < 0.5);
  CHECK(std::pow(0.9 / 1.1, 3) > 0.5);
}

TEST_CASE("orbit_through skips Newton") {
  const auto o = orbit_through(cat_map(), {0.0, 0.0}, 1);
  CHECK(o.newton_steps == 0);
  CHECK(o.monodromy == Mat2{2.0, 1.0, 1.0, 1.0});
}
