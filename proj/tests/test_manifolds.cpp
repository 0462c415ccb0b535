#include <cmath>
#include <numbers>

#include "doctest.h"
#include "surfdyn/manifolds.hpp"

using namespace surfdyn;

namespace {
PeriodicOrbit saddle(const SurfaceMap& m, Vec2 seed) {
  return classify_and_split(m, find_periodic(m, seed, 1));
}

Polyline line(std::vector<Vec2> pts, Branch b) {
  Polyline p;
  p.points = std::move(pts);
  p.label = b;
  finish_polyline(p);
  return p;
}

Polyline curve(const std::function<Vec2(double)>& f, double t0, double t1, int n, Branch b) {
  std::vector<Vec2> pts;
  for (int i = 0; i <= n; ++i) pts.push_back(f(t0 + (t1 - t0) * i / n));
  return line(pts, b);
}

const double kR5 = std::sqrt(5.0);
}  // namespace

TEST_CASE("local seeds") {
  const auto toy = toy_saddle(0.5, 2.0, 0.01);
  const auto s = local_seed(toy, saddle(toy, {0.1, 0.1}), Branch::unstable, 0.1);
  CHECK(s.r0 == 0.1);
  CHECK(s.points.front().x == doctest::Approx(-0.1).epsilon(1e-15));
  CHECK(s.points.back().x == doctest::Approx(0.1).epsilon(1e-15));
  for (const auto& p : s.points) CHECK(std::abs(p.y) < 1e-15);
  CHECK(s.length() == doctest::Approx(0.2).epsilon(1e-12));

  const auto cat = cat_map();
  const auto c = local_seed(cat, saddle(cat, {0.01, 0.01}), Branch::unstable, 0.1);
  CHECK(Direction::from(c.direction).separation(Direction::from(1.0, (kR5 - 1.0) / 2.0)) < 1e-14);

  const auto h = henon(1.4, 0.3);
  const auto ho = saddle(h, {0.6, 0.2});
  const auto hs = local_seed(h, ho, Branch::stable, 0.1);
  const double mu = ho.lambda.real();
  // eigenvector of [[j, 1], [0.3, 0]] for mu is (1, mu - j)
  const double j = h.jacobian(ho.points[0]).a;
  CHECK(Direction::from(hs.direction).separation(Direction::from(1.0, mu - j)) < 1e-12);
  CHECK(hs.r0 < 0.1);  // nonlinearity forces a shrink

  CHECK_THROWS_AS(local_seed(linear_map(Mat2::diag(1.0, 2.0)),
                             saddle(linear_map(Mat2::diag(1.0, 2.0)), {0, 0}), Branch::stable, 0.1),
                  Error);
}

TEST_CASE("growth of linear manifolds stays on the line") {
  const auto toy = toy_saddle(0.5, 2.0, 0.01);
  GrowOptions g;
  g.target_arclength = 3.0;
  const auto w = grow(toy, local_seed(toy, saddle(toy, {0.1, 0.1}), Branch::unstable, 0.1), g);
  CHECK(w.length() >= 3.0);
  for (const auto& p : w.points) CHECK(std::abs(p.y) < 1e-12);

  const auto cat = cat_map();
  g.target_arclength = 10.0;
  const auto u = grow(cat, local_seed(cat, saddle(cat, {0.01, 0.01}), Branch::unstable, 0.1), g);
  const Vec2 d = Vec2{1.0, (kR5 - 1.0) / 2.0} / std::hypot(1.0, (kR5 - 1.0) / 2.0);
  double off = 0.0;
  for (const auto& p : u.points) off = std::max(off, std::abs(cross(p, d)));
  CHECK(off < 1e-9);
  CHECK(u.length() >= 10.0);
}

TEST_CASE("Henon unstable manifold structure") {
  const auto h = henon(1.4, 0.3);
  const auto o = saddle(h, {0.6, 0.2});
  GrowOptions g;
  g.target_arclength = 5.0;
  const auto w = grow(h, local_seed(h, o, Branch::unstable, 0.1), g);
  CHECK(w.length() >= 5.0);
  double gap = 0.0;
  for (std::size_t i = 1; i < w.size(); ++i) {
    CHECK(w.arclength[i] > w.arclength[i - 1]);
    gap = std::max(gap, w.arclength[i] - w.arclength[i - 1]);
  }
  CHECK(gap <= g.h_max * (1.0 + 1e-9));
  // refinement is denser where the curve folds
  const double mean = w.length() / double(w.size() - 1);
  double tight = mean;
  for (std::size_t i = 1; i < w.size(); ++i) tight = std::min(tight, w.arclength[i] - w.arclength[i - 1]);
  CHECK(tight < 0.5 * mean);
  CHECK(invariance_defect(h, w) < 10.0 * g.h_max);
}

TEST_CASE("point budget") {
  const auto cat = cat_map();
  GrowOptions g;
  g.target_arclength = 10.0;
  g.point_budget = 500;
  CHECK_THROWS_AS(grow(cat, local_seed(cat, saddle(cat, {0.01, 0.01}), Branch::unstable, 0.1), g),
                  Error);
}

TEST_CASE("straight crossing") {
  const auto a = line({{0, 0}, {1, 0}, {2, 0}}, Branch::unstable);
  const auto b = line({{0, -1}, {0.5, -0.5}, {2, 1}}, Branch::stable);
  const auto r = intersections(a, b);
  REQUIRE(r.events.size() == 1);
  const auto& e = r.events[0];
  CHECK(e.point.x == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(e.point.y) < 1e-15);
  CHECK(e.angle == doctest::Approx(std::numbers::pi / 4).epsilon(1e-14));
  CHECK(e.kind == EventKind::transversal);
  CHECK(e.s_u == doctest::Approx(1.0));
  CHECK(e.s_s == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("overlap suppresses events") {
  const auto a = line({{0, 0}, {1, 1}, {2, 2}}, Branch::unstable);
  const auto r = intersections(a, a);
  CHECK(r.overlap);
  CHECK(r.events.empty());
}

TEST_CASE("close approach becomes a tangency candidate") {
  const auto a = line({{-1, 0}, {1, 0}}, Branch::unstable);
  const auto b = curve([](double t) { return Vec2{t, t * t + 4e-10}; }, -0.5, 0.5, 100, Branch::stable);
  const auto r = intersections(a, b);
  REQUIRE(r.events.size() == 1);
  CHECK(r.events[0].kind == EventKind::tangency_candidate);
  CHECK(std::abs(r.events[0].point.x) < 1e-6);
  // a clear miss gives nothing
  const auto far = curve([](double t) { return Vec2{t, t * t + 1e-3}; }, -0.5, 0.5, 100, Branch::stable);
  CHECK(intersections(a, far).events.empty());
}

TEST_CASE("cat homoclinic points converge both ways") {
  const auto cat = cat_map();
  const auto o = saddle(cat, {0.01, 0.01});
  GrowOptions g;
  g.target_arclength = 3.0;
  const auto wu = grow(cat, local_seed(cat, o, Branch::unstable, 0.1), g);
  const auto ws = grow(cat, local_seed(cat, o, Branch::stable, 0.1), g);
  const auto r = intersections(wu, ws);
  REQUIRE_FALSE(r.events.empty());
  for (const auto& e : r.events) {
    CHECK(e.kind == EventKind::transversal);
    // orthogonal eigenlines
    CHECK(e.angle == doctest::Approx(std::numbers::pi / 2).epsilon(1e-9));
    for (bool fwd : {true, false}) {
      const auto d = orbit_distances(cat, e.point, o.points, 30, fwd);
      CHECK(*std::min_element(d.begin(), d.end()) < 1e-6);
    }
  }
  // sorted by parameters
  for (std::size_t i = 1; i < r.events.size(); ++i) CHECK(r.events[i - 1].s_u <= r.events[i].s_u);
}

TEST_CASE("stable decay") {
  const auto lin = linear_map(Mat2::diag(0.5, 2.0));
  const auto d = stable_decay_check(lin, saddle(lin, {0.1, 0.1}), 0.2, 12);
  for (std::size_t k = 0; k < d.lengths.size(); ++k)
    CHECK(std::abs(d.lengths[k] - 0.2 * std::pow(0.5, double(k))) <= 1e-12);
  CHECK(d.rate == doctest::Approx(0.5).epsilon(1e-12));

  const auto cat = cat_map();
  const auto c = stable_decay_check(cat, saddle(cat, {0.01, 0.01}), 0.2, 10);
  CHECK(std::abs(c.rate - 0.3819660) < 1e-6);
  CHECK(c.within_bound);

  const auto h = henon(1.4, 0.3);
  const auto hd = stable_decay_check(h, saddle(h, {0.6, 0.2}), 0.1, 10);
  CHECK(hd.rate >= 0.14);
  CHECK(hd.rate <= 0.17);
  CHECK(hd.rate < 1.0);
  CHECK(hd.within_bound);
}

TEST_CASE("distortion") {
  GrowOptions g;
  g.target_arclength = 2.0;
  const auto lin = linear_map(Mat2::diag(0.5, 2.0));
  const auto wl = grow(lin, local_seed(lin, saddle(lin, {0.1, 0.1}), Branch::unstable, 0.1), g);
  const auto dl = distortion_check(lin, slice(wl, 0.2, 0.9), 8);
  CHECK(dl.K0 < 1e-12);
  CHECK(dl.lhs_ratio == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(dl.rhs_ratio == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(dl.lhs_norm == doctest::Approx(std::pow(0.5, 8)).epsilon(1e-12));

  const auto h = henon(1.4, 0.3);
  g.target_arclength = 4.0;
  const auto wh = grow(h, local_seed(h, saddle(h, {0.6, 0.2}), Branch::unstable, 0.05), g);
  for (double s0 : {0.3, 1.2, 2.9}) {
    const auto d = distortion_check(h, slice(wh, s0, s0 + 0.25), 10);
    CHECK(d.ratio_holds);
    CHECK(d.norm_holds);
    CHECK(d.K0 > 0.0);
    CHECK(std::isfinite(d.rhs_ratio));
    CHECK(d.lengths.size() == 11);
  }
}

TEST_CASE("slice") {
  const auto a = line({{0, 0}, {1, 0}, {2, 0}, {3, 0}}, Branch::unstable);
  const auto s = slice(a, 0.5, 2.5);
  REQUIRE(s.size() == 2);
  CHECK(s.points[0] == Vec2{1, 0});
  CHECK(s.arclength[0] == 0.0);
}
