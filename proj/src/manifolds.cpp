#include "surfdyn/manifolds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <tuple>
#include <unordered_map>

namespace surfdyn {

std::string_view to_string(Branch b) { return b == Branch::stable ? "stable" : "unstable"; }

std::string_view to_string(EventKind k) {
  return k == EventKind::transversal ? "transversal" : "tangency-candidate";
}

namespace {

Vec2 iterate(const SurfaceMap& map, Vec2 x, long steps) {
  const long n = std::abs(steps);
  for (long i = 0; i < n; ++i) {
    x = steps > 0 ? map.eval_lift(x) : map.inverse_lift(x);
    if (map.escaped(x)) {
      throw Error(ErrorCode::OrbitEscape, "manifold iterate left the admissible region", i + 1);
    }
  }
  return x;
}

// Integer translation picked up by a torus point after `steps` iterates.
Vec2 lift_shift(const SurfaceMap& map, Vec2 p, Vec2 image) {
  if (!map.is_torus()) return {};
  const Vec2 d = image - p;
  return {std::round(d.x), std::round(d.y)};
}

Vec2 floor2(Vec2 v) { return {std::floor(v.x), std::floor(v.y)}; }

double point_segment_distance(Vec2 x, Vec2 a, Vec2 b) {
  const Vec2 r = b - a;
  const double rr = dot(r, r);
  double t = rr > 0.0 ? dot(x - a, r) / rr : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (x - (a + t * r)).norm();
}

// Step count of G for the growth of a seed, and its multiplier along the seed.
std::pair<long, double> growth_map(const Polyline& seed) {
  long steps = seed.period;
  double mu = seed.multiplier;
  if (mu < 0.0) {
    steps *= 2;
    mu *= mu;
  } else {
    mu = std::abs(mu);
  }
  if (seed.label == Branch::stable) {
    steps = -steps;
    mu = 1.0 / mu;
  }
  return {steps, mu};
}

struct Node {
  double s;
  Vec2 x;
};

double turning(Vec2 a, Vec2 b, Vec2 c) {
  const Vec2 u = b - a, v = c - b;
  return std::atan2(std::abs(cross(u, v)), dot(u, v));
}

}  // namespace

void finish_polyline(Polyline& p) {
  // drop repeated vertices so arclength increases strictly
  std::size_t w = 0;
  const bool aux = p.param.size() == p.points.size() && p.level.size() == p.points.size();
  for (std::size_t i = 0; i < p.points.size(); ++i) {
    if (w > 0 && (p.points[i] - p.points[w - 1]).norm() <= 1e-15 * (1.0 + p.points[i].norm())) {
      continue;
    }
    p.points[w] = p.points[i];
    if (aux) {
      p.param[w] = p.param[i];
      p.level[w] = p.level[i];
    }
    ++w;
  }
  p.points.resize(w);
  if (aux) {
    p.param.resize(w);
    p.level.resize(w);
  }
  p.arclength.assign(w, 0.0);
  for (std::size_t i = 1; i < w; ++i) {
    p.arclength[i] = p.arclength[i - 1] + (p.points[i] - p.points[i - 1]).norm();
  }
  p.tangents.clear();
  if (w < 2) {
    if (w == 1) p.tangents.push_back(Direction::from(p.direction));
    return;
  }
  for (std::size_t i = 0; i < w; ++i) {
    const std::size_t lo = i == 0 ? 0 : i - 1;
    const std::size_t hi = i + 1 < w ? i + 1 : w - 1;
    p.tangents.push_back(Direction::from(p.points[hi] - p.points[lo]));
  }
}

Polyline local_seed(const SurfaceMap& map, const PeriodicOrbit& orbit, Branch which, double r0,
                    double h_max) {
  if (orbit.classification != OrbitClass::saddle || orbit.subspaces.empty()) {
    throw Error(ErrorCode::NotASaddle, "invariant manifolds need a saddle orbit");
  }
  if (!(r0 > 0.0) || !(h_max > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "seed radius and spacing must be positive");
  }
  Polyline seed;
  seed.label = which;
  seed.space = map.phase_space();
  seed.anchor = orbit.points;
  seed.period = orbit.period;
  seed.base = orbit.points.front();
  const bool unstable = which == Branch::unstable;
  seed.direction = (unstable ? orbit.subspaces[0].f() : orbit.subspaces[0].e()).vec();
  seed.multiplier = unstable ? orbit.sigma.real() : orbit.lambda.real();

  const long check_steps = unstable ? -orbit.period : orbit.period;
  const Vec2 p = seed.base, d = seed.direction;
  const Vec2 shift = lift_shift(map, p, iterate(map, p, check_steps));
  for (int halvings = 0;; ++halvings) {
    if (halvings > 60) {
      throw Error(ErrorCode::NoConvergence, "could not find a linear seed radius");
    }
    const int m = std::max(2, static_cast<int>(std::ceil(2.0 * r0 / h_max)));
    double worst = 0.0;
    for (int k = 0; k <= m; k += std::max(1, m / 32)) {
      const double s = -r0 + 2.0 * r0 * k / m;
      const Vec2 y = iterate(map, p + s * d, check_steps) - shift;
      worst = std::max(worst, std::abs(cross(y - p, d)));
    }
    const Vec2 ye = iterate(map, p + r0 * d, check_steps) - shift;
    const Vec2 yw = iterate(map, p - r0 * d, check_steps) - shift;
    worst = std::max({worst, std::abs(cross(ye - p, d)), std::abs(cross(yw - p, d))});
    if (worst <= kLinearTolerance) break;
    r0 *= 0.5;
  }
  seed.r0 = r0;
  const int m = std::max(2, static_cast<int>(std::ceil(2.0 * r0 / h_max)));
  for (int k = 0; k <= m; ++k) {
    const double s = k == m ? r0 : -r0 + 2.0 * r0 * k / m;
    seed.points.push_back(p + s * d);
    seed.param.push_back(s);
    seed.level.push_back(0);
  }
  finish_polyline(seed);
  return seed;
}

Polyline grow(const SurfaceMap& map, const Polyline& seed, const GrowOptions& opts) {
  if (!(seed.r0 > 0.0) || seed.param.size() != seed.points.size()) {
    throw Error(ErrorCode::InvalidArgument, "grow needs a polyline from local_seed");
  }
  if (!(opts.h_max > 0.0) || !(opts.alpha_max > 0.0) || !(opts.target_arclength > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "growth parameters must be positive");
  }
  const auto [gsteps, mu] = growth_map(seed);
  if (!(mu > 1.0)) throw Error(ErrorCode::NotASaddle, "seed multiplier does not expand");
  const double half = 0.5 * opts.target_arclength;
  std::size_t total = 0;

  struct Out {
    std::vector<Vec2> pts;
    std::vector<double> s;
    std::vector<int> lvl;
  };
  auto grow_branch = [&](double sign) {
    Out out;
    for (std::size_t i = 0; i < seed.points.size(); ++i) {
      if (seed.param[i] * sign >= 0.0) {
        out.pts.push_back(seed.points[i]);
        out.s.push_back(seed.param[i]);
        out.lvl.push_back(0);
      }
    }
    if (sign < 0.0) {
      std::reverse(out.pts.begin(), out.pts.end());
      std::reverse(out.s.begin(), out.s.end());
    }
    double length = 0.0;
    for (std::size_t i = 1; i < out.pts.size(); ++i) length += (out.pts[i] - out.pts[i - 1]).norm();

    // Fundamental domain of the seed parameter: |s| in [r0/mu, r0].
    std::vector<Node> dom;
    dom.push_back({sign * seed.r0 / mu, seed.base + (sign * seed.r0 / mu) * seed.direction});
    for (std::size_t i = 0; i < out.s.size(); ++i) {
      const double a = std::abs(out.s[i]);
      if (a > seed.r0 / mu) dom.push_back({out.s[i], out.pts[i]});
    }

    int level = 0;
    while (length < half) {
      ++level;
      if (level > 10000) throw Error(ErrorCode::NoConvergence, "manifold growth stalled");
      for (auto& n : dom) n.x = iterate(map, n.x, gsteps);
      const long steps_here = gsteps * level;
      // Adaptive refinement by geometric bisection in s.
      for (int pass = 0; pass < 64; ++pass) {
        std::vector<char> split(dom.size(), 0);
        bool any = false;
        for (std::size_t i = 0; i + 1 < dom.size(); ++i) {
          const double gap = std::abs(dom[i + 1].s - dom[i].s);
          if (gap <= 1e-14 * std::abs(dom[i + 1].s)) continue;
          if ((dom[i + 1].x - dom[i].x).norm() > opts.h_max) {
            split[i] = 1;
            any = true;
          }
        }
        for (std::size_t i = 1; i + 1 < dom.size(); ++i) {
          const double l1 = (dom[i].x - dom[i - 1].x).norm();
          const double l2 = (dom[i + 1].x - dom[i].x).norm();
          if (l1 < 1e-9 && l2 < 1e-9) continue;
          if (turning(dom[i - 1].x, dom[i].x, dom[i + 1].x) > opts.alpha_max) {
            for (std::size_t j : {i - 1, i}) {
              const double gap = std::abs(dom[j + 1].s - dom[j].s);
              if (gap > 1e-14 * std::abs(dom[j + 1].s)) {
                split[j] = 1;
                any = true;
              }
            }
          }
        }
        if (!any) break;
        std::vector<Node> next;
        next.reserve(dom.size() * 2);
        for (std::size_t i = 0; i < dom.size(); ++i) {
          next.push_back(dom[i]);
          if (i + 1 < dom.size() && split[i]) {
            const double s = sign * std::sqrt(std::abs(dom[i].s) * std::abs(dom[i + 1].s));
            next.push_back({s, iterate(map, seed.base + s * seed.direction, steps_here)});
          }
        }
        dom.swap(next);
        if (total + out.pts.size() + dom.size() > opts.point_budget) {
          throw Error(ErrorCode::PointBudgetExceeded, "manifold point budget exceeded",
                      static_cast<long>(opts.point_budget));
        }
      }
      // The first node repeats the end of the previous level.
      for (std::size_t i = 1; i < dom.size(); ++i) {
        length += (dom[i].x - out.pts.back()).norm();
        out.pts.push_back(dom[i].x);
        out.s.push_back(dom[i].s);
        out.lvl.push_back(level);
        if (length >= half) break;
      }
      if (total + out.pts.size() > opts.point_budget) {
        throw Error(ErrorCode::PointBudgetExceeded, "manifold point budget exceeded",
                    static_cast<long>(opts.point_budget));
      }
    }
    // Keep the first point past the target.
    double acc = 0.0;
    for (std::size_t i = 1; i < out.pts.size(); ++i) {
      acc += (out.pts[i] - out.pts[i - 1]).norm();
      if (acc >= half) {
        out.pts.resize(i + 1);
        out.s.resize(i + 1);
        out.lvl.resize(i + 1);
        break;
      }
    }
    total += out.pts.size();
    return out;
  };

  const Out neg = grow_branch(-1.0);
  const Out pos = grow_branch(1.0);
  Polyline res = seed;
  res.points.clear();
  res.param.clear();
  res.level.clear();
  for (std::size_t i = neg.pts.size(); i-- > 1;) {  // skip s = 0, it starts `pos`
    res.points.push_back(neg.pts[i]);
    res.param.push_back(neg.s[i]);
    res.level.push_back(neg.lvl[i]);
  }
  for (std::size_t i = 0; i < pos.pts.size(); ++i) {
    res.points.push_back(pos.pts[i]);
    res.param.push_back(pos.s[i]);
    res.level.push_back(pos.lvl[i]);
  }
  finish_polyline(res);
  return res;
}

namespace {

struct Seg {
  Vec2 a, b;      // translated so that a lies in the fundamental square (torus)
  std::size_t i;  // index of the first vertex
};

std::vector<Seg> segments(const Polyline& p) {
  std::vector<Seg> out;
  const bool torus = p.space == PhaseSpace::torus;
  for (std::size_t i = 0; i + 1 < p.points.size(); ++i) {
    const Vec2 k = torus ? floor2(p.points[i]) : Vec2{};
    out.push_back({p.points[i] - k, p.points[i + 1] - k, i});
  }
  return out;
}

struct Buckets {
  bool torus;
  Vec2 lo;
  double cell;
  long nx, ny;
  std::unordered_map<long, std::vector<std::size_t>> map;

  std::pair<long, long> cell_of(Vec2 x) const {
    long i = static_cast<long>(std::floor((x.x - lo.x) / cell));
    long j = static_cast<long>(std::floor((x.y - lo.y) / cell));
    if (torus) {
      i = ((i % nx) + nx) % nx;
      j = ((j % ny) + ny) % ny;
    }
    return {std::clamp(i, 0L, nx - 1), std::clamp(j, 0L, ny - 1)};
  }
  void add(Vec2 x, std::size_t idx) {
    const auto [i, j] = cell_of(x);
    map[j * nx + i].push_back(idx);
  }
  std::vector<std::size_t> near(Vec2 x) const {
    const auto [i0, j0] = cell_of(x);
    std::set<long> cells;
    for (long dj = -1; dj <= 1; ++dj) {
      for (long di = -1; di <= 1; ++di) {
        long i = i0 + di, j = j0 + dj;
        if (torus) {
          i = ((i % nx) + nx) % nx;
          j = ((j % ny) + ny) % ny;
        } else if (i < 0 || j < 0 || i >= nx || j >= ny) {
          continue;
        }
        cells.insert(j * nx + i);
      }
    }
    std::vector<std::size_t> out;
    for (long c : cells) {
      auto it = map.find(c);
      if (it != map.end()) out.insert(out.end(), it->second.begin(), it->second.end());
    }
    std::sort(out.begin(), out.end());
    return out;
  }
};

Vec2 at_arclength(const Polyline& p, double s) {
  const auto it = std::upper_bound(p.arclength.begin(), p.arclength.end(), s);
  std::size_t i = it == p.arclength.begin() ? 0 : static_cast<std::size_t>(it - p.arclength.begin()) - 1;
  if (i + 1 >= p.points.size()) return p.points.back();
  const double len = p.arclength[i + 1] - p.arclength[i];
  const double t = len > 0.0 ? (s - p.arclength[i]) / len : 0.0;
  return p.points[i] + std::clamp(t, 0.0, 1.0) * (p.points[i + 1] - p.points[i]);
}

}  // namespace

IntersectionResult intersections(const Polyline& wu, const Polyline& ws,
                                 const IntersectOptions& opts) {
  IntersectionResult res;
  if (wu.points.size() < 2 || ws.points.size() < 2) return res;
  const bool torus = wu.space == PhaseSpace::torus;
  const auto su = segments(wu);
  const auto ss = segments(ws);
  double maxlen = 0.0;
  Vec2 lo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max()};
  Vec2 hi = -lo;
  for (const auto* list : {&su, &ss}) {
    for (const auto& g : *list) {
      maxlen = std::max(maxlen, (g.b - g.a).norm());
      lo = {std::min(lo.x, g.a.x), std::min(lo.y, g.a.y)};
      hi = {std::max(hi.x, g.a.x), std::max(hi.y, g.a.y)};
    }
  }
  Buckets buckets;
  buckets.torus = torus;
  const double want = std::max(2.0 * maxlen, 1e-9);
  if (torus) {
    buckets.lo = {0.0, 0.0};
    buckets.nx = buckets.ny = std::max(1L, std::min(4096L, static_cast<long>(1.0 / want)));
    buckets.cell = 1.0 / buckets.nx;
    // wrapping needs at least three cells or the neighbourhood covers all
    if (buckets.nx < 3) buckets.nx = buckets.ny = 1, buckets.cell = 1.0;
  } else {
    buckets.lo = lo;
    const double ext = std::max(hi.x - lo.x, hi.y - lo.y);
    const long n = std::max(1L, std::min(4096L, static_cast<long>(ext / want)));
    buckets.cell = std::max(want, ext / n);
    buckets.nx = static_cast<long>(std::floor((hi.x - lo.x) / buckets.cell)) + 1;
    buckets.ny = static_cast<long>(std::floor((hi.y - lo.y) / buckets.cell)) + 1;
  }
  for (std::size_t k = 0; k < su.size(); ++k) buckets.add(su[k].a, k);

  auto near_anchor = [&](Vec2 x) {
    for (const Vec2& p : wu.anchor) {
      Vec2 d = x - p;
      if (torus) d = {d.x - std::round(d.x), d.y - std::round(d.y)};
      if (d.norm() < opts.anchor_exclusion) return true;
    }
    return false;
  };
  auto reduce = [&](Vec2 x) {
    return torus ? x - floor2(x) : x;
  };

  std::vector<IntersectionEvent> events;
  std::vector<IntersectionEvent> approaches;
  for (const auto& bs : ss) {
    for (std::size_t k : buckets.near(bs.a)) {
      const auto& au = su[k];
      const Vec2 m = torus ? Vec2{std::round(au.a.x - bs.a.x), std::round(au.a.y - bs.a.y)} : Vec2{};
      const Vec2 p = bs.a + m, q = bs.b - bs.a;
      const Vec2 r = au.b - au.a;
      const double rl = r.norm(), ql = q.norm();
      const double denom = cross(r, q);
      const double sin_abs = std::abs(denom) / (rl * ql);
      if (sin_abs <= 1e-14) {
        // parallel: collinear overlap has positive-length shared projection
        if (std::abs(cross(p - au.a, r)) <= 1e-12 * rl) {
          const double t0 = dot(p - au.a, r) / (rl * rl);
          const double t1 = dot(p + q - au.a, r) / (rl * rl);
          if (std::min(std::max(t0, t1), 1.0) - std::max(std::min(t0, t1), 0.0) > 1e-12) {
            res.overlap = true;
          }
        }
      } else {
        const double t = cross(p - au.a, q) / denom;
        const double u = cross(p - au.a, r) / denom;
        const bool last_u = au.i + 2 == wu.points.size();
        const bool last_s = bs.i + 2 == ws.points.size();
        if (t >= 0.0 && (t < 1.0 || (last_u && t <= 1.0)) && u >= 0.0 &&
            (u < 1.0 || (last_s && u <= 1.0))) {
          const Vec2 x = au.a + t * r;
          if (!near_anchor(x)) {
            IntersectionEvent ev;
            ev.point = reduce(x);
            ev.s_u = wu.arclength[au.i] + t * rl;
            ev.s_s = ws.arclength[bs.i] + u * ql;
            ev.angle = std::atan2(std::abs(denom), std::abs(dot(r, q)));
            ev.tangency_residual = sin_abs;
            ev.kind = sin_abs > opts.tangency_tol ? EventKind::transversal
                                                  : EventKind::tangency_candidate;
            events.push_back(ev);
          }
          continue;
        }
      }
      // Close pass without a crossing: golden-section on the gap between
      // the first curve near segment i and the second near j.
      const double dmin = std::min({point_segment_distance(au.a, p, p + q),
                                    point_segment_distance(au.b, p, p + q),
                                    point_segment_distance(p, au.a, au.b),
                                    point_segment_distance(p + q, au.a, au.b)});
      if (dmin >= opts.approach_tol) continue;
      // ws in the lift frame of wu
      const Vec2 shift = m + (bs.a - ws.points[bs.i]) + (wu.points[au.i] - au.a);
      auto gap = [&](double s) {
        const Vec2 x = at_arclength(wu, s);
        double best = std::numeric_limits<double>::max();
        const std::size_t j0 = bs.i == 0 ? 0 : bs.i - 1;
        const std::size_t j1 = std::min(bs.i + 2, ws.points.size() - 1);
        for (std::size_t j = j0; j < j1; ++j) {
          best = std::min(best, point_segment_distance(x, ws.points[j] + shift,
                                                       ws.points[j + 1] + shift));
        }
        return best;
      };
      double lo_s = wu.arclength[au.i == 0 ? 0 : au.i - 1];
      double hi_s = wu.arclength[std::min(au.i + 2, wu.points.size() - 1)];
      const double g = (std::sqrt(5.0) - 1.0) / 2.0;
      double c = hi_s - g * (hi_s - lo_s), d = lo_s + g * (hi_s - lo_s);
      double gc = gap(c), gd = gap(d);
      for (int it = 0; it < 80 && hi_s - lo_s > 1e-15; ++it) {
        if (gc < gd) {
          hi_s = d; d = c; gd = gc;
          c = hi_s - g * (hi_s - lo_s);
          gc = gap(c);
        } else {
          lo_s = c; c = d; gc = gd;
          d = lo_s + g * (hi_s - lo_s);
          gd = gap(d);
        }
      }
      const double smin = 0.5 * (lo_s + hi_s);
      if (gap(smin) >= opts.approach_tol) continue;
      const Vec2 x = at_arclength(wu, smin);
      if (near_anchor(x)) continue;
      // grazing an end of either curve is not a tangency
      if (smin <= opts.approach_tol || smin >= wu.length() - opts.approach_tol) continue;
      if ((x - ws.points.front() - shift).norm() < opts.approach_tol ||
          (x - ws.points.back() - shift).norm() < opts.approach_tol) {
        continue;
      }
      IntersectionEvent ev;
      ev.point = reduce(x);
      ev.s_u = smin;
      ev.s_s = ws.arclength[bs.i];
      ev.angle = std::asin(std::min(1.0, sin_abs));
      ev.tangency_residual = sin_abs;
      ev.kind = EventKind::tangency_candidate;
      approaches.push_back(ev);
    }
  }
  if (res.overlap) return res;

  auto by_params = [](const IntersectionEvent& a, const IntersectionEvent& b) {
    return a.s_u != b.s_u ? a.s_u < b.s_u : a.s_s < b.s_s;
  };
  std::sort(events.begin(), events.end(), by_params);
  std::sort(approaches.begin(), approaches.end(), by_params);
  auto collapse = [&](std::vector<IntersectionEvent>& list, double tol) {
    std::vector<IntersectionEvent> kept;
    for (const auto& ev : list) {
      bool dup = false;
      for (auto it = kept.rbegin(); it != kept.rend() && it != kept.rbegin() + 4; ++it) {
        Vec2 dd = ev.point - it->point;
        if (torus) dd = {dd.x - std::round(dd.x), dd.y - std::round(dd.y)};
        if (dd.norm() <= tol && std::abs(ev.s_u - it->s_u) <= 10.0 * maxlen) {
          dup = true;
          break;
        }
      }
      if (!dup) kept.push_back(ev);
    }
    list.swap(kept);
  };
  collapse(events, 1e-12);
  collapse(approaches, 10.0 * opts.approach_tol);
  // a near-parallel pass next to a genuine crossing is the crossing itself
  for (const auto& ap : approaches) {
    bool shadowed = false;
    for (const auto& ev : events) {
      Vec2 dd = ev.point - ap.point;
      if (torus) dd = {dd.x - std::round(dd.x), dd.y - std::round(dd.y)};
      if (dd.norm() <= 10.0 * opts.approach_tol) shadowed = true;
    }
    if (!shadowed) events.push_back(ap);
  }
  std::sort(events.begin(), events.end(), by_params);
  res.events = std::move(events);
  return res;
}

std::vector<double> orbit_distances(const SurfaceMap& map, Vec2 q, const std::vector<Vec2>& anchor,
                                    int n, bool forward) {
  std::vector<double> out;
  Vec2 x = q;
  for (int k = 0; k <= n; ++k) {
    double best = std::numeric_limits<double>::max();
    for (const Vec2& p : anchor) best = std::min(best, map.distance(map.reduce(x), p));
    out.push_back(best);
    if (k == n) break;
    x = forward ? map.eval(x) : map.eval_inverse(x);
    if (map.escaped(x)) throw Error(ErrorCode::OrbitEscape, "orbit left the admissible region", k + 1);
  }
  return out;
}

double invariance_defect(const SurfaceMap& map, const Polyline& poly) {
  if (poly.level.size() != poly.points.size() || poly.points.size() < 2) return 0.0;
  const int top = *std::max_element(poly.level.begin(), poly.level.end());
  const long steps = poly.label == Branch::unstable ? poly.period : -poly.period;
  const bool torus = map.is_torus();
  double worst = 0.0;
  for (std::size_t v = 0; v < poly.points.size(); ++v) {
    if (poly.level[v] > top - 2) continue;
    const Vec2 y = iterate(map, poly.points[v], steps);
    double best = std::numeric_limits<double>::max();
    for (std::size_t i = 0; i + 1 < poly.points.size(); ++i) {
      Vec2 a = poly.points[i], b = poly.points[i + 1];
      if (torus) {
        const Vec2 m{std::round(y.x - a.x), std::round(y.y - a.y)};
        a = a + m;
        b = b + m;
      }
      best = std::min(best, point_segment_distance(y, a, b));
    }
    worst = std::max(worst, best);
  }
  return worst;
}

StableDecay stable_decay_check(const SurfaceMap& map, const PeriodicOrbit& orbit,
                               double seed_length, int n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "decay horizon must be positive");
  if (!(seed_length > 0.0)) throw Error(ErrorCode::InvalidArgument, "seed length must be positive");
  const Polyline seed = local_seed(map, orbit, Branch::stable, 0.5 * seed_length);
  StableDecay out;
  out.bound = std::pow(std::abs(orbit.lambda), 1.0 / orbit.period);

  // Iterating a stable curve forward stretches its distance from W^s by
  // sigma/lambda per step, so the linear seed would soon dominate the
  // length. W = G^L(seed) is built by backward iteration (which contracts
  // that error) and f^k(W) = f^(k - P L)(seed) stays a backward iterate;
  // beyond k = P L the seed parameter is scaled by the linear multiplier.
  const auto [g, mu] = growth_map(seed);
  const long P = -g;
  int L = 0;
  double r = 0.5 * seed_length;
  while (r > seed.r0 * (1.0 + 1e-12)) {
    r /= mu;
    ++L;
  }
  const int samples = 513;
  Polyline curve;
  curve.space = seed.space;
  curve.direction = seed.direction;
  curve.points.resize(samples);
  std::vector<Vec2> tau(samples);
  double gmin = std::numeric_limits<double>::max(), gmax = 0.0;
  for (int k = 0; k <= n; ++k) {
    long e = k - P * L;
    double scale = 1.0;
    if (e > 0) {
      const long q = (e + P - 1) / P;
      scale = std::pow(mu, -static_cast<double>(q));
      e -= q * P;
    }
    for (int j = 0; j < samples; ++j) {
      const double s = (j == samples - 1 ? r : -r + 2.0 * r * j / (samples - 1)) * scale;
      Vec2 x = seed.base + s * seed.direction;
      Vec2 t = seed.direction;
      for (long step = 0; step < -e; ++step) {
        t = map.inverse_jacobian(x) * t;
        t = t / t.norm();
        x = iterate(map, x, -1);
      }
      curve.points[j] = x;
      tau[j] = t;
    }
    finish_polyline(curve);
    out.lengths.push_back(curve.length());
    if (k == n) break;
    for (int j = 0; j < samples; ++j) {
      const double gj = (map.jacobian(curve.points[j]) * tau[j]).norm();
      gmin = std::min(gmin, gj);
      gmax = std::max(gmax, gj);
    }
  }
  out.c = gmax / gmin - 1.0;
  // least-squares slope of ln l_k against k
  double sk = 0.0, sl = 0.0, skk = 0.0, skl = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double l = std::log(out.lengths[k]);
    sk += k;
    sl += l;
    skk += static_cast<double>(k) * k;
    skl += k * l;
  }
  const double m = n + 1.0;
  const double slope = (m * skl - sk * sl) / (m * skk - sk * sk);
  out.rate = std::exp(slope);
  out.within_bound = out.rate <= out.bound * (1.0 + out.c) * (1.0 + 1e-12);
  return out;
}

DistortionReport distortion_check(const SurfaceMap& map, const Polyline& J, int n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "distortion horizon must be positive");
  if (J.points.size() < 2 || J.tangents.size() != J.points.size()) {
    throw Error(ErrorCode::InvalidArgument, "distortion needs a finished polyline segment");
  }
  DistortionReport rep;
  rep.n = n;
  const std::size_t m = J.points.size();

  // Backward images of an unstable curve are badly conditioned: f^-1 blows
  // up the transverse rounding error. Grown curves remember (s, level), so
  // f^-i(x) is recomputed forward from the seed instead, with the seed
  // direction pushed along as the tangent.
  const bool from_seed = J.label == Branch::unstable && J.param.size() == m &&
                         J.level.size() == m && J.r0 > 0.0;
  long gsteps = 1;
  double mu = 1.0;
  if (from_seed) std::tie(gsteps, mu) = growth_map(J);
  auto pulled_back = [&](std::size_t j, int i, Vec2& x, Vec2& t) {
    long steps = gsteps * J.level[j] - i;
    double s = J.param[j];
    while (steps < 0) {
      steps += gsteps;
      s /= mu;
    }
    x = J.base + s * J.direction;
    t = J.direction;
    for (long k = 0; k < steps; ++k) {
      t = map.jacobian(x) * t;
      t = t / t.norm();
      x = map.eval_lift(x);
      if (map.escaped(x)) throw Error(ErrorCode::OrbitEscape, "manifold iterate left the admissible region", k + 1);
    }
  };

  std::vector<Vec2> pts = J.points;
  std::vector<Vec2> tau;
  for (const auto& t : J.tangents) tau.push_back(t.vec());
  std::vector<double> logsum(m, 0.0);
  double length_sum = 0.0;
  for (int i = 0; i <= n; ++i) {
    if (i > 0) {
      if (from_seed) {
        for (std::size_t j = 0; j < m; ++j) pulled_back(j, i, pts[j], tau[j]);
      } else {
        for (auto& x : pts) x = iterate(map, x, -1);
        for (std::size_t j = 0; j < m; ++j) {
          const Vec2 d = pts[j + 1 < m ? j + 1 : j] - pts[j == 0 ? 0 : j - 1];
          tau[j] = d / d.norm();
        }
      }
    }
    double len = 0.0;
    for (std::size_t j = 1; j < m; ++j) len += (pts[j] - pts[j - 1]).norm();
    rep.lengths.push_back(len);
    if (i == n) break;
    length_sum += len;
    std::vector<double> phi(m);
    for (std::size_t j = 0; j < m; ++j) {
      phi[j] = std::log((map.inverse_jacobian(pts[j]) * tau[j]).norm());
      logsum[j] += phi[j];
    }
    for (std::size_t j = 0; j + 1 < m; ++j) {
      const double dist = (pts[j + 1] - pts[j]).norm();
      if (dist > 0.0) rep.K0 = std::max(rep.K0, std::abs(phi[j + 1] - phi[j]) / dist);
    }
  }
  const auto [mn, mx] = std::minmax_element(logsum.begin(), logsum.end());
  rep.lhs_ratio = std::exp(*mx - *mn);
  rep.rhs_ratio = std::exp(rep.K0 * length_sum);
  rep.lhs_norm = std::exp(*mx);
  rep.rhs_norm = rep.lengths.back() / rep.lengths.front() * rep.rhs_ratio;
  rep.ratio_holds = rep.lhs_ratio <= rep.rhs_ratio * (1.0 + 1e-6);
  rep.norm_holds = rep.lhs_norm <= rep.rhs_norm * (1.0 + 1e-6);
  return rep;
}

Polyline slice(const Polyline& p, double s0, double s1) {
  Polyline out = p;
  out.points.clear();
  out.param.clear();
  out.level.clear();
  const bool aux = p.param.size() == p.points.size() && p.level.size() == p.points.size();
  for (std::size_t i = 0; i < p.points.size(); ++i) {
    if (p.arclength[i] < s0 || p.arclength[i] > s1) continue;
    out.points.push_back(p.points[i]);
    if (aux) {
      out.param.push_back(p.param[i]);
      out.level.push_back(p.level[i]);
    }
  }
  finish_polyline(out);
  return out;
}

}  // namespace surfdyn
