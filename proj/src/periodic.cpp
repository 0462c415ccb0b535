#include "surfdyn/periodic.hpp"

#include <algorithm>
#include <cmath>

#include "surfdyn/parallel.hpp"

namespace surfdyn {

std::string_view to_string(OrbitClass c) {
  switch (c) {
    case OrbitClass::saddle: return "saddle";
    case OrbitClass::sink: return "sink";
    case OrbitClass::source: return "source";
    case OrbitClass::nonhyperbolic: return "nonhyperbolic";
    case OrbitClass::elliptic: return "elliptic";
    case OrbitClass::unclassified: return "unclassified";
  }
  return "unclassified";
}

namespace {

// Displacement f^n(x) - x on the lift, corrected by the integer translation on
// the torus. Translation entries are limited to n*L.
Vec2 closing_residual(const SurfaceMap& map, Vec2 fx, Vec2 x, int n) {
  Vec2 r = fx - x;
  if (map.is_torus()) {
    const double bound = n * map.expansion_bound();
    r.x -= std::clamp(std::round(r.x), -bound, bound);
    r.y -= std::clamp(std::round(r.y), -bound, bound);
  }
  return r;
}

void fill_from_point(const SurfaceMap& map, PeriodicOrbit& orbit, Vec2 x, int period) {
  const auto seg = cocycle(map, x, period);
  orbit.period = period;
  orbit.points.clear();
  for (int i = 0; i < period; ++i) orbit.points.push_back(map.reduce(seg.orbit[i]));
  orbit.monodromy = seg.product;
  const auto [lo, hi] = eigenvalues(seg.product);
  orbit.lambda = lo;
  orbit.sigma = hi;
  orbit.residual = closing_residual(map, seg.orbit.back(), x, period).norm();
}

}  // namespace

PeriodicOrbit orbit_through(const SurfaceMap& map, Vec2 x, int period) {
  if (period < 1) throw Error(ErrorCode::InvalidArgument, "period must be at least 1");
  PeriodicOrbit orbit;
  fill_from_point(map, orbit, x, period);
  return orbit;
}

PeriodicOrbit find_periodic(const SurfaceMap& map, Vec2 seed, int n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "period must be at least 1");
  Vec2 x = seed;
  int steps = 0;
  for (;; ++steps) {
    const auto seg = cocycle(map, x, n);
    const Vec2 r = closing_residual(map, seg.orbit.back(), x, n);
    if (r.norm() < kNewtonTolerance) break;
    if (steps >= kNewtonMaxSteps) {
      throw Error(ErrorCode::NoConvergence, "Newton did not converge for the periodic orbit",
                  steps);
    }
    const auto [lo, hi] = eigenvalues(seg.product);
    if (std::abs(lo - 1.0) < 1e-10 || std::abs(hi - 1.0) < 1e-10) {
      throw Error(ErrorCode::SingularNewtonMatrix, "monodromy has an eigenvalue at 1", steps);
    }
    x -= (seg.product - Mat2::identity()).inverse() * r;
    if (map.escaped(x)) throw Error(ErrorCode::OrbitEscape, "Newton iterate escaped", steps);
  }
  x = map.reduce(x);

  // Minimal period: the smallest divisor d of n that already closes up.
  int period = n;
  for (int d = 1; d < n; ++d) {
    if (n % d != 0) continue;
    const auto seg = cocycle(map, x, d);
    if (closing_residual(map, seg.orbit.back(), x, d).norm() < 1e-8) {
      period = d;
      break;
    }
  }
  PeriodicOrbit orbit;
  fill_from_point(map, orbit, x, period);
  orbit.newton_steps = steps;
  return orbit;
}

PeriodicOrbit classify_and_split(const SurfaceMap& map, PeriodicOrbit orbit, double tol_h) {
  if (orbit.points.empty()) throw Error(ErrorCode::InvalidArgument, "empty orbit");
  fill_from_point(map, orbit, orbit.points.front(), orbit.period);
  orbit.subspaces.clear();
  orbit.angles.clear();
  const double ml = std::abs(orbit.lambda);
  const double ms = std::abs(orbit.sigma);
  if (orbit.lambda.imag() != 0.0) {
    if (std::abs(ml - 1.0) <= tol_h) orbit.classification = OrbitClass::elliptic;
    else orbit.classification = ml < 1.0 ? OrbitClass::sink : OrbitClass::source;
    return orbit;
  }
  if (std::abs(ml - 1.0) <= tol_h || std::abs(ms - 1.0) <= tol_h) {
    orbit.classification = OrbitClass::nonhyperbolic;
  } else if (ms < 1.0) {
    orbit.classification = OrbitClass::sink;
  } else if (ml > 1.0) {
    orbit.classification = OrbitClass::source;
  } else {
    orbit.classification = OrbitClass::saddle;
  }
  if (orbit.classification != OrbitClass::saddle) return orbit;

  for (int i = 0; i < orbit.period; ++i) {
    // Monodromy based at points[i] is the cyclic rotation of the cocycle.
    const Mat2 m = i == 0 ? orbit.monodromy : cocycle(map, orbit.points[i], orbit.period).product;
    const Splitting s(Direction::from(eigenvector(m, orbit.lambda.real())),
                      Direction::from(eigenvector(m, orbit.sigma.real())));
    orbit.subspaces.push_back(s);
    orbit.angles.push_back(angle(s.e(), s.f()));
  }
  return orbit;
}

std::vector<DominationScan> domination_scan(const SurfaceMap& map,
                                            const std::vector<PeriodicOrbit>& orbits, int m1) {
  if (m1 < 1) throw Error(ErrorCode::InvalidArgument, "m1 must be positive");
  std::vector<DominationScan> out;
  out.reserve(orbits.size());
  for (const auto& orbit : orbits) {
    if (orbit.classification != OrbitClass::saddle ||
        orbit.subspaces.size() != orbit.points.size()) {
      throw Error(ErrorCode::NotASaddle, "domination scan needs classified saddles");
    }
    DominationScan scan;
    const int n = orbit.period;
    for (int i = 0; i < n; ++i) {
      const auto seg = cocycle(map, orbit.points[i], m1);
      std::optional<int> found;
      Mat2 product = Mat2::identity();
      for (int m = 1; m <= m1; ++m) {
        product = seg.steps[m - 1] * product;
        const double ratio = restricted_norm(product, orbit.subspaces[i].e()) *
                             restricted_norm(product.inverse(), orbit.subspaces[(i + m) % n].f());
        if (ratio < 0.5) {
          found = m;
          break;
        }
      }
      scan.per_point.push_back(found);
    }
    scan.m = 0;
    for (const auto& p : scan.per_point) {
      if (!p) {
        scan.m.reset();
        break;
      }
      scan.m = std::max(*scan.m, *p);
    }
    out.push_back(scan);
  }
  return out;
}

std::vector<PeriodicOrbit> scan_periodic(const SurfaceMap& map, const ScanOptions& opts) {
  if (opts.nx < 1 || opts.ny < 1 || opts.n_max < 1) {
    throw Error(ErrorCode::InvalidArgument, "scan grid and n_max must be positive");
  }
  const std::size_t seeds = static_cast<std::size_t>(opts.nx) * opts.ny;
  const std::size_t jobs = seeds * opts.n_max;
  std::vector<std::optional<PeriodicOrbit>> found(jobs);
  parallel_for(
      jobs,
      [&](std::size_t job) {
        const std::size_t s = job / opts.n_max;
        const int n = static_cast<int>(job % opts.n_max) + 1;
        const double fx = (static_cast<double>(s % opts.nx) + 0.5) / opts.nx;
        const double fy = (static_cast<double>(s / opts.nx) + 0.5) / opts.ny;
        const Vec2 seed{opts.region.xmin + fx * opts.region.width(),
                        opts.region.ymin + fy * opts.region.height()};
        try {
          found[job] = classify_and_split(map, find_periodic(map, seed, n));
        } catch (const Error&) {
          // seeds that fail to converge are simply skipped
        }
      },
      opts.threads);

  std::vector<PeriodicOrbit> out;
  for (auto& cand : found) {
    if (!cand) continue;
    bool dup = false;
    for (const auto& known : out) {
      if (known.period != cand->period) continue;
      for (const auto& p : known.points) {
        if (map.distance(p, cand->points.front()) < 1e-8) {
          dup = true;
          break;
        }
      }
      if (dup) break;
    }
    if (!dup) out.push_back(std::move(*cand));
  }
  return out;
}

}  // namespace surfdyn
