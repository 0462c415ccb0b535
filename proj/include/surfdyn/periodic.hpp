#pragma once

#include <complex>
#include <optional>
#include <string_view>
#include <vector>

#include "surfdyn/linalg.hpp"
#include "surfdyn/maps.hpp"

namespace surfdyn {

enum class OrbitClass { saddle, sink, source, nonhyperbolic, elliptic, unclassified };
std::string_view to_string(OrbitClass c);

struct PeriodicOrbit {
  std::vector<Vec2> points;  // reduced mod 1 on the torus
  int period = 0;            // minimal period
  Mat2 monodromy;            // Df^period at points[0]
  // Ordered by modulus: lambda is the weaker one.
  std::complex<double> lambda, sigma;
  OrbitClass classification = OrbitClass::unclassified;
  // Real saddles only: per-point (E^s, E^u) and angle(E^s, E^u).
  std::vector<Splitting> subspaces;
  std::vector<double> angles;
  double residual = 0.0;
  int newton_steps = 0;
};

inline constexpr double kHyperbolicTolerance = 1e-8;
inline constexpr double kNewtonTolerance = 1e-10;
inline constexpr int kNewtonMaxSteps = 100;

// Newton on f^n(x) - x (torus: minus the nearest integer translation), with the
// monodromy assembled from per-step Jacobians. The result carries the minimal
// period, its monodromy and multipliers; call classify_and_split for the rest.
PeriodicOrbit find_periodic(const SurfaceMap& map, Vec2 seed, int n);

// Orbit record for a point already known to be periodic, skipping Newton.
PeriodicOrbit orbit_through(const SurfaceMap& map, Vec2 x, int period);

// Fills multipliers, classification, and for saddles the invariant subspaces
// and angles at every orbit point.
PeriodicOrbit classify_and_split(const SurfaceMap& map, PeriodicOrbit orbit,
                                 double tol_h = kHyperbolicTolerance);

struct DominationScan {
  // Smallest m per base point, absent when none up to m1.
  std::vector<std::optional<int>> per_point;
  // Worst base point; absent if any base point fails.
  std::optional<int> m;
};

// For each saddle, the smallest 1 <= m <= m1 with
// |Df^m|E^s_i| * |Df^-m|E^u_{i+m}| < 1/2 at every base point i.
std::vector<DominationScan> domination_scan(const SurfaceMap& map,
                                            const std::vector<PeriodicOrbit>& orbits, int m1);

struct ScanOptions {
  Region region{-2.0, 2.0, -2.0, 2.0};
  int n_max = 1;
  int nx = 64, ny = 64;
  unsigned threads = 0;
};

// Seeds Newton from the lattice of region centers for each period 1..n_max and
// returns classified orbits, deduplicated (points within 1e-8) in seed order.
std::vector<PeriodicOrbit> scan_periodic(const SurfaceMap& map, const ScanOptions& opts);

}  // namespace surfdyn
