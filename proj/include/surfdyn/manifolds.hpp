#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "surfdyn/linalg.hpp"
#include "surfdyn/maps.hpp"
#include "surfdyn/periodic.hpp"

namespace surfdyn {

enum class Branch { stable, unstable };
std::string_view to_string(Branch b);

// Piece of an invariant manifold on the lift (torus points are not reduced).
struct Polyline {
  std::vector<Vec2> points;
  std::vector<double> arclength;
  std::vector<Direction> tangents;
  Branch label = Branch::unstable;
  PhaseSpace space = PhaseSpace::plane;
  std::vector<Vec2> anchor;  // the saddle orbit

  // Seed data used by grow: points are images of base + s*direction.
  Vec2 base;
  Vec2 direction{1.0, 0.0};
  double r0 = 0.0;
  int period = 1;
  double multiplier = 0.0;     // eigenvalue along `direction` of f^period
  std::vector<double> param;   // s per vertex
  std::vector<int> level;      // number of G applications per vertex

  std::size_t size() const { return points.size(); }
  double length() const { return arclength.empty() ? 0.0 : arclength.back(); }
};

inline constexpr double kLinearTolerance = 1e-8;

// Segment of half-length r0 along the eigendirection at orbit.points[0],
// spacing <= h_max. r0 is halved until one application of f^{-period}
// (unstable) or f^{period} (stable) keeps the seed within 1e-8 of the line.
Polyline local_seed(const SurfaceMap& map, const PeriodicOrbit& orbit, Branch which, double r0,
                    double h_max = 1e-3);

struct GrowOptions {
  double target_arclength = 1.0;
  double h_max = 1e-3;
  double alpha_max = 0.2;
  std::size_t point_budget = 1000000;
};

// Fundamental-domain iteration of the seed under G = f^{±period} (doubled for
// negative multipliers) with adaptive refinement. Both branches grow to about
// half the target arclength.
Polyline grow(const SurfaceMap& map, const Polyline& seed, const GrowOptions& opts);

// Rebuilds arclength and tangents from points.
void finish_polyline(Polyline& p);

enum class EventKind { transversal, tangency_candidate };
std::string_view to_string(EventKind k);

struct IntersectionEvent {
  Vec2 point;          // reduced on the torus
  double s_u = 0.0;    // arclength on the first polyline
  double s_s = 0.0;    // arclength on the second
  double angle = 0.0;  // geometric crossing angle in [0, pi/2]
  double tangency_residual = 0.0;  // |sin(angle)|
  EventKind kind = EventKind::transversal;
};

struct IntersectionResult {
  std::vector<IntersectionEvent> events;
  bool overlap = false;  // collinear overlap found; events suppressed
};

struct IntersectOptions {
  double tangency_tol = 1e-6;
  double approach_tol = 1e-9;   // gap below which a near-parallel pass counts
  double anchor_exclusion = 1e-7;
};

IntersectionResult intersections(const Polyline& wu, const Polyline& ws,
                                 const IntersectOptions& opts = {});

// Distances of f^k(q) (or f^-k) to the nearest anchor point for k = 0..n.
std::vector<double> orbit_distances(const SurfaceMap& map, Vec2 q, const std::vector<Vec2>& anchor,
                                    int n, bool forward);

// Largest distance from G-images of inner vertices (levels <= last-2) to the
// polyline itself.
double invariance_defect(const SurfaceMap& map, const Polyline& poly);

struct StableDecay {
  std::vector<double> lengths;  // l(f^k W), k = 0..n
  double rate = 0.0;            // exp of the least-squares slope of ln l_k
  double bound = 0.0;           // |lambda|^(1/period)
  double c = 0.0;               // max/min - 1 of |Df tau| along the curves
  bool within_bound = false;    // rate <= bound*(1+c)
};

StableDecay stable_decay_check(const SurfaceMap& map, const PeriodicOrbit& orbit,
                               double seed_length, int n);

struct DistortionReport {
  int n = 0;
  double K0 = 0.0;
  std::vector<double> lengths;  // l(f^-i J), i = 0..n
  double lhs_ratio = 0.0, rhs_ratio = 0.0;
  double lhs_norm = 0.0, rhs_norm = 0.0;
  bool ratio_holds = false, norm_holds = false;
};

// J is a piece of an unstable manifold; tangents are pushed backward with Df^-1.
DistortionReport distortion_check(const SurfaceMap& map, const Polyline& J, int n);

// Sub-polyline with arclength in [s0, s1].
Polyline slice(const Polyline& p, double s0, double s1);

}  // namespace surfdyn
