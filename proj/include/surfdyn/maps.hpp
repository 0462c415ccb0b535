#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "surfdyn/linalg.hpp"

namespace surfdyn {

enum class PhaseSpace { plane, torus };

struct Region {
  double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;

  bool contains(Vec2 p) const {
    return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax;
  }
  Vec2 center() const { return {0.5 * (xmin + xmax), 0.5 * (ymin + ymax)}; }
  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }
  double diameter() const { return std::hypot(width(), height()); }
};

// Declarative description of a map: a family name plus named parameters.
struct MapSpec {
  std::string family;
  std::map<std::string, double> params;

  friend bool operator==(const MapSpec&, const MapSpec&) = default;
};

// Evaluation rules of a diffeomorphism, acting on the plane or on the
// universal cover of the torus. Rules never reduce coordinates.
class MapRule {
 public:
  virtual ~MapRule() = default;
  virtual Vec2 forward(Vec2 x) const = 0;
  virtual Vec2 inverse(Vec2 x) const = 0;
  // Defaults to central differences.
  virtual Mat2 jacobian(Vec2 x) const;
  virtual bool constant_jacobian() const { return false; }
  // Bound on |Df| in the sup norm; limits the integer translations searched
  // when closing torus orbits.
  virtual double expansion_bound() const { return 1e9; }
};

// Central differences with step 1e-6·(1+|x|); error O(h^2).
Mat2 finite_difference_jacobian(const std::function<Vec2(Vec2)>& f, Vec2 x);

inline constexpr double kDefaultEscapeRadius = 1e6;

class SurfaceMap {
 public:
  SurfaceMap(std::shared_ptr<const MapRule> rule, PhaseSpace space, MapSpec spec,
             double escape_radius = kDefaultEscapeRadius);

  // Image point; torus results are reduced into [0,1)^2.
  Vec2 eval(Vec2 x) const { return reduce(rule_->forward(x)); }
  Vec2 eval_inverse(Vec2 x) const { return reduce(rule_->inverse(x)); }
  // Unreduced images on the continuous lift.
  Vec2 eval_lift(Vec2 x) const { return rule_->forward(x); }
  Vec2 inverse_lift(Vec2 x) const { return rule_->inverse(x); }

  Mat2 jacobian(Vec2 x) const { return rule_->jacobian(x); }
  // Derivative of the inverse map at x.
  Mat2 inverse_jacobian(Vec2 x) const { return rule_->jacobian(rule_->inverse(x)).inverse(); }

  PhaseSpace phase_space() const { return space_; }
  bool is_torus() const { return space_ == PhaseSpace::torus; }
  bool constant_jacobian() const { return rule_->constant_jacobian(); }
  double expansion_bound() const { return rule_->expansion_bound(); }
  double escape_radius() const { return escape_radius_; }
  const MapSpec& spec() const { return spec_; }
  const MapRule& rule() const { return *rule_; }
  std::shared_ptr<const MapRule> rule_ptr() const { return rule_; }

  Vec2 reduce(Vec2 x) const;
  // a - b, taken as the shortest representative on the torus.
  Vec2 difference(Vec2 a, Vec2 b) const;
  double distance(Vec2 a, Vec2 b) const { return difference(a, b).norm(); }
  // True when an iterate has left the admissible domain.
  bool escaped(Vec2 x) const;

 private:
  std::shared_ptr<const MapRule> rule_;
  PhaseSpace space_;
  MapSpec spec_;
  double escape_radius_;
};

// (x, y) -> (1 + y - a x^2, b x); b must be nonzero.
SurfaceMap henon(double a, double b);
// [[2,1],[1,1]] on the torus plus eps·(sin 2πx, sin 2πy), |eps| < 0.05.
SurfaceMap cat_map(double eps = 0.0);
// Chirikov map on the unit torus: p' = p + k/(2π) sin 2πx, x' = x + p'.
SurfaceMap standard_map(double k);
// Linear map of the plane.
SurfaceMap linear_map(const Mat2& m);
// Linear saddle with unstable line the first axis (multiplier sigma) and
// stable line spanned by (1, shear) (multiplier lambda), so that
// angle(E^s, E^u) = shear.
SurfaceMap toy_saddle(double lambda, double sigma, double shear);
// Ad hoc map from callables; an empty jacobian falls back to finite differences.
SurfaceMap function_map(std::function<Vec2(Vec2)> forward, std::function<Vec2(Vec2)> inverse,
                        std::function<Mat2(Vec2)> jacobian, PhaseSpace space,
                        MapSpec spec = {"function", {}});

// Builds a built-in family from its declarative record. Unknown families or
// parameters raise ConfigError.
SurfaceMap make_map(const MapSpec& spec);
std::vector<std::string> map_families();

// Derivative products along an orbit segment.
struct CocycleSegment {
  Vec2 base;
  long n = 0;
  Mat2 product;
  std::vector<Mat2> steps;  // steps[i] acts at orbit[i]
  std::vector<Vec2> orbit;  // |n|+1 lifted points, orbit[0] = base
};

inline constexpr long kDefaultMaxCocycleLength = 1000000;

// n > 0 walks forward with Df, n < 0 backward with D(f^-1).
CocycleSegment cocycle(const SurfaceMap& map, Vec2 x, long n,
                       long max_length = kDefaultMaxCocycleLength);

}  // namespace surfdyn
