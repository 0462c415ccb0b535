#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "surfdyn/linalg.hpp"
#include "surfdyn/maps.hpp"
#include "surfdyn/periodic.hpp"

namespace surfdyn {

struct BumpValue {
  double value = 0.0;
  double derivative = 0.0;
};

// Plateau on |t| <= 0.5, cubic smoothstep down to zero on 0.5 <= |t| <= 2.
// The steepest slope equals the height.
BumpValue bump(double height, double t);
inline BumpValue bump_phi(double eps, double t) { return bump(eps, t); }
inline BumpValue bump_psi(double t) { return bump(1.0, t); }

// (x, y) + (0, a phi(x/a) psi(y/a)), phi of height eps.
Vec2 phi_map(Vec2 p, double a, double eps);
Mat2 phi_map_jacobian(Vec2 p, double a, double eps);

struct ForgeGeometry {
  double x1 = 0.0, x0 = 0.0, a = 0.0, t0 = 0.0;
  double gamma = 0.0;       // angle(E^s, E^u) at p
  double threshold = 0.0;   // (|sigma|-1)/(|sigma|+1) * eps/2
  double a_eps = 0.0, gamma_x0 = 0.0;
  bool reaches_stable = false;  // a*eps > gamma*x0
  double lambda = 0.0, sigma = 0.0;  // multipliers of the chart return map
  bool doubled = false;              // negative multipliers: chart uses f^(2 period)
  double manifold_deviation = 0.0;   // of the local manifolds from their lines inside D
};

struct ForgeOptions {
  double eps = 0.1;
  std::optional<double> x1;   // automatic when absent
  int c1_samples = 512;
};

struct ForgeResult {
  explicit ForgeResult(SurfaceMap m) : perturbed(std::move(m)) {}

  SurfaceMap perturbed;
  Vec2 p;
  double eps = 0.0;
  ForgeGeometry geometry;
  Vec2 tangency_point;          // world coordinates
  Vec2 tangency_chart;          // (xi, eta) in the chart at p
  double tangency_residual = 0.0;  // |sin| between the curve and E^s
  double tangency_gap = 0.0;       // max of curve height minus the E^s line
  double c1_distance = 0.0;        // perturbation g o f^-1 against identity, on D
  double c1_distance_raw = 0.0;    // g against f, on D
  bool p_fixed = false;
  bool derivative_unchanged = false;
  Mat2 chart;                   // columns: E^u direction, its normal
  Region support;               // bounding box of D in world coordinates
  // Chart images of the unstable axis after the perturbation, for plotting.
  std::vector<Vec2> curve;
};

ForgeResult forge_tangency(const SurfaceMap& map, const PeriodicOrbit& orbit,
                           const ForgeOptions& opts);

// Max over a samples x samples grid on `region` of |f - g| + |Df - Dg|.
double c1_distance(const SurfaceMap& f, const SurfaceMap& g, const Region& region, int samples = 512);

SurfaceMap identity_map(PhaseSpace space = PhaseSpace::plane);

enum class EditMode { inflate, neutralize_and_tilt };
std::string_view to_string(EditMode m);

struct EditSpec {
  EditMode mode = EditMode::inflate;
  double delta = 0.0;  // inflate
  Vec2 u0{1.0, 0.0}, v0{0.0, 1.0};
  double beta1 = 0.0;  // neutralize_and_tilt
};

struct CocycleEdit {
  std::vector<Mat2> original;
  std::vector<Mat2> edits;   // T_i or the neutralizing scalings; S last for tilts
  std::vector<Mat2> edited;  // L_i
  std::vector<double> deviation;  // |L_i - original_i|
  Mat2 target;               // designed monodromy (S for tilts)
  Mat2 monodromy;
  double lambda = 0.0, sigma = 0.0;
  double angle = 0.0;        // angle(E^s, E^u) of the edited monodromy
};

// Edits a real-saddle cocycle step by step within the budget eps.
CocycleEdit edit_cocycle(const std::vector<Mat2>& matrices, const EditSpec& spec, double eps);

bool dichotomy_check(double lambda, double sigma, int n, double delta);
bool dichotomy_check(const PeriodicOrbit& orbit, double delta);

}  // namespace surfdyn
