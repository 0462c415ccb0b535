#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "surfdyn/linalg.hpp"
#include "surfdyn/maps.hpp"
#include "surfdyn/pliss.hpp"

namespace surfdyn {

// E from the minor right singular vector of Df^T(x), F from the minor right
// singular vector of Df^-T(x). Throws DegenerateSingularValues when either
// window has (s1 - s2)/s1 < 1e-12.
Splitting finite_time_splitting(const SurfaceMap& map, Vec2 x, int T);

// Same estimate with the backward window replaced by the stored past
// orbit[0..T] (orbit[T] = x): F is the dominant left singular vector of the
// forward product along it. Needed for attractors whose backward orbits escape.
Splitting finite_time_splitting_past(const SurfaceMap& map, const std::vector<Vec2>& past, int T);

struct SplittingSource {
  enum class Kind { finite_time, exact, given };
  Kind kind = Kind::finite_time;
  int T = 20;
  std::optional<Splitting> given;  // pushed forward along the orbit

  static SplittingSource finite(int T = 20) { return {Kind::finite_time, T, std::nullopt}; }
  static SplittingSource exact() { return {Kind::exact, 0, std::nullopt}; }
  static SplittingSource from(Splitting s) { return {Kind::given, 0, s}; }
};
std::string_view to_string(SplittingSource::Kind k);

// r_k <= C*rate^k envelope: rate = max_{k>=5} r_k^(1/k) (k >= 1 for short
// series), C = max_k r_k/rate^k.
struct EnvelopeFit {
  double C = 1.0;
  double rate = 1.0;
  bool decays = false;    // rate < 1
  bool unit_C = false;    // C <= 1 already suffices
};
EnvelopeFit fit_envelope(const std::vector<double>& r);

// Splittings along x_0..x_n plus the one-step norms on each bundle.
struct OrbitBundles {
  std::vector<Vec2> orbit;           // x_0..x_n on the lift
  std::vector<Splitting> splitting;  // at each x_k
  std::vector<double> e_norms;       // |Df_{x_k}|E_k|, k < n
  std::vector<double> f_inv_norms;   // |Df^-1_{x_{k+1}}|F_{k+1}|, k < n
};
OrbitBundles orbit_bundles(const SurfaceMap& map, Vec2 x, const SplittingSource& source, int n);

struct DominationEstimate {
  Vec2 base;
  int horizon = 0;
  std::vector<double> ratios;  // r_0 = 1
  EnvelopeFit fit;
  bool dominated = false;
};

DominationEstimate orbit_domination(const SurfaceMap& map, Vec2 x, const SplittingSource& source,
                                    int n);

struct TwoDomination {
  std::vector<double> e_f2;  // |Df^k|E| * |Df^-k|F|^2
  std::vector<double> e2_f;  // |Df^k|E|^2 * |Df^-k|F|
  EnvelopeFit fit_e_f2, fit_e2_f;
};
TwoDomination two_domination_check(const SurfaceMap& map, Vec2 x, const SplittingSource& source,
                                   int n);

struct CertifyOptions {
  Region region{0.0, 1.0, 0.0, 1.0};
  int nx = 64, ny = 64;
  int T = 20;
  double a = 0.5;
  int samples_per_box = 4;
  // When set, only boxes containing one of these points take part, and the
  // splitting of such a box is estimated at the first point in it using
  // the stored past. attractor must be a forward orbit.
  std::optional<std::vector<Vec2>> attractor;
  unsigned threads = 0;
};

struct BoxRecord {
  long id = 0;
  Region box;
  std::optional<Splitting> splitting;
  double lambda = 0.0;   // worst sampled factor over cu and cs checks
  double padding = 0.0;  // derivative-variation allowance
  bool pass = false;
  Vec2 witness{1.0, 0.0};  // cone boundary vector with the worst image
  std::string note;
};

struct ConeCertificate {
  int nx = 0, ny = 0;
  double a = 0.0;
  int T = 0;
  int samples = 0;
  std::vector<BoxRecord> boxes;  // active boxes only, ordered by id
  double lambda_worst = 0.0;
  double padding_worst = 0.0;
  bool pass = false;
  std::optional<long> fail_box;
  Vec2 witness;
};

ConeCertificate certify_cones(const SurfaceMap& map, const CertifyOptions& opts);

enum class Verdict { hyperbolic_evidence, inconclusive, contradicted };
std::string_view to_string(Verdict v);

struct PointVerdict {
  Vec2 point;
  Verdict verdict = Verdict::inconclusive;
  double e_rate = 1.0, f_rate = 1.0;
  std::optional<PlissReport> e_pliss, f_pliss;
  std::string note;
};

struct HyperbolicityVerdict {
  Verdict verdict = Verdict::inconclusive;
  std::vector<PointVerdict> points;
};

HyperbolicityVerdict hyperbolicity_verdict(const SurfaceMap& map,
                                           const std::vector<Vec2>& samples,
                                           const SplittingSource& source, int horizon,
                                           double gamma1, double gamma2);

// Forward orbit of `seed` after dropping `transient` iterates.
std::vector<Vec2> attractor_orbit(const SurfaceMap& map, Vec2 seed, long transient, long count);

}  // namespace surfdyn
