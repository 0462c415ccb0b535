#include "surfdyn/maps.hpp"

#include <numbers>
#include <set>
#include <string>

namespace surfdyn {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

class HenonRule final : public MapRule {
 public:
  HenonRule(double a, double b) : a_(a), b_(b) {}
  Vec2 forward(Vec2 p) const override { return {1.0 + p.y - a_ * p.x * p.x, b_ * p.x}; }
  Vec2 inverse(Vec2 p) const override {
    const double x = p.y / b_;
    return {x, p.x - 1.0 + a_ * x * x};
  }
  Mat2 jacobian(Vec2 p) const override { return {-2.0 * a_ * p.x, 1.0, b_, 0.0}; }

 private:
  double a_, b_;
};

class LinearRule final : public MapRule {
 public:
  explicit LinearRule(const Mat2& m) : m_(m), inv_(m.inverse()) {}
  Vec2 forward(Vec2 p) const override { return m_ * p; }
  Vec2 inverse(Vec2 p) const override { return inv_ * p; }
  Mat2 jacobian(Vec2) const override { return m_; }
  bool constant_jacobian() const override { return true; }
  double expansion_bound() const override {
    return std::max(std::abs(m_.a) + std::abs(m_.b), std::abs(m_.c) + std::abs(m_.d));
  }

 private:
  Mat2 m_, inv_;
};

// Cat map with optional trigonometric perturbation; the inverse is solved by
// Newton seeded with the linear inverse.
class CatRule final : public MapRule {
 public:
  explicit CatRule(double eps) : eps_(eps) {}
  Vec2 forward(Vec2 p) const override {
    return Vec2{2.0 * p.x + p.y, p.x + p.y} +
           eps_ * Vec2{std::sin(kTwoPi * p.x), std::sin(kTwoPi * p.y)};
  }
  Vec2 inverse(Vec2 p) const override {
    Vec2 w = kInverse * p;
    if (eps_ == 0.0) return w;
    for (int it = 0; it < 50; ++it) {
      const Vec2 r = forward(w) - p;
      if (r.norm() < 1e-12 * (1.0 + p.norm())) return w;
      w -= jacobian(w).inverse() * r;
    }
    if ((forward(w) - p).norm() < 1e-12 * (1.0 + p.norm())) return w;
    throw Error(ErrorCode::NoConvergence, "cat map inverse: Newton did not converge");
  }
  Mat2 jacobian(Vec2 p) const override {
    return Mat2{2.0, 1.0, 1.0, 1.0} +
           Mat2::diag(kTwoPi * eps_ * std::cos(kTwoPi * p.x),
                      kTwoPi * eps_ * std::cos(kTwoPi * p.y));
  }
  bool constant_jacobian() const override { return eps_ == 0.0; }
  double expansion_bound() const override { return 3.0 + kTwoPi * std::abs(eps_); }

 private:
  static constexpr Mat2 kInverse{1.0, -1.0, -1.0, 2.0};
  double eps_;
};

class StandardRule final : public MapRule {
 public:
  explicit StandardRule(double k) : k_(k) {}
  Vec2 forward(Vec2 q) const override {
    const double p = q.y + k_ / kTwoPi * std::sin(kTwoPi * q.x);
    return {q.x + p, p};
  }
  Vec2 inverse(Vec2 q) const override {
    const double x = q.x - q.y;
    return {x, q.y - k_ / kTwoPi * std::sin(kTwoPi * x)};
  }
  Mat2 jacobian(Vec2 q) const override {
    const double kc = k_ * std::cos(kTwoPi * q.x);
    return {1.0 + kc, 1.0, kc, 1.0};
  }
  double expansion_bound() const override { return 2.0 + 2.0 * std::abs(k_); }

 private:
  double k_;
};

class FunctionRule final : public MapRule {
 public:
  FunctionRule(std::function<Vec2(Vec2)> f, std::function<Vec2(Vec2)> g,
               std::function<Mat2(Vec2)> j)
      : f_(std::move(f)), g_(std::move(g)), j_(std::move(j)) {}
  Vec2 forward(Vec2 p) const override { return f_(p); }
  Vec2 inverse(Vec2 p) const override { return g_(p); }
  Mat2 jacobian(Vec2 p) const override {
    return j_ ? j_(p) : finite_difference_jacobian(f_, p);
  }

 private:
  std::function<Vec2(Vec2)> f_, g_;
  std::function<Mat2(Vec2)> j_;
};

double take(std::map<std::string, double>& params, const std::string& key, double fallback) {
  auto it = params.find(key);
  if (it == params.end()) {
    params[key] = fallback;
    return fallback;
  }
  return it->second;
}

}  // namespace

Mat2 MapRule::jacobian(Vec2 x) const {
  return finite_difference_jacobian([this](Vec2 p) { return forward(p); }, x);
}

Mat2 finite_difference_jacobian(const std::function<Vec2(Vec2)>& f, Vec2 x) {
  const double h = 1e-6 * (1.0 + x.norm());
  const Vec2 dx = (f(x + Vec2{h, 0.0}) - f(x - Vec2{h, 0.0})) / (2.0 * h);
  const Vec2 dy = (f(x + Vec2{0.0, h}) - f(x - Vec2{0.0, h})) / (2.0 * h);
  return Mat2::columns(dx, dy);
}

SurfaceMap::SurfaceMap(std::shared_ptr<const MapRule> rule, PhaseSpace space, MapSpec spec,
                       double escape_radius)
    : rule_(std::move(rule)), space_(space), spec_(std::move(spec)),
      escape_radius_(escape_radius) {
  if (!rule_) throw Error(ErrorCode::InvalidArgument, "map without evaluation rule");
}

Vec2 SurfaceMap::reduce(Vec2 x) const {
  if (space_ == PhaseSpace::plane) return x;
  auto wrap = [](double v) {
    double r = v - std::floor(v);
    return r >= 1.0 ? 0.0 : r;
  };
  return {wrap(x.x), wrap(x.y)};
}

Vec2 SurfaceMap::difference(Vec2 a, Vec2 b) const {
  Vec2 d = a - b;
  if (space_ == PhaseSpace::torus) {
    d.x -= std::round(d.x);
    d.y -= std::round(d.y);
  }
  return d;
}

bool SurfaceMap::escaped(Vec2 x) const {
  if (!std::isfinite(x.x) || !std::isfinite(x.y)) return true;
  if (space_ == PhaseSpace::torus) return false;
  return std::abs(x.x) > escape_radius_ || std::abs(x.y) > escape_radius_;
}

SurfaceMap henon(double a, double b) {
  if (b == 0.0) throw Error(ErrorCode::InvalidArgument, "Henon map needs b != 0");
  return SurfaceMap(std::make_shared<HenonRule>(a, b), PhaseSpace::plane,
                    {"henon", {{"a", a}, {"b", b}}});
}

SurfaceMap cat_map(double eps) {
  if (!(std::abs(eps) < 0.05)) {
    throw Error(ErrorCode::InvalidArgument, "cat map perturbation must satisfy |eps| < 0.05");
  }
  return SurfaceMap(std::make_shared<CatRule>(eps), PhaseSpace::torus, {"cat", {{"eps", eps}}});
}

SurfaceMap standard_map(double k) {
  return SurfaceMap(std::make_shared<StandardRule>(k), PhaseSpace::torus,
                    {"standard", {{"k", k}}});
}

SurfaceMap linear_map(const Mat2& m) {
  if (m.det() == 0.0) throw Error(ErrorCode::InvalidArgument, "linear map must be invertible");
  return SurfaceMap(std::make_shared<LinearRule>(m), PhaseSpace::plane,
                    {"linear", {{"m00", m.a}, {"m01", m.b}, {"m10", m.c}, {"m11", m.d}}});
}

SurfaceMap toy_saddle(double lambda, double sigma, double shear) {
  if (!(shear > 0.0) || lambda == 0.0 || sigma == 0.0 || lambda == sigma) {
    throw Error(ErrorCode::InvalidArgument,
                "toy saddle needs shear > 0 and distinct nonzero multipliers");
  }
  const Mat2 m{sigma, (lambda - sigma) / shear, 0.0, lambda};
  return SurfaceMap(std::make_shared<LinearRule>(m), PhaseSpace::plane,
                    {"toy_saddle", {{"lambda", lambda}, {"sigma", sigma}, {"shear", shear}}});
}

SurfaceMap function_map(std::function<Vec2(Vec2)> forward, std::function<Vec2(Vec2)> inverse,
                        std::function<Mat2(Vec2)> jacobian, PhaseSpace space, MapSpec spec) {
  return SurfaceMap(std::make_shared<FunctionRule>(std::move(forward), std::move(inverse),
                                                   std::move(jacobian)),
                    space, std::move(spec));
}

std::vector<std::string> map_families() {
  return {"cat", "henon", "linear", "standard", "toy_saddle"};
}

SurfaceMap make_map(const MapSpec& spec) {
  static const std::map<std::string, std::set<std::string>> allowed = {
      {"henon", {"a", "b", "escape_radius"}},
      {"cat", {"eps"}},
      {"standard", {"k"}},
      {"linear", {"m00", "m01", "m10", "m11", "escape_radius"}},
      {"toy_saddle", {"lambda", "sigma", "shear", "escape_radius"}},
  };
  const auto fam = allowed.find(spec.family);
  if (fam == allowed.end()) {
    throw Error(ErrorCode::ConfigError, "map.family: unknown map family '" + spec.family + "'");
  }
  for (const auto& [key, value] : spec.params) {
    if (!fam->second.count(key)) {
      throw Error(ErrorCode::ConfigError, "map.params." + key + ": unknown parameter for " +
                                              spec.family);
    }
  }
  auto params = spec.params;
  auto build = [&]() -> SurfaceMap {
    if (spec.family == "henon") {
      const double a = take(params, "a", 1.4);
      const double b = take(params, "b", 0.3);
      return henon(a, b);
    }
    if (spec.family == "cat") return cat_map(take(params, "eps", 0.0));
    if (spec.family == "standard") return standard_map(take(params, "k", 0.5));
    if (spec.family == "linear") {
      const double m00 = take(params, "m00", 1.0), m01 = take(params, "m01", 0.0);
      const double m10 = take(params, "m10", 0.0), m11 = take(params, "m11", 1.0);
      return linear_map({m00, m01, m10, m11});
    }
    const double lambda = take(params, "lambda", 0.5);
    const double sigma = take(params, "sigma", 2.0);
    const double shear = take(params, "shear", 0.01);
    return toy_saddle(lambda, sigma, shear);
  };
  try {
    SurfaceMap built = build();
    double escape = kDefaultEscapeRadius;
    if (built.phase_space() == PhaseSpace::plane) escape = take(params, "escape_radius", escape);
    return SurfaceMap(built.rule_ptr(), built.phase_space(), {spec.family, params}, escape);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidArgument) {
      throw Error(ErrorCode::ConfigError, std::string("map.params: ") + e.what());
    }
    throw;
  }
}

CocycleSegment cocycle(const SurfaceMap& map, Vec2 x, long n, long max_length) {
  if (std::abs(n) > max_length) {
    throw Error(ErrorCode::InvalidArgument, "cocycle length exceeds the configured maximum");
  }
  CocycleSegment seg;
  seg.base = x;
  seg.n = n;
  const long len = std::abs(n);
  seg.steps.reserve(static_cast<size_t>(len));
  seg.orbit.reserve(static_cast<size_t>(len) + 1);
  seg.orbit.push_back(x);
  Vec2 cur = x;
  Mat2 product = Mat2::identity();
  for (long i = 0; i < len; ++i) {
    Mat2 step;
    Vec2 next;
    if (n > 0) {
      step = map.jacobian(cur);
      next = map.eval_lift(cur);
    } else {
      next = map.inverse_lift(cur);
      step = map.jacobian(next).inverse();
    }
    if (map.escaped(next)) {
      throw Error(ErrorCode::OrbitEscape, "orbit left the admissible region", i + 1);
    }
    product = step * product;
    seg.steps.push_back(step);
    seg.orbit.push_back(next);
    cur = next;
  }
  seg.product = product;
  return seg;
}

}  // namespace surfdyn
