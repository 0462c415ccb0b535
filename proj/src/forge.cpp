#include "surfdyn/forge.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "surfdyn/manifolds.hpp"

namespace surfdyn {

BumpValue bump(double height, double t) {
  const double at = std::abs(t);
  if (at <= 0.5) return {height, 0.0};
  if (at >= 2.0) return {0.0, 0.0};
  const double u = (at - 0.5) / 1.5;
  const double smooth = u * u * (3.0 - 2.0 * u);
  const double slope = -height * 4.0 * u * (1.0 - u);
  return {height * (1.0 - smooth), t > 0.0 ? slope : -slope};
}

Vec2 phi_map(Vec2 p, double a, double eps) {
  if (!(a > 0.0)) throw Error(ErrorCode::InvalidArgument, "bump scale must be positive");
  return {p.x, p.y + a * bump_phi(eps, p.x / a).value * bump_psi(p.y / a).value};
}

Mat2 phi_map_jacobian(Vec2 p, double a, double eps) {
  if (!(a > 0.0)) throw Error(ErrorCode::InvalidArgument, "bump scale must be positive");
  const auto f = bump_phi(eps, p.x / a);
  const auto g = bump_psi(p.y / a);
  return {1.0, 0.0, f.derivative * g.value, 1.0 + f.value * g.derivative};
}

std::string_view to_string(EditMode m) {
  return m == EditMode::inflate ? "inflate" : "neutralize_and_tilt";
}

SurfaceMap identity_map(PhaseSpace space) {
  return function_map([](Vec2 x) { return x; }, [](Vec2 x) { return x; },
                      [](Vec2) { return Mat2::identity(); }, space, {"identity", {}});
}

double c1_distance(const SurfaceMap& f, const SurfaceMap& g, const Region& region, int samples) {
  if (samples < 1) throw Error(ErrorCode::InvalidArgument, "need at least one sample");
  double worst = 0.0;
  for (int j = 0; j < samples; ++j) {
    for (int i = 0; i < samples; ++i) {
      const double fx = samples == 1 ? 0.5 : static_cast<double>(i) / (samples - 1);
      const double fy = samples == 1 ? 0.5 : static_cast<double>(j) / (samples - 1);
      const Vec2 x{region.xmin + fx * region.width(), region.ymin + fy * region.height()};
      const Vec2 dv = f.is_torus() ? f.difference(f.eval_lift(x), g.eval_lift(x))
                                   : f.eval_lift(x) - g.eval_lift(x);
      const double dd = (f.jacobian(x) - g.jacobian(x)).norm();
      worst = std::max(worst, dv.norm() + dd);
    }
  }
  return worst;
}

namespace {

// Perturbation in chart coordinates, centred at (x0, 0) with scale s = t*a.
struct ChartBump {
  double x0, s, eps;

  double shift(Vec2 q) const {
    return s * bump_phi(eps, (q.x - x0) / s).value * bump_psi(q.y / s).value;
  }
  Mat2 jacobian(Vec2 q) const {
    const auto f = bump_phi(eps, (q.x - x0) / s);
    const auto g = bump_psi(q.y / s);
    return {1.0, 0.0, f.derivative * g.value, 1.0 + f.value * g.derivative};
  }
};

// max over xi of  s*phi((xi-x0)/s) - gamma*xi, with its location.
std::pair<double, double> height_gap(double x0, double s, double eps, double gamma) {
  auto h = [&](double xi) { return s * bump_phi(eps, (xi - x0) / s).value - gamma * xi; };
  auto dh = [&](double xi) { return bump_phi(eps, (xi - x0) / s).derivative - gamma; };
  const int m = 4000;
  double best = -std::numeric_limits<double>::infinity();
  int arg = 0;
  for (int k = 0; k <= m; ++k) {
    const double xi = x0 + s * (-2.0 + 4.0 * k / m);
    const double v = h(xi);
    if (v > best) {
      best = v;
      arg = k;
    }
  }
  double lo = x0 + s * (-2.0 + 4.0 * std::max(0, arg - 1) / m);
  double hi = x0 + s * (-2.0 + 4.0 * std::min(m, arg + 1) / m);
  // slope crosses gamma from above inside the bracket unless the max sits at an end
  if (dh(lo) > 0.0 && dh(hi) < 0.0) {
    for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      (dh(mid) > 0.0 ? lo : hi) = mid;
    }
    const double xi = 0.5 * (lo + hi);
    return {h(xi), xi};
  }
  const double xi = x0 + s * (-2.0 + 4.0 * arg / m);
  return {best, xi};
}

}  // namespace

ForgeResult forge_tangency(const SurfaceMap& map, const PeriodicOrbit& orbit,
                           const ForgeOptions& opts) {
  if (orbit.classification != OrbitClass::saddle || orbit.subspaces.empty()) {
    throw Error(ErrorCode::NotASaddle, "forging a tangency needs a saddle");
  }
  const double eps = opts.eps;
  if (!(eps > 0.0 && eps < 1.0)) throw Error(ErrorCode::InvalidArgument, "eps must lie in (0, 1)");

  ForgeGeometry geo;
  geo.lambda = orbit.lambda.real();
  geo.sigma = orbit.sigma.real();
  // area-preserving saddles (|lambda*sigma| = 1) are accepted
  if (std::abs(geo.lambda * geo.sigma) > 1.0 + 1e-12) {
    throw Error(ErrorCode::DissipationViolated, "saddle expands area: |lambda*sigma| > 1");
  }
  if (geo.lambda < 0.0 || geo.sigma < 0.0) {
    // chart return map is the second iterate of the period map
    geo.doubled = true;
    geo.lambda *= geo.lambda;
    geo.sigma *= geo.sigma;
  }
  const double sigma = geo.sigma;
  const Vec2 p = orbit.points.front();
  const Splitting& split = orbit.subspaces.front();
  geo.gamma = angle(split.e(), split.f());
  geo.threshold = (sigma - 1.0) / (sigma + 1.0) * eps / 2.0;
  if (geo.gamma >= geo.threshold) {
    throw Error(ErrorCode::ThresholdViolated,
                "angle " + std::to_string(geo.gamma) + " is not below the threshold " +
                    std::to_string(geo.threshold));
  }

  // Orthonormal chart: first axis E^u, normal chosen so E^s has slope +gamma.
  const Vec2 u = split.f().vec();
  Vec2 nrm = perp(u);
  const Vec2 es = split.e().vec();
  if (dot(es, u) * dot(es, nrm) < 0.0) nrm = -nrm;
  const Mat2 C = Mat2::columns(u, nrm);
  const Mat2 Ct = C.transpose();
  const double gamma = geo.gamma;

  auto geometry_for = [&](double x1) {
    geo.x1 = x1;
    geo.x0 = (sigma + 1.0) * x1 / 2.0;
    geo.a = (sigma - 1.0) * x1 / 4.0;
  };
  // Deviation of the true local manifolds from their lines across D.
  auto deviation = [&]() {
    if (map.constant_jacobian()) return 0.0;
    const double reach = geo.x0 + 2.0 * geo.a;
    const double h = std::max(geo.a / 20.0, 1e-9);
    double worst = 0.0;
    for (Branch b : {Branch::unstable, Branch::stable}) {
      const auto seed = local_seed(map, orbit, b, std::min(reach, geo.x1), h);
      GrowOptions g;
      g.target_arclength = 2.0 * reach * (1.0 + gamma) + 4.0 * geo.a;
      g.h_max = h;
      const auto w = seed.r0 >= reach ? seed : grow(map, seed, g);
      for (const Vec2& x : w.points) {
        const Vec2 q = Ct * map.difference(x, p);
        if (q.x < geo.x0 - 2.0 * geo.a || q.x > geo.x0 + 2.0 * geo.a) continue;
        const double d = b == Branch::unstable ? std::abs(q.y)
                                               : std::abs(q.y - gamma * q.x) / std::hypot(1.0, gamma);
        worst = std::max(worst, d);
      }
    }
    return worst;
  };

  if (opts.x1) {
    if (!(*opts.x1 > 0.0)) throw Error(ErrorCode::InvalidArgument, "x1 must be positive");
    geometry_for(*opts.x1);
    geo.manifold_deviation = deviation();
  } else {
    double x1 = 1e-3;
    for (int k = 0;; ++k) {
      geometry_for(x1);
      geo.manifold_deviation = deviation();
      if (geo.manifold_deviation < 0.01 * gamma * geo.x0) break;
      if (k > 40) throw Error(ErrorCode::NoConvergence, "could not shrink x1 enough");
      x1 *= 0.5;
    }
  }
  geo.a_eps = geo.a * eps;
  geo.gamma_x0 = gamma * geo.x0;
  geo.reaches_stable = geo.a_eps > geo.gamma_x0;
  if (!geo.reaches_stable) {
    throw Error(ErrorCode::ThresholdViolated, "bump of full size does not reach E^s");
  }

  // D: |xi - x0| <= 2a, |eta| <= 2a in the chart.
  const double half = 2.0 * geo.a;
  const Vec2 corners[4] = {{geo.x0 - half, -half}, {geo.x0 + half, -half},
                           {geo.x0 - half, half},  {geo.x0 + half, half}};
  Region support{std::numeric_limits<double>::max(), -std::numeric_limits<double>::max(),
                 std::numeric_limits<double>::max(), -std::numeric_limits<double>::max()};
  for (const Vec2& c : corners) {
    const Vec2 w = p + C * c;
    support = {std::min(support.xmin, w.x), std::max(support.xmax, w.x),
               std::min(support.ymin, w.y), std::max(support.ymax, w.y)};
  }
  for (std::size_t i = 1; i < orbit.points.size(); ++i) {
    const Vec2 q = Ct * map.difference(orbit.points[i], p);
    if (std::abs(q.x - geo.x0) <= 2.0 * half && std::abs(q.y) <= 2.0 * half) {
      throw Error(ErrorCode::DomainOverlap, "perturbation box meets another orbit point",
                  static_cast<long>(i));
    }
  }

  // Bisection on t for the touching bump.
  auto G = [&](double t) { return height_gap(geo.x0, t * geo.a, eps, gamma).first; };
  double lo = 1e-9, hi = 1.0;
  if (!(G(hi) > 0.0) || !(G(lo) < 0.0)) {
    throw Error(ErrorCode::NoConvergence, "tangency parameter is not bracketed");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double g = G(mid);
    if (std::abs(g) < 1e-12 * geo.gamma_x0) {
      lo = hi = mid;
      break;
    }
    (g > 0.0 ? hi : lo) = mid;
  }
  geo.t0 = 0.5 * (lo + hi);
  const ChartBump bump_t{geo.x0, geo.t0 * geo.a, eps};
  const auto [gap, xi_star] = height_gap(geo.x0, bump_t.s, eps, gamma);

  ForgeResult res{map};
  res.p = p;
  res.eps = eps;
  res.geometry = geo;
  res.tangency_gap = gap;
  res.tangency_chart = {xi_star, bump_t.shift({xi_star, 0.0})};
  res.tangency_point = p + C * res.tangency_chart;
  const double slope = bump_phi(eps, (xi_star - geo.x0) / bump_t.s).derivative;
  res.tangency_residual =
      std::abs(cross(Vec2{1.0, slope}, Vec2{1.0, gamma})) / (std::hypot(1.0, slope) * std::hypot(1.0, gamma));
  res.chart = C;
  res.support = support;
  for (int k = 0; k <= 400; ++k) {
    const double xi = geo.x0 - half + 2.0 * half * k / 400.0;
    res.curve.push_back(p + C * Vec2{xi, bump_t.shift({xi, 0.0})});
  }

  // g = P o f, with P(y) = y + C (0, shift(C^T (y - p))).
  const auto P = [map, p, C, Ct, bump_t](Vec2 y) {
    const Vec2 q = Ct * map.difference(y, p);
    return y + C * Vec2{0.0, bump_t.shift(q)};
  };
  const auto DP = [map, p, C, Ct, bump_t](Vec2 y) {
    return C * bump_t.jacobian(Ct * map.difference(y, p)) * Ct;
  };
  const auto Pinv = [map, p, C, Ct, bump_t](Vec2 z) {
    const Vec2 q = Ct * map.difference(z, p);
    // eta + shift(xi, eta) = zeta is monotone in eta
    double eta = q.y;
    for (int it = 0; it < 100; ++it) {
      const Vec2 w{q.x, eta};
      const double r = eta + bump_t.shift(w) - q.y;
      if (std::abs(r) < 1e-16 * (1.0 + std::abs(q.y))) break;
      eta -= r / bump_t.jacobian(w).d;
    }
    return z + C * Vec2{0.0, eta - q.y};
  };
  const SurfaceMap f = map;
  const MapSpec spec{"forged", {{"t0", geo.t0}, {"x0", geo.x0}, {"a", geo.a}, {"eps", eps}}};
  res.perturbed = function_map(
      [f, P](Vec2 x) { return P(f.eval_lift(x)); },
      [f, Pinv](Vec2 z) { return f.inverse_lift(Pinv(z)); },
      [f, DP](Vec2 x) { return DP(f.eval_lift(x)) * f.jacobian(x); }, map.phase_space(), spec);

  res.p_fixed = map.distance(res.perturbed.eval_lift(p), map.eval_lift(p)) == 0.0;
  res.derivative_unchanged = res.perturbed.jacobian(p) == map.jacobian(p);

  // The perturbation itself is P = g o f^-1; measure it on D.
  const auto perturbation = function_map(P, Pinv, DP, map.phase_space(), {"perturbation", {}});
  res.c1_distance = c1_distance(identity_map(map.phase_space()), perturbation, support,
                                opts.c1_samples);
  res.c1_distance_raw = c1_distance(map, res.perturbed, support, opts.c1_samples);
  return res;
}

CocycleEdit edit_cocycle(const std::vector<Mat2>& matrices, const EditSpec& spec, double eps) {
  const std::size_t n = matrices.size();
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "empty cocycle");
  Mat2 mono = Mat2::identity();
  for (const auto& m : matrices) mono = m * mono;
  const auto [lo, hi] = eigenvalues(mono);
  if (lo.imag() != 0.0 || !(std::abs(lo.real()) < 1.0 && std::abs(hi.real()) > 1.0)) {
    throw Error(ErrorCode::NotASaddle, "cocycle monodromy is not a real saddle");
  }
  const double lambda = lo.real(), sigma = hi.real();

  // Stable/unstable frames at every step from the rotated monodromies.
  std::vector<Mat2> frame(n);
  for (std::size_t i = 0; i < n; ++i) {
    Mat2 m = Mat2::identity();
    for (std::size_t k = 0; k < n; ++k) m = matrices[(i + k) % n] * m;
    frame[i] = Mat2::columns(eigenvector(m, lambda), eigenvector(m, sigma));
  }
  auto scaled = [&](std::size_t i, double se, double su) {
    return frame[i] * Mat2::diag(se, su) * frame[i].inverse();
  };

  CocycleEdit out;
  out.original = matrices;
  out.lambda = lambda;
  out.sigma = sigma;
  if (spec.mode == EditMode::inflate) {
    for (std::size_t i = 0; i < n; ++i) {
      const Mat2 T = scaled((i + 1) % n, 1.0 - spec.delta, 1.0 + spec.delta);
      out.edits.push_back(T);
      out.edited.push_back(T * matrices[i]);
    }
    const double k = static_cast<double>(n);
    out.target = frame[0] *
                 Mat2::diag(std::pow(1.0 - spec.delta, k) * lambda,
                            std::pow(1.0 + spec.delta, k) * sigma) *
                 frame[0].inverse();
  } else {
    if (std::abs(cross(spec.u0, spec.v0)) <= kParallelTolerance * spec.u0.norm() * spec.v0.norm()) {
      throw Error(ErrorCode::ParallelDirections, "u0 and v0 must be transversal");
    }
    // |lambda|^(-1/n) and |sigma|^(-1/n) per step; signs fixed on the last step.
    const double k = static_cast<double>(n);
    const double se = std::pow(std::abs(lambda), -1.0 / k);
    const double su = std::pow(std::abs(sigma), -1.0 / k);
    const Mat2 B = Mat2::columns(spec.u0, spec.v0);
    const Mat2 S = B * Mat2::diag(1.0 - spec.beta1, 1.0 + spec.beta1) * B.inverse();
    for (std::size_t i = 0; i < n; ++i) {
      const bool last = i + 1 == n;
      const double sign_e = last && lambda < 0.0 ? -1.0 : 1.0;
      const double sign_u = last && sigma < 0.0 ? -1.0 : 1.0;
      const Mat2 N = scaled((i + 1) % n, sign_e * se, sign_u * su);
      out.edits.push_back(N);
      out.edited.push_back(last ? S * N * matrices[i] : N * matrices[i]);
    }
    out.edits.push_back(S);
    out.target = S;
  }
  for (std::size_t i = 0; i < n; ++i) {
    out.deviation.push_back((out.edited[i] - matrices[i]).norm());
    if (out.deviation.back() > eps) {
      throw Error(ErrorCode::BudgetExceeded,
                  "edit of step " + std::to_string(i) + " exceeds the budget", static_cast<long>(i));
    }
  }
  out.monodromy = Mat2::identity();
  for (const auto& m : out.edited) out.monodromy = m * out.monodromy;
  const auto [elo, ehi] = eigenvalues(out.monodromy);
  out.lambda = elo.real();
  out.sigma = ehi.real();
  if (elo.imag() == 0.0 && std::abs(elo.real()) != std::abs(ehi.real())) {
    const Splitting s(Direction::from(eigenvector(out.monodromy, out.lambda)),
                      Direction::from(eigenvector(out.monodromy, out.sigma)));
    out.angle = angle(s.e(), s.f());
  }
  return out;
}

bool dichotomy_check(double lambda, double sigma, int n, double delta) {
  return std::abs(lambda) < std::pow(1.0 - delta, n) || std::abs(sigma) > std::pow(1.0 + delta, n);
}

bool dichotomy_check(const PeriodicOrbit& orbit, double delta) {
  return dichotomy_check(std::abs(orbit.lambda), std::abs(orbit.sigma), orbit.period, delta);
}

}  // namespace surfdyn
