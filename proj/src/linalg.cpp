#include "surfdyn/linalg.hpp"

#include <algorithm>
#include <string>

namespace surfdyn {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParallelDirections: return "ParallelDirections";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::DegenerateImage: return "DegenerateImage";
    case ErrorCode::OrbitEscape: return "OrbitEscape";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::SingularNewtonMatrix: return "SingularNewtonMatrix";
    case ErrorCode::InvalidThresholds: return "InvalidThresholds";
    case ErrorCode::DegenerateSingularValues: return "DegenerateSingularValues";
    case ErrorCode::NotASaddle: return "NotASaddle";
    case ErrorCode::PointBudgetExceeded: return "PointBudgetExceeded";
    case ErrorCode::ThresholdViolated: return "ThresholdViolated";
    case ErrorCode::DissipationViolated: return "DissipationViolated";
    case ErrorCode::DomainOverlap: return "DomainOverlap";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Mat2 Mat2::inverse() const {
  const double dt = det();
  if (dt == 0.0 || !std::isfinite(dt)) {
    throw Error(ErrorCode::InvalidArgument, "singular matrix has no inverse");
  }
  return {d / dt, -b / dt, -c / dt, a / dt};
}

double Mat2::norm() const { return singular_values(*this).max; }

double Mat2::max_abs() const {
  return std::max({std::abs(a), std::abs(b), std::abs(c), std::abs(d)});
}

std::pair<std::complex<double>, std::complex<double>> eigenvalues(const Mat2& m) {
  using C = std::complex<double>;
  const double half_tr = 0.5 * m.trace();
  const double half_gap = 0.5 * (m.a - m.d);
  const double disc = half_gap * half_gap + m.b * m.c;
  if (disc >= 0.0) {
    const double s = std::sqrt(disc);
    const double mu1 = half_tr + std::copysign(s, half_tr);
    const double mu2 = (mu1 != 0.0) ? m.det() / mu1 : half_tr - std::copysign(s, half_tr);
    if (std::abs(mu1) <= std::abs(mu2)) return {C(mu1, 0.0), C(mu2, 0.0)};
    return {C(mu2, 0.0), C(mu1, 0.0)};
  }
  const double im = std::sqrt(-disc);
  return {C(half_tr, -im), C(half_tr, im)};
}

SingularValues singular_values(const Mat2& m) {
  const double p = m.a * m.a + m.c * m.c;
  const double q = m.a * m.b + m.c * m.d;
  const double r = m.b * m.b + m.d * m.d;
  const double theta = 0.5 * std::atan2(2.0 * q, p - r);
  const Vec2 major{std::cos(theta), std::sin(theta)};
  const double smax = (m * major).norm();
  const double smin = smax > 0.0 ? std::abs(m.det()) / smax : 0.0;
  return {smax, smin, major, perp(major)};
}

Direction Direction::from(Vec2 v) {
  const double n = v.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw Error(ErrorCode::ZeroVector, "direction from a zero or non-finite vector");
  }
  Vec2 u = v / n;
  if (u.x < 0.0 || (u.x == 0.0 && u.y < 0.0)) u = -u;
  if (u.x == 0.0) u.x = 0.0;  // drop negative zero
  if (u.y == 0.0) u.y = 0.0;
  return Direction(u);
}

Splitting::Splitting(Direction e, Direction f) : e_(e), f_(f) {
  if (e_.separation(f_) <= kParallelTolerance) {
    throw Error(ErrorCode::ParallelDirections, "splitting directions are parallel");
  }
}

Vec2 Splitting::coordinates(Vec2 v) const {
  const Vec2 e = e_.vec();
  const Vec2 f = f_.vec();
  const double det = cross(e, f);
  return {cross(v, f) / det, cross(e, v) / det};
}

Cone::Cone(Splitting splitting, double half_width, ConeFlavor flavor)
    : splitting_(splitting), half_width_(half_width), flavor_(flavor) {
  if (!(half_width > 0.0 && half_width <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "cone half-width must lie in (0, 1]");
  }
}

double angle(const Direction& e, const Direction& f) {
  const double along = dot(e.vec(), f.vec());
  const double across = cross(e.vec(), f.vec());
  if (std::abs(across) <= kParallelTolerance) {
    throw Error(ErrorCode::ParallelDirections, "angle of parallel directions");
  }
  if (along == 0.0) return kInfiniteAngle;
  return std::abs(across / along);
}

double restricted_norm(const Mat2& m, const Direction& d) { return (m * d.vec()).norm(); }

bool cone_contains(const Cone& c, Vec2 v) {
  if (v.x == 0.0 && v.y == 0.0) {
    throw Error(ErrorCode::ZeroVector, "cone membership of the zero vector");
  }
  const Vec2 st = c.splitting().coordinates(v);
  const double along_e = std::abs(st.x);
  const double along_f = std::abs(st.y);
  const double slack = 1e-12 * (along_e + along_f);
  if (c.flavor() == ConeFlavor::cu) return along_e <= c.half_width() * along_f + slack;
  return along_f <= c.half_width() * along_e + slack;
}

double cone_image_halfwidth(const Mat2& m, const Cone& c, const Splitting& image_splitting) {
  const Vec2 e = c.splitting().e().vec();
  const Vec2 f = c.splitting().f().vec();
  const double a = c.half_width();
  const bool cu = c.flavor() == ConeFlavor::cu;

  const Vec2 rays[2] = {cu ? a * e + f : e + a * f, cu ? -a * e + f : e - a * f};
  double num[2];
  double den[2];
  for (int k = 0; k < 2; ++k) {
    const Vec2 st = image_splitting.coordinates(m * rays[k]);
    num[k] = cu ? st.x : st.y;
    den[k] = cu ? st.y : st.x;
  }
  // The denominator is linear along the cone, so a sign change means some
  // vector of the cone lands on the complementary axis.
  if (den[0] * den[1] <= 0.0) {
    throw Error(ErrorCode::DegenerateImage, "cone image reaches the complementary axis");
  }
  return std::max(std::abs(num[0] / den[0]), std::abs(num[1] / den[1]));
}

Vec2 eigenvector(const Mat2& m, double mu) {
  const Vec2 r1{m.a - mu, m.b};
  const Vec2 r2{m.c, m.d - mu};
  const Vec2 r = r1.norm() >= r2.norm() ? r1 : r2;
  const double scale = std::max(1.0, m.max_abs());
  if (r.norm() <= 1e-300 * scale) return {1.0, 0.0};
  const Vec2 v{-r.y, r.x};
  return v / v.norm();
}

Splitting eigen_splitting(const Mat2& m) {
  const auto [lo, hi] = eigenvalues(m);
  if (lo.imag() != 0.0 || hi.imag() != 0.0) {
    throw Error(ErrorCode::NotASaddle, "complex eigenvalues have no real splitting");
  }
  if (std::abs(hi.real()) - std::abs(lo.real()) <= 1e-14 * std::abs(hi.real())) {
    throw Error(ErrorCode::NotASaddle, "eigenvalues of equal modulus");
  }
  return Splitting(Direction::from(eigenvector(m, lo.real())),
                   Direction::from(eigenvector(m, hi.real())));
}

}  // namespace surfdyn
