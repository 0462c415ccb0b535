#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <utility>

#include "surfdyn/error.hpp"

namespace surfdyn {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2() = default;
  constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

  constexpr Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
  constexpr Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
  constexpr Vec2& operator*=(double s) { x *= s; y *= s; return *this; }

  double norm() const { return std::hypot(x, y); }
  friend constexpr bool operator==(Vec2, Vec2) = default;
};

constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
constexpr Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
constexpr Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
constexpr Vec2 operator*(Vec2 v, double s) { return {s * v.x, s * v.y}; }
constexpr Vec2 operator/(Vec2 v, double s) { return {v.x / s, v.y / s}; }
constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
constexpr Vec2 perp(Vec2 v) { return {-v.y, v.x}; }

// Row-major 2x2 matrix [[a, b], [c, d]].
struct Mat2 {
  double a = 1.0, b = 0.0, c = 0.0, d = 1.0;

  constexpr Mat2() = default;
  constexpr Mat2(double a_, double b_, double c_, double d_)
      : a(a_), b(b_), c(c_), d(d_) {}

  static constexpr Mat2 identity() { return {}; }
  static constexpr Mat2 diag(double p, double q) { return {p, 0.0, 0.0, q}; }
  // Matrix whose columns are u and v.
  static constexpr Mat2 columns(Vec2 u, Vec2 v) { return {u.x, v.x, u.y, v.y}; }

  constexpr double det() const { return a * d - b * c; }
  constexpr double trace() const { return a + d; }
  constexpr Mat2 transpose() const { return {a, c, b, d}; }
  Mat2 inverse() const;

  // Largest singular value.
  double norm() const;
  // Entrywise max-abs, used for closeness checks.
  double max_abs() const;

  friend constexpr bool operator==(const Mat2&, const Mat2&) = default;
};

constexpr Vec2 operator*(const Mat2& m, Vec2 v) {
  return {m.a * v.x + m.b * v.y, m.c * v.x + m.d * v.y};
}
constexpr Mat2 operator*(const Mat2& m, const Mat2& n) {
  return {m.a * n.a + m.b * n.c, m.a * n.b + m.b * n.d,
          m.c * n.a + m.d * n.c, m.c * n.b + m.d * n.d};
}
constexpr Mat2 operator+(const Mat2& m, const Mat2& n) {
  return {m.a + n.a, m.b + n.b, m.c + n.c, m.d + n.d};
}
constexpr Mat2 operator-(const Mat2& m, const Mat2& n) {
  return {m.a - n.a, m.b - n.b, m.c - n.c, m.d - n.d};
}
constexpr Mat2 operator*(double s, const Mat2& m) {
  return {s * m.a, s * m.b, s * m.c, s * m.d};
}

// Eigenvalues ordered by modulus (first has the smaller modulus).
std::pair<std::complex<double>, std::complex<double>> eigenvalues(const Mat2& m);

struct SingularValues {
  double max;
  double min;
  Vec2 major;  // right singular vector of `max`, unit
  Vec2 minor;  // right singular vector of `min`, unit
};
// Closed-form 2x2 SVD. The major axis comes from the Gram matrix angle and the
// minor axis is its perpendicular, which keeps both accurate for products with
// very large condition numbers.
SingularValues singular_values(const Mat2& m);

// A line through the origin of the tangent plane: unit vector with the first
// nonzero component positive.
class Direction {
 public:
  static Direction from(Vec2 v);
  static Direction from(double x, double y) { return from(Vec2{x, y}); }

  Vec2 vec() const { return v_; }
  double x() const { return v_.x; }
  double y() const { return v_.y; }

  // |sin| of the angle between the two lines.
  double separation(const Direction& o) const { return std::abs(cross(v_, o.v_)); }

  friend bool operator==(const Direction&, const Direction&) = default;

 private:
  explicit Direction(Vec2 v) : v_(v) {}
  Vec2 v_;
};

inline constexpr double kParallelTolerance = 1e-12;

class Splitting {
 public:
  Splitting(Direction e, Direction f);

  const Direction& e() const { return e_; }
  const Direction& f() const { return f_; }

  // Coordinates (s, t) with v = s·e + t·f.
  Vec2 coordinates(Vec2 v) const;

 private:
  Direction e_;
  Direction f_;
};

enum class ConeFlavor { cu, cs };

class Cone {
 public:
  Cone(Splitting splitting, double half_width, ConeFlavor flavor);

  const Splitting& splitting() const { return splitting_; }
  double half_width() const { return half_width_; }
  ConeFlavor flavor() const { return flavor_; }

 private:
  Splitting splitting_;
  double half_width_;
  ConeFlavor flavor_;
};

inline constexpr double kInfiniteAngle = std::numeric_limits<double>::infinity();

// Norm of L : E -> E^perp with F = graph(L), i.e. |tan| of the geometric
// angle between the lines. Orthogonal lines give kInfiniteAngle.
double angle(const Direction& e, const Direction& f);

// ||m v|| for the unit vector v spanning d.
double restricted_norm(const Mat2& m, const Direction& d);

bool cone_contains(const Cone& c, Vec2 v);

// Smallest a' such that m maps `c` into the cone of half-width a' (same flavor)
// over `image_splitting`.
double cone_image_halfwidth(const Mat2& m, const Cone& c,
                            const Splitting& image_splitting);

// Eigen splitting (E = smaller-modulus eigenline, F = larger) of a matrix with
// real, distinct-modulus eigenvalues. Throws NotASaddle otherwise.
Splitting eigen_splitting(const Mat2& m);

// Unit eigenvector of m for the real eigenvalue mu.
Vec2 eigenvector(const Mat2& m, double mu);

}  // namespace surfdyn
