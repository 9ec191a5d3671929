#pragma once
// Minimal 2D linear algebra used throughout: vectors, 2x2 matrices, rotations.
#include <array>
#include <cmath>
#include <complex>

namespace cycleperturb {

struct Vec2 {
  double x = 0.0, y = 0.0;

  double& operator[](int i) { return i == 0 ? x : y; }
  double operator[](int i) const { return i == 0 ? x : y; }

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator-() const { return {-x, -y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator/(double s) const { return {x / s, y / s}; }
  Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
  Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
  Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }
inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& v) { return std::hypot(v.x, v.y); }
inline double norm_sq(const Vec2& v) { return v.x * v.x + v.y * v.y; }

// 90-degree counterclockwise rotation: J v with J = [[0,-1],[1,0]].
inline Vec2 perp(const Vec2& v) { return {-v.y, v.x}; }

// Row-major 2x2 matrix.
struct Mat2 {
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0;  // [[a,b],[c,d]]

  static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  // Matrix with the given columns.
  static Mat2 from_columns(const Vec2& c1, const Vec2& c2) { return {c1.x, c2.x, c1.y, c2.y}; }
  static Mat2 from_rows(const Vec2& r1, const Vec2& r2) { return {r1.x, r1.y, r2.x, r2.y}; }

  Vec2 col(int i) const { return i == 0 ? Vec2{a, c} : Vec2{b, d}; }
  Vec2 row(int i) const { return i == 0 ? Vec2{a, b} : Vec2{c, d}; }

  Mat2 operator+(const Mat2& o) const { return {a + o.a, b + o.b, c + o.c, d + o.d}; }
  Mat2 operator-(const Mat2& o) const { return {a - o.a, b - o.b, c - o.c, d - o.d}; }
  Mat2 operator*(double s) const { return {a * s, b * s, c * s, d * s}; }
  Vec2 operator*(const Vec2& v) const { return {a * v.x + b * v.y, c * v.x + d * v.y}; }
  Mat2 operator*(const Mat2& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
  }

  Mat2 transpose() const { return {a, c, b, d}; }
  double det() const { return a * d - b * c; }
  double trace() const { return a + d; }
  Mat2 inverse() const {
    const double dt = det();
    return {d / dt, -b / dt, -c / dt, a / dt};
  }
  // Frobenius norm.
  double norm() const { return std::sqrt(a * a + b * b + c * c + d * d); }
};

// Solve M u = v for u (2x2 direct).
inline Vec2 solve(const Mat2& m, const Vec2& v) {
  const double dt = m.det();
  return {(m.d * v.x - m.b * v.y) / dt, (m.a * v.y - m.c * v.x) / dt};
}

// Eigenvalues of a 2x2 matrix (possibly complex).
inline std::array<std::complex<double>, 2> eigenvalues(const Mat2& m) {
  const double tr = m.trace(), dt = m.det();
  const std::complex<double> disc = std::sqrt(std::complex<double>(tr * tr / 4.0 - dt));
  return {tr / 2.0 + disc, tr / 2.0 - disc};
}

}  // namespace cycleperturb
