#pragma once

#include <cmath>
#include <compare>

namespace cornerflow {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2& operator+=(const Vec2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr Vec2& operator-=(const Vec2& o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  constexpr Vec2& operator*=(double s) {
    x *= s;
    y *= s;
    return *this;
  }

  friend constexpr Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
  friend constexpr Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
  friend constexpr Vec2 operator-(const Vec2& a) { return {-a.x, -a.y}; }
  friend constexpr Vec2 operator*(Vec2 a, double s) { return a *= s; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return a *= s; }
  friend constexpr Vec2 operator/(const Vec2& a, double s) { return {a.x / s, a.y / s}; }

  // Lexicographic order (x first); used for canonical vertex numbering.
  friend constexpr auto operator<=>(const Vec2&, const Vec2&) = default;
};

constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) { return std::hypot(a.x, a.y); }

// 2x2 matrix stored row-major: m[i][j] = d(component i)/d(x_j) for gradients.
struct Mat2 {
  double a[2][2] = {{0.0, 0.0}, {0.0, 0.0}};

  constexpr double operator()(int i, int j) const { return a[i][j]; }
  constexpr double& operator()(int i, int j) { return a[i][j]; }

  constexpr Mat2& operator+=(const Mat2& o) {
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) a[i][j] += o.a[i][j];
    return *this;
  }
  constexpr Mat2& operator*=(double s) {
    for (auto& row : a)
      for (double& v : row) v *= s;
    return *this;
  }
  friend constexpr Mat2 operator+(Mat2 l, const Mat2& r) { return l += r; }
  friend constexpr Mat2 operator-(Mat2 l, const Mat2& r) {
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) l.a[i][j] -= r.a[i][j];
    return l;
  }
  friend constexpr Mat2 operator*(Mat2 m, double s) { return m *= s; }
  friend constexpr Mat2 operator*(double s, Mat2 m) { return m *= s; }
};

inline double frobenius_sq(const Mat2& m) {
  return m(0, 0) * m(0, 0) + m(0, 1) * m(0, 1) + m(1, 0) * m(1, 0) + m(1, 1) * m(1, 1);
}

// Signed area of triangle (a, b, c); positive for counterclockwise order.
constexpr double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) { return 0.5 * cross(b - a, c - a); }

// Euclidean distance from p to the closed segment [a, b].
inline double distance_to_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  double s = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
  s = s < 0.0 ? 0.0 : (s > 1.0 ? 1.0 : s);
  return norm(p - (a + s * ab));
}

}  // namespace cornerflow
