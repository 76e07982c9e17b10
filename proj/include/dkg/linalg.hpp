#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>

namespace dkg {

using cplx = std::complex<double>;

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
  constexpr double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }

  friend constexpr Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend constexpr Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend constexpr Vec3 operator-(Vec3 a) { return {-a.x, -a.y, -a.z}; }
  friend constexpr Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
  friend constexpr Vec3 operator*(Vec3 a, double s) { return s * a; }
  friend constexpr Vec3 operator/(Vec3 a, double s) { return {a.x / s, a.y / s, a.z / s}; }
  Vec3& operator+=(Vec3 b) { return *this = *this + b; }
  Vec3& operator-=(Vec3 b) { return *this = *this - b; }
  friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

constexpr double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(Vec3 a) { return std::sqrt(dot(a, a)); }

/// Japanese bracket <a> = sqrt(1 + |a|^2).
inline double bracket(double a) { return std::sqrt(1.0 + a * a); }
inline double bracket(Vec3 a) { return std::sqrt(1.0 + dot(a, a)); }

/// Dense 4x4 complex matrix, row-major.
struct Mat4 {
  std::array<std::array<cplx, 4>, 4> a{};

  static Mat4 identity() {
    Mat4 m;
    for (int i = 0; i < 4; ++i) m.a[i][i] = 1.0;
    return m;
  }

  cplx& operator()(int i, int j) { return a[i][j]; }
  const cplx& operator()(int i, int j) const { return a[i][j]; }

  friend Mat4 operator+(const Mat4& l, const Mat4& r) {
    Mat4 m;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) m.a[i][j] = l.a[i][j] + r.a[i][j];
    return m;
  }
  friend Mat4 operator-(const Mat4& l, const Mat4& r) {
    Mat4 m;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) m.a[i][j] = l.a[i][j] - r.a[i][j];
    return m;
  }
  friend Mat4 operator*(cplx s, const Mat4& r) {
    Mat4 m;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) m.a[i][j] = s * r.a[i][j];
    return m;
  }
  friend Mat4 operator*(const Mat4& l, const Mat4& r) {
    Mat4 m;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        cplx acc = 0.0;
        for (int k = 0; k < 4; ++k) acc += l.a[i][k] * r.a[k][j];
        m.a[i][j] = acc;
      }
    return m;
  }
  friend bool operator==(const Mat4&, const Mat4&) = default;

  Mat4 adjoint() const {
    Mat4 m;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) m.a[i][j] = std::conj(a[j][i]);
    return m;
  }

  std::array<cplx, 4> apply(const std::array<cplx, 4>& v) const {
    std::array<cplx, 4> out{};
    for (int i = 0; i < 4; ++i)
      for (int k = 0; k < 4; ++k) out[i] += a[i][k] * v[k];
    return out;
  }

  /// Largest entrywise modulus.
  double max_abs() const {
    double m = 0.0;
    for (const auto& row : a)
      for (const auto& e : row) m = std::max(m, std::abs(e));
    return m;
  }
};

}  // namespace dkg
