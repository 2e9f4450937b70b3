#pragma once

#include <cmath>
#include <string>

#include "liveia/core/error.hpp"

namespace liveia::optics {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Vec3() = default;
  constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

  constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3 operator-() const { return {-x, -y, -z}; }
  constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  constexpr Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }

  friend constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }
  friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kUnitTolerance = 1e-9;

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

inline Vec3 normalized(const Vec3& v) {
  const double n = norm(v);
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw Error(ErrorCode::invalid_argument, "cannot normalize a zero or non-finite vector");
  }
  return v / n;
}

inline bool is_unit(const Vec3& v, double tol = kUnitTolerance) {
  return std::abs(norm(v) - 1.0) <= tol;
}

inline void require_unit(const Vec3& v, const char* what) {
  if (!is_unit(v)) {
    throw Error(ErrorCode::invalid_argument, std::string(what) + " must be unit-length");
  }
}

/// Angle in [0, π] between two non-zero vectors. Uses atan2 so values near
/// 0 and π keep full precision.
inline double angle_between(const Vec3& a, const Vec3& b) {
  return std::atan2(norm(cross(a, b)), dot(a, b));
}

/// Deterministic unit vector perpendicular to `v` (v need not be unit).
inline Vec3 any_perpendicular(const Vec3& v) {
  const double ax = std::abs(v.x), ay = std::abs(v.y), az = std::abs(v.z);
  Vec3 basis{1, 0, 0};
  if (ay <= ax && ay <= az) {
    basis = {0, 1, 0};
  } else if (az <= ax && az <= ay) {
    basis = {0, 0, 1};
  }
  return normalized(cross(v, basis));
}

/// Rodrigues rotation of `v` about unit `axis` by `angle` (right-handed).
inline Vec3 rotate(const Vec3& v, const Vec3& axis, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return v * c + cross(axis, v) * s + axis * (dot(axis, v) * (1.0 - c));
}

struct Ray {
  Vec3 origin;
  Vec3 direction;  // unit

  Vec3 at(double t) const { return origin + direction * t; }
  friend bool operator==(const Ray&, const Ray&) = default;
};

}  // namespace liveia::optics
