#pragma once

#include <algorithm>
#include <cmath>
#include <optional>

#include "liveia/optics/vec3.hpp"

// Interface physics at a single dielectric boundary. All directions are unit
// vectors; `normal` always faces the incident side (incident·normal < 0).

namespace liveia::optics {

namespace detail {
inline void check_incidence(const Vec3& incident, const Vec3& normal) {
  require_unit(incident, "incident direction");
  require_unit(normal, "surface normal");
  if (!(dot(incident, normal) < 0.0)) {
    throw Error(ErrorCode::invalid_argument, "normal must face the incident side");
  }
}

inline void check_index(double n) {
  if (!(n >= 1.0)) throw Error(ErrorCode::invalid_argument, "refractive index must be >= 1");
}
}  // namespace detail

/// Refracted direction, or std::nullopt on total internal reflection.
inline std::optional<Vec3> refract(const Vec3& incident, const Vec3& normal, double n1, double n2) {
  detail::check_incidence(incident, normal);
  detail::check_index(n1);
  detail::check_index(n2);
  const double eta = n1 / n2;
  const double cos_i = -dot(incident, normal);
  const double sin2_t = eta * eta * std::max(0.0, 1.0 - cos_i * cos_i);
  if (sin2_t > 1.0) return std::nullopt;
  const double cos_t = std::sqrt(1.0 - sin2_t);
  return normalized(incident * eta + normal * (eta * cos_i - cos_t));
}

inline Vec3 reflect(const Vec3& incident, const Vec3& normal) {
  detail::check_incidence(incident, normal);
  return incident - normal * (2.0 * dot(incident, normal));
}

inline std::optional<double> critical_angle(double n1, double n2) {
  detail::check_index(n1);
  detail::check_index(n2);
  if (!(n1 > n2)) return std::nullopt;
  return std::asin(n2 / n1);
}

/// Unpolarized Fresnel reflectance (mean of s and p). Exactly 1 past the
/// critical angle, exactly 0 for index-matched media.
inline double fresnel_unpolarized(double theta1, double n1, double n2) {
  if (!(theta1 >= 0.0 && theta1 <= kPi / 2 + 1e-12)) {
    throw Error(ErrorCode::invalid_argument, "incidence angle must lie in [0, pi/2]");
  }
  detail::check_index(n1);
  detail::check_index(n2);
  if (n1 == n2) return 0.0;
  const double sin_t = n1 / n2 * std::sin(theta1);
  if (sin_t >= 1.0) return 1.0;
  const double cos_i = std::cos(theta1);
  const double cos_t = std::sqrt(1.0 - sin_t * sin_t);
  const double rs = (n1 * cos_i - n2 * cos_t) / (n1 * cos_i + n2 * cos_t);
  const double rp = (n1 * cos_t - n2 * cos_i) / (n1 * cos_t + n2 * cos_i);
  return std::clamp(0.5 * (rs * rs + rp * rp), 0.0, 1.0);
}

/// Beer-Lambert style transmittance: I·(1-opacity)^(path/reference).
inline double attenuate(double intensity_in, double opacity, double path_length,
                        double reference_length) {
  if (!(opacity >= 0.0 && opacity <= 1.0)) {
    throw Error(ErrorCode::invalid_argument, "opacity must lie in [0, 1]");
  }
  if (!(path_length > 0.0) || !(reference_length > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "lengths must be positive");
  }
  if (opacity == 0.0) return intensity_in;
  if (opacity == 1.0) return 0.0;
  return intensity_in * std::pow(1.0 - opacity, path_length / reference_length);
}

}  // namespace liveia::optics
