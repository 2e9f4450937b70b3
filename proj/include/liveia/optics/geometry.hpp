#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "liveia/optics/vec3.hpp"

namespace liveia::optics {

/// Solid dielectric ball of `refractive_index` whose outermost
/// `shell_thickness` is an index-matched absorbing skin.
struct ShellGeometry {
  Vec3 center;
  double outer_radius = 1.0;
  double shell_thickness = 0.1;
  double refractive_index = 1.5;
  double shell_opacity = 0.0;

  double inner_radius() const { return outer_radius - shell_thickness; }

  friend bool operator==(const ShellGeometry&, const ShellGeometry&) = default;
};

inline void validate(const ShellGeometry& s) {
  if (!(s.outer_radius > 0.0)) throw Error(ErrorCode::invalid_argument, "outer_radius must be > 0");
  if (!(s.shell_thickness > 0.0 && s.shell_thickness < s.outer_radius)) {
    throw Error(ErrorCode::invalid_argument, "shell_thickness must lie in (0, outer_radius)");
  }
  if (!(s.refractive_index >= 1.0)) {
    throw Error(ErrorCode::invalid_argument, "refractive_index must be >= 1");
  }
  if (!(s.shell_opacity >= 0.0 && s.shell_opacity <= 1.0)) {
    throw Error(ErrorCode::invalid_argument, "shell_opacity must lie in [0, 1]");
  }
}

struct RefractMode {
  double delta_index = 0.0;
  friend bool operator==(const RefractMode&, const RefractMode&) = default;
};
struct MirrorMode {
  friend bool operator==(const MirrorMode&, const MirrorMode&) = default;
};
struct ScatterMode {
  int fan_count = 7;
  double cone_half_angle = 0.2;
  friend bool operator==(const ScatterMode&, const ScatterMode&) = default;
};

using FractureMode = std::variant<RefractMode, MirrorMode, ScatterMode>;

inline const char* mode_name(const FractureMode& m) {
  switch (m.index()) {
    case 0: return "refract";
    case 1: return "mirror";
    default: return "scatter";
  }
}

/// Oriented disc defect inside a sphere.
struct Fracture {
  std::string label;
  Vec3 center;
  Vec3 normal{0, 0, 1};
  double radius = 0.1;
  FractureMode mode = RefractMode{};
  double opacity = 0.0;

  friend bool operator==(const Fracture&, const Fracture&) = default;
};

inline void validate(const Fracture& f, const ShellGeometry& host) {
  require_unit(f.normal, "fracture normal");
  if (!(f.radius > 0.0)) throw Error(ErrorCode::invalid_argument, "fracture radius must be > 0");
  if (!(f.opacity >= 0.0 && f.opacity <= 1.0)) {
    throw Error(ErrorCode::invalid_argument, "fracture opacity must lie in [0, 1]");
  }
  if (!(norm(f.center - host.center) < host.outer_radius)) {
    throw Error(ErrorCode::invalid_argument,
                "fracture '" + f.label + "' center must lie strictly inside its sphere");
  }
  if (const auto* s = std::get_if<ScatterMode>(&f.mode)) {
    if (s->fan_count < 3 || s->fan_count % 2 == 0) {
      throw Error(ErrorCode::invalid_argument, "scatter fan_count must be odd and >= 3");
    }
    if (!(s->cone_half_angle > 0.0 && s->cone_half_angle < kPi / 2)) {
      throw Error(ErrorCode::invalid_argument, "scatter cone_half_angle must lie in (0, pi/2)");
    }
  }
  if (const auto* r = std::get_if<RefractMode>(&f.mode)) {
    if (!(host.refractive_index + r->delta_index >= 1.0)) {
      throw Error(ErrorCode::invalid_argument, "fracture index offset drops below 1");
    }
  }
}

enum class Surface { outer, inner };

struct ShellHit {
  double t;
  Surface surface;
  Vec3 normal;  // faces the incoming ray
};

namespace detail {
struct Roots {
  double t0, t1;
};

/// Roots of |o + t d - c|^2 = r^2; tangential (|disc| <= eps) counts as a miss.
inline std::optional<Roots> sphere_roots(const Ray& ray, const Vec3& c, double r, double eps) {
  const Vec3 oc = ray.origin - c;
  const double b = dot(oc, ray.direction);
  const double cc = dot(oc, oc) - r * r;
  const double disc = b * b - cc;
  if (disc <= eps) return std::nullopt;
  const double s = std::sqrt(disc);
  return Roots{-b - s, -b + s};
}
}  // namespace detail

/// All shell-surface crossings with t > eps, ascending.
inline std::vector<ShellHit> intersect_shell(const Ray& ray, const ShellGeometry& shell,
                                             double eps = 1e-9) {
  if (!(norm(ray.direction) > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "degenerate ray direction");
  }
  require_unit(ray.direction, "ray direction");
  std::vector<ShellHit> hits;
  auto add = [&](double radius, Surface surface) {
    const auto roots = detail::sphere_roots(ray, shell.center, radius, eps);
    if (!roots) return;
    for (double t : {roots->t0, roots->t1}) {
      if (t <= eps) continue;
      const Vec3 outward = (ray.at(t) - shell.center) / radius;
      const Vec3 facing = dot(outward, ray.direction) < 0.0 ? outward : -outward;
      hits.push_back({t, surface, facing});
    }
  };
  add(shell.outer_radius, Surface::outer);
  add(shell.inner_radius(), Surface::inner);
  std::sort(hits.begin(), hits.end(), [](const ShellHit& a, const ShellHit& b) { return a.t < b.t; });
  return hits;
}

enum class Side { front, back };

struct FractureHit {
  double t;
  Side side;  // front: ray arrives against the disc normal
};

inline std::optional<FractureHit> intersect_fracture(const Ray& ray, const Fracture& f,
                                                     double eps = 1e-9) {
  const double denom = dot(ray.direction, f.normal);
  if (std::abs(denom) < 1e-12) return std::nullopt;
  const double t = dot(f.center - ray.origin, f.normal) / denom;
  if (!(t > eps)) return std::nullopt;
  if (norm(ray.at(t) - f.center) > f.radius) return std::nullopt;
  return FractureHit{t, denom < 0.0 ? Side::front : Side::back};
}

/// Length of the part of [0, t_max] along `ray` lying inside the open ball.
inline double length_inside_ball(const Ray& ray, const Vec3& center, double radius, double t_max) {
  const auto roots = detail::sphere_roots(ray, center, radius, 0.0);
  if (!roots) return 0.0;
  const double lo = std::max(0.0, roots->t0);
  const double hi = std::min(t_max, roots->t1);
  return hi > lo ? hi - lo : 0.0;
}

}  // namespace liveia::optics
