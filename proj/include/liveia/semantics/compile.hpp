#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <string_view>

#include "liveia/semantics/hue_table.hpp"
#include "liveia/semantics/psyche.hpp"

namespace liveia::semantics {

/// Linear attribute -> optics constants. Exposed so callers can audit the mapping.
struct CompileConstants {
  double max_emitter = 1.0;
  double index_base = 1.3;
  double index_span = 0.4;
  double skin_base = 0.05;       // fraction of outer radius
  double skin_guarded = 0.10;    // extra skin at accessibility 0
  double default_tilt = optics::kPi / 6;
  double refract_per_severity = 0.2;
};

inline constexpr double kMinThoughtIntensity = 0.01;
inline constexpr double kMaxThoughtDivergence = optics::kPi / 6;

inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 14695981039346656037ull) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline double trait_hue(const std::string& name, const HueTable& table = default_hue_table()) {
  const auto it = table.find(name);
  if (it != table.end()) return it->second;
  return static_cast<double>(fnv1a(name) % 360);
}

inline SurfacePattern trait_pattern(const std::map<std::string, double>& traits,
                                    const HueTable& table = default_hue_table()) {
  double total = 0.0;
  for (const auto& [_, v] : traits) total += v;
  if (traits.empty() || total == 0.0) return SurfacePattern{};

  // Strongest first; ties broken by name.
  std::vector<std::pair<std::string, double>> ranked(traits.begin(), traits.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  SurfacePattern p;
  static constexpr PatternId kIds[] = {PatternId::bands, PatternId::spots, PatternId::marble};
  p.id = kIds[fnv1a(ranked[0].first) % 3];
  p.base_hue = trait_hue(ranked[0].first, table);
  p.accent_hue = ranked.size() > 1 ? trait_hue(ranked[1].first, table) : std::fmod(p.base_hue + 180.0, 360.0);
  p.scale = total / static_cast<double>(traits.size());
  std::uint64_t h = fnv1a("");
  for (const auto& [k, v] : traits) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    h = fnv1a(k, h);
    h = fnv1a("=", h);
    h = fnv1a(std::string_view(buf, r.ptr - buf), h);
    h = fnv1a(";", h);
  }
  p.seed = h;
  return p;
}

/// Fixed low-discrepancy axis sequence for shadow aspects without an
/// explicit axis; index 0 is +x.
inline Vec3 default_shadow_axis(std::size_t k) {
  constexpr double golden = 0.61803398874989484820;
  constexpr double golden_angle = 2.39996322972865332223;
  double u = 0.5 + static_cast<double>(k) * golden;
  u -= std::floor(u);
  const double z = 1.0 - 2.0 * u;
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  const double phi = static_cast<double>(k) * golden_angle;
  return optics::normalized({r * std::cos(phi), r * std::sin(phi), z});
}

inline PsycheSphere compile_psyche(const PsycheAttributes& attrs, const Vec3& position, double outer_radius,
                                   const CompileConstants& k = {}) {
  if (!(outer_radius > 0.0)) throw Error(ErrorCode::invalid_argument, "outer_radius must be > 0");
  validate(attrs);

  PsycheSphere p;
  p.attributes = attrs;
  p.emitter_intensity = k.max_emitter * attrs.vitality;
  p.shell.center = position;
  p.shell.outer_radius = outer_radius;
  p.shell.shell_thickness =
      k.skin_base * outer_radius + k.skin_guarded * outer_radius * (1.0 - attrs.accessibility);
  p.shell.refractive_index = k.index_base + k.index_span * attrs.depth;
  p.shell.shell_opacity = 1.0 - attrs.accessibility;

  const double inner = p.shell.inner_radius();
  for (std::size_t i = 0; i < attrs.shadow_aspects.size(); ++i) {
    const ShadowAspect& s = attrs.shadow_aspects[i];
    const Vec3 axis = s.axis ? optics::normalized(*s.axis) : default_shadow_axis(i);
    const double tilt = s.tilt.value_or(k.default_tilt);
    const double dist = s.placement == Placement::interior ? 0.5 * inner : 0.5 * (inner + outer_radius);
    optics::Fracture f;
    f.label = s.label;
    f.center = position + axis * dist;
    f.normal = optics::normalized(axis * std::cos(tilt) + optics::any_perpendicular(axis) * std::sin(tilt));
    f.radius = s.severity * inner * 0.5;
    f.mode = s.mode.value_or(optics::RefractMode{k.refract_per_severity * s.severity});
    f.opacity = s.opacity.value_or(s.severity);
    optics::validate(f, p.shell);
    p.fractures.push_back(std::move(f));
  }
  p.pattern = trait_pattern(attrs.traits);
  return p;
}

inline PsycheSphere recompile(const PsycheSphere& p) {
  return compile_psyche(p.attributes, p.shell.center, p.shell.outer_radius);
}

inline optics::Beam compile_thought(const Thought& t, const Vec3& origin, const Vec3& direction,
                                    optics::BeamTag tag = optics::BeamTag::thought) {
  if (t.state == ThoughtState::spark) {
    throw Error(ErrorCode::state_error, "a spark is at rest and is not emitted");
  }
  validate(t);
  optics::require_unit(direction, "thought direction");
  optics::Beam b;
  b.axis = {origin, direction};
  b.intensity = std::max(std::abs(t.valence), kMinThoughtIntensity);
  b.divergence = (1.0 - t.clarity) * kMaxThoughtDivergence;
  b.waveform = t.components;
  b.tag = tag;
  return b;
}

/// Render-space silhouette blur between two psyches at a given surface gap.
inline double comfort_blur_radius(double comfort, double surface_gap, double outer_radius) {
  if (!(comfort >= 0.0 && comfort <= 1.0)) {
    throw Error(ErrorCode::invalid_argument, "comfort must lie in [0, 1]");
  }
  if (!(surface_gap >= 0.0)) throw Error(ErrorCode::invalid_argument, "surface gap must be >= 0");
  return 0.15 * outer_radius * comfort * std::max(0.0, 1.0 - surface_gap / outer_radius);
}

}  // namespace liveia::semantics
