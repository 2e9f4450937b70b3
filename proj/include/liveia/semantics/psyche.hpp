#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "liveia/optics/beam.hpp"
#include "liveia/optics/trace.hpp"

namespace liveia::semantics {

using optics::Vec3;

enum class Placement { surface, interior };

inline constexpr std::string_view to_string(Placement p) {
  return p == Placement::surface ? "surface" : "interior";
}

/// An aspect of oneself that one avoids; compiles to one fracture. The
/// optional fields override the compiled geometry and interaction mode.
struct ShadowAspect {
  std::string label;
  double severity = 0.5;  // (0, 1]
  Placement placement = Placement::interior;
  std::optional<Vec3> axis;   // direction from the centre, normalized on compile
  std::optional<double> tilt;  // disc normal vs. axis, radians
  std::optional<optics::FractureMode> mode;
  std::optional<double> opacity;

  friend bool operator==(const ShadowAspect&, const ShadowAspect&) = default;
};

struct PsycheAttributes {
  std::string name;
  double vitality = 1.0;
  double accessibility = 1.0;
  double depth = 0.5;
  std::map<std::string, double> traits;
  std::vector<ShadowAspect> shadow_aspects;

  friend bool operator==(const PsycheAttributes&, const PsycheAttributes&) = default;
};

enum class PatternId { bands, spots, marble, uniform };

inline constexpr std::string_view to_string(PatternId p) {
  switch (p) {
    case PatternId::bands: return "bands";
    case PatternId::spots: return "spots";
    case PatternId::marble: return "marble";
    case PatternId::uniform: return "uniform";
  }
  return "uniform";
}

struct SurfacePattern {
  PatternId id = PatternId::uniform;
  double base_hue = 0.0;    // degrees
  double accent_hue = 0.0;  // degrees
  double scale = 1.0;
  std::uint64_t seed = 0;

  friend bool operator==(const SurfacePattern&, const SurfacePattern&) = default;
};

struct PsycheSphere {
  PsycheAttributes attributes;
  optics::ShellGeometry shell;
  double emitter_intensity = 0.0;
  std::vector<optics::Fracture> fractures;
  SurfacePattern pattern;

  const std::string& name() const { return attributes.name; }
  friend bool operator==(const PsycheSphere&, const PsycheSphere&) = default;
};

inline optics::SceneSphere to_scene_sphere(const PsycheSphere& p) { return {p.shell, p.fractures}; }

enum class ThoughtState { spark, active };

struct Thought {
  double valence = 0.5;
  double clarity = 0.5;
  std::vector<optics::WaveComponent> components;
  ThoughtState state = ThoughtState::active;

  friend bool operator==(const Thought&, const Thought&) = default;
};

/// Symmetric pairwise comfort; a missing pair means 0.
class ComfortRelation {
 public:
  using Key = std::pair<std::string, std::string>;

  static Key key(const std::string& a, const std::string& b) {
    return a < b ? Key{a, b} : Key{b, a};
  }

  double get(const std::string& a, const std::string& b) const {
    const auto it = pairs_.find(key(a, b));
    return it == pairs_.end() ? 0.0 : it->second;
  }

  void set(const std::string& a, const std::string& b, double comfort) {
    if (comfort == 0.0) {
      pairs_.erase(key(a, b));
    } else {
      pairs_[key(a, b)] = comfort;
    }
  }

  void erase_all(const std::string& name) {
    for (auto it = pairs_.begin(); it != pairs_.end();) {
      it = (it->first.first == name || it->first.second == name) ? pairs_.erase(it) : std::next(it);
    }
  }

  const std::map<Key, double>& pairs() const { return pairs_; }
  friend bool operator==(const ComfortRelation&, const ComfortRelation&) = default;

 private:
  std::map<Key, double> pairs_;
};

inline void validate(const PsycheAttributes& a) {
  auto in_unit = [&](double v, const char* what) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw Error(ErrorCode::invalid_argument, std::string(what) + " must lie in [0, 1]");
    }
  };
  if (a.name.empty()) throw Error(ErrorCode::invalid_argument, "psyche name must be non-empty");
  in_unit(a.vitality, "vitality");
  in_unit(a.accessibility, "accessibility");
  in_unit(a.depth, "depth");
  for (const auto& [k, v] : a.traits) in_unit(v, ("trait " + k).c_str());
  for (const auto& s : a.shadow_aspects) {
    if (!(s.severity > 0.0 && s.severity <= 1.0)) {
      throw Error(ErrorCode::invalid_argument, "shadow severity must lie in (0, 1]");
    }
    if (s.axis && !(optics::norm(*s.axis) > 0.0)) {
      throw Error(ErrorCode::invalid_argument, "shadow axis must be non-zero");
    }
    if (s.opacity) in_unit(*s.opacity, "shadow opacity");
    if (s.tilt && !(*s.tilt >= 0.0 && *s.tilt < optics::kPi / 2)) {
      throw Error(ErrorCode::invalid_argument, "shadow tilt must lie in [0, pi/2)");
    }
  }
  for (std::size_t i = 0; i < a.shadow_aspects.size(); ++i) {
    for (std::size_t j = i + 1; j < a.shadow_aspects.size(); ++j) {
      if (a.shadow_aspects[i].label == a.shadow_aspects[j].label) {
        throw Error(ErrorCode::invalid_argument, "duplicate shadow label " + a.shadow_aspects[i].label);
      }
    }
  }
}

inline void validate(const Thought& t) {
  if (!(t.valence >= -1.0 && t.valence <= 1.0)) {
    throw Error(ErrorCode::invalid_argument, "valence must lie in [-1, 1]");
  }
  if (!(t.clarity >= 0.0 && t.clarity <= 1.0)) {
    throw Error(ErrorCode::invalid_argument, "clarity must lie in [0, 1]");
  }
  if (t.state == ThoughtState::active && t.components.empty()) {
    throw Error(ErrorCode::invalid_argument, "an active thought needs at least one waveform component");
  }
  for (const auto& c : t.components) optics::validate(c);
}

}  // namespace liveia::semantics
