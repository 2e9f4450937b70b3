#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <optional>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "liveia/core/error.hpp"
#include "liveia/optics/trace.hpp"
#include "liveia/semantics/compile.hpp"
#include "liveia/semantics/psyche.hpp"

namespace liveia::scenario {

using optics::Vec3;
using semantics::PsycheAttributes;
using semantics::PsycheSphere;
using semantics::ShadowAspect;
using semantics::Thought;

// -- canonical numbers --------------------------------------------------------

inline std::string format_real(double x) {
  char buf[40];
  const auto r = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 9);
  return std::string(buf, r.ptr);
}

/// Round to the nearest value with a 9-significant-digit decimal form, so
/// that printing and re-reading it is exact.
inline double quantize(double x) {
  if (!std::isfinite(x)) throw Error(ErrorCode::invalid_argument, "non-finite number");
  const std::string s = format_real(x);
  double y = 0.0;
  std::from_chars(s.data(), s.data() + s.size(), y);
  return y == 0.0 ? 0.0 : y;  // no negative zero
}

inline Vec3 quantize(const Vec3& v) { return {quantize(v.x), quantize(v.y), quantize(v.z)}; }

// -- scenario value -----------------------------------------------------------

struct Camera {
  Vec3 position{0.0, 0.0, 10.0};
  Vec3 look_at{0.0, 0.0, 0.0};
  Vec3 up{0.0, 1.0, 0.0};
  double fov_degrees = 45.0;

  friend bool operator==(const Camera&, const Camera&) = default;
};

/// Where an authored beam starts: a psyche (its centre) or a free point.
using Source = std::variant<std::string, Vec3>;

struct Emission {
  Source source = std::string{};
  Vec3 direction{0.0, 0.0, 1.0};
  Thought thought;
  optics::BeamTag tag = optics::BeamTag::thought;

  friend bool operator==(const Emission&, const Emission&) = default;
};

struct SetAttribute {
  std::string psyche;
  std::string key;  // vitality | accessibility | depth | radius | x | y | z | trait.<name>
  double value = 0.0;
  friend bool operator==(const SetAttribute&, const SetAttribute&) = default;
};

struct AddPsyche {
  PsycheAttributes attributes;
  Vec3 position;
  double radius = 1.0;
  friend bool operator==(const AddPsyche&, const AddPsyche&) = default;
};

struct RemovePsyche {
  std::string psyche;
  friend bool operator==(const RemovePsyche&, const RemovePsyche&) = default;
};

struct EmitBeam {
  Emission emission;
  friend bool operator==(const EmitBeam&, const EmitBeam&) = default;
};

struct RetireBeam {
  std::size_t index = 0;
  friend bool operator==(const RetireBeam&, const RetireBeam&) = default;
};

struct SetComfort {
  std::string a, b;
  double value = 0.0;
  friend bool operator==(const SetComfort&, const SetComfort&) = default;
};

struct Reorient {
  Vec3 axis{0.0, 1.0, 0.0};
  double angle = 0.0;  // radians, right-handed about axis
  Vec3 pivot;
  friend bool operator==(const Reorient&, const Reorient&) = default;
};

struct AddShadow {
  std::string psyche;
  ShadowAspect shadow;
  friend bool operator==(const AddShadow&, const AddShadow&) = default;
};

struct RemoveShadow {
  std::string psyche;
  std::string label;
  friend bool operator==(const RemoveShadow&, const RemoveShadow&) = default;
};

using Mutation = std::variant<SetAttribute, AddPsyche, RemovePsyche, EmitBeam, RetireBeam, SetComfort, Reorient,
                              AddShadow, RemoveShadow>;

inline std::string_view mutation_name(const Mutation& m) {
  static constexpr std::string_view names[] = {"set_attribute", "add_psyche",  "remove_psyche",
                                               "emit_beam",     "retire_beam", "set_comfort",
                                               "reorient",      "add_shadow",  "remove_shadow"};
  return names[m.index()];
}

struct Lineage {
  std::optional<std::string> parent_id;
  std::vector<Mutation> mutations;
  friend bool operator==(const Lineage&, const Lineage&) = default;
};

struct Scenario {
  std::string id;
  std::string name;
  std::vector<PsycheSphere> psyches;
  semantics::ComfortRelation comfort;
  std::vector<Emission> emissions;
  Camera camera;
  Lineage lineage;

  /// Number of mutations applied since the scenario was created or branched.
  std::size_t revision() const { return lineage.mutations.size(); }

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

inline const PsycheSphere* find_psyche(const Scenario& s, const std::string& name) {
  for (const auto& p : s.psyches) {
    if (p.name() == name) return &p;
  }
  return nullptr;
}

inline PsycheSphere* find_psyche(Scenario& s, const std::string& name) {
  return const_cast<PsycheSphere*>(find_psyche(static_cast<const Scenario&>(s), name));
}

// -- quantization of authored values ------------------------------------------

inline optics::FractureMode quantize(const optics::FractureMode& m) {
  if (const auto* r = std::get_if<optics::RefractMode>(&m)) return optics::RefractMode{quantize(r->delta_index)};
  if (const auto* s = std::get_if<optics::ScatterMode>(&m)) {
    return optics::ScatterMode{s->fan_count, quantize(s->cone_half_angle)};
  }
  return m;
}

inline ShadowAspect quantize(ShadowAspect a) {
  a.severity = quantize(a.severity);
  if (a.axis) a.axis = quantize(*a.axis);
  if (a.tilt) a.tilt = quantize(*a.tilt);
  if (a.mode) a.mode = quantize(*a.mode);
  if (a.opacity) a.opacity = quantize(*a.opacity);
  return a;
}

inline PsycheAttributes quantize(PsycheAttributes a) {
  a.vitality = quantize(a.vitality);
  a.accessibility = quantize(a.accessibility);
  a.depth = quantize(a.depth);
  for (auto& [_, v] : a.traits) v = quantize(v);
  for (auto& s : a.shadow_aspects) s = quantize(s);
  return a;
}

inline Thought quantize(Thought t) {
  t.valence = quantize(t.valence);
  t.clarity = quantize(t.clarity);
  for (auto& c : t.components) {
    c.frequency = quantize(c.frequency);
    c.amplitude = quantize(c.amplitude);
    c.phase = quantize(c.phase);
  }
  return t;
}

inline Emission quantize(Emission e) {
  if (auto* p = std::get_if<Vec3>(&e.source)) *p = quantize(*p);
  e.direction = quantize(e.direction);
  e.thought = quantize(e.thought);
  return e;
}

inline Camera quantize(Camera c) {
  return {quantize(c.position), quantize(c.look_at), quantize(c.up), quantize(c.fov_degrees)};
}

inline Mutation quantize(const Mutation& m) {
  return std::visit(
      [](auto x) -> Mutation {
        using T = decltype(x);
        if constexpr (std::is_same_v<T, SetAttribute> || std::is_same_v<T, SetComfort>) {
          x.value = quantize(x.value);
        } else if constexpr (std::is_same_v<T, AddPsyche>) {
          x.attributes = quantize(x.attributes);
          x.position = quantize(x.position);
          x.radius = quantize(x.radius);
        } else if constexpr (std::is_same_v<T, EmitBeam>) {
          x.emission = quantize(x.emission);
        } else if constexpr (std::is_same_v<T, Reorient>) {
          x.axis = quantize(x.axis);
          x.angle = quantize(x.angle);
          x.pivot = quantize(x.pivot);
        } else if constexpr (std::is_same_v<T, AddShadow>) {
          x.shadow = quantize(x.shadow);
        }
        return x;
      },
      m);
}

// -- validation ---------------------------------------------------------------

/// Compile a psyche from authored values, reporting range problems as a
/// validation error that names the psyche.
inline PsycheSphere make_psyche(const PsycheAttributes& attrs, const Vec3& position, double radius) {
  try {
    return semantics::compile_psyche(quantize(attrs), quantize(position), quantize(radius));
  } catch (const ValidationError&) {
    throw;
  } catch (const Error& e) {
    throw ValidationError("range", "psyche \"" + attrs.name + "\": " + e.what());
  }
}

inline void validate(const Camera& c) {
  const Vec3 view = c.look_at - c.position;
  if (!(optics::norm(view) > 0.0)) throw ValidationError("camera", "camera position equals look_at");
  if (!(optics::norm(optics::cross(view, c.up)) > 1e-12 * optics::norm(view) * optics::norm(c.up))) {
    throw ValidationError("camera", "camera up must not be parallel to the view direction");
  }
  if (!(c.fov_degrees > 0.0 && c.fov_degrees < 180.0)) {
    throw ValidationError("range", "camera fov must lie in (0, 180) degrees");
  }
}

inline void validate(const Scenario& s, const Emission& e) {
  if (const auto* name = std::get_if<std::string>(&e.source)) {
    if (!find_psyche(s, *name)) throw ValidationError("unknown-reference", "thought from unknown psyche \"" + *name + "\"");
  }
  if (!(optics::norm(e.direction) > 0.0)) throw ValidationError("range", "thought direction must be non-zero");
  try {
    semantics::validate(e.thought);
  } catch (const Error& err) {
    throw ValidationError("range", std::string("thought: ") + err.what());
  }
}

inline void validate_comfort(const Scenario& s, const std::string& a, const std::string& b, double value) {
  for (const auto* n : {&a, &b}) {
    if (!find_psyche(s, *n)) throw ValidationError("unknown-reference", "comfort names unknown psyche \"" + *n + "\"");
  }
  if (a == b) throw ValidationError("range", "comfort needs two distinct psyches");
  if (!(value >= 0.0 && value <= 1.0)) {
    throw ValidationError("range", "comfort \"" + a + "\" \"" + b + "\" must lie in [0, 1]");
  }
}

inline void check_overlap(const Scenario& s) {
  for (std::size_t i = 0; i < s.psyches.size(); ++i) {
    for (std::size_t j = i + 1; j < s.psyches.size(); ++j) {
      const auto& a = s.psyches[i].shell;
      const auto& b = s.psyches[j].shell;
      if (optics::norm(a.center - b.center) < a.outer_radius + b.outer_radius - 1e-9) {
        throw ValidationError("no-overlap", "psyches \"" + s.psyches[i].name() + "\" and \"" +
                                                s.psyches[j].name() + "\" overlap");
      }
    }
  }
}

inline void validate(const Scenario& s) {
  for (std::size_t i = 0; i < s.psyches.size(); ++i) {
    for (std::size_t j = i + 1; j < s.psyches.size(); ++j) {
      if (s.psyches[i].name() == s.psyches[j].name()) {
        throw ValidationError("unique-name", "duplicate psyche \"" + s.psyches[i].name() + "\"");
      }
    }
  }
  check_overlap(s);
  for (const auto& [key, v] : s.comfort.pairs()) validate_comfort(s, key.first, key.second, v);
  for (const auto& e : s.emissions) validate(s, e);
  validate(s.camera);
}

// -- physics view -------------------------------------------------------------

inline optics::Scene compile_scene(const Scenario& s) {
  optics::Scene scene;
  for (const auto& p : s.psyches) scene.push_back(semantics::to_scene_sphere(p));
  return scene;
}

inline Vec3 emission_origin(const Scenario& s, const Emission& e) {
  if (const auto* p = std::get_if<Vec3>(&e.source)) return *p;
  return find_psyche(s, std::get<std::string>(e.source))->shell.center;
}

/// Beams for every active authored emission, in authoring order. Sparks are
/// at rest and produce nothing.
inline std::vector<optics::Beam> compile_beams(const Scenario& s) {
  std::vector<optics::Beam> out;
  for (const auto& e : s.emissions) {
    if (e.thought.state == semantics::ThoughtState::spark) continue;
    out.push_back(semantics::compile_thought(e.thought, emission_origin(s, e), optics::normalized(e.direction), e.tag));
  }
  return out;
}

// -- mutations ----------------------------------------------------------------

namespace detail {

inline PsycheSphere& require_psyche(Scenario& s, const std::string& name) {
  auto* p = find_psyche(s, name);
  if (!p) throw ValidationError("unknown-reference", "unknown psyche \"" + name + "\"");
  return *p;
}

inline void apply(Scenario& s, const SetAttribute& m) {
  PsycheSphere& p = require_psyche(s, m.psyche);
  PsycheAttributes a = p.attributes;
  Vec3 pos = p.shell.center;
  double radius = p.shell.outer_radius;
  if (m.key == "vitality") {
    a.vitality = m.value;
  } else if (m.key == "accessibility") {
    a.accessibility = m.value;
  } else if (m.key == "depth") {
    a.depth = m.value;
  } else if (m.key == "radius") {
    radius = m.value;
  } else if (m.key == "x") {
    pos.x = m.value;
  } else if (m.key == "y") {
    pos.y = m.value;
  } else if (m.key == "z") {
    pos.z = m.value;
  } else if (m.key.rfind("trait.", 0) == 0 && m.key.size() > 6) {
    a.traits[m.key.substr(6)] = m.value;
  } else {
    throw ValidationError("unknown-reference", "unknown attribute \"" + m.key + "\"");
  }
  p = make_psyche(a, pos, radius);
}

inline void apply(Scenario& s, const AddPsyche& m) {
  if (find_psyche(s, m.attributes.name)) {
    throw ValidationError("unique-name", "duplicate psyche \"" + m.attributes.name + "\"");
  }
  s.psyches.push_back(make_psyche(m.attributes, m.position, m.radius));
}

inline void apply(Scenario& s, const RemovePsyche& m) {
  require_psyche(s, m.psyche);
  std::erase_if(s.psyches, [&](const PsycheSphere& p) { return p.name() == m.psyche; });
  s.comfort.erase_all(m.psyche);
  std::erase_if(s.emissions, [&](const Emission& e) {
    const auto* n = std::get_if<std::string>(&e.source);
    return n && *n == m.psyche;
  });
}

inline void apply(Scenario& s, const EmitBeam& m) {
  validate(s, m.emission);
  s.emissions.push_back(m.emission);
}

inline void apply(Scenario& s, const RetireBeam& m) {
  if (m.index >= s.emissions.size()) {
    throw ValidationError("unknown-reference", "no beam at index " + std::to_string(m.index));
  }
  s.emissions.erase(s.emissions.begin() + static_cast<std::ptrdiff_t>(m.index));
}

inline void apply(Scenario& s, const SetComfort& m) {
  validate_comfort(s, m.a, m.b, m.value);
  s.comfort.set(m.a, m.b, m.value);
}

inline void apply(Scenario& s, const Reorient& m) {
  if (!(optics::norm(m.axis) > 0.0)) throw ValidationError("range", "rotation axis must be non-zero");
  const Vec3 axis = optics::normalized(m.axis);
  Camera& c = s.camera;
  c.position = quantize(m.pivot + optics::rotate(c.position - m.pivot, axis, m.angle));
  c.look_at = quantize(m.pivot + optics::rotate(c.look_at - m.pivot, axis, m.angle));
  c.up = quantize(optics::rotate(c.up, axis, m.angle));
}

inline void apply(Scenario& s, const AddShadow& m) {
  PsycheSphere& p = require_psyche(s, m.psyche);
  PsycheAttributes a = p.attributes;
  a.shadow_aspects.push_back(m.shadow);
  p = make_psyche(a, p.shell.center, p.shell.outer_radius);
}

inline void apply(Scenario& s, const RemoveShadow& m) {
  PsycheSphere& p = require_psyche(s, m.psyche);
  PsycheAttributes a = p.attributes;
  const auto n = std::erase_if(a.shadow_aspects, [&](const ShadowAspect& x) { return x.label == m.label; });
  if (n == 0) throw ValidationError("unknown-reference", "psyche \"" + m.psyche + "\" has no shadow \"" + m.label + "\"");
  p = make_psyche(a, p.shell.center, p.shell.outer_radius);
}

}  // namespace detail

/// Apply one mutation, returning the new scenario with the mutation logged.
/// On failure the input is untouched and a ValidationError names the
/// violated invariant.
inline Scenario apply_mutation(const Scenario& s, const Mutation& m) {
  const Mutation q = quantize(m);
  Scenario next = s;
  std::visit([&](const auto& x) { detail::apply(next, x); }, q);
  validate(next);
  next.lineage.mutations.push_back(q);
  return next;
}

inline Scenario reorient(const Scenario& s, const Vec3& axis, double angle, const Vec3& pivot) {
  return apply_mutation(s, Reorient{axis, angle, pivot});
}

/// Deep copy under a new identity whose lineage points at `s`.
inline Scenario branch(const Scenario& s, std::string new_name, std::string new_id) {
  Scenario child = s;
  child.id = std::move(new_id);
  child.name = std::move(new_name);
  child.lineage = Lineage{s.id, {}};
  return child;
}

/// Rebuild `child` from its parent snapshot by replaying the child's log.
inline Scenario replay(const Scenario& parent, const Scenario& child) {
  Scenario out = branch(parent, child.name, child.id);
  for (const auto& m : child.lineage.mutations) out = apply_mutation(out, m);
  return out;
}

}  // namespace liveia::scenario
