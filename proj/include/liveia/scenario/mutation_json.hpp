#pragma once

// JSON wire form of mutations, used by the session service.
//
//   {"op": "set_attribute", "psyche": "alice", "key": "vitality", "value": 0.5}
//   {"op": "add_psyche", "psyche": {"name": "bo", "position": [3, 0, 0], "radius": 1, ...}}
//   {"op": "emit_beam", "beam": {"from": "alice" | [x, y, z], "direction": [...], ...}}
//   {"op": "reorient", "axis": [0, 1, 0], "angle": 1.5707963, "pivot": [0, 0, 0]}

#include <string>

#include <json.hpp>

#include "liveia/core/error.hpp"
#include "liveia/scenario/scenario.hpp"

namespace liveia::scenario {

using json = nlohmann::ordered_json;

namespace detail {

inline json vec_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

inline Vec3 json_vec(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3 || !j[0].is_number() || !j[1].is_number() || !j[2].is_number()) {
    throw ValidationError("schema", std::string(what) + " must be an array of three numbers");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ValidationError("schema", std::string("missing field \"") + key + "\"");
  return j.at(key);
}

inline double num(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_number()) throw ValidationError("schema", std::string("\"") + key + "\" must be a number");
  return v.get<double>();
}

inline std::string str(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_string()) throw ValidationError("schema", std::string("\"") + key + "\" must be a string");
  return v.get<std::string>();
}

inline double num_or(const json& j, const char* key, double fallback) {
  return j.contains(key) ? num(j, key) : fallback;
}

inline json mode_json(const optics::FractureMode& m) {
  if (const auto* r = std::get_if<optics::RefractMode>(&m)) return {{"kind", "refract"}, {"delta_index", r->delta_index}};
  if (const auto* s = std::get_if<optics::ScatterMode>(&m)) {
    return {{"kind", "scatter"}, {"fan_count", s->fan_count}, {"cone_half_angle", s->cone_half_angle}};
  }
  return {{"kind", "mirror"}};
}

inline optics::FractureMode json_mode(const json& j) {
  const std::string kind = str(j, "kind");
  if (kind == "mirror") return optics::MirrorMode{};
  if (kind == "refract") return optics::RefractMode{num(j, "delta_index")};
  if (kind == "scatter") {
    const json& n = field(j, "fan_count");
    if (!n.is_number_integer()) throw ValidationError("schema", "\"fan_count\" must be an integer");
    return optics::ScatterMode{n.get<int>(), num(j, "cone_half_angle")};
  }
  throw ValidationError("schema", "unknown fracture mode \"" + kind + "\"");
}

inline json shadow_json(const ShadowAspect& a) {
  json j{{"label", a.label}, {"severity", a.severity}, {"placement", semantics::to_string(a.placement)}};
  if (a.axis) j["axis"] = vec_json(*a.axis);
  if (a.tilt) j["tilt"] = *a.tilt;
  if (a.mode) j["mode"] = mode_json(*a.mode);
  if (a.opacity) j["opacity"] = *a.opacity;
  return j;
}

inline ShadowAspect json_shadow(const json& j) {
  ShadowAspect a;
  a.label = str(j, "label");
  a.severity = num_or(j, "severity", a.severity);
  if (j.contains("placement")) {
    const std::string p = str(j, "placement");
    if (p == "surface") {
      a.placement = semantics::Placement::surface;
    } else if (p != "interior") {
      throw ValidationError("schema", "placement must be interior or surface");
    }
  }
  if (j.contains("axis")) a.axis = json_vec(j["axis"], "axis");
  if (j.contains("tilt")) a.tilt = num(j, "tilt");
  if (j.contains("mode")) a.mode = json_mode(j["mode"]);
  if (j.contains("opacity")) a.opacity = num(j, "opacity");
  return a;
}

inline json psyche_json(const PsycheAttributes& a, const Vec3& pos, double radius) {
  json traits = json::object();
  for (const auto& [k, v] : a.traits) traits[k] = v;
  json shadows = json::array();
  for (const auto& s : a.shadow_aspects) shadows.push_back(shadow_json(s));
  return {{"name", a.name},         {"position", vec_json(pos)},
          {"radius", radius},       {"vitality", a.vitality},
          {"accessibility", a.accessibility}, {"depth", a.depth},
          {"traits", traits},       {"shadows", shadows}};
}

inline AddPsyche json_psyche(const json& j) {
  AddPsyche m;
  m.attributes.name = str(j, "name");
  m.position = j.contains("position") ? json_vec(j["position"], "position") : Vec3{};
  m.radius = num_or(j, "radius", 1.0);
  m.attributes.vitality = num_or(j, "vitality", m.attributes.vitality);
  m.attributes.accessibility = num_or(j, "accessibility", m.attributes.accessibility);
  m.attributes.depth = num_or(j, "depth", m.attributes.depth);
  if (j.contains("traits")) {
    if (!j["traits"].is_object()) throw ValidationError("schema", "\"traits\" must be an object");
    for (const auto& [k, v] : j["traits"].items()) {
      if (!v.is_number()) throw ValidationError("schema", "trait values must be numbers");
      m.attributes.traits[k] = v.get<double>();
    }
  }
  if (j.contains("shadows")) {
    if (!j["shadows"].is_array()) throw ValidationError("schema", "\"shadows\" must be an array");
    for (const auto& s : j["shadows"]) m.attributes.shadow_aspects.push_back(json_shadow(s));
  }
  return m;
}

inline json emission_json(const Emission& e) {
  json comps = json::array();
  for (const auto& w : e.thought.components) comps.push_back(json::array({w.frequency, w.amplitude, w.phase}));
  json from = std::holds_alternative<Vec3>(e.source) ? vec_json(std::get<Vec3>(e.source))
                                                     : json(std::get<std::string>(e.source));
  return {{"from", from},
          {"direction", vec_json(e.direction)},
          {"valence", e.thought.valence},
          {"clarity", e.thought.clarity},
          {"components", comps},
          {"tag", optics::to_string(e.tag)},
          {"state", e.thought.state == semantics::ThoughtState::spark ? "spark" : "active"}};
}

inline Emission json_emission(const json& j) {
  Emission e;
  const json& from = field(j, "from");
  if (from.is_string()) {
    e.source = from.get<std::string>();
  } else {
    e.source = json_vec(from, "from");
  }
  e.direction = json_vec(field(j, "direction"), "direction");
  e.thought.valence = num_or(j, "valence", e.thought.valence);
  e.thought.clarity = num_or(j, "clarity", e.thought.clarity);
  if (j.contains("components")) {
    if (!j["components"].is_array()) throw ValidationError("schema", "\"components\" must be an array");
    for (const auto& c : j["components"]) {
      const Vec3 v = json_vec(c, "component");
      e.thought.components.push_back({v.x, v.y, v.z});
    }
  }
  if (j.contains("tag") && !optics::parse_beam_tag(str(j, "tag"), e.tag)) {
    throw ValidationError("schema", "unknown beam tag");
  }
  if (j.contains("state")) {
    const std::string st = str(j, "state");
    if (st == "spark") {
      e.thought.state = semantics::ThoughtState::spark;
    } else if (st != "active") {
      throw ValidationError("schema", "state must be active or spark");
    }
  }
  return e;
}

}  // namespace detail

inline json to_json(const Mutation& m) {
  json j{{"op", mutation_name(m)}};
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, SetAttribute>) {
          j["psyche"] = x.psyche;
          j["key"] = x.key;
          j["value"] = x.value;
        } else if constexpr (std::is_same_v<T, AddPsyche>) {
          j["psyche"] = detail::psyche_json(x.attributes, x.position, x.radius);
        } else if constexpr (std::is_same_v<T, RemovePsyche>) {
          j["psyche"] = x.psyche;
        } else if constexpr (std::is_same_v<T, EmitBeam>) {
          j["beam"] = detail::emission_json(x.emission);
        } else if constexpr (std::is_same_v<T, RetireBeam>) {
          j["index"] = x.index;
        } else if constexpr (std::is_same_v<T, SetComfort>) {
          j["a"] = x.a;
          j["b"] = x.b;
          j["value"] = x.value;
        } else if constexpr (std::is_same_v<T, Reorient>) {
          j["axis"] = detail::vec_json(x.axis);
          j["angle"] = x.angle;
          j["pivot"] = detail::vec_json(x.pivot);
        } else if constexpr (std::is_same_v<T, AddShadow>) {
          j["psyche"] = x.psyche;
          j["shadow"] = detail::shadow_json(x.shadow);
        } else {
          j["psyche"] = x.psyche;
          j["label"] = x.label;
        }
      },
      m);
  return j;
}

inline Mutation mutation_from_json(const json& j) {
  using namespace detail;
  const std::string op = str(j, "op");
  if (op == "set_attribute") return SetAttribute{str(j, "psyche"), str(j, "key"), num(j, "value")};
  if (op == "add_psyche") return json_psyche(field(j, "psyche"));
  if (op == "remove_psyche") return RemovePsyche{str(j, "psyche")};
  if (op == "emit_beam") return EmitBeam{json_emission(field(j, "beam"))};
  if (op == "retire_beam") {
    const json& i = field(j, "index");
    if (!i.is_number_unsigned()) throw ValidationError("schema", "\"index\" must be a non-negative integer");
    return RetireBeam{i.get<std::size_t>()};
  }
  if (op == "set_comfort") return SetComfort{str(j, "a"), str(j, "b"), num(j, "value")};
  if (op == "reorient") {
    return Reorient{json_vec(field(j, "axis"), "axis"), num(j, "angle"),
                    j.contains("pivot") ? json_vec(j["pivot"], "pivot") : Vec3{}};
  }
  if (op == "add_shadow") return AddShadow{str(j, "psyche"), json_shadow(field(j, "shadow"))};
  if (op == "remove_shadow") return RemoveShadow{str(j, "psyche"), str(j, "label")};
  throw ValidationError("schema", "unknown mutation op \"" + op + "\"");
}

}  // namespace liveia::scenario
