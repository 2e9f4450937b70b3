#pragma once

#include <random>
#include <string>

#include "liveia/scenario/scenario.hpp"
#include "test_support.hpp"

namespace liveia::testing {

using namespace liveia::scenario;

inline int pick(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

inline bool coin(std::mt19937_64& rng, double p = 0.5) { return uniform(rng, 0, 1) < p; }

inline std::string random_name(std::mt19937_64& rng, const std::string& prefix) {
  static const char* parts[] = {"a", "b", "c", "é", " ", "\"", "\\", "x", "ı", "7", "\t"};
  std::string s = prefix;
  const int n = pick(rng, 0, 4);
  for (int i = 0; i < n; ++i) s += parts[pick(rng, 0, 10)];
  return s;
}

inline optics::FractureMode random_mode(std::mt19937_64& rng) {
  switch (pick(rng, 0, 2)) {
    case 0: return optics::RefractMode{uniform(rng, 0.0, 0.5)};
    case 1: return optics::MirrorMode{};
    default: return optics::ScatterMode{2 * pick(rng, 1, 4) + 1, uniform(rng, 0.01, 1.0)};
  }
}

inline semantics::ShadowAspect random_shadow(std::mt19937_64& rng, const std::string& label) {
  semantics::ShadowAspect a;
  a.label = label;
  a.severity = uniform(rng, 0.01, 1.0);
  a.placement = coin(rng) ? semantics::Placement::interior : semantics::Placement::surface;
  if (coin(rng)) a.axis = random_unit(rng) * uniform(rng, 0.5, 2.0);
  if (coin(rng)) a.tilt = uniform(rng, 0.0, 1.5);
  if (coin(rng)) a.mode = random_mode(rng);
  if (coin(rng)) a.opacity = uniform(rng, 0.0, 1.0);
  return a;
}

inline AddPsyche random_psyche_decl(std::mt19937_64& rng, const std::string& name, const Vec3& position) {
  AddPsyche d;
  d.attributes.name = name;
  d.attributes.vitality = coin(rng, 0.1) ? 0.0 : uniform(rng, 0, 1);
  d.attributes.accessibility = coin(rng, 0.1) ? 1.0 : uniform(rng, 0, 1);
  d.attributes.depth = uniform(rng, 0, 1);
  static const char* traits[] = {"warmth", "calm", "zest", "anxiety", "humor"};
  for (int i = pick(rng, 0, 3); i > 0; --i) d.attributes.traits[traits[pick(rng, 0, 4)]] = uniform(rng, 0, 1);
  const int shadows = pick(rng, 0, 3);
  for (int i = 0; i < shadows; ++i) {
    d.attributes.shadow_aspects.push_back(random_shadow(rng, "s" + std::to_string(i) + random_name(rng, "")));
  }
  d.position = position;
  d.radius = uniform(rng, 0.2, 2.0);
  return d;
}

inline Emission random_emission(std::mt19937_64& rng, const Scenario& s) {
  Emission e;
  if (!s.psyches.empty() && coin(rng, 0.7)) {
    e.source = s.psyches[static_cast<std::size_t>(pick(rng, 0, static_cast<int>(s.psyches.size()) - 1))].name();
  } else {
    e.source = Vec3{uniform(rng, -10, 10), uniform(rng, -10, 10), uniform(rng, -10, 10)};
  }
  e.direction = random_unit(rng) * uniform(rng, 0.5, 3.0);
  e.thought.valence = uniform(rng, -1, 1);
  e.thought.clarity = uniform(rng, 0, 1);
  for (int i = pick(rng, 1, 3); i > 0; --i) {
    e.thought.components.push_back({uniform(rng, 0.1, 10), uniform(rng, 0, 2), uniform(rng, 0, 6.2)});
  }
  e.tag = static_cast<optics::BeamTag>(pick(rng, 0, 4));
  if (coin(rng, 0.2)) e.thought.state = semantics::ThoughtState::spark;
  return e;
}

/// A mutation that is usually, but not always, applicable to `s`.
inline Mutation random_mutation(std::mt19937_64& rng, const Scenario& s, int serial) {
  auto any_psyche = [&]() -> std::string {
    if (s.psyches.empty()) return "nobody";
    return s.psyches[static_cast<std::size_t>(pick(rng, 0, static_cast<int>(s.psyches.size()) - 1))].name();
  };
  switch (pick(rng, 0, 8)) {
    case 0: {
      static const char* keys[] = {"vitality", "accessibility", "depth", "radius", "x", "y", "z", "trait.calm"};
      const std::string key = keys[pick(rng, 0, 7)];
      double v = uniform(rng, 0, 1);
      if (key == "radius") v = uniform(rng, 0.1, 1.0);
      if (key == "x" || key == "y" || key == "z") v = uniform(rng, -0.2, 0.2);
      return SetAttribute{any_psyche(), key, v};
    }
    case 1:
      return random_psyche_decl(rng, "p" + std::to_string(serial), {1000.0 + 10.0 * serial, 0, 0});
    case 2: return RemovePsyche{any_psyche()};
    case 3: return EmitBeam{random_emission(rng, s)};
    case 4: return RetireBeam{static_cast<std::size_t>(pick(rng, 0, 3))};
    case 5: return SetComfort{any_psyche(), any_psyche(), uniform(rng, 0, 1)};
    case 6: return Reorient{random_unit(rng), uniform(rng, -3.14, 3.14), {uniform(rng, -1, 1), 0, 0}};
    case 7: return AddShadow{any_psyche(), random_shadow(rng, "m" + std::to_string(serial))};
    default: {
      const PsycheSphere* p = s.psyches.empty() ? nullptr : find_psyche(s, any_psyche());
      const std::string label =
          p && !p->attributes.shadow_aspects.empty() ? p->attributes.shadow_aspects[0].label : "none";
      return RemoveShadow{p ? p->name() : "nobody", label};
    }
  }
}

/// Valid scenario with spheres spaced along x, plus comfort, beams, a camera
/// and a lineage block (the recorded log need not be replayable here).
inline Scenario random_scenario(std::mt19937_64& rng) {
  Scenario s;
  s.id = coin(rng, 0.8) ? "id" + std::to_string(pick(rng, 0, 99999)) : "";
  s.name = random_name(rng, "scene");
  const int n = pick(rng, 0, 4);
  for (int i = 0; i < n; ++i) {
    const auto d = random_psyche_decl(rng, "psyche" + std::to_string(i) + random_name(rng, ""),
                                      {5.0 * i, uniform(rng, -1, 1), uniform(rng, -1, 1)});
    s.psyches.push_back(make_psyche(d.attributes, d.position, d.radius));
  }
  for (int i = 0; i + 1 < n; ++i) {
    if (coin(rng)) s.comfort.set(s.psyches[i].name(), s.psyches[i + 1].name(), quantize(uniform(rng, 0.01, 1)));
  }
  for (int i = pick(rng, 0, 3); i > 0; --i) s.emissions.push_back(quantize(random_emission(rng, s)));
  if (coin(rng)) {
    s.camera = quantize(Camera{{uniform(rng, -20, 20), uniform(rng, -20, 20), 30.0},
                               {uniform(rng, -1, 1), 0, 0},
                               random_unit(rng),
                               uniform(rng, 10, 120)});
    if (optics::norm(optics::cross(s.camera.look_at - s.camera.position, s.camera.up)) < 1e-3) s.camera.up = {0, 1, 0};
  }
  if (coin(rng)) s.lineage.parent_id = "parent" + std::to_string(pick(rng, 0, 99));
  for (int i = pick(rng, 0, 5); i > 0; --i) s.lineage.mutations.push_back(quantize(random_mutation(rng, s, i)));
  return s;
}

}  // namespace liveia::testing
