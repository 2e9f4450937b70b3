#pragma once

#include <random>

#include "liveia/optics/trace.hpp"

namespace liveia::testing {

using optics::Vec3;

/// Solid n=1.5 unit sphere at the origin with a transparent skin.
inline optics::SceneSphere canonical_sphere() {
  optics::SceneSphere s;
  s.shell.center = {0, 0, 0};
  s.shell.outer_radius = 1.0;
  s.shell.shell_thickness = 0.1;
  s.shell.refractive_index = 1.5;
  s.shell.shell_opacity = 0.0;
  return s;
}

inline Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  for (;;) {
    const Vec3 v{g(rng), g(rng), g(rng)};
    const double n = optics::norm(v);
    if (n > 1e-6) return v / n;
  }
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace liveia::testing

namespace liveia::testing {

/// 1-3 non-overlapping fracture-free spheres.
inline optics::Scene random_scene(std::mt19937_64& rng) {
  optics::Scene scene;
  const int count = std::uniform_int_distribution<int>(1, 3)(rng);
  for (int i = 0; i < count; ++i) {
    optics::SceneSphere s;
    s.shell.outer_radius = uniform(rng, 0.5, 1.5);
    s.shell.shell_thickness = s.shell.outer_radius * uniform(rng, 0.02, 0.5);
    s.shell.refractive_index = uniform(rng, 1.0, 2.0);
    s.shell.shell_opacity = uniform(rng, 0.0, 1.0) < 0.5 ? 0.0 : uniform(rng, 0.0, 0.6);
    s.shell.center = {4.0 * i, uniform(rng, -0.5, 0.5), uniform(rng, -0.5, 0.5)};
    scene.push_back(s);
  }
  return scene;
}

/// Beam starting inside a random sphere or outside aimed at one.
inline optics::Beam random_beam(std::mt19937_64& rng, const optics::Scene& scene) {
  const auto& s = scene[std::uniform_int_distribution<std::size_t>(0, scene.size() - 1)(rng)].shell;
  optics::Beam b;
  b.intensity = uniform(rng, 0.05, 1.0);
  if (uniform(rng, 0, 1) < 0.5) {
    b.axis.origin = s.center + random_unit(rng) * (s.outer_radius * uniform(rng, 0.0, 0.95));
    b.axis.direction = random_unit(rng);
  } else {
    b.axis.origin = s.center + random_unit(rng) * (s.outer_radius * 3.0);
    const Vec3 target = s.center + random_unit(rng) * (s.outer_radius * uniform(rng, 0, 0.9));
    b.axis.direction = optics::normalized(target - b.axis.origin);
  }
  return b;
}

}  // namespace liveia::testing
