#pragma once

#include <array>
#include <optional>
#include <vector>

#include "liveia/optics/trace.hpp"
#include "liveia/semantics/compile.hpp"

namespace liveia::semantics {

/// Launch point of a reflected thought, as a fraction of the outer radius
/// from the centre along the thought direction. Between the centre and the
/// wall each concave reflection narrows the bundle.
inline constexpr double kReflectionLaunchOffset = 0.25;
inline constexpr int kMaxReflections = 64;

struct Leakage {
  Vec3 position;
  Vec3 direction;
  double intensity = 0.0;
};

struct ReflectionResult {
  int iterations = 0;
  double final_divergence = 0.0;
  bool articulable = false;
  std::vector<double> divergences;  // [0] is the emitted divergence
  std::vector<Leakage> leakage;     // one entry per bounce with a refracted child
};

/// Emits the thought inside the sphere and reflects it off the concave wall
/// until the bundle divergence drops below `articulation_threshold`.
inline ReflectionResult reflect_on(const PsycheSphere& sphere, const Thought& thought,
                                   double articulation_threshold, const Vec3& direction = {0, 0, 1}) {
  if (!(articulation_threshold > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "articulation threshold must be > 0");
  }
  const Vec3 origin = sphere.shell.center + direction * (kReflectionLaunchOffset * sphere.shell.outer_radius);
  const optics::Beam beam = compile_thought(thought, origin, direction);

  ReflectionResult out;
  out.divergences.push_back(beam.divergence);
  out.final_divergence = beam.divergence;
  if (beam.divergence < articulation_threshold) {
    out.articulable = true;
    return out;
  }

  const optics::Scene scene{to_scene_sphere(sphere)};
  const optics::Medium inside{0, sphere.shell.refractive_index};
  const Vec3 plane = optics::any_perpendicular(direction);
  std::array<optics::Ray, 3> rays{
      optics::Ray{origin, direction},
      optics::Ray{origin, optics::normalized(optics::rotate(direction, plane, beam.divergence))},
      optics::Ray{origin, optics::normalized(optics::rotate(direction, plane, -beam.divergence))}};
  double intensity = beam.intensity;
  constexpr double eps = 1e-9;

  for (int bounce = 1; bounce <= kMaxReflections; ++bounce) {
    for (std::size_t r = 0; r < rays.size(); ++r) {
      const auto hit = optics::find_next_hit(scene, rays[r], inside, eps);
      if (!hit) throw Error(ErrorCode::invalid_argument, "reflection ray left the sphere");
      if (hit->fracture >= 0) {
        throw Error(ErrorCode::reflection_obstructed,
                    "reflection obstructed by fracture '" + sphere.fractures[hit->fracture].label + "'");
      }
      const Vec3 p = rays[r].at(hit->t);
      const auto ix = optics::interact(scene, rays[r].direction, inside, *hit, p);
      const double terminal =
          r == 0 ? optics::attenuate_segment(scene, inside, rays[r], hit->t, intensity) : 0.0;
      for (const auto& c : ix.children) {
        if (c.role == optics::ChildRole::reflected) {
          if (r == 0) intensity = terminal * c.weight;
          rays[r] = {p, c.direction};
        } else if (r == 0) {
          out.leakage.push_back({p, c.direction, terminal * c.weight});
        }
      }
    }
    out.iterations = bounce;
    out.final_divergence = 0.5 * optics::angle_between(rays[1].direction, rays[2].direction);
    out.divergences.push_back(out.final_divergence);
    if (out.final_divergence < articulation_threshold) {
      out.articulable = true;
      break;
    }
  }
  return out;
}

}  // namespace liveia::semantics
