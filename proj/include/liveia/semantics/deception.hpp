#pragma once

#include <algorithm>
#include <string>

#include "liveia/optics/trace.hpp"
#include "liveia/semantics/compile.hpp"

namespace liveia::semantics {

enum class Audience { self, other };

inline constexpr std::string_view to_string(Audience a) { return a == Audience::self ? "self" : "other"; }

struct DeceptionReport {
  Audience audience = Audience::other;
  std::string fracture_label;
  int fracture_index = -1;
  std::string mode;
  double incident_angle = 0.0;
  double bend_angle = 0.0;  // largest deviation of any outgoing ray
  bool degenerate = false;  // refract mode with no index contrast
  Vec3 position;
};

struct DeceptionResult {
  optics::Beam beam;  // the redirected beam leaving the fracture
  DeceptionReport report;
};

/// Bends a thought through a fracture: surface fractures for lying to others,
/// interior fractures for lying to oneself.
inline DeceptionResult deception_route(const PsycheSphere& sphere, const Thought& thought, Audience audience) {
  const Placement wanted = audience == Audience::other ? Placement::surface : Placement::interior;
  int index = -1;
  for (std::size_t i = 0; i < sphere.fractures.size() && i < sphere.attributes.shadow_aspects.size(); ++i) {
    if (sphere.attributes.shadow_aspects[i].placement == wanted) {
      index = static_cast<int>(i);
      break;
    }
  }
  if (index < 0) {
    throw Error(ErrorCode::no_fracture, "an intact sphere cannot bend the truth (no " +
                                            std::string(to_string(wanted)) + " fracture)");
  }
  const optics::Fracture& f = sphere.fractures[index];
  const Vec3& c = sphere.shell.center;
  const optics::BeamTag tag =
      audience == Audience::other ? optics::BeamTag::deception_other : optics::BeamTag::deception_self;

  // Aim at the disc centre unless that meets the disc head-on (or the disc sits
  // on the emitter); then aim half-way to its rim.
  auto aim_at = [&](const Vec3& target) { return optics::normalized(target - c); };
  const Vec3 rim_point = f.center + optics::any_perpendicular(f.normal) * (0.5 * f.radius);
  Vec3 dir = optics::norm(f.center - c) > 1e-12 ? aim_at(f.center) : aim_at(rim_point);
  if (optics::angle_between(dir, f.normal) < 1e-6 || optics::angle_between(-dir, f.normal) < 1e-6) {
    dir = aim_at(rim_point);
  }

  optics::Beam beam = compile_thought(thought, c, dir, tag);
  const optics::Ray ray{c, dir};
  const auto hit = optics::intersect_fracture(ray, f);
  if (!hit) throw Error(ErrorCode::no_fracture, "fracture '" + f.label + "' is not reachable from the emitter");

  // Geometry only: opacity is applied to the outgoing intensity below.
  optics::SceneSphere clear = to_scene_sphere(sphere);
  clear.fractures[index].opacity = 0.0;
  const optics::Scene scene{clear};
  const optics::Medium inside{0, sphere.shell.refractive_index};
  const optics::NextHit nh{hit->t, 0, index, hit->side == optics::Side::front ? f.normal : -f.normal};
  const Vec3 p = ray.at(hit->t);
  const auto ix = optics::interact(scene, dir, inside, nh, p);

  DeceptionResult out;
  DeceptionReport& rep = out.report;
  rep.audience = audience;
  rep.fracture_label = f.label;
  rep.fracture_index = index;
  rep.mode = optics::mode_name(f.mode);
  rep.incident_angle = ix.event.incident_angle;
  rep.position = p;
  for (const auto& child : ix.children) {
    rep.bend_angle = std::max(rep.bend_angle, optics::angle_between(dir, child.direction));
  }
  if (const auto* rm = std::get_if<optics::RefractMode>(&f.mode)) rep.degenerate = rm->delta_index == 0.0;

  const double arriving = optics::attenuate_segment(scene, inside, ray, hit->t, beam.intensity);
  out.beam = beam;
  out.beam.axis.origin = p;
  out.beam.intensity = arriving * (1.0 - f.opacity);
  if (const auto* sc = std::get_if<optics::ScatterMode>(&f.mode)) {
    out.beam.divergence = std::max(beam.divergence, sc->cone_half_angle);
  } else {
    out.beam.axis.direction = ix.children.front().direction;
  }
  return out;
}

}  // namespace liveia::semantics
