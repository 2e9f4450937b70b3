#pragma once

#include <cmath>
#include <optional>
#include <string_view>
#include <vector>

#include "liveia/optics/beam.hpp"
#include "liveia/optics/geometry.hpp"
#include "liveia/optics/interface.hpp"

namespace liveia::optics {

struct TraceLimits {
  int max_depth = 16;
  double min_intensity = 1e-4;
  double geometric_epsilon = 1e-9;
  double escape_length = 10.0;  // drawn length of escaped segments
};

inline void validate(const TraceLimits& l) {
  if (l.max_depth <= 0 || !(l.min_intensity > 0.0) || !(l.geometric_epsilon > 0.0) ||
      !(l.escape_length > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "trace limits must be strictly positive");
  }
}

struct SceneSphere {
  ShellGeometry shell;
  std::vector<Fracture> fractures;

  friend bool operator==(const SceneSphere&, const SceneSphere&) = default;
};

using Scene = std::vector<SceneSphere>;

/// Rejects invalid shells/fractures and overlapping spheres (touching is fine).
inline void validate_scene(const Scene& scene) {
  for (const auto& s : scene) {
    validate(s.shell);
    for (const auto& f : s.fractures) validate(f, s.shell);
  }
  for (std::size_t i = 0; i < scene.size(); ++i) {
    for (std::size_t j = i + 1; j < scene.size(); ++j) {
      const auto& a = scene[i].shell;
      const auto& b = scene[j].shell;
      if (norm(a.center - b.center) < a.outer_radius + b.outer_radius - 1e-9) {
        throw Error(ErrorCode::geometry_conflict,
                    "spheres " + std::to_string(i) + " and " + std::to_string(j) + " overlap");
      }
    }
  }
}

enum class EventKind {
  refract,
  reflect,
  total_internal_reflection,
  fracture_hit,
  absorbed,
  escaped,
  depth_cutoff,
  intensity_cutoff,
};

inline constexpr std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::refract: return "refract";
    case EventKind::reflect: return "reflect";
    case EventKind::total_internal_reflection: return "total_internal_reflection";
    case EventKind::fracture_hit: return "fracture_hit";
    case EventKind::absorbed: return "absorbed";
    case EventKind::escaped: return "escaped";
    case EventKind::depth_cutoff: return "depth_cutoff";
    case EventKind::intensity_cutoff: return "intensity_cutoff";
  }
  return "escaped";
}

enum class ChildRole { root, reflected, refracted, scattered };

inline constexpr std::string_view to_string(ChildRole r) {
  switch (r) {
    case ChildRole::root: return "root";
    case ChildRole::reflected: return "reflected";
    case ChildRole::refracted: return "refracted";
    case ChildRole::scattered: return "scattered";
  }
  return "root";
}

struct InterfaceEvent {
  EventKind kind = EventKind::escaped;
  Vec3 position;
  Vec3 normal;  // faces the incident side
  double incident_angle = 0.0;
  double exit_angle = 0.0;
  double n1 = 1.0;
  double n2 = 1.0;
  int sphere = -1;    // sphere whose surface or fracture was hit
  int fracture = -1;  // index into that sphere's fractures, -1 for surfaces

  friend bool operator==(const InterfaceEvent&, const InterfaceEvent&) = default;
};

struct Segment {
  Vec3 start;
  Vec3 end;
  double medium_index = 1.0;
  double intensity_start = 0.0;
  double intensity_end = 0.0;  // after skin attenuation, before the event

  Vec3 direction() const { return normalized(end - start); }
  friend bool operator==(const Segment&, const Segment&) = default;
};

struct TraceNode {
  int parent = -1;
  ChildRole role = ChildRole::root;
  int depth = 1;
  Segment segment;
  Vec3 direction;
  InterfaceEvent event;
  double absorbed = 0.0;  // skin loss along the segment plus loss at the event
  std::vector<int> children;

  friend bool operator==(const TraceNode&, const TraceNode&) = default;
};

/// Nodes in pre-order; nodes[0] is the root segment. The root beam's
/// waveform applies unchanged to every node.
struct TraceTree {
  Beam root;
  std::vector<TraceNode> nodes;

  friend bool operator==(const TraceTree&, const TraceTree&) = default;
};

struct EnergyBudget {
  double escaped = 0.0;
  double absorbed = 0.0;
  double cutoff = 0.0;
  double total() const { return escaped + absorbed + cutoff; }
};

inline EnergyBudget energy_budget(const TraceTree& tree) {
  EnergyBudget b;
  for (const auto& n : tree.nodes) {
    b.absorbed += n.absorbed;
    if (n.event.kind == EventKind::escaped) b.escaped += n.segment.intensity_end;
    if (n.event.kind == EventKind::intensity_cutoff || n.event.kind == EventKind::depth_cutoff) {
      b.cutoff += n.segment.intensity_end;
    }
  }
  return b;
}

// ---------------------------------------------------------------------------
// Single-step kernel shared by the tracer, the bundle tracker and reflect_on.

struct Medium {
  int sphere = -1;  // -1: ambient
  double index = 1.0;
  friend bool operator==(const Medium&, const Medium&) = default;
};

inline Medium medium_at(const Scene& scene, const Vec3& p) {
  for (std::size_t i = 0; i < scene.size(); ++i) {
    if (norm(p - scene[i].shell.center) < scene[i].shell.outer_radius) {
      return {static_cast<int>(i), scene[i].shell.refractive_index};
    }
  }
  return {};
}

struct NextHit {
  double t = 0.0;
  int sphere = -1;
  int fracture = -1;  // -1: the sphere's outer surface
  Vec3 normal;        // faces the incoming ray
};

inline std::optional<NextHit> find_next_hit(const Scene& scene, const Ray& ray, const Medium& medium,
                                            double eps) {
  std::optional<NextHit> best;
  auto consider = [&](const NextHit& h) {
    if (!best || h.t < best->t) best = h;
  };
  auto outer_hits = [&](int i) {
    const auto& sh = scene[i].shell;
    const auto roots = detail::sphere_roots(ray, sh.center, sh.outer_radius, eps);
    if (!roots) return;
    for (double t : {roots->t0, roots->t1}) {
      if (t <= eps) continue;
      const Vec3 outward = normalized(ray.at(t) - sh.center);
      consider({t, i, -1, dot(outward, ray.direction) < 0.0 ? outward : -outward});
      return;
    }
  };
  if (medium.sphere >= 0) {
    const int i = medium.sphere;
    outer_hits(i);
    const auto& host = scene[i];
    for (std::size_t j = 0; j < host.fractures.size(); ++j) {
      const auto& f = host.fractures[j];
      const auto fh = intersect_fracture(ray, f, eps);
      if (!fh) continue;
      if (!(norm(ray.at(fh->t) - host.shell.center) < host.shell.outer_radius)) continue;
      consider({fh->t, i, static_cast<int>(j), fh->side == Side::front ? f.normal : -f.normal});
    }
  } else {
    for (std::size_t i = 0; i < scene.size(); ++i) outer_hits(static_cast<int>(i));
  }
  return best;
}

struct ChildRay {
  Vec3 direction;
  double weight;  // fraction of the incoming terminal intensity
  ChildRole role;
  Medium medium;
};

struct Interaction {
  InterfaceEvent event;
  std::vector<ChildRay> children;
  double absorbed_fraction = 0.0;
};

inline Interaction interact(const Scene& scene, const Vec3& direction, const Medium& medium,
                            const NextHit& hit, const Vec3& position) {
  Interaction out;
  InterfaceEvent& ev = out.event;
  ev.position = position;
  ev.normal = hit.normal;
  ev.sphere = hit.sphere;
  ev.fracture = hit.fracture;
  ev.incident_angle = std::min(angle_between(-direction, hit.normal), kPi / 2);
  const auto& host = scene[hit.sphere];

  if (hit.fracture < 0) {
    const bool leaving = medium.sphere == hit.sphere;
    const Medium other = leaving ? Medium{} : Medium{hit.sphere, host.shell.refractive_index};
    ev.n1 = medium.index;
    ev.n2 = other.index;
    const Vec3 mirrored = normalized(reflect(direction, hit.normal));
    const auto transmitted = refract(direction, hit.normal, ev.n1, ev.n2);
    if (!transmitted) {
      ev.kind = EventKind::total_internal_reflection;
      ev.exit_angle = angle_between(mirrored, hit.normal);
      out.children.push_back({mirrored, 1.0, ChildRole::reflected, medium});
      return out;
    }
    const double r = fresnel_unpolarized(ev.incident_angle, ev.n1, ev.n2);
    ev.kind = EventKind::refract;
    ev.exit_angle = angle_between(*transmitted, -hit.normal);
    out.children.push_back({mirrored, r, ChildRole::reflected, medium});
    out.children.push_back({*transmitted, 1.0 - r, ChildRole::refracted, other});
    return out;
  }

  const Fracture& f = host.fractures[hit.fracture];
  ev.n1 = ev.n2 = medium.index;
  out.absorbed_fraction = f.opacity;
  if (f.opacity >= 1.0) {
    ev.kind = EventKind::absorbed;
    out.absorbed_fraction = 1.0;
    return out;
  }
  const double pass = 1.0 - f.opacity;
  if (std::holds_alternative<MirrorMode>(f.mode)) {
    const Vec3 m = normalized(reflect(direction, hit.normal));
    ev.kind = EventKind::reflect;
    ev.exit_angle = angle_between(m, hit.normal);
    out.children.push_back({m, pass, ChildRole::reflected, medium});
  } else if (const auto* rm = std::get_if<RefractMode>(&f.mode)) {
    ev.kind = EventKind::fracture_hit;
    ev.n2 = medium.index + rm->delta_index;
    if (const auto t = refract(direction, hit.normal, ev.n1, ev.n2)) {
      ev.exit_angle = angle_between(*t, -hit.normal);
      out.children.push_back({*t, pass, ChildRole::refracted, medium});
    } else {
      const Vec3 m = normalized(reflect(direction, hit.normal));
      ev.exit_angle = angle_between(m, hit.normal);
      out.children.push_back({m, pass, ChildRole::reflected, medium});
    }
  } else {
    const auto& sc = std::get<ScatterMode>(f.mode);
    ev.kind = EventKind::fracture_hit;
    ev.exit_angle = ev.incident_angle;
    const Vec3 c = cross(direction, hit.normal);
    const Vec3 axis = norm(c) > 1e-12 ? normalized(c) : any_perpendicular(direction);
    const int n = sc.fan_count;
    for (int j = 0; j < n; ++j) {
      const double phi = -sc.cone_half_angle + 2.0 * sc.cone_half_angle * j / (n - 1);
      const Vec3 d = phi == 0.0 ? direction : normalized(rotate(direction, axis, phi));
      out.children.push_back({d, pass / n, ChildRole::scattered, medium});
    }
  }
  return out;
}

/// Skin attenuation of the segment [0, t] of `ray` travelling inside `medium`.
inline double attenuate_segment(const Scene& scene, const Medium& medium, const Ray& ray, double t,
                                double intensity) {
  if (medium.sphere < 0) return intensity;
  const auto& sh = scene[medium.sphere].shell;
  if (sh.shell_opacity == 0.0) return intensity;
  const double skin = t - length_inside_ball(ray, sh.center, sh.inner_radius(), t);
  if (!(skin > 0.0)) return intensity;
  return attenuate(intensity, sh.shell_opacity, skin, sh.shell_thickness);
}

namespace detail {

class TraceBuilder {
 public:
  TraceBuilder(const Scene& scene, const TraceLimits& limits, TraceTree& tree)
      : scene_(scene), limits_(limits), tree_(tree) {}

  int grow(int parent, ChildRole role, const Ray& ray, const Medium& medium, double intensity,
           int depth) {
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    {
      TraceNode& n = tree_.nodes.back();
      n.parent = parent;
      n.role = role;
      n.depth = depth;
      n.direction = ray.direction;
      n.segment.start = ray.origin;
      n.segment.medium_index = medium.index;
      n.segment.intensity_start = intensity;
    }
    auto node = [&]() -> TraceNode& { return tree_.nodes[id]; };

    if (intensity < limits_.min_intensity) {
      node().segment.end = ray.origin;
      node().segment.intensity_end = intensity;
      node().event.kind = EventKind::intensity_cutoff;
      node().event.position = ray.origin;
      return id;
    }

    const auto hit = find_next_hit(scene_, ray, medium, limits_.geometric_epsilon);
    if (!hit) {
      const Vec3 end = ray.at(limits_.escape_length);
      node().segment.end = end;
      node().segment.intensity_end = intensity;
      node().event.kind = EventKind::escaped;
      node().event.position = end;
      node().event.normal = ray.direction;
      return id;
    }

    const Vec3 end = ray.at(hit->t);
    const double terminal = attenuate_segment(scene_, medium, ray, hit->t, intensity);
    node().segment.end = end;
    node().segment.intensity_end = terminal;
    node().absorbed = intensity - terminal;
    node().event.position = end;
    node().event.normal = hit->normal;
    node().event.sphere = hit->sphere;
    node().event.fracture = hit->fracture;

    if (terminal == 0.0) {
      node().event.kind = EventKind::absorbed;
      return id;
    }
    if (terminal < limits_.min_intensity) {
      node().event.kind = EventKind::intensity_cutoff;
      return id;
    }
    if (depth >= limits_.max_depth) {
      node().event.kind = EventKind::depth_cutoff;
      return id;
    }

    const Interaction ix = interact(scene_, ray.direction, medium, *hit, end);
    node().event = ix.event;
    node().absorbed += terminal * ix.absorbed_fraction;
    for (const auto& c : ix.children) {
      const int child = grow(id, c.role, Ray{end, c.direction}, c.medium, terminal * c.weight, depth + 1);
      tree_.nodes[id].children.push_back(child);
    }
    return id;
  }

 private:
  const Scene& scene_;
  const TraceLimits& limits_;
  TraceTree& tree_;
};

}  // namespace detail

/// Deterministic recursive trace of the beam's central ray.
inline TraceTree trace_beam(const Scene& scene, const Beam& beam, const TraceLimits& limits = {}) {
  validate(limits);
  validate(beam);
  validate_scene(scene);
  if (beam.intensity < limits.min_intensity) {
    throw Error(ErrorCode::invalid_argument, "beam intensity below the trace cutoff");
  }
  TraceTree tree;
  tree.root = beam;
  detail::TraceBuilder builder(scene, limits, tree);
  builder.grow(-1, ChildRole::root, beam.axis, medium_at(scene, beam.axis.origin), beam.intensity, 1);
  return tree;
}

}  // namespace liveia::optics
