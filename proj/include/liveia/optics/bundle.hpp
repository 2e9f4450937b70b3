#pragma once

#include <optional>
#include <vector>

#include "liveia/optics/trace.hpp"

namespace liveia::optics {

struct SegmentDivergence {
  std::optional<double> divergence;  // half the angle between the marginals
  bool flagged = false;              // a marginal failed to follow the central path
};

struct BundleTrace {
  TraceTree central;
  std::vector<SegmentDivergence> segments;  // parallel to central.nodes
};

/// Plane of the marginal rays: spanned by the beam axis and
/// cross(plane_normal, axis). Deterministic default when not given.
inline Vec3 default_bundle_plane_normal(const Vec3& axis) { return any_perpendicular(axis); }

namespace detail {

struct MarginalState {
  Ray ray;
  Medium medium;
};

/// Advances a marginal through the same interface the central node ended on
/// and returns the child matching (role, ordinal among that role).
inline std::optional<MarginalState> follow_marginal(const Scene& scene, const MarginalState& m,
                                                    const InterfaceEvent& central_event,
                                                    ChildRole role, int ordinal, double eps) {
  const auto hit = find_next_hit(scene, m.ray, m.medium, eps);
  if (!hit || hit->sphere != central_event.sphere || hit->fracture != central_event.fracture) {
    return std::nullopt;
  }
  const Vec3 p = m.ray.at(hit->t);
  const Interaction ix = interact(scene, m.ray.direction, m.medium, *hit, p);
  int seen = 0;
  for (const auto& c : ix.children) {
    if (c.role != role) continue;
    if (seen++ == ordinal) return MarginalState{Ray{p, c.direction}, c.medium};
  }
  return std::nullopt;
}

}  // namespace detail

/// Traces the central ray (full tree) and two marginal rays tilted
/// ±divergence, following the central ray's branch choices, and reports the
/// bundle divergence on every central segment.
inline BundleTrace bundle_divergence(const Scene& scene, const Beam& beam, const TraceLimits& limits = {},
                                     std::optional<Vec3> plane_normal = std::nullopt) {
  if (!(beam.divergence >= 0.0 && beam.divergence <= kPi / 4)) {
    throw Error(ErrorCode::invalid_argument, "bundle divergence must lie in [0, pi/4]");
  }
  BundleTrace out;
  out.central = trace_beam(scene, beam, limits);
  const auto& nodes = out.central.nodes;
  out.segments.resize(nodes.size());

  const Vec3 axis = beam.axis.direction;
  Vec3 pn = plane_normal ? normalized(*plane_normal) : default_bundle_plane_normal(axis);
  pn = normalized(pn - axis * dot(pn, axis));
  const Medium start = medium_at(scene, beam.axis.origin);

  using Pair = std::optional<std::pair<detail::MarginalState, detail::MarginalState>>;
  std::vector<Pair> state(nodes.size());
  state[0] = std::make_pair(
      detail::MarginalState{Ray{beam.axis.origin, normalized(rotate(axis, pn, beam.divergence))}, start},
      detail::MarginalState{Ray{beam.axis.origin, normalized(rotate(axis, pn, -beam.divergence))}, start});

  // Pre-order guarantees parents are visited before children.
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const auto& node = nodes[k];
    if (!state[k]) {
      out.segments[k].flagged = true;
      continue;
    }
    out.segments[k].divergence =
        0.5 * angle_between(state[k]->first.ray.direction, state[k]->second.ray.direction);
    for (std::size_t c = 0; c < node.children.size(); ++c) {
      const int child = node.children[c];
      const ChildRole role = nodes[child].role;
      int ordinal = 0;
      for (std::size_t p = 0; p < c; ++p) {
        if (nodes[node.children[p]].role == role) ++ordinal;
      }
      auto a = detail::follow_marginal(scene, state[k]->first, node.event, role, ordinal,
                                       limits.geometric_epsilon);
      auto b = detail::follow_marginal(scene, state[k]->second, node.event, role, ordinal,
                                       limits.geometric_epsilon);
      if (a && b) state[child] = std::make_pair(*a, *b);
    }
  }
  return out;
}

}  // namespace liveia::optics
