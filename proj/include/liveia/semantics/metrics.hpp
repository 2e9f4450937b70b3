#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <string>
#include <vector>

#include "liveia/semantics/psyche.hpp"

namespace liveia::semantics {

inline constexpr int kProbeCount = 312;

/// Fixed Fibonacci-lattice directions used by enlightenment_score.
inline const std::vector<Vec3>& probe_directions() {
  static const std::vector<Vec3> dirs = [] {
    constexpr double golden_angle = 2.39996322972865332223;
    std::vector<Vec3> out;
    out.reserve(kProbeCount);
    for (int i = 0; i < kProbeCount; ++i) {
      const double z = 1.0 - (2.0 * i + 1.0) / kProbeCount;
      const double r = std::sqrt(1.0 - z * z);
      const double phi = golden_angle * i;
      out.push_back(optics::normalized({r * std::cos(phi), r * std::sin(phi), z}));
    }
    return out;
  }();
  return dirs;
}

struct EnlightenmentReport {
  double score = 0.0;
  double uniformity = 0.0;           // u
  double obstructed_fraction = 0.0;  // f
  int obstructed_probes = 0;

  friend bool operator==(const EnlightenmentReport&, const EnlightenmentReport&) = default;
};

/// Score = u·(1 - f): u from the spread of inner-surface irradiance along the
/// probe fan, f the fraction of probes meeting any fracture.
inline EnlightenmentReport enlightenment_score(const PsycheSphere& sphere) {
  if (!(sphere.emitter_intensity > 0.0)) {
    throw Error(ErrorCode::undefined_score, "a dark sphere has no enlightenment score");
  }
  const auto& probes = probe_directions();
  const double inner = sphere.shell.inner_radius();
  const double base = sphere.emitter_intensity / (4.0 * optics::kPi * inner * inner);

  std::vector<double> irradiance;
  irradiance.reserve(probes.size());
  EnlightenmentReport r;
  for (const Vec3& d : probes) {
    const optics::Ray ray{sphere.shell.center, d};
    double transmission = 1.0;
    bool touched = false;
    for (const auto& f : sphere.fractures) {
      const auto hit = optics::intersect_fracture(ray, f);
      if (hit && hit->t <= inner) {
        touched = true;
        transmission *= 1.0 - f.opacity;
      }
    }
    if (touched) ++r.obstructed_probes;
    irradiance.push_back(base * transmission);
  }
  // Identical samples have exactly zero spread; summing them would not.
  const auto [lo, hi] = std::minmax_element(irradiance.begin(), irradiance.end());
  const bool flat = *lo == *hi;
  double mean = 0.0;
  for (double e : irradiance) mean += e;
  mean /= static_cast<double>(irradiance.size());
  double var = 0.0;
  for (double e : irradiance) var += (e - mean) * (e - mean);
  var /= static_cast<double>(irradiance.size());
  if (flat) var = 0.0;
  r.uniformity = mean > 0.0 ? std::clamp(1.0 - std::sqrt(var) / mean, 0.0, 1.0) : 0.0;
  r.obstructed_fraction = static_cast<double>(r.obstructed_probes) / static_cast<double>(probes.size());
  r.score = r.uniformity * (1.0 - r.obstructed_fraction);
  return r;
}

struct FractureInfo {
  std::string label;
  Placement placement = Placement::interior;
  std::string mode;
  double opacity = 0.0;
  Vec3 center;
  Vec3 normal;
  double radius = 0.0;

  friend bool operator==(const FractureInfo&, const FractureInfo&) = default;
};

struct ShadowCluster {
  std::vector<std::array<int, 3>> voxels;  // grid indices (x, y, z)
  Vec3 centroid;

  friend bool operator==(const ShadowCluster&, const ShadowCluster&) = default;
};

/// Mindfulness report: shadowed interior regions plus the fracture inventory.
struct ShadowReport {
  int grid_resolution = 0;
  double voxel_size = 0.0;
  std::vector<ShadowCluster> clusters;
  std::vector<FractureInfo> fractures;

  bool empty() const { return clusters.empty() && fractures.empty(); }
  std::size_t shadowed_voxels() const {
    std::size_t n = 0;
    for (const auto& c : clusters) n += c.voxels.size();
    return n;
  }
  friend bool operator==(const ShadowReport&, const ShadowReport&) = default;
};

inline Vec3 voxel_center(const PsycheSphere& s, int n, int ix, int iy, int iz) {
  const double r = s.shell.inner_radius();
  const double h = 2.0 * r / n;
  const Vec3& c = s.shell.center;
  return {c.x - r + (ix + 0.5) * h, c.y - r + (iy + 0.5) * h, c.z - r + (iz + 0.5) * h};
}

/// True when the straight emitter→point ray is blocked by an opacity-1 fracture.
inline bool is_shadowed(const PsycheSphere& s, const Vec3& p) {
  const Vec3 d = p - s.shell.center;
  const double len = optics::norm(d);
  if (len == 0.0) return false;
  const optics::Ray ray{s.shell.center, d / len};
  for (const auto& f : s.fractures) {
    if (f.opacity < 1.0) continue;
    const auto hit = optics::intersect_fracture(ray, f);
    if (hit && hit->t < len) return true;
  }
  return false;
}

inline ShadowReport shadow_scan(const PsycheSphere& s, int grid_resolution) {
  if (grid_resolution < 8 || grid_resolution > 128) {
    throw Error(ErrorCode::invalid_argument, "grid_resolution must lie in [8, 128]");
  }
  const int n = grid_resolution;
  ShadowReport report;
  report.grid_resolution = n;
  report.voxel_size = 2.0 * s.shell.inner_radius() / n;
  for (std::size_t i = 0; i < s.fractures.size(); ++i) {
    const auto& f = s.fractures[i];
    report.fractures.push_back({f.label, i < s.attributes.shadow_aspects.size()
                                             ? s.attributes.shadow_aspects[i].placement
                                             : Placement::interior,
                                optics::mode_name(f.mode), f.opacity, f.center, f.normal, f.radius});
  }

  const double inner = s.shell.inner_radius();
  auto index = [n](int x, int y, int z) { return (static_cast<std::size_t>(z) * n + y) * n + x; };
  std::vector<char> shadowed(static_cast<std::size_t>(n) * n * n, 0);
  bool any = false;
  for (int z = 0; z < n; ++z) {
    for (int y = 0; y < n; ++y) {
      for (int x = 0; x < n; ++x) {
        const Vec3 p = voxel_center(s, n, x, y, z);
        if (!(optics::norm(p - s.shell.center) < inner)) continue;
        if (is_shadowed(s, p)) {
          shadowed[index(x, y, z)] = 1;
          any = true;
        }
      }
    }
  }
  if (!any) return report;

  std::vector<char> seen(shadowed.size(), 0);
  for (int z = 0; z < n; ++z) {
    for (int y = 0; y < n; ++y) {
      for (int x = 0; x < n; ++x) {
        if (!shadowed[index(x, y, z)] || seen[index(x, y, z)]) continue;
        ShadowCluster cluster;
        std::deque<std::array<int, 3>> queue{{x, y, z}};
        seen[index(x, y, z)] = 1;
        Vec3 sum;
        while (!queue.empty()) {
          const auto v = queue.front();
          queue.pop_front();
          cluster.voxels.push_back(v);
          sum += voxel_center(s, n, v[0], v[1], v[2]);
          static constexpr int kSteps[6][3] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
          for (const auto& st : kSteps) {
            const int a = v[0] + st[0], b = v[1] + st[1], c = v[2] + st[2];
            if (a < 0 || b < 0 || c < 0 || a >= n || b >= n || c >= n) continue;
            const std::size_t k = index(a, b, c);
            if (shadowed[k] && !seen[k]) {
              seen[k] = 1;
              queue.push_back({a, b, c});
            }
          }
        }
        cluster.centroid = sum / static_cast<double>(cluster.voxels.size());
        report.clusters.push_back(std::move(cluster));
      }
    }
  }
  return report;
}

}  // namespace liveia::semantics
