#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <thread>
#include <vector>

#include "liveia/core/error.hpp"
#include "liveia/optics/trace.hpp"
#include "liveia/render/image.hpp"
#include "liveia/scenario/scenario.hpp"
#include "liveia/semantics/compile.hpp"

namespace liveia::render {

using optics::Vec3;

inline constexpr Rgb kBackground{8, 8, 12};
inline constexpr int kMinSize = 16;
inline constexpr int kMaxSize = 4096;

struct RenderOptions {
  unsigned threads = 0;  // 0: hardware concurrency
  bool draw_beams = true;
};

/// Image plus, per pixel, the index of the psyche the primary ray hit first
/// (-1 for background).
struct Frame {
  Image image;
  std::vector<int> psyche;
};

struct PinholeCamera {
  Vec3 origin, forward, right, up;
  double tan_half = 1.0;
  double aspect = 1.0;
  int width = 0, height = 0;

  PinholeCamera(const scenario::Camera& c, int w, int h) : width(w), height(h) {
    origin = c.position;
    forward = optics::normalized(c.look_at - c.position);
    right = optics::normalized(optics::cross(forward, c.up));
    up = optics::cross(right, forward);
    tan_half = std::tan(c.fov_degrees * optics::kPi / 360.0);
    aspect = static_cast<double>(w) / static_cast<double>(h);
  }

  optics::Ray ray(int x, int y) const {
    const double u = (2.0 * (x + 0.5) / width - 1.0) * tan_half * aspect;
    const double v = (1.0 - 2.0 * (y + 0.5) / height) * tan_half;
    return {origin, optics::normalized(forward + right * u + up * v)};
  }

  /// Pixels per world unit at a given depth along the view axis.
  double pixels_per_unit(double depth) const { return 0.5 * height / (tan_half * depth); }
};

namespace detail {

struct Colour {
  double r = 0, g = 0, b = 0;
  Colour operator*(double k) const { return {r * k, g * k, b * k}; }
  Colour operator+(const Colour& o) const { return {r + o.r, g + o.g, b + o.b}; }
};

inline Colour hsv(double hue_degrees, double s, double v) {
  const double h = std::fmod(std::fmod(hue_degrees, 360.0) + 360.0, 360.0) / 60.0;
  const double c = v * s;
  const double x = c * (1.0 - std::abs(std::fmod(h, 2.0) - 1.0));
  const double m = v - c;
  Colour out;
  switch (static_cast<int>(h)) {
    case 0: out = {c, x, 0}; break;
    case 1: out = {x, c, 0}; break;
    case 2: out = {0, c, x}; break;
    case 3: out = {0, x, c}; break;
    case 4: out = {x, 0, c}; break;
    default: out = {c, 0, x}; break;
  }
  return {out.r + m, out.g + m, out.b + m};
}

/// Surface colour of a psyche at unit-sphere point q.
inline Colour pattern_colour(const semantics::SurfacePattern& p, const Vec3& q) {
  using semantics::PatternId;
  if (p.id == PatternId::uniform) return {0.75, 0.75, 0.78};
  const double phase = static_cast<double>(p.seed % 1000) / 1000.0 * 2.0 * optics::kPi;
  const double f = (2.0 + 6.0 * p.scale) * optics::kPi;
  double t = 0.0;
  switch (p.id) {
    case PatternId::bands: t = 0.5 + 0.5 * std::sin(f * q.y + phase); break;
    case PatternId::spots: {
      const double s = std::sin(f * q.x + phase) * std::sin(f * q.y) * std::sin(f * q.z + phase);
      t = s > 0.35 ? 1.0 : 0.0;
      break;
    }
    case PatternId::marble: t = 0.5 + 0.5 * std::sin(f * (q.x + 0.4 * std::sin(2.0 * f * q.y / 3.0)) + phase); break;
    case PatternId::uniform: break;
  }
  const Colour a = hsv(p.base_hue, 0.55, 1.0);
  const Colour b = hsv(p.accent_hue, 0.55, 1.0);
  return a * (1.0 - t) + b * t;
}

/// Colour of one primary ray against the spheres, before beams and blur.
inline Colour shade(const scenario::Scenario& s, const optics::Ray& ray, int& hit_index) {
  hit_index = -1;
  double best = INFINITY;
  for (std::size_t i = 0; i < s.psyches.size(); ++i) {
    const auto& sh = s.psyches[i].shell;
    const auto roots = optics::detail::sphere_roots(ray, sh.center, sh.outer_radius, 0.0);
    if (roots && roots->t0 > 0.0 && roots->t0 < best) {
      best = roots->t0;
      hit_index = static_cast<int>(i);
    }
  }
  if (hit_index < 0) return {kBackground.r / 255.0, kBackground.g / 255.0, kBackground.b / 255.0};

  const auto& p = s.psyches[static_cast<std::size_t>(hit_index)];
  const auto& sh = p.shell;
  const Vec3 point = ray.at(best);
  const Vec3 normal = (point - sh.center) / sh.outer_radius;
  const double cos_i = std::clamp(-optics::dot(normal, ray.direction), 0.0, 1.0);

  // The emitter is seen along the front half of the chord: from the entry
  // point to the closest approach to the centre.
  const double t_mid = optics::dot(sh.center - ray.origin, ray.direction);
  const Vec3 closest = ray.at(t_mid);
  const double b = std::min(1.0, optics::norm(closest - sh.center) / sh.outer_radius);
  double transmission = 1.0 - optics::fresnel_unpolarized(std::acos(cos_i), 1.0, sh.refractive_index);
  const double skin = optics::length_inside_ball(ray, sh.center, sh.outer_radius, t_mid) -
                      optics::length_inside_ball(ray, sh.center, sh.inner_radius(), t_mid);
  if (skin > 0.0) transmission = optics::attenuate(transmission, sh.shell_opacity, skin, sh.shell_thickness);
  for (const auto& f : p.fractures) {
    const auto h = optics::intersect_fracture(ray, f, 0.0);
    if (h && h->t >= best && h->t <= t_mid && optics::norm(ray.at(h->t) - sh.center) < sh.outer_radius) {
      transmission *= 1.0 - f.opacity;
    }
  }
  const double glow = p.emitter_intensity * transmission * (1.0 - b * b);

  const Colour surface = pattern_colour(p.pattern, normal);
  const Colour ambient = surface * (0.12 * (0.35 + 0.65 * cos_i));
  const Colour light = surface * 0.35 + Colour{1.0, 0.95, 0.85} * 0.65;
  return ambient + light * glow;
}

inline std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

inline Colour tag_colour(optics::BeamTag tag) {
  switch (tag) {
    case optics::BeamTag::thought: return {1.0, 0.85, 0.35};
    case optics::BeamTag::percept: return {0.45, 0.8, 1.0};
    case optics::BeamTag::deception_other: return {1.0, 0.3, 0.3};
    case optics::BeamTag::deception_self: return {0.75, 0.4, 1.0};
    case optics::BeamTag::probe: return {0.7, 0.7, 0.7};
  }
  return {1, 1, 1};
}

struct Approach {
  double distance;  // infinity when the nearest point lies behind the camera
  double depth;     // ray parameter of the nearest point
};

inline Approach ray_segment_approach(const optics::Ray& ray, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const Vec3 ao = a - ray.origin;
  const double dd = optics::dot(ab, ab);
  const double dr = optics::dot(ab, ray.direction);
  double s = 0.0;
  if (dd > 0.0) {
    const double denom = dd - dr * dr;
    s = denom > 1e-15 ? std::clamp((dr * optics::dot(ao, ray.direction) - optics::dot(ao, ab)) / denom, 0.0, 1.0)
                      : 0.0;
  }
  const Vec3 q = a + ab * s;
  const double t = optics::dot(q - ray.origin, ray.direction);
  if (t <= 0.0) return {INFINITY, t};
  return {optics::norm(q - ray.at(t)), t};
}

struct Capsule {
  Vec3 a, b;
  double radius;
  double intensity;
  Colour colour;
};

inline std::vector<Capsule> beam_capsules(const scenario::Scenario& s) {
  std::vector<Capsule> out;
  const optics::Scene scene = scenario::compile_scene(s);
  for (const auto& beam : scenario::compile_beams(s)) {
    const auto tree = optics::trace_beam(scene, beam);
    const double radius = 0.01 + 0.05 * std::tan(beam.divergence);
    for (const auto& n : tree.nodes) {
      if (optics::norm(n.segment.end - n.segment.start) == 0.0) continue;
      out.push_back({n.segment.start, n.segment.end, radius,
                     0.5 * (n.segment.intensity_start + n.segment.intensity_end), tag_colour(beam.tag)});
    }
  }
  return out;
}

/// Summed-area table over a per-pixel value, with a zero border row/column.
template <typename T>
struct Sat {
  int w, h;
  std::vector<T> v;
  template <typename F>
  Sat(int w_, int h_, F value) : w(w_), h(h_), v(static_cast<std::size_t>(w_ + 1) * (h_ + 1), T{}) {
    for (int y = 0; y < h; ++y) {
      T row{};
      for (int x = 0; x < w; ++x) {
        row += value(x, y);
        v[idx(x + 1, y + 1)] = v[idx(x + 1, y)] + row;
      }
    }
  }
  std::size_t idx(int x, int y) const { return static_cast<std::size_t>(y) * (w + 1) + x; }
  // Sum over [x0, x1] x [y0, y1], clipped to the image.
  T sum(int x0, int y0, int x1, int y1) const {
    x0 = std::max(x0, 0);
    y0 = std::max(y0, 0);
    x1 = std::min(x1, w - 1);
    y1 = std::min(y1, h - 1);
    return v[idx(x1 + 1, y1 + 1)] - v[idx(x0, y1 + 1)] - v[idx(x1 + 1, y0)] + v[idx(x0, y0)];
  }
};

/// Box-blur the silhouette band of every psyche that has comfort with a
/// neighbour. Reads the unblurred frame, so the result does not depend on
/// pixel order.
inline void comfort_blur(const scenario::Scenario& s, const PinholeCamera& cam, Frame& frame) {
  const int w = frame.image.width, h = frame.image.height;
  std::vector<int> radius_px(s.psyches.size(), 0);
  for (const auto& [key, comfort] : s.comfort.pairs()) {
    const auto* a = scenario::find_psyche(s, key.first);
    const auto* b = scenario::find_psyche(s, key.second);
    const double gap = optics::norm(a->shell.center - b->shell.center) - a->shell.outer_radius - b->shell.outer_radius;
    const double world = semantics::comfort_blur_radius(comfort, std::max(0.0, gap),
                                                        std::min(a->shell.outer_radius, b->shell.outer_radius));
    for (const auto* p : {a, b}) {
      const double depth = optics::dot(p->shell.center - cam.origin, cam.forward);
      if (depth <= 0.0) continue;
      const int px = static_cast<int>(std::lround(world * cam.pixels_per_unit(depth)));
      const auto i = static_cast<std::size_t>(p - s.psyches.data());
      radius_px[i] = std::max(radius_px[i], std::min(px, 64));
    }
  }
  if (std::all_of(radius_px.begin(), radius_px.end(), [](int r) { return r == 0; })) return;

  std::vector<int> k(static_cast<std::size_t>(w) * h, 0);
  for (std::size_t i = 0; i < radius_px.size(); ++i) {
    const int r = radius_px[i];
    if (r == 0) continue;
    const Sat<int> mask(w, h, [&](int x, int y) { return frame.psyche[static_cast<std::size_t>(y) * w + x] == static_cast<int>(i) ? 1 : 0; });
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const int inside = mask.sum(x - r, y - r, x + r, y + r);
        const int area = (std::min(x + r, w - 1) - std::max(x - r, 0) + 1) * (std::min(y + r, h - 1) - std::max(y - r, 0) + 1);
        if (inside > 0 && inside < area) k[static_cast<std::size_t>(y) * w + x] = std::max(k[static_cast<std::size_t>(y) * w + x], r);
      }
    }
  }
  const Image src = frame.image;
  std::array<Sat<std::uint64_t>, 3> channel{
      Sat<std::uint64_t>(w, h, [&](int x, int y) { return std::uint64_t{src.at(x, y).r}; }),
      Sat<std::uint64_t>(w, h, [&](int x, int y) { return std::uint64_t{src.at(x, y).g}; }),
      Sat<std::uint64_t>(w, h, [&](int x, int y) { return std::uint64_t{src.at(x, y).b}; })};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int r = k[static_cast<std::size_t>(y) * w + x];
      if (r == 0) continue;
      const auto area = static_cast<std::uint64_t>((std::min(x + r, w - 1) - std::max(x - r, 0) + 1) *
                                                   (std::min(y + r, h - 1) - std::max(y - r, 0) + 1));
      auto avg = [&](int c) {
        const std::uint64_t sum = channel[c].sum(x - r, y - r, x + r, y + r);
        return static_cast<std::uint8_t>((sum + area / 2) / area);
      };
      frame.image.set(x, y, {avg(0), avg(1), avg(2)});
    }
  }
}

template <typename F>
void parallel_rows(int height, unsigned threads, F&& row) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(height));
  if (threads <= 1) {
    for (int y = 0; y < height; ++y) row(y);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int y = next++; y < height; y = next++) row(y);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace detail

/// Render a scenario through its camera. Output depends only on the
/// scenario and the size, never on the thread count.
inline Frame render_frame(const scenario::Scenario& s, int width, int height, const RenderOptions& opt = {}) {
  if (width < kMinSize || width > kMaxSize || height < kMinSize || height > kMaxSize) {
    throw Error(ErrorCode::invalid_argument, "image size must lie in [16, 4096]");
  }
  const PinholeCamera cam(s.camera, width, height);
  Frame frame{Image(width, height, kBackground), std::vector<int>(static_cast<std::size_t>(width) * height, -1)};

  detail::parallel_rows(height, opt.threads, [&](int y) {
    for (int x = 0; x < width; ++x) {
      int hit = -1;
      const detail::Colour c = detail::shade(s, cam.ray(x, y), hit);
      frame.psyche[static_cast<std::size_t>(y) * width + x] = hit;
      frame.image.set(x, y, {detail::to_byte(c.r), detail::to_byte(c.g), detail::to_byte(c.b)});
    }
  });

  detail::comfort_blur(s, cam, frame);

  if (opt.draw_beams) {
    const auto capsules = detail::beam_capsules(s);
    if (!capsules.empty()) {
      const double pixel_angle = cam.tan_half / height;
      detail::parallel_rows(height, opt.threads, [&](int y) {
        for (int x = 0; x < width; ++x) {
          const optics::Ray ray = cam.ray(x, y);
          const Rgb base = frame.image.at(x, y);
          detail::Colour c{base.r / 255.0, base.g / 255.0, base.b / 255.0};
          bool touched = false;
          for (const auto& cap : capsules) {
            const auto [d, depth] = detail::ray_segment_approach(ray, cap.a, cap.b);
            // Never thinner than about one pixel, so narrow beams stay visible.
            const double r = std::max(cap.radius, depth * pixel_angle);
            if (d < r) {
              c = c + cap.colour * (cap.intensity * (1.0 - d / r));
              touched = true;
            }
          }
          if (touched) frame.image.set(x, y, {detail::to_byte(c.r), detail::to_byte(c.g), detail::to_byte(c.b)});
        }
      });
    }
  }
  return frame;
}

inline Image render_image(const scenario::Scenario& s, int width, int height, const RenderOptions& opt = {}) {
  return render_frame(s, width, height, opt).image;
}

}  // namespace liveia::render
