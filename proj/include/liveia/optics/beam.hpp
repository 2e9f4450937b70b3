#pragma once

#include <string_view>
#include <vector>

#include "liveia/optics/vec3.hpp"

namespace liveia::optics {

struct WaveComponent {
  double frequency = 1.0;
  double amplitude = 1.0;
  double phase = 0.0;

  friend bool operator==(const WaveComponent&, const WaveComponent&) = default;
};

enum class BeamTag { thought, percept, deception_other, deception_self, probe };

inline constexpr std::string_view to_string(BeamTag tag) {
  switch (tag) {
    case BeamTag::thought: return "thought";
    case BeamTag::percept: return "percept";
    case BeamTag::deception_other: return "deception_other";
    case BeamTag::deception_self: return "deception_self";
    case BeamTag::probe: return "probe";
  }
  return "probe";
}

inline bool parse_beam_tag(std::string_view s, BeamTag& out) {
  for (BeamTag t : {BeamTag::thought, BeamTag::percept, BeamTag::deception_other,
                    BeamTag::deception_self, BeamTag::probe}) {
    if (to_string(t) == s) {
      out = t;
      return true;
    }
  }
  return false;
}

/// Central ray plus divergence half-angle. Waveform components are carried
/// as metadata; splitting a beam only changes intensity.
struct Beam {
  Ray axis;
  double divergence = 0.0;
  double intensity = 1.0;
  std::vector<WaveComponent> waveform;
  BeamTag tag = BeamTag::probe;

  friend bool operator==(const Beam&, const Beam&) = default;
};

inline void validate(const WaveComponent& w) {
  if (!(w.frequency > 0.0)) throw Error(ErrorCode::invalid_argument, "frequency must be > 0");
  if (!(w.amplitude >= 0.0)) throw Error(ErrorCode::invalid_argument, "amplitude must be >= 0");
  if (!(w.phase >= 0.0 && w.phase < 2 * kPi)) {
    throw Error(ErrorCode::invalid_argument, "phase must lie in [0, 2pi)");
  }
}

inline void validate(const Beam& b) {
  require_unit(b.axis.direction, "beam direction");
  if (!(b.intensity >= 0.0)) throw Error(ErrorCode::invalid_argument, "intensity must be >= 0");
  if (!(b.divergence >= 0.0 && b.divergence < kPi / 2)) {
    throw Error(ErrorCode::invalid_argument, "divergence must lie in [0, pi/2)");
  }
  for (const auto& w : b.waveform) validate(w);
}

}  // namespace liveia::optics
