#pragma once

#include <charconv>
#include <map>
#include <sstream>
#include <string>
#include <string_view>

#include "liveia/core/error.hpp"

namespace liveia::semantics {

/// Trait-name -> hue (degrees). Text form: comment lines start with '#',
/// the first other line is `version 1`, then one `name hue-degrees` per line.
using HueTable = std::map<std::string, double, std::less<>>;

inline constexpr std::string_view kDefaultHueTableText =
    "# liveia trait hue table\n"
    "version 1\n"
    "ambition 15\n"
    "anxiety 0\n"
    "calm 200\n"
    "creativity 300\n"
    "curiosity 280\n"
    "discipline 220\n"
    "humor 55\n"
    "kindness 120\n"
    "melancholy 240\n"
    "openness 180\n"
    "playfulness 90\n"
    "warmth 30\n";

inline HueTable parse_hue_table(std::string_view text) {
  HueTable table;
  std::istringstream in{std::string(text)};
  std::string line;
  bool versioned = false;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string name, value;
    fields >> name >> value;
    if (!versioned) {
      if (name != "version" || value != "1") {
        throw ParseError(lineno, 1, "version", "hue table must start with 'version 1'");
      }
      versioned = true;
      continue;
    }
    double hue = 0;
    const auto r = std::from_chars(value.data(), value.data() + value.size(), hue);
    if (name.empty() || r.ec != std::errc{} || r.ptr != value.data() + value.size() ||
        !(hue >= 0.0 && hue < 360.0)) {
      throw ParseError(lineno, 1, "range", "expected 'name hue' with hue in [0, 360)");
    }
    table[name] = hue;
  }
  if (!versioned) throw ParseError(lineno, 1, "version", "missing version line");
  return table;
}

inline const HueTable& default_hue_table() {
  static const HueTable table = parse_hue_table(kDefaultHueTableText);
  return table;
}

}  // namespace liveia::semantics
