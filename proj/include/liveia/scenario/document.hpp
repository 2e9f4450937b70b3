#pragma once

// Text form of a scenario (.liveia files).
//
//   liveia 1
//   scenario "name" {
//     id "...";
//     camera { position (x, y, z); look_at (...); up (...); fov 45; }
//     psyche "alice" { position (...); radius 1; vitality 1; ... shadow "grief" { ... } }
//     comfort "alice" "bob" 0.8;
//     thought from "alice" { direction (...); valence 0.5; clarity 0.5; components [(f, a, p)]; tag thought; state active; }
//     lineage { parent "..."; mutation ...; }
//   }
//
// `#` starts a line comment. Semicolons after simple statements are optional
// on input and always written by the serializer.

#include <charconv>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "liveia/core/error.hpp"
#include "liveia/scenario/scenario.hpp"

namespace liveia::scenario {

inline constexpr int kDocumentVersion = 1;

namespace detail {

struct Token {
  enum Kind { ident, string, number, punct, end } kind = end;
  std::string text;
  double value = 0.0;
  int line = 1;
  int column = 1;
};

inline std::string describe(const Token& t) {
  switch (t.kind) {
    case Token::ident: return "'" + t.text + "'";
    case Token::string: return "string \"" + t.text + "\"";
    case Token::number: return "number " + t.text;
    case Token::punct: return "'" + t.text + "'";
    case Token::end: return "end of input";
  }
  return "?";
}

inline std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto fail = [&](const std::string& msg) -> void { throw ParseError(line, col, "syntax", msg); };
  auto advance = [&]() {
    if (src[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    ++i;
  };
  while (i < src.size()) {
    const char c = src[i];
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      advance();
      continue;
    }
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') advance();
      continue;
    }
    Token t;
    t.line = line;
    t.column = col;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      t.kind = Token::ident;
      while (i < src.size() && (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_')) {
        t.text += src[i];
        advance();
      }
    } else if (c == '"') {
      t.kind = Token::string;
      advance();
      for (;;) {
        if (i >= src.size() || src[i] == '\n') {
          line = t.line;
          col = t.column;
          fail("unterminated string");
        }
        const char d = src[i];
        if (d == '"') {
          advance();
          break;
        }
        if (static_cast<unsigned char>(d) < 0x20) fail("control character in string");
        if (d == '\\') {
          advance();
          if (i >= src.size()) fail("unterminated string");
          switch (src[i]) {
            case '"': t.text += '"'; break;
            case '\\': t.text += '\\'; break;
            case 'n': t.text += '\n'; break;
            case 't': t.text += '\t'; break;
            default: fail(std::string("unknown escape \\") + src[i]);
          }
          advance();
          continue;
        }
        t.text += d;
        advance();
      }
    } else if (c == '-' || c == '+' || std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      t.kind = Token::number;
      const std::size_t start = i;
      if (src[i] == '-' || src[i] == '+') advance();
      while (i < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '.' ||
              ((src[i] == '-' || src[i] == '+') && (src[i - 1] == 'e' || src[i - 1] == 'E')))) {
        advance();
      }
      t.text = std::string(src.substr(start, i - start));
      std::string_view body = t.text;
      if (!body.empty() && body[0] == '+') body.remove_prefix(1);
      const auto r = std::from_chars(body.data(), body.data() + body.size(), t.value);
      if (r.ec != std::errc{} || r.ptr != body.data() + body.size() || !std::isfinite(t.value)) {
        line = t.line;
        col = t.column;
        fail("malformed number '" + t.text + "'");
      }
    } else if (std::string_view("{}()[],;").find(c) != std::string_view::npos) {
      t.kind = Token::punct;
      t.text = std::string(1, c);
      advance();
    } else {
      fail(std::string("unexpected character '") + c + "'");
    }
    out.push_back(std::move(t));
  }
  Token e;
  e.line = line;
  e.column = col;
  out.push_back(e);
  return out;
}

struct PsycheDecl {
  PsycheAttributes attributes;
  Vec3 position;
  double radius = 1.0;
  Token at;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : toks_(tokenize(text)) {}

  Scenario document() {
    if (is_ident("liveia")) {
      next();
      const Token& v = peek();
      if (integer("version") != kDocumentVersion) {
        error(v, "version", "unsupported document version " + v.text);
      }
      semicolon();
    }
    keyword("scenario");
    Scenario s;
    s.name = string();
    punct("{");
    std::vector<Token> psyche_at;
    struct Pending {
      Token at;
      std::string a, b;
      double value;
    };
    std::vector<Pending> comforts;
    std::vector<std::pair<Token, Emission>> emissions;
    bool have_camera = false;
    Token camera_at;
    while (!is_punct("}")) {
      const Token& t = peek();
      if (is_ident("id")) {
        next();
        s.id = string();
        semicolon();
      } else if (is_ident("camera")) {
        camera_at = t;
        have_camera = true;
        s.camera = camera();
      } else if (is_ident("psyche")) {
        PsycheDecl d = psyche();
        for (std::size_t i = 0; i < s.psyches.size(); ++i) {
          if (s.psyches[i].name() == d.attributes.name) {
            error(d.at, "unique-name", "duplicate psyche \"" + d.attributes.name + "\"");
          }
        }
        s.psyches.push_back(compile(d));
        psyche_at.push_back(d.at);
      } else if (is_ident("comfort")) {
        const Token at = next();
        Pending p{at, string(), string(), 0.0};
        p.value = unit_value("comfort \"" + p.a + "\" \"" + p.b + "\"");
        semicolon();
        comforts.push_back(std::move(p));
      } else if (is_ident("thought")) {
        const Token at = t;
        emissions.emplace_back(at, thought());
      } else if (is_ident("lineage")) {
        s.lineage = lineage();
      } else {
        unexpected("a scenario statement");
      }
    }
    next();
    if (peek().kind != Token::end) unexpected("end of input");

    // Cross-references and geometry are checked once everything is declared.
    for (std::size_t i = 0; i < s.psyches.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        const auto& a = s.psyches[j].shell;
        const auto& b = s.psyches[i].shell;
        if (optics::norm(a.center - b.center) < a.outer_radius + b.outer_radius - 1e-9) {
          error(psyche_at[i], "no-overlap",
                "psyche \"" + s.psyches[i].name() + "\" overlaps \"" + s.psyches[j].name() + "\"");
        }
      }
    }
    for (const auto& p : comforts) {
      try {
        validate_comfort(s, p.a, p.b, p.value);
      } catch (const ValidationError& e) {
        error(p.at, e.invariant(), e.what());
      }
      s.comfort.set(p.a, p.b, p.value);
    }
    for (auto& [at, e] : emissions) {
      try {
        validate(s, e);
      } catch (const ValidationError& err) {
        error(at, err.invariant(), err.what());
      }
      s.emissions.push_back(std::move(e));
    }
    if (have_camera) {
      try {
        validate(s.camera);
      } catch (const ValidationError& e) {
        error(camera_at, e.invariant(), e.what());
      }
    }
    return s;
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;

  const Token& peek() const { return toks_[pos_]; }
  const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  bool is_ident(std::string_view w) const { return peek().kind == Token::ident && peek().text == w; }
  bool is_punct(std::string_view p) const { return peek().kind == Token::punct && peek().text == p; }

  [[noreturn]] static void error(const Token& t, const std::string& invariant, const std::string& msg) {
    throw ParseError(t.line, t.column, invariant, msg);
  }
  [[noreturn]] void unexpected(const std::string& wanted) const {
    error(peek(), "syntax", "expected " + wanted + ", found " + describe(peek()));
  }

  void keyword(std::string_view w) {
    if (!is_ident(w)) unexpected("'" + std::string(w) + "'");
    next();
  }
  void punct(std::string_view p) {
    if (!is_punct(p)) unexpected("'" + std::string(p) + "'");
    next();
  }
  void semicolon() {
    if (is_punct(";")) next();
  }
  std::string ident() {
    if (peek().kind != Token::ident) unexpected("a name");
    return next().text;
  }
  std::string string() {
    if (peek().kind != Token::string) unexpected("a quoted string");
    return next().text;
  }
  double number() {
    if (peek().kind != Token::number) unexpected("a number");
    return quantize(next().value);
  }
  long integer(const std::string& what) {
    const Token& t = peek();
    const double v = number();
    if (v != std::floor(v) || std::abs(v) > 1e9) error(t, "range", what + " must be an integer");
    return static_cast<long>(v);
  }
  double ranged(const std::string& what, double lo, double hi, bool open_lo = false) {
    const Token& t = peek();
    const double v = number();
    if (!(open_lo ? v > lo : v >= lo) || !(v <= hi)) {
      error(t, "range",
            what + " " + t.text + " must lie in " + (open_lo ? "(" : "[") + format_real(lo) + ", " + format_real(hi) + "]");
    }
    return v;
  }
  double unit_value(const std::string& what) { return ranged(what, 0.0, 1.0); }

  Vec3 vec3() {
    punct("(");
    Vec3 v;
    v.x = number();
    punct(",");
    v.y = number();
    punct(",");
    v.z = number();
    punct(")");
    return v;
  }

  Camera camera() {
    keyword("camera");
    punct("{");
    Camera c;
    while (!is_punct("}")) {
      if (is_ident("position")) {
        next();
        c.position = vec3();
      } else if (is_ident("look_at")) {
        next();
        c.look_at = vec3();
      } else if (is_ident("up")) {
        next();
        c.up = vec3();
      } else if (is_ident("fov")) {
        next();
        c.fov_degrees = number();
      } else {
        unexpected("a camera field");
      }
      semicolon();
    }
    next();
    return c;
  }

  optics::FractureMode mode() {
    const Token& t = peek();
    const std::string kind = ident();
    if (kind == "mirror") return optics::MirrorMode{};
    if (kind == "refract") return optics::RefractMode{number()};
    if (kind == "scatter") {
      optics::ScatterMode m;
      m.fan_count = static_cast<int>(integer("scatter fan count"));
      m.cone_half_angle = number();
      return m;
    }
    error(t, "syntax", "unknown fracture mode '" + kind + "'");
  }

  ShadowAspect shadow() {
    keyword("shadow");
    ShadowAspect a;
    a.label = string();
    punct("{");
    while (!is_punct("}")) {
      const Token& t = peek();
      const std::string field = ident();
      if (field == "severity") {
        a.severity = ranged("shadow severity", 0.0, 1.0, true);
      } else if (field == "placement") {
        const std::string p = ident();
        if (p == "interior") {
          a.placement = semantics::Placement::interior;
        } else if (p == "surface") {
          a.placement = semantics::Placement::surface;
        } else {
          error(t, "syntax", "placement must be interior or surface");
        }
      } else if (field == "axis") {
        a.axis = vec3();
      } else if (field == "tilt") {
        a.tilt = number();
      } else if (field == "mode") {
        a.mode = mode();
      } else if (field == "opacity") {
        a.opacity = unit_value("shadow opacity");
      } else {
        error(t, "syntax", "unknown shadow field '" + field + "'");
      }
      semicolon();
    }
    next();
    return a;
  }

  PsycheDecl psyche() {
    PsycheDecl d;
    d.at = peek();
    keyword("psyche");
    d.attributes.name = string();
    if (d.attributes.name.empty()) error(d.at, "range", "psyche name must be non-empty");
    punct("{");
    while (!is_punct("}")) {
      if (is_ident("shadow")) {
        d.attributes.shadow_aspects.push_back(shadow());
        continue;
      }
      const Token& t = peek();
      const std::string field = ident();
      if (field == "position") {
        d.position = vec3();
      } else if (field == "radius") {
        d.radius = ranged("radius", 0.0, 1e9, true);
      } else if (field == "vitality") {
        d.attributes.vitality = unit_value("vitality");
      } else if (field == "accessibility") {
        d.attributes.accessibility = unit_value("accessibility");
      } else if (field == "depth") {
        d.attributes.depth = unit_value("depth");
      } else if (field == "trait") {
        const std::string k = string();
        d.attributes.traits[k] = unit_value("trait \"" + k + "\"");
      } else {
        error(t, "syntax", "unknown psyche field '" + field + "'");
      }
      semicolon();
    }
    next();
    return d;
  }

  static PsycheSphere compile(const PsycheDecl& d) {
    try {
      return make_psyche(d.attributes, d.position, d.radius);
    } catch (const ValidationError& e) {
      error(d.at, e.invariant(), e.what());
    }
  }

  Thought thought_body(Emission& e) {
    Thought th;
    punct("{");
    while (!is_punct("}")) {
      const Token& t = peek();
      const std::string field = ident();
      if (field == "direction") {
        e.direction = vec3();
      } else if (field == "valence") {
        th.valence = ranged("valence", -1.0, 1.0);
      } else if (field == "clarity") {
        th.clarity = unit_value("clarity");
      } else if (field == "components") {
        punct("[");
        while (!is_punct("]")) {
          const Token& at = peek();
          punct("(");
          optics::WaveComponent w;
          w.frequency = number();
          punct(",");
          w.amplitude = number();
          punct(",");
          w.phase = number();
          punct(")");
          try {
            optics::validate(w);
          } catch (const Error& err) {
            error(at, "range", std::string("waveform component: ") + err.what());
          }
          th.components.push_back(w);
          if (!is_punct("]")) punct(",");
        }
        next();
      } else if (field == "tag") {
        const std::string tag = ident();
        if (!optics::parse_beam_tag(tag, e.tag)) error(t, "syntax", "unknown beam tag '" + tag + "'");
      } else if (field == "state") {
        const std::string st = ident();
        if (st == "active") {
          th.state = semantics::ThoughtState::active;
        } else if (st == "spark") {
          th.state = semantics::ThoughtState::spark;
        } else {
          error(t, "syntax", "thought state must be active or spark");
        }
      } else {
        error(t, "syntax", "unknown thought field '" + field + "'");
      }
      semicolon();
    }
    next();
    return th;
  }

  Emission thought() {
    keyword("thought");
    keyword("from");
    Emission e;
    if (is_punct("(")) {
      e.source = vec3();
    } else {
      e.source = string();
    }
    e.thought = thought_body(e);
    return e;
  }

  Mutation mutation() {
    const Token& t = peek();
    const std::string op = ident();
    if (op == "set_attribute") {
      SetAttribute m;
      m.psyche = string();
      m.key = string();
      m.value = number();
      semicolon();
      return m;
    }
    if (op == "add_psyche") {
      const PsycheDecl d = psyche();
      return AddPsyche{d.attributes, d.position, d.radius};
    }
    if (op == "remove_psyche") {
      RemovePsyche m{string()};
      semicolon();
      return m;
    }
    if (op == "emit_beam") return EmitBeam{thought()};
    if (op == "retire_beam") {
      const Token& at = peek();
      const long i = integer("beam index");
      if (i < 0) error(at, "range", "beam index must be >= 0");
      semicolon();
      return RetireBeam{static_cast<std::size_t>(i)};
    }
    if (op == "set_comfort") {
      SetComfort m;
      m.a = string();
      m.b = string();
      m.value = number();
      semicolon();
      return m;
    }
    if (op == "reorient") {
      Reorient m;
      keyword("axis");
      m.axis = vec3();
      keyword("angle");
      m.angle = number();
      keyword("pivot");
      m.pivot = vec3();
      semicolon();
      return m;
    }
    if (op == "add_shadow") {
      AddShadow m;
      m.psyche = string();
      m.shadow = shadow();
      return m;
    }
    if (op == "remove_shadow") {
      RemoveShadow m;
      m.psyche = string();
      m.label = string();
      semicolon();
      return m;
    }
    error(t, "syntax", "unknown mutation '" + op + "'");
  }

  Lineage lineage() {
    keyword("lineage");
    punct("{");
    Lineage l;
    while (!is_punct("}")) {
      if (is_ident("parent")) {
        next();
        l.parent_id = string();
        semicolon();
      } else if (is_ident("mutation")) {
        next();
        l.mutations.push_back(mutation());
      } else {
        unexpected("'parent' or 'mutation'");
      }
    }
    next();
    return l;
  }
};

// -- writer ---------------------------------------------------------------------

inline std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out + "\"";
}

inline std::string vec(const Vec3& v) {
  return "(" + format_real(v.x) + ", " + format_real(v.y) + ", " + format_real(v.z) + ")";
}

class Writer {
 public:
  std::string out;

  void line(int depth, const std::string& text) {
    out.append(static_cast<std::size_t>(depth) * 2, ' ');
    out += text;
    out += '\n';
  }

  void camera(int d, const Camera& c) {
    line(d, "camera {");
    line(d + 1, "position " + vec(c.position) + ";");
    line(d + 1, "look_at " + vec(c.look_at) + ";");
    line(d + 1, "up " + vec(c.up) + ";");
    line(d + 1, "fov " + format_real(c.fov_degrees) + ";");
    line(d, "}");
  }

  void shadow(int d, const std::string& prefix, const ShadowAspect& a) {
    line(d, prefix + "shadow " + quote(a.label) + " {");
    line(d + 1, "severity " + format_real(a.severity) + ";");
    line(d + 1, std::string("placement ") + std::string(semantics::to_string(a.placement)) + ";");
    if (a.axis) line(d + 1, "axis " + vec(*a.axis) + ";");
    if (a.tilt) line(d + 1, "tilt " + format_real(*a.tilt) + ";");
    if (a.mode) {
      std::string m = "mode ";
      if (const auto* r = std::get_if<optics::RefractMode>(&*a.mode)) {
        m += "refract " + format_real(r->delta_index);
      } else if (const auto* s = std::get_if<optics::ScatterMode>(&*a.mode)) {
        m += "scatter " + std::to_string(s->fan_count) + " " + format_real(s->cone_half_angle);
      } else {
        m += "mirror";
      }
      line(d + 1, m + ";");
    }
    if (a.opacity) line(d + 1, "opacity " + format_real(*a.opacity) + ";");
    line(d, "}");
  }

  void psyche(int d, const std::string& prefix, const PsycheAttributes& a, const Vec3& pos, double radius) {
    line(d, prefix + "psyche " + quote(a.name) + " {");
    line(d + 1, "position " + vec(pos) + ";");
    line(d + 1, "radius " + format_real(radius) + ";");
    line(d + 1, "vitality " + format_real(a.vitality) + ";");
    line(d + 1, "accessibility " + format_real(a.accessibility) + ";");
    line(d + 1, "depth " + format_real(a.depth) + ";");
    for (const auto& [k, v] : a.traits) line(d + 1, "trait " + quote(k) + " " + format_real(v) + ";");
    for (const auto& s : a.shadow_aspects) shadow(d + 1, "", s);
    line(d, "}");
  }

  void thought(int d, const std::string& prefix, const Emission& e) {
    const std::string from = std::holds_alternative<Vec3>(e.source) ? vec(std::get<Vec3>(e.source))
                                                                   : quote(std::get<std::string>(e.source));
    line(d, prefix + "thought from " + from + " {");
    line(d + 1, "direction " + vec(e.direction) + ";");
    line(d + 1, "valence " + format_real(e.thought.valence) + ";");
    line(d + 1, "clarity " + format_real(e.thought.clarity) + ";");
    std::string comps = "components [";
    for (std::size_t i = 0; i < e.thought.components.size(); ++i) {
      const auto& w = e.thought.components[i];
      if (i) comps += ", ";
      comps += vec({w.frequency, w.amplitude, w.phase});
    }
    line(d + 1, comps + "];");
    line(d + 1, "tag " + std::string(optics::to_string(e.tag)) + ";");
    line(d + 1, std::string("state ") + (e.thought.state == semantics::ThoughtState::spark ? "spark" : "active") + ";");
    line(d, "}");
  }

  void mutation(int d, const Mutation& m) {
    const std::string p = "mutation " + std::string(mutation_name(m)) + " ";
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, SetAttribute>) {
            line(d, p + quote(x.psyche) + " " + quote(x.key) + " " + format_real(x.value) + ";");
          } else if constexpr (std::is_same_v<T, AddPsyche>) {
            psyche(d, p, x.attributes, x.position, x.radius);
          } else if constexpr (std::is_same_v<T, RemovePsyche>) {
            line(d, p + quote(x.psyche) + ";");
          } else if constexpr (std::is_same_v<T, EmitBeam>) {
            thought(d, p, x.emission);
          } else if constexpr (std::is_same_v<T, RetireBeam>) {
            line(d, p + std::to_string(x.index) + ";");
          } else if constexpr (std::is_same_v<T, SetComfort>) {
            line(d, p + quote(x.a) + " " + quote(x.b) + " " + format_real(x.value) + ";");
          } else if constexpr (std::is_same_v<T, Reorient>) {
            line(d, p + "axis " + vec(x.axis) + " angle " + format_real(x.angle) + " pivot " + vec(x.pivot) + ";");
          } else if constexpr (std::is_same_v<T, AddShadow>) {
            shadow(d, p + quote(x.psyche) + " ", x.shadow);
          } else {
            line(d, p + quote(x.psyche) + " " + quote(x.label) + ";");
          }
        },
        m);
  }
};

}  // namespace detail

/// Parse a scenario document. Syntax and semantic problems raise ParseError
/// carrying the line and column of the offending construct.
inline Scenario parse_scenario(std::string_view text) { return detail::Parser(text).document(); }

/// Canonical text: fixed block and key order, 9 significant digits, LF.
inline std::string serialize_scenario(const Scenario& s) {
  detail::Writer w;
  w.line(0, "liveia " + std::to_string(kDocumentVersion));
  w.line(0, "scenario " + detail::quote(s.name) + " {");
  if (!s.id.empty()) w.line(1, "id " + detail::quote(s.id) + ";");
  w.camera(1, s.camera);
  for (const auto& p : s.psyches) w.psyche(1, "", p.attributes, p.shell.center, p.shell.outer_radius);
  for (const auto& [k, v] : s.comfort.pairs()) {
    w.line(1, "comfort " + detail::quote(k.first) + " " + detail::quote(k.second) + " " + format_real(v) + ";");
  }
  for (const auto& e : s.emissions) w.thought(1, "", e);
  if (s.lineage.parent_id || !s.lineage.mutations.empty()) {
    w.line(1, "lineage {");
    if (s.lineage.parent_id) w.line(2, "parent " + detail::quote(*s.lineage.parent_id) + ";");
    for (const auto& m : s.lineage.mutations) w.mutation(2, m);
    w.line(1, "}");
  }
  w.line(0, "}");
  return w.out;
}

/// Reformat a document into canonical form.
inline std::string format_document(std::string_view text) { return serialize_scenario(parse_scenario(text)); }

}  // namespace liveia::scenario
