#pragma once

// Structured export of a scenario's traces plus per-psyche metrics, as JSON
// with schema tag "liveia.trace/1". Numbers are written in shortest
// round-trip form, so write -> read -> write is byte-identical.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "liveia/core/error.hpp"
#include "liveia/optics/trace.hpp"
#include "liveia/scenario/scenario.hpp"
#include "liveia/semantics/metrics.hpp"

namespace liveia::render {

inline constexpr const char* kTraceSchema = "liveia.trace/1";
inline constexpr int kDocumentShadowGrid = 16;

struct PsycheMetrics {
  std::string psyche;
  std::optional<semantics::EnlightenmentReport> enlightenment;  // none for a dark sphere
  std::vector<semantics::FractureInfo> fractures;
  int shadow_grid = kDocumentShadowGrid;
  double voxel_size = 0.0;
  std::vector<semantics::ShadowCluster> shadow_clusters;

  friend bool operator==(const PsycheMetrics&, const PsycheMetrics&) = default;
};

struct BeamTrace {
  std::size_t emission = 0;  // index into the scenario's authored emissions
  optics::TraceTree tree;
  friend bool operator==(const BeamTrace&, const BeamTrace&) = default;
};

struct TraceDocument {
  std::string scenario_id;
  std::string scenario_name;
  std::size_t revision = 0;
  std::vector<BeamTrace> traces;
  std::vector<PsycheMetrics> metrics;
  friend bool operator==(const TraceDocument&, const TraceDocument&) = default;
};

inline PsycheMetrics psyche_metrics(const semantics::PsycheSphere& p, int grid = kDocumentShadowGrid) {
  PsycheMetrics m;
  m.psyche = p.name();
  if (p.emitter_intensity > 0.0) m.enlightenment = semantics::enlightenment_score(p);
  const auto scan = semantics::shadow_scan(p, grid);
  m.fractures = scan.fractures;
  m.shadow_grid = scan.grid_resolution;
  m.voxel_size = scan.voxel_size;
  m.shadow_clusters = scan.clusters;
  return m;
}

/// Trace every active authored beam and attach metrics for every psyche.
inline TraceDocument export_trace(const scenario::Scenario& s, const optics::TraceLimits& limits = {}) {
  TraceDocument doc;
  doc.scenario_id = s.id;
  doc.scenario_name = s.name;
  doc.revision = s.revision();
  const optics::Scene scene = scenario::compile_scene(s);
  for (std::size_t i = 0; i < s.emissions.size(); ++i) {
    const auto& e = s.emissions[i];
    if (e.thought.state == semantics::ThoughtState::spark) continue;
    const auto beam = semantics::compile_thought(e.thought, scenario::emission_origin(s, e),
                                                 optics::normalized(e.direction), e.tag);
    doc.traces.push_back({i, optics::trace_beam(scene, beam, limits)});
  }
  for (const auto& p : s.psyches) doc.metrics.push_back(psyche_metrics(p));
  return doc;
}

namespace detail {

using json = nlohmann::ordered_json;

inline json vec(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

inline Vec3 vec(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

template <typename E, std::size_t N>
E enum_from(const json& j, const E (&all)[N]) {
  const std::string s = j.get<std::string>();
  for (E e : all) {
    if (to_string(e) == s) return e;
  }
  throw Error(ErrorCode::parse_error, "unknown enum value \"" + s + "\"");
}

inline constexpr optics::EventKind kEventKinds[] = {
    optics::EventKind::refract,        optics::EventKind::reflect,      optics::EventKind::total_internal_reflection,
    optics::EventKind::fracture_hit,   optics::EventKind::absorbed,     optics::EventKind::escaped,
    optics::EventKind::depth_cutoff,   optics::EventKind::intensity_cutoff};
inline constexpr optics::ChildRole kRoles[] = {optics::ChildRole::root, optics::ChildRole::reflected,
                                               optics::ChildRole::refracted, optics::ChildRole::scattered};
inline constexpr optics::BeamTag kTags[] = {optics::BeamTag::thought, optics::BeamTag::percept,
                                            optics::BeamTag::deception_other, optics::BeamTag::deception_self,
                                            optics::BeamTag::probe};
inline constexpr semantics::Placement kPlacements[] = {semantics::Placement::surface, semantics::Placement::interior};

inline json beam_json(const optics::Beam& b) {
  json wave = json::array();
  for (const auto& w : b.waveform) wave.push_back(json::array({w.frequency, w.amplitude, w.phase}));
  return {{"origin", vec(b.axis.origin)},
          {"direction", vec(b.axis.direction)},
          {"divergence", b.divergence},
          {"intensity", b.intensity},
          {"tag", to_string(b.tag)},
          {"waveform", wave}};
}

inline optics::Beam json_beam(const json& j) {
  optics::Beam b;
  b.axis = {vec(j.at("origin")), vec(j.at("direction"))};
  b.divergence = j.at("divergence").get<double>();
  b.intensity = j.at("intensity").get<double>();
  b.tag = enum_from(j.at("tag"), kTags);
  for (const auto& w : j.at("waveform")) b.waveform.push_back({w.at(0).get<double>(), w.at(1).get<double>(), w.at(2).get<double>()});
  return b;
}

inline json node_json(const optics::TraceNode& n) {
  const auto& e = n.event;
  return {{"parent", n.parent},
          {"role", to_string(n.role)},
          {"depth", n.depth},
          {"segment",
           {{"start", vec(n.segment.start)},
            {"end", vec(n.segment.end)},
            {"medium_index", n.segment.medium_index},
            {"intensity_start", n.segment.intensity_start},
            {"intensity_end", n.segment.intensity_end}}},
          {"direction", vec(n.direction)},
          {"event",
           {{"kind", to_string(e.kind)},
            {"position", vec(e.position)},
            {"normal", vec(e.normal)},
            {"incident_angle", e.incident_angle},
            {"exit_angle", e.exit_angle},
            {"n1", e.n1},
            {"n2", e.n2},
            {"sphere", e.sphere},
            {"fracture", e.fracture}}},
          {"absorbed", n.absorbed},
          {"children", n.children}};
}

inline optics::TraceNode json_node(const json& j) {
  optics::TraceNode n;
  n.parent = j.at("parent").get<int>();
  n.role = enum_from(j.at("role"), kRoles);
  n.depth = j.at("depth").get<int>();
  const json& s = j.at("segment");
  n.segment = {vec(s.at("start")), vec(s.at("end")), s.at("medium_index").get<double>(),
               s.at("intensity_start").get<double>(), s.at("intensity_end").get<double>()};
  n.direction = vec(j.at("direction"));
  const json& e = j.at("event");
  n.event.kind = enum_from(e.at("kind"), kEventKinds);
  n.event.position = vec(e.at("position"));
  n.event.normal = vec(e.at("normal"));
  n.event.incident_angle = e.at("incident_angle").get<double>();
  n.event.exit_angle = e.at("exit_angle").get<double>();
  n.event.n1 = e.at("n1").get<double>();
  n.event.n2 = e.at("n2").get<double>();
  n.event.sphere = e.at("sphere").get<int>();
  n.event.fracture = e.at("fracture").get<int>();
  n.absorbed = j.at("absorbed").get<double>();
  n.children = j.at("children").get<std::vector<int>>();
  return n;
}

inline json metrics_json(const PsycheMetrics& m) {
  json j{{"psyche", m.psyche}};
  if (m.enlightenment) {
    j["enlightenment"] = {{"score", m.enlightenment->score},
                          {"uniformity", m.enlightenment->uniformity},
                          {"obstructed_fraction", m.enlightenment->obstructed_fraction},
                          {"obstructed_probes", m.enlightenment->obstructed_probes}};
  } else {
    j["enlightenment"] = nullptr;
  }
  json fr = json::array();
  for (const auto& f : m.fractures) {
    fr.push_back({{"label", f.label},
                  {"placement", to_string(f.placement)},
                  {"mode", f.mode},
                  {"opacity", f.opacity},
                  {"center", vec(f.center)},
                  {"normal", vec(f.normal)},
                  {"radius", f.radius}});
  }
  j["fractures"] = fr;
  json clusters = json::array();
  for (const auto& c : m.shadow_clusters) {
    json voxels = json::array();
    for (const auto& v : c.voxels) voxels.push_back(json::array({v[0], v[1], v[2]}));
    clusters.push_back({{"centroid", vec(c.centroid)}, {"voxels", voxels}});
  }
  j["shadow"] = {{"grid", m.shadow_grid}, {"voxel_size", m.voxel_size}, {"clusters", clusters}};
  return j;
}

inline PsycheMetrics json_metrics(const json& j) {
  PsycheMetrics m;
  m.psyche = j.at("psyche").get<std::string>();
  if (!j.at("enlightenment").is_null()) {
    const json& e = j.at("enlightenment");
    semantics::EnlightenmentReport r;
    r.score = e.at("score").get<double>();
    r.uniformity = e.at("uniformity").get<double>();
    r.obstructed_fraction = e.at("obstructed_fraction").get<double>();
    r.obstructed_probes = e.at("obstructed_probes").get<int>();
    m.enlightenment = r;
  }
  for (const auto& f : j.at("fractures")) {
    m.fractures.push_back({f.at("label").get<std::string>(), enum_from(f.at("placement"), kPlacements),
                           f.at("mode").get<std::string>(), f.at("opacity").get<double>(), vec(f.at("center")),
                           vec(f.at("normal")), f.at("radius").get<double>()});
  }
  const json& sh = j.at("shadow");
  m.shadow_grid = sh.at("grid").get<int>();
  m.voxel_size = sh.at("voxel_size").get<double>();
  for (const auto& c : sh.at("clusters")) {
    semantics::ShadowCluster cl;
    cl.centroid = vec(c.at("centroid"));
    for (const auto& v : c.at("voxels")) cl.voxels.push_back({v.at(0).get<int>(), v.at(1).get<int>(), v.at(2).get<int>()});
    m.shadow_clusters.push_back(std::move(cl));
  }
  return m;
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const TraceDocument& doc) {
  using detail::json;
  json traces = json::array();
  for (const auto& t : doc.traces) {
    json nodes = json::array();
    for (const auto& n : t.tree.nodes) nodes.push_back(detail::node_json(n));
    traces.push_back({{"emission", t.emission}, {"beam", detail::beam_json(t.tree.root)}, {"nodes", nodes}});
  }
  json metrics = json::array();
  for (const auto& m : doc.metrics) metrics.push_back(detail::metrics_json(m));
  return {{"schema", kTraceSchema},
          {"scenario", {{"id", doc.scenario_id}, {"name", doc.scenario_name}, {"revision", doc.revision}}},
          {"traces", traces},
          {"metrics", metrics}};
}

inline std::string write_trace_document(const TraceDocument& doc) { return to_json(doc).dump(2) + "\n"; }

inline TraceDocument read_trace_document(const std::string& text) {
  try {
    const auto j = nlohmann::ordered_json::parse(text);
    if (j.at("schema").get<std::string>() != kTraceSchema) {
      throw Error(ErrorCode::parse_error, "unsupported trace schema " + j.at("schema").dump());
    }
    TraceDocument doc;
    doc.scenario_id = j.at("scenario").at("id").get<std::string>();
    doc.scenario_name = j.at("scenario").at("name").get<std::string>();
    doc.revision = j.at("scenario").at("revision").get<std::size_t>();
    for (const auto& t : j.at("traces")) {
      BeamTrace bt;
      bt.emission = t.at("emission").get<std::size_t>();
      bt.tree.root = detail::json_beam(t.at("beam"));
      for (const auto& n : t.at("nodes")) bt.tree.nodes.push_back(detail::json_node(n));
      doc.traces.push_back(std::move(bt));
    }
    for (const auto& m : j.at("metrics")) doc.metrics.push_back(detail::json_metrics(m));
    return doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse_error, std::string("malformed trace document: ") + e.what());
  }
}

}  // namespace liveia::render
