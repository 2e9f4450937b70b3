#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "liveia/scenario/document.hpp"
#include "liveia/scenario/mutation_json.hpp"
#include "liveia/scenario/store.hpp"
#include "liveia/semantics/deception.hpp"
#include "liveia/semantics/metrics.hpp"
#include "scenario_support.hpp"

using namespace liveia;
using namespace liveia::scenario;
using liveia::testing::random_mutation;
using liveia::testing::random_scenario;
using optics::kPi;

namespace {

std::string data_file(const std::string& name) { return read_file(std::string(LIVEIA_DATA_DIR) + "/" + name); }

ParseError parse_failure(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const ParseError& e) {
    return e;
  }
  ADD_FAILURE() << "document parsed unexpectedly";
  return ParseError(0, 0, "", "");
}

const char* kTwoPsyches = R"(scenario "pair" {
  psyche "a" { position (0, 0, 0); radius 1; }
  psyche "b" { position (3, 0, 0); radius 1; }
)";

Scenario two_psyches() { return parse_scenario(std::string(kTwoPsyches) + "}\n"); }

/// Apply random mutations, keeping only those that validate.
Scenario mutate(std::mt19937_64& rng, Scenario s, int count) {
  for (int i = 0; i < count; ++i) {
    const Mutation m = random_mutation(rng, s, static_cast<int>(s.revision()) + 1);
    try {
      s = apply_mutation(s, m);
    } catch (const ValidationError&) {
    }
  }
  return s;
}

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() / ("liveia-store-" + random_id());
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

// -- parsing ----------------------------------------------------------------

TEST(Parse, EmptyScenario) {
  const Scenario s = parse_scenario(R"(scenario "empty" { })");
  EXPECT_EQ(s.name, "empty");
  EXPECT_TRUE(s.psyches.empty());
  EXPECT_EQ(s.camera, Camera{});
  EXPECT_EQ(s.revision(), 0u);
}

TEST(Parse, ComfortOutOfRangeNamesComfortAndLine) {
  const auto e = parse_failure(std::string(kTwoPsyches) + "  comfort \"a\" \"b\" 1.5\n}\n");
  EXPECT_EQ(e.line(), 4);
  EXPECT_EQ(e.invariant(), "range");
  EXPECT_NE(std::string(e.what()).find("comfort"), std::string::npos);
  EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos);
}

TEST(Parse, SyntaxErrorPosition) {
  const auto e = parse_failure("scenario \"x\" {\n  psyche \"a\" {\n    radius = 2;\n  }\n}\n");
  EXPECT_EQ(e.line(), 3);
  EXPECT_EQ(e.column(), 12);
  EXPECT_EQ(e.invariant(), "syntax");
  const auto lex = parse_failure("scenario \"x\" {\n  id \"unterminated\n}");
  EXPECT_EQ(lex.line(), 2);
  EXPECT_EQ(lex.column(), 6);
}

TEST(Parse, SemanticErrors) {
  auto e = parse_failure(std::string(kTwoPsyches) +
                         "  thought from \"zed\" { direction (1, 0, 0); components [(1, 1, 0)]; }\n}\n");
  EXPECT_EQ(e.invariant(), "unknown-reference");
  EXPECT_EQ(e.line(), 4);
  EXPECT_NE(std::string(e.what()).find("zed"), std::string::npos);

  e = parse_failure("scenario \"x\" {\n  psyche \"a\" { radius 1; }\n  psyche \"b\" { position (1.5, 0, 0); }\n}");
  EXPECT_EQ(e.invariant(), "no-overlap");
  EXPECT_EQ(e.line(), 3);

  e = parse_failure("scenario \"x\" {\n  psyche \"a\" { }\n  psyche \"a\" { position (5, 0, 0); }\n}");
  EXPECT_EQ(e.invariant(), "unique-name");

  e = parse_failure("scenario \"x\" {\n  psyche \"a\" { vitality 1.2; }\n}");
  EXPECT_EQ(e.invariant(), "range");
  EXPECT_NE(std::string(e.what()).find("vitality"), std::string::npos);

  e = parse_failure("scenario \"x\" {\n  psyche \"a\" { shadow \"s\" { mode scatter 4 0.2; } }\n}");
  EXPECT_EQ(e.invariant(), "range");

  e = parse_failure("liveia 2\nscenario \"x\" { }");
  EXPECT_EQ(e.invariant(), "version");

  e = parse_failure("scenario \"x\" { } trailing");
  EXPECT_EQ(e.invariant(), "syntax");
}

TEST(Parse, DeceptionDocumentMatchesHandBuiltGraph) {
  const Scenario s = parse_scenario(data_file("deception.liveia"));

  semantics::PsycheAttributes dana;
  dana.name = "dana";
  dana.vitality = 0.8;
  dana.accessibility = 0.6;
  dana.depth = 0.5;
  dana.traits = {{"ambition", 0.7}};
  dana.shadow_aspects.push_back(
      {"pretense", 0.6, semantics::Placement::surface, optics::Vec3{1, 0, 0}, 0.4, optics::MirrorMode{}, 0.0});
  dana.shadow_aspects.push_back({"denial", 0.4, semantics::Placement::interior, optics::Vec3{0, 1, 0}, 0.3,
                                 optics::RefractMode{0.2}, 0.2});
  semantics::PsycheAttributes eve;
  eve.name = "eve";
  eve.vitality = 0.6;
  eve.accessibility = 0.9;
  eve.depth = 0.4;
  eve.traits = {{"kindness", 0.8}};

  ASSERT_EQ(s.psyches.size(), 2u);
  EXPECT_EQ(s.id, "deception");
  EXPECT_EQ(s.name, "deception");
  EXPECT_EQ(s.psyches[0], semantics::compile_psyche(dana, {0, 0, 0}, 1.0));
  EXPECT_EQ(s.psyches[1], semantics::compile_psyche(eve, {3, 0, 0}, 1.0));
  EXPECT_EQ(s.comfort.get("eve", "dana"), 0.3);
  ASSERT_EQ(s.emissions.size(), 1u);
  const Emission& e = s.emissions[0];
  EXPECT_EQ(std::get<std::string>(e.source), "dana");
  EXPECT_EQ(e.direction, (optics::Vec3{1, 0, 0}));
  EXPECT_EQ(e.thought.valence, -0.4);
  EXPECT_EQ(e.thought.clarity, 0.7);
  EXPECT_EQ(e.thought.components, (std::vector<optics::WaveComponent>{{2, 0.8, 0}}));
  EXPECT_EQ(e.tag, optics::BeamTag::thought);
  EXPECT_EQ(s.camera, (Camera{{1.5, 3, 11}, {1.5, 0, 0}, {0, 1, 0}, 40}));
  EXPECT_FALSE(s.lineage.parent_id);

  const auto r = semantics::deception_route(s.psyches[0], e.thought, semantics::Audience::other);
  EXPECT_EQ(r.report.fracture_label, "pretense");
  EXPECT_GT(r.report.bend_angle, 0.0);
  EXPECT_EQ(semantics::deception_route(s.psyches[0], e.thought, semantics::Audience::self).report.fracture_label,
            "denial");
}

// -- round trips --------------------------------------------------------------

TEST(RoundTrip, ShippedDocumentsAreCanonical) {
  for (const char* f : {"demo.liveia", "deception.liveia"}) {
    const std::string text = data_file(f);
    EXPECT_EQ(serialize_scenario(parse_scenario(text)), text) << f;
  }
}

TEST(RoundTrip, RandomScenarios) {
  std::mt19937_64 rng(20260101);
  for (int i = 0; i < 500; ++i) {
    const Scenario s = random_scenario(rng);
    const std::string text = serialize_scenario(s);
    const Scenario back = parse_scenario(text);
    ASSERT_EQ(back, s) << text;
    ASSERT_EQ(serialize_scenario(back), text);
  }
}

TEST(RoundTrip, FormattingIsNormalized) {
  const std::string canonical = data_file("demo.liveia");
  // Same content with comments, odd spacing, CRLF and no semicolons.
  std::string messy = "# a comment\r\nscenario   \"demo\"{id \"demo\"\r\n";
  messy +=
      "psyche \"alice\" { trait \"warmth\" 6e-1 trait \"curiosity\" .7 depth 0.50 accessibility 0.8 vitality +0.9 }\n"
      "  camera{fov 45.0 up(0,1,0) look_at (1.2,0,0) position (0 , 2 , 12)}\n"
      "thought from \"alice\" { components [(1, 1, 0),] direction (1,0,0) clarity 0.8 valence 0.7 }\n"
      "comfort \"bob\" \"alice\" 0.6   # trailing\n"
      "psyche \"bob\" { radius 1 position (2.4, 0, 0) vitality 0.3 depth 0.7 trait \"melancholy\" 0.8 }\n"
      "}";
  const Scenario s = parse_scenario(messy);
  EXPECT_EQ(s, parse_scenario(canonical));
  EXPECT_EQ(format_document(messy), canonical);
  EXPECT_EQ(format_document(format_document(messy)), canonical);
}

TEST(RoundTrip, QuantizationIsStable) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 10000; ++i) {
    const double x = std::ldexp(liveia::testing::uniform(rng, -1, 1), liveia::testing::pick(rng, -40, 40));
    const double q = quantize(x);
    EXPECT_EQ(quantize(q), q);
    EXPECT_NEAR(q, x, std::abs(x) * 1e-8);
    EXPECT_EQ(format_real(q), format_real(x));
  }
  EXPECT_EQ(format_real(quantize(-0.0)), "0");
}

// -- mutations ----------------------------------------------------------------

TEST(Mutation, SetAttributeRecompiles) {
  Scenario s = two_psyches();
  s = apply_mutation(s, SetAttribute{"a", "vitality", 0.0});
  const Scenario t = apply_mutation(s, SetAttribute{"a", "vitality", 0.5});
  semantics::PsycheAttributes oracle;
  oracle.name = "a";
  oracle.vitality = 0.5;
  EXPECT_EQ(find_psyche(t, "a")->emitter_intensity, semantics::compile_psyche(oracle, {}, 1.0).emitter_intensity);
  EXPECT_EQ(find_psyche(t, "a")->emitter_intensity, 0.5);
  EXPECT_EQ(t.revision(), s.revision() + 1);
  EXPECT_EQ(find_psyche(s, "a")->emitter_intensity, 0.0);
}

TEST(Mutation, RejectionsLeaveStateUnchanged) {
  const Scenario s = two_psyches();
  const std::string before = serialize_scenario(s);
  auto invariant_of = [&](const Mutation& m) {
    try {
      apply_mutation(s, m);
    } catch (const ValidationError& e) {
      return e.invariant();
    }
    return std::string("accepted");
  };
  AddPsyche overlap;
  overlap.attributes.name = "c";
  overlap.position = {1.5, 0, 0};
  EXPECT_EQ(invariant_of(overlap), "no-overlap");
  EmitBeam unknown;
  unknown.emission.source = std::string("nobody");
  unknown.emission.thought.components = {{1, 1, 0}};
  EXPECT_EQ(invariant_of(unknown), "unknown-reference");
  EXPECT_EQ(invariant_of(SetComfort{"a", "b", 1.5}), "range");
  EXPECT_EQ(invariant_of(SetAttribute{"a", "vitality", -0.1}), "range");
  EXPECT_EQ(invariant_of(SetAttribute{"a", "mood", 0.1}), "unknown-reference");
  EXPECT_EQ(invariant_of(SetAttribute{"a", "x", 2.0}), "no-overlap");
  EXPECT_EQ(invariant_of(RetireBeam{0}), "unknown-reference");
  EXPECT_EQ(invariant_of(RemoveShadow{"a", "none"}), "unknown-reference");
  AddPsyche dup = overlap;
  dup.attributes.name = "a";
  dup.position = {10, 0, 0};
  EXPECT_EQ(invariant_of(dup), "unique-name");
  EXPECT_EQ(serialize_scenario(s), before);
}

TEST(Mutation, RemovePsycheCascades) {
  Scenario s = two_psyches();
  s = apply_mutation(s, SetComfort{"a", "b", 0.4});
  Emission e;
  e.source = std::string("b");
  e.thought.components = {{1, 1, 0}};
  s = apply_mutation(s, EmitBeam{e});
  e.source = optics::Vec3{0, 5, 0};
  s = apply_mutation(s, EmitBeam{e});
  s = apply_mutation(s, RemovePsyche{"b"});
  EXPECT_EQ(s.psyches.size(), 1u);
  EXPECT_TRUE(s.comfort.pairs().empty());
  ASSERT_EQ(s.emissions.size(), 1u);
  EXPECT_TRUE(std::holds_alternative<optics::Vec3>(s.emissions[0].source));
  s = apply_mutation(s, RetireBeam{0});
  EXPECT_TRUE(s.emissions.empty());
  EXPECT_EQ(s.revision(), 5u);
}

TEST(Mutation, ShadowsAddAndRemove) {
  Scenario s = two_psyches();
  semantics::ShadowAspect a;
  a.label = "grief";
  s = apply_mutation(s, AddShadow{"a", a});
  EXPECT_EQ(find_psyche(s, "a")->fractures.size(), 1u);
  EXPECT_THROW(apply_mutation(s, AddShadow{"a", a}), ValidationError);
  s = apply_mutation(s, RemoveShadow{"a", "grief"});
  EXPECT_TRUE(find_psyche(s, "a")->fractures.empty());
}

// -- reorientation --------------------------------------------------------------

TEST(Reorient, IdentityLeavesCameraUnchanged) {
  const Scenario s = parse_scenario(data_file("demo.liveia"));
  EXPECT_EQ(reorient(s, {0, 1, 0}, 0.0, {0, 0, 0}).camera, s.camera);
  EXPECT_EQ(reorient(s, {0, 0, 1}, 0.0, {3, 4, 5}).camera, s.camera);
}

TEST(Reorient, QuarterTurnAboutVertical) {
  Scenario s = two_psyches();
  s.camera = {{10, 0, 0}, {0, 0, 0}, {0, 1, 0}, 45};
  const Scenario r = reorient(s, {0, 1, 0}, kPi / 2, {0, 0, 0});
  // Hand-evaluated rotation about +y: [[c, 0, s], [0, 1, 0], [-s, 0, c]].
  const double c = std::cos(kPi / 2), sn = std::sin(kPi / 2);
  const optics::Vec3 expected{c * 10 + sn * 0, 0, -sn * 10 + c * 0};
  // The logged angle is stored at 9 significant digits, so the result is
  // good to about 10 * 5e-9.
  EXPECT_NEAR(r.camera.position.x, expected.x, 1e-7);
  EXPECT_NEAR(r.camera.position.y, expected.y, 1e-7);
  EXPECT_NEAR(r.camera.position.z, expected.z, 1e-7);
  EXPECT_NEAR(r.camera.position.z, -10.0, 1e-7);
  EXPECT_EQ(r.camera.look_at, (optics::Vec3{0, 0, 0}));
  EXPECT_NEAR(r.camera.up.y, 1.0, 1e-12);
  EXPECT_EQ(r.revision(), 1u);
  EXPECT_TRUE(std::holds_alternative<Reorient>(r.lineage.mutations.back()));
}

TEST(Reorient, PhysicsAndMetricsUnchanged) {
  std::mt19937_64 rng(77);
  const Scenario s = parse_scenario(data_file("deception.liveia"));
  for (int i = 0; i < 20; ++i) {
    const Scenario r = reorient(s, liveia::testing::random_unit(rng), liveia::testing::uniform(rng, -3, 3),
                                {liveia::testing::uniform(rng, -5, 5), 0, 1});
    EXPECT_EQ(r.psyches, s.psyches);
    const auto scene_a = compile_scene(s), scene_b = compile_scene(r);
    const auto beams_a = compile_beams(s), beams_b = compile_beams(r);
    ASSERT_EQ(beams_a.size(), beams_b.size());
    for (std::size_t k = 0; k < beams_a.size(); ++k) {
      const auto ta = optics::trace_beam(scene_a, beams_a[k]);
      const auto tb = optics::trace_beam(scene_b, beams_b[k]);
      EXPECT_EQ(ta.nodes.size(), tb.nodes.size());
      EXPECT_TRUE(ta == tb);
    }
    for (std::size_t k = 0; k < s.psyches.size(); ++k) {
      EXPECT_EQ(semantics::enlightenment_score(s.psyches[k]).score,
                semantics::enlightenment_score(r.psyches[k]).score);
    }
  }
}

// -- lineage ------------------------------------------------------------------

TEST(Lineage, BranchIsolationAndReplay) {
  std::mt19937_64 rng(4242);
  for (int i = 0; i < 100; ++i) {
    Scenario parent = random_scenario(rng);
    parent.id = "parent" + std::to_string(i);
    parent.lineage = {};
    const std::string before = serialize_scenario(parent);
    Scenario child = branch(parent, "child", "child" + std::to_string(i));
    EXPECT_EQ(child.lineage.parent_id, parent.id);
    EXPECT_TRUE(child.lineage.mutations.empty());
    child = mutate(rng, child, 12);
    EXPECT_EQ(serialize_scenario(parent), before);
    const Scenario replayed = replay(parent, child);
    EXPECT_EQ(replayed, child);
    EXPECT_EQ(serialize_scenario(replayed), serialize_scenario(child));
    // A child reloaded from its document still replays identically.
    EXPECT_EQ(replay(parent, parse_scenario(serialize_scenario(child))), child);
  }
}

TEST(Lineage, BranchOfBranch) {
  const Scenario root = parse_scenario(data_file("demo.liveia"));
  const Scenario a = branch(root, "a", "a1");
  const Scenario b = branch(apply_mutation(a, SetAttribute{"alice", "depth", 0.1}), "b", "b1");
  EXPECT_EQ(b.lineage.parent_id, "a1");
  EXPECT_EQ(a.lineage.parent_id, "demo");
  EXPECT_EQ(find_psyche(b, "alice")->attributes.depth, 0.1);
}

// -- mutation JSON ------------------------------------------------------------------

TEST(MutationJson, RoundTripsRandomMutations) {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 500; ++i) {
    const Scenario s = random_scenario(rng);
    const Mutation m = quantize(random_mutation(rng, s, i));
    const auto j = to_json(m);
    EXPECT_EQ(mutation_from_json(json::parse(j.dump())), m) << j.dump();
  }
}

TEST(MutationJson, SchemaErrors) {
  EXPECT_THROW(mutation_from_json(json::parse(R"({"op": "explode"})")), ValidationError);
  EXPECT_THROW(mutation_from_json(json::parse(R"({"op": "set_attribute", "psyche": "a"})")), ValidationError);
  EXPECT_THROW(mutation_from_json(json::parse(R"({"op": "retire_beam", "index": -1})")), ValidationError);
  EXPECT_THROW(mutation_from_json(json::parse(R"([1, 2])")), ValidationError);
}

// -- store --------------------------------------------------------------------

TEST(Store, PersistenceAndIndex) {
  TempDir dir;
  std::string root_id, child_id;
  {
    ScenarioStore store(dir.path);
    Scenario s = parse_scenario(data_file("demo.liveia"));
    s.id.clear();
    s = store.create(s);
    root_id = s.id;
    EXPECT_TRUE(valid_id(root_id));
    EXPECT_EQ(read_file(dir.path / (root_id + ".liveia")), serialize_scenario(s));
    const Scenario child = store.branch(root_id, "what next");
    child_id = child.id;
    store.update(child_id, [](const Scenario& c) { return apply_mutation(c, SetAttribute{"bob", "vitality", 0.9}); });
    EXPECT_EQ(store.require(root_id), s);
    EXPECT_THROW(store.remove(root_id), Error);
    EXPECT_THROW(store.require("missing"), Error);
    Scenario dupe = s;
    EXPECT_THROW(store.create(dupe), Error);
  }
  ScenarioStore reopened(dir.path);
  const auto index = read_index(dir.path);
  ASSERT_EQ(index.size(), 2u);
  EXPECT_EQ(reopened.list(), index);
  const Scenario child = reopened.require(child_id);
  EXPECT_EQ(child.lineage.parent_id, root_id);
  EXPECT_EQ(child.name, "what next");
  EXPECT_EQ(find_psyche(child, "bob")->attributes.vitality, 0.9);
  EXPECT_EQ(replay(reopened.require(root_id), child), child);
  reopened.remove(child_id);
  reopened.remove(root_id);
  EXPECT_TRUE(read_index(dir.path).empty());
  EXPECT_FALSE(std::filesystem::exists(dir.path / (root_id + ".liveia")));
}
