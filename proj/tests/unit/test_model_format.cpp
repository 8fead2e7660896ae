#include <gtest/gtest.h>

#include "berthsim/berth.hpp"
#include "berthsim/error.hpp"
#include "support.hpp"

using namespace berthsim;

namespace {

const char* kSmall = R"(# two phases sharing a crane
model small {
  length=50
  resource Crane servers=1
  state ok = true
  valve gate state=ok
  phase 1 name="Lift" days=2 uses=Crane:1 weather=true
  phase 2 name="Cure" days=3 weather=false after=1
  create c count=2 interarrival=const(0)
  capture g Crane:1
  task t dur=tri(1,2,3) valve=gate phase=1
  release p Crane:1
  task cure dur=const(3) phase=2
  destroy d
  link c -> g
  link g -> t
  link t -> p
  link p -> cure
  link cure -> d
  submodel wx {
    weather valve=gate cycle=10 probability=0.3 outage=const(0.5)
  }
  submodel bd {
    breakdown resource=Crane trigger=const(5) major=0.2 minor_repair=const(1) major_repair=const(7) clock=usage
  }
}
)";

std::vector<Diagnostic> syntax_errors(std::string_view text) {
  try {
    parse_model(text, "x.psm");
  } catch (const ModelError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SyntaxError);
    return e.diagnostics();
  }
  return {};
}

}  // namespace

TEST(Parse, ResourceDeclaration) {
  auto m = parse_model("model m {\n  resource Crane servers=1\n}\n");
  ASSERT_EQ(m.resources.size(), 1u);
  EXPECT_EQ(m.resources[0].name, "Crane");
  EXPECT_EQ(m.resources[0].servers, 1);
}

TEST(Parse, EmptyInput) {
  auto diags = syntax_errors("");
  ASSERT_FALSE(diags.empty());
  EXPECT_TRUE(bst::any_message_contains(diags, "no model block"));
}

TEST(Parse, FullSmallModel) {
  auto m = parse_model(kSmall);
  EXPECT_EQ(m.name, "small");
  EXPECT_EQ(m.length_m, 50);
  EXPECT_EQ(m.elements.size(), 7u);
  EXPECT_EQ(m.links.size(), 5u);
  ASSERT_EQ(m.phases.size(), 2u);
  EXPECT_EQ(m.phases[1].after, std::vector<int>{1});
  EXPECT_FALSE(m.phases[1].weather_sensitive);
  const auto* t = m.find_element("t");
  ASSERT_TRUE(t);
  EXPECT_EQ(t->dist, Distribution::triangular(1, 2, 3));
  EXPECT_EQ(t->valve, "gate");
  EXPECT_EQ(t->phase, 1);
  ASSERT_EQ(m.submodels.size(), 2u);
  EXPECT_EQ(m.submodels[0].weather.at(0).outage, Distribution::constant(0.5));
  EXPECT_EQ(m.submodels[1].breakdowns.at(0).major_probability, 0.2);
  EXPECT_TRUE(validate(m).empty());
}

TEST(Parse, BadTriangularIsCaught) {
  const char* src = R"(model m {
  create c count=1 interarrival=const(0)
  task T dur=tri(4,3,5)
  destroy d
  link c -> T
  link T -> d
})";
  std::vector<Diagnostic> diags;
  try {
    diags = validate(parse_model(src));
  } catch (const ModelError& e) {
    diags = e.diagnostics();
  }
  ASSERT_TRUE(has_errors(diags));
  EXPECT_EQ(diags.front().line, 3);
}

TEST(Parse, ErrorsCarryPositions) {
  auto diags = syntax_errors("model m {\n  resource Crane servers=one\n  task t dur=const(1) bogus=2\n}\n");
  ASSERT_EQ(diags.size(), 2u);
  EXPECT_EQ(diags[0].line, 2);
  EXPECT_EQ(diags[0].col, 26);
  EXPECT_EQ(diags[1].line, 3);
  EXPECT_EQ(diags[0].format().rfind("x.psm:2:26: error: ", 0), 0u) << diags[0].format();
}

TEST(Parse, AssortedSyntaxErrors) {
  for (const char* bad : {"model {", "model m {\n", "model m {\n}\nmodel n {\n}\n", "model m {\n  link a ->\n}\n",
                          "model m {\n  task t dur=const(1\n}\n", "model m {\n  state s = \"x\n}\n",
                          "model m {\n  frobnicate x\n}\n", "model m {\n  submodel s {\n  submodel t {\n  }\n  }\n}\n",
                          "model m {\n  weather valve=v\n}\n", "model m {\n  capture g Crane\n}\n"})
    EXPECT_FALSE(syntax_errors(bad).empty()) << bad;
}

TEST(Validate, DanglingLink) {
  auto diags = validate(parse_model(R"(model m {
  create c count=1 interarrival=const(0)
  destroy d
  link c -> nowhere
  link c -> d
})"));
  EXPECT_TRUE(bst::any_message_contains(diags, "dangling link"));
}

TEST(Validate, ProbabilitiesMustSumToOne) {
  auto diags = validate(parse_model(R"(model m {
  create c count=1 interarrival=const(0)
  probabilistic_branch pb probs=0.4,0.5
  destroy d
  link c -> pb
  link pb.0 -> d
  link pb.1 -> d
})"));
  EXPECT_TRUE(bst::any_message_contains(diags, "sum to 1"));
}

TEST(Validate, UnsatisfiableRequest) {
  auto diags = validate(parse_model(R"(model m {
  resource Jackhammer servers=1
  create c count=1 interarrival=const(0)
  capture g Jackhammer:2
  destroy d
  link c -> g
  link g -> d
})"));
  EXPECT_TRUE(bst::any_message_contains(diags, "unsatisfiable request"));
}

TEST(Validate, StructuralFaults) {
  auto diags = validate(parse_model(R"(model m {
  resource R servers=1
  resource R servers=0
  create c count=1 interarrival=const(0)
  task t dur=const(1) valve=nope
  task orphan dur=const(1)
  conditional_branch cb cond="ghost > 1"
  destroy d
  link c -> t
  link t -> cb
  link cb.0 -> d
  link orphan -> d
})"));
  EXPECT_TRUE(bst::any_message_contains(diags, "duplicate resource"));
  EXPECT_TRUE(bst::any_message_contains(diags, "at least one server"));
  EXPECT_TRUE(bst::any_message_contains(diags, "unknown valve"));
  EXPECT_TRUE(bst::any_message_contains(diags, "unknown state 'ghost'"));
  EXPECT_TRUE(bst::any_message_contains(diags, "output port 1 of 'cb' is not linked"));
  EXPECT_TRUE(bst::any_message_contains(diags, "unreachable"));
}

TEST(Validate, PhaseGraph) {
  auto diags = validate(parse_model(R"(model m {
  phase 1 name="a" days=1 after=2
  phase 2 name="b" days=0 after=1
  phase 3 name="c" days=1 after=9
  create c count=1 interarrival=const(0)
  destroy d
  link c -> d
})"));
  EXPECT_TRUE(bst::any_message_contains(diags, "cycle"));
  EXPECT_TRUE(bst::any_message_contains(diags, "unknown predecessor phase 9"));
  EXPECT_TRUE(bst::any_message_contains(diags, "phase 2 needs a positive duration"));
}

TEST(Validate, DisruptionTargets) {
  auto diags = validate(parse_model(R"(model m {
  create c count=1 interarrival=const(0)
  destroy d
  link c -> d
  submodel w {
    weather valve=absent cycle=10 probability=0.3 outage=const(1)
  }
  submodel b {
    breakdown resource=Ghost trigger=const(5) major=0 minor_repair=const(1) major_repair=const(7) clock=usage
  }
})"));
  EXPECT_TRUE(bst::any_message_contains(diags, "weather valve 'absent' is missing"));
  EXPECT_TRUE(bst::any_message_contains(diags, "unknown resource 'Ghost'"));
}

TEST(Serialize, RoundTripSmallModel) {
  auto m = parse_model(kSmall);
  auto text = serialize(m);
  auto again = parse_model(text);
  EXPECT_EQ(again, m);
  EXPECT_EQ(serialize(again), text);
}

TEST(Serialize, RoundTripBerthModel) {
  auto m = load_reference_model();
  auto again = parse_model(serialize(m));
  EXPECT_EQ(again, m);
  EXPECT_EQ(serialize(again), serialize(m));
}

TEST(Serialize, StringEscapes) {
  auto m = parse_model(R"(model m {
  phase 1 name="say \"hi\"\\" days=1
  create c count=1 interarrival=const(0)
  destroy d
  link c -> d
})");
  EXPECT_EQ(m.phases[0].name, "say \"hi\"\\");
  EXPECT_EQ(parse_model(serialize(m)), m);
}

TEST(Scenarios, ExtendsIsResolved) {
  auto ladder = parse_scenarios(R"(scenario a {
  comment "first"
  resource Crane servers=2
  submodel wx off
  replications=10
  seed=7
}
scenario b extends a {
  resource Crane servers=3
  noise=triangular10
}
)");
  ASSERT_EQ(ladder.size(), 2u);
  EXPECT_EQ(ladder[1].resource_overrides.at("Crane"), 3);
  EXPECT_FALSE(ladder[1].submodel_toggles.at("wx"));
  EXPECT_EQ(ladder[1].replications, 10);
  EXPECT_EQ(ladder[1].master_seed, 7u);
  EXPECT_EQ(ladder[1].noise, NoiseMode::triangular10);
  EXPECT_EQ(ladder[0].noise, NoiseMode::off);
  for (const auto& o : ladder) EXPECT_EQ(parse_scenarios(serialize(o)).at(0), o);
}

TEST(Scenarios, Errors) {
  for (const char* bad : {"scenario a extends nope {\n}\n", "scenario a {\n}\nscenario a {\n}\n",
                          "scenario a {\n  seed=-1\n}\n", "scenario a {\n  noise=loud\n}\n", "scenario a {\n"}) {
    EXPECT_THROW(parse_scenarios(bad), ModelError) << bad;
  }
}

TEST(Scenarios, FullWidthSeed) {
  auto o = parse_scenarios("scenario a {\n  seed=18446744073709551615\n}\n").at(0);
  EXPECT_EQ(o.master_seed, 18446744073709551615ull);
}

TEST(Overlay, AppliesOverridesAndToggles) {
  auto m = parse_model(kSmall);
  ScenarioOverlay o;
  o.resource_overrides["Crane"] = 4;
  o.submodel_toggles["wx"] = false;
  auto applied = apply_overlay(m, o);
  EXPECT_EQ(applied.find_resource("Crane")->servers, 4);
  EXPECT_EQ(applied.find_submodel("wx"), nullptr);
  EXPECT_NE(applied.find_submodel("bd"), nullptr);
}

TEST(Overlay, UnknownNamesAreDiagnosed) {
  auto m = parse_model(kSmall);
  ScenarioOverlay o;
  o.resource_overrides["Barge"] = 1;
  o.submodel_toggles["tides"] = true;
  auto diags = validate_overlay(m, o);
  EXPECT_TRUE(bst::any_message_contains(diags, "unknown resource 'Barge'"));
  EXPECT_TRUE(bst::any_message_contains(diags, "unknown submodel 'tides'"));
  EXPECT_THROW(apply_overlay(m, o), ModelError);
}
