#include <gtest/gtest.h>

#include <numeric>
#include <set>

#include "berthsim/berth.hpp"
#include "berthsim/calibration.hpp"
#include "berthsim/crash.hpp"
#include "berthsim/model_format.hpp"
#include "support.hpp"

using namespace berthsim;

namespace {

RunResult ideal_run(std::uint64_t seed = 42) {
  RunOptions o;
  o.trace = true;
  return run(CompiledModel::build(apply_overlay(load_reference_model(), uncertainty_ladder().front())), seed, o);
}

double first_time(const RunResult& r, const std::string& element, TraceAction a) {
  auto recs = bst::records(r, element, a);
  return recs.empty() ? -1 : recs.front().time;
}

}  // namespace

TEST(Berth, ModelValidates) {
  auto m = load_reference_model();
  EXPECT_TRUE(validate(m).empty());
  EXPECT_TRUE(validate_costs(m, reference_costs()).empty());
  for (const auto& o : uncertainty_ladder()) EXPECT_TRUE(validate_overlay(m, o).empty()) << o.name;
  for (const auto& o : resource_ladder()) EXPECT_TRUE(validate_overlay(m, o).empty()) << o.name;
  EXPECT_EQ(m.length_m, 100);
}

TEST(Berth, PhaseTable) {
  auto m = load_reference_model();
  ASSERT_EQ(m.phases.size(), 19u);
  double sum = 0;
  for (const auto& p : m.phases) sum += p.days;
  EXPECT_DOUBLE_EQ(sum, 204.25);
  EXPECT_EQ(m.find_phase(4)->days, 3.25);
  EXPECT_EQ(m.find_phase(1)->days, 30);
  EXPECT_FALSE(m.find_phase(9)->weather_sensitive);
  EXPECT_FALSE(m.find_phase(16)->weather_sensitive);
  EXPECT_TRUE(m.find_phase(11)->weather_sensitive);
}

TEST(Berth, BaselineResources) {
  auto m = load_reference_model();
  const std::map<std::string, std::int64_t> baseline{{"Jackhammer", 1},     {"ConcretePump", 1}, {"ConcreteTrucks", 2},
                                                     {"ConcreteCrew", 1},   {"GeneralLabor", 1}};
  for (const auto& [name, k] : baseline) {
    ASSERT_NE(m.find_resource(name), nullptr) << name;
    EXPECT_EQ(m.find_resource(name)->servers, k) << name;
  }
}

TEST(Berth, Ladders) {
  auto u = uncertainty_ladder();
  ASSERT_EQ(u.size(), 4u);
  EXPECT_EQ(u[0].submodel_toggles.at("weather"), false);
  EXPECT_EQ(u[3].submodel_toggles.at("weather"), true);
  EXPECT_EQ(u[3].submodel_toggles.at("crane_breakdown"), true);
  EXPECT_EQ(u[3].submodel_toggles.at("jackhammer_breakdown"), true);
  EXPECT_TRUE(ladder_warnings(u).empty());

  auto r = resource_ladder();
  ASSERT_EQ(r.size(), 6u);
  const std::map<std::string, std::int64_t> last{{"ConcreteTrucks", 8}, {"Jackhammer", 3}, {"GeneralLabor", 2},
                                                 {"ConcreteCrew", 2},   {"ConcretePump", 2}};
  EXPECT_EQ(r.back().resource_overrides, last);
  EXPECT_TRUE(ladder_warnings(r).empty());
  // the resource rungs keep every uncertainty switched on
  for (const auto& o : r)
    for (const auto& [name, on] : o.submodel_toggles) EXPECT_TRUE(on) << o.name << " " << name;
}

TEST(Berth, CostsMatchResourceLadder) {
  auto c = reference_costs();
  auto last = resource_ladder().back().resource_overrides;
  auto m = load_reference_model();
  ASSERT_EQ(c.options.size(), last.size());
  double total = 0;
  for (const auto& o : c.options) {
    EXPECT_EQ(m.find_resource(o.resource)->servers + o.max_added, last.at(o.resource)) << o.resource;
    total += o.cost_per_unit * static_cast<double>(o.max_added);
  }
  EXPECT_NEAR(total, 396'900, 1);
  EXPECT_EQ(c.base_cost, 773'422);
  EXPECT_EQ(c.bid_days, 156);
}

TEST(Berth, IdealRunCompletesEveryPhase) {
  auto r = ideal_run();
  EXPECT_EQ(r.counters.at("phases"), 19);
  EXPECT_EQ(r.in_system, 0u);
  EXPECT_EQ(r.stranded, 0u);
  EXPECT_GT(r.end_time, 150);
  EXPECT_LT(r.end_time, 204.25);
  EXPECT_EQ(ideal_run(7).end_time, r.end_time);
}

TEST(Berth, PrecedenceRespected) {
  auto r = ideal_run();
  auto m = load_reference_model();
  for (const auto& p : m.phases) {
    double done = first_time(r, "p" + std::to_string(p.number) + "_done", TraceAction::count);
    ASSERT_GE(done, 0) << p.number;
    for (int pred : p.after) {
      double before = first_time(r, "p" + std::to_string(pred) + "_done", TraceAction::count);
      EXPECT_LE(before, done) << p.number << " after " << pred;
    }
  }
}

TEST(Berth, PilingRates) {
  auto r = ideal_run();
  auto inside = bst::times(bst::records(r, "p11_get", TraceAction::capture));
  auto outside = bst::times(bst::records(r, "p12_get", TraceAction::capture));
  ASSERT_EQ(inside.size(), 60u);
  ASSERT_EQ(outside.size(), 108u);
  EXPECT_NEAR(inside.back() + 0.25 - inside.front(), 15, 1e-9);
  EXPECT_NEAR(outside.back() + 0.2 - outside.front(), 21.6, 1e-9);
}

TEST(Berth, DeckWaitsForSlabs) {
  auto r = ideal_run();
  double slabs_done = first_time(r, "p13_done", TraceAction::count);
  for (double t : bst::times(bst::records(r, "p14_get", TraceAction::capture))) EXPECT_GE(t, slabs_done);
}

TEST(Berth, WeatherGatesMatchPhaseTable) {
  // truck trips are never gated; on-site work is gated exactly when the phase is weather sensitive
  auto m = load_reference_model();
  std::set<int> gated_phases;
  auto check = [&](const std::vector<ElementDef>& elements) {
    for (const auto& e : elements) {
      if (e.kind != ElementKind::task || !e.phase) continue;
      if (e.valve == "weather_gate") {
        gated_phases.insert(*e.phase);
        EXPECT_TRUE(m.find_phase(*e.phase)->weather_sensitive) << e.id;
      }
    }
  };
  check(m.elements);
  for (const auto& s : m.submodels) check(s.elements);
  for (const auto& p : m.phases) EXPECT_EQ(gated_phases.count(p.number) == 1, p.weather_sensitive) << p.number;
}

TEST(Berth, BundledTextsMatchParsedObjects) {
  EXPECT_EQ(parse_model(berth_model_text()), load_reference_model());
  EXPECT_EQ(parse_scenarios(uncertainty_ladder_text()), uncertainty_ladder());
  EXPECT_EQ(parse_scenarios(resource_ladder_text()), resource_ladder());
}

TEST(Berth, CalibratedParametersInRange) {
  auto m = load_reference_model();
  EXPECT_GT(get_parameter(m, "weather.outage"), 0);
  EXPECT_EQ(get_parameter(m, "weather.cycle"), 10);
  EXPECT_EQ(get_parameter(m, "weather.probability"), 0.3);
  EXPECT_GT(get_parameter(m, "crane_breakdown.minor_repair"), 0);
  EXPECT_GT(get_parameter(m, "jackhammer_breakdown.minor_repair"), 0);
}
