#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "berthsim/calibration.hpp"
#include "berthsim/disruptions.hpp"
#include "berthsim/error.hpp"
#include "berthsim/runner.hpp"
#include "support.hpp"

using namespace berthsim;

namespace {

std::string weather_model(const std::string& spec) {
  return R"(model m {
  state ok = true
  valve w state=ok
  create c count=1 interarrival=const(0)
  task t dur=const(30) valve=w
  destroy d
  link c -> t
  link t -> d
  submodel wx {
    )" + spec + R"(
  }
})";
}

std::string breakdown_model(const std::string& spec) {
  return R"(model m {
  resource R servers=1
  create c count=1 interarrival=const(0)
  capture cap R:1
  task t dur=const(12)
  release rel R:1
  destroy d
  link c -> cap
  link cap -> t
  link t -> rel
  link rel -> d
  submodel bd {
    )" + spec + R"(
  }
})";
}

}  // namespace

TEST(Weather, CertainOutagesEveryCycle) {
  // closures at 10, 20 and 30 each cost a full day
  auto r = bst::run_text(weather_model("weather valve=w cycle=10 probability=1 outage=const(1)"));
  EXPECT_EQ(r.end_time, 33);
  EXPECT_EQ(r.counters.at("wx.outages"), 3);
  EXPECT_EQ(bst::times(bst::records(r, "w", TraceAction::valve_close)), (std::vector<double>{10, 20, 30}));
}

TEST(Weather, ZeroProbabilityIsNeutral) {
  auto base = bst::run_text(R"(model m {
  state ok = true
  valve w state=ok
  create c count=1 interarrival=const(0)
  task t dur=const(30) valve=w
  destroy d
  link c -> t
  link t -> d
})");
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto r = bst::run_text(weather_model("weather valve=w cycle=10 probability=0 outage=const(1)"), seed);
    EXPECT_EQ(r.end_time, base.end_time);
    EXPECT_EQ(r.counters.at("wx.outages"), 0);
  }
}

TEST(Weather, SlipCoversClosureOverlap) {
  // every outage that overlaps the task delays it by at least the overlap
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto r = bst::run_text(weather_model("weather valve=w cycle=10 probability=0.5 outage=uniform(0.5,2)"), seed);
    auto closes = bst::times(bst::records(r, "w", TraceAction::valve_close));
    auto opens = bst::times(bst::records(r, "w", TraceAction::valve_open));
    double closed = 0;
    for (std::size_t i = 0; i < closes.size(); ++i) {
      double end = i < opens.size() ? opens[i] : r.end_time;
      closed += std::max(0.0, std::min(end, r.end_time) - closes[i]);
    }
    EXPECT_NEAR(r.end_time, 30 + closed, 1e-9) << "seed " << seed;
  }
}

TEST(Weather, MissingValve) {
  auto m = parse_model(R"(model m {
  create c count=1 interarrival=const(0)
  destroy d
  link c -> d
})");
  WeatherSpec w;
  w.valve = "absent";
  try {
    compile_weather(w, m, "wx");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MissingValve);
  }
}

TEST(Breakdown, FailuresAtBusyDaysFiveAndTen) {
  auto r = bst::run_text(
      breakdown_model("breakdown resource=R trigger=const(5) major=0 minor_repair=const(2) major_repair=const(7) clock=usage"));
  EXPECT_EQ(r.end_time, 16);
  EXPECT_EQ(r.counters.at("bd.failures"), 2);
  EXPECT_EQ(bst::times(bst::records(r, "bd.fail", TraceAction::preempt)), (std::vector<double>{5, 12}));
}

TEST(Breakdown, ZeroRepairIsNeutral) {
  auto r = bst::run_text(
      breakdown_model("breakdown resource=R trigger=const(5) major=0 minor_repair=const(0) major_repair=const(0) clock=usage"));
  EXPECT_EQ(r.end_time, 12);
  EXPECT_GT(r.counters.at("bd.failures"), 0);
}

TEST(Breakdown, MajorRepairsFollowSeverity) {
  auto r = bst::run_text(
      breakdown_model("breakdown resource=R trigger=const(5) major=1 minor_repair=const(2) major_repair=const(7) clock=usage"));
  EXPECT_EQ(r.end_time, 12 + 7 + 7);
}

TEST(Breakdown, CalendarClockRunsWhileIdle) {
  // idle server fails at t=5 and 10 regardless of use; the task starts at 20
  auto r = bst::run_text(R"(model m {
  resource R servers=1
  create c count=1 interarrival=const(0)
  task lag dur=const(20)
  capture cap R:1
  task t dur=const(1)
  release rel R:1
  destroy d
  link c -> lag
  link lag -> cap
  link cap -> t
  link t -> rel
  link rel -> d
  submodel bd {
    breakdown resource=R trigger=const(5) major=0 minor_repair=const(1) major_repair=const(7) clock=calendar
  }
})");
  auto fails = bst::times(bst::records(r, "bd.fail", TraceAction::preempt));
  ASSERT_GE(fails.size(), 3u);
  EXPECT_EQ(fails[0], 5);
  EXPECT_EQ(fails[1], 11);
  EXPECT_EQ(fails[2], 17);
  // third repair ends at 18, so the task runs 20..21 untouched
  EXPECT_EQ(r.end_time, 21);
}

TEST(Breakdown, UnknownResource) {
  auto m = parse_model(R"(model m {
  create c count=1 interarrival=const(0)
  destroy d
  link c -> d
})");
  BreakdownSpec b;
  b.resource = "Ghost";
  try {
    compile_breakdown(b, m, "bd");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnknownResource);
  }
}

TEST(Disruptions, TalliesAndIds) {
  auto m = parse_model(weather_model("weather valve=w cycle=10 probability=1 outage=const(1)"));
  EXPECT_EQ(disruption_tallies(m), std::vector<std::string>{"wx.outages"});
  auto x = compile_disruptions(m);
  EXPECT_TRUE(x.submodels.at(0).weather.empty());
  EXPECT_NE(x.find_element("wx.close"), nullptr);
  EXPECT_TRUE(validate(x).empty());
}

TEST(Parameters, GetAndSet) {
  auto m = parse_model(weather_model("weather valve=w cycle=10 probability=0.3 outage=tri(1,2,3)"));
  EXPECT_EQ(get_parameter(m, "wx.outage"), 2);
  set_parameter(m, "wx.outage", 4);
  EXPECT_EQ(m.submodels[0].weather[0].outage, Distribution::triangular(2, 4, 6));
  set_parameter(m, "wx.probability", 0.5);
  EXPECT_EQ(get_parameter(m, "wx.probability"), 0.5);
  EXPECT_THROW(get_parameter(m, "wx.colour"), Error);
  EXPECT_THROW(get_parameter(m, "nope.outage"), Error);
  EXPECT_THROW(get_parameter(m, "outage"), Error);
}

class CalibrationTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() / ("berthsim_cal_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir_);
    std::ofstream(dir_ / "ladder.scn") << "scenario calm {\n  submodel wx off\n}\nscenario stormy extends calm {\n  submodel wx on\n}\n";
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::filesystem::path dir_;
};

TEST_F(CalibrationTest, FindsOutageLength) {
  // end time is 30 + 3 * outage for short outages, so 33 needs outage 1
  auto m = parse_model(weather_model("weather valve=w cycle=10 probability=1 outage=const(0.2)"));
  auto spec = parse_calibration_targets(
      "ladder ladder.scn\nreplications=3\nseed=1\ntarget stormy 33 param=wx.outage lo=0.1 hi=3 tolerance=0.1\n", "t",
      dir_.string());
  auto rep = calibrate(m, spec);
  ASSERT_EQ(rep.entries.size(), 1u);
  EXPECT_NEAR(rep.entries[0].value, 1.0, 0.01);
  EXPECT_LE(std::abs(rep.entries[0].residual), 0.1);
  EXPECT_TRUE(rep.ok());
  EXPECT_NEAR(get_parameter(rep.model, "wx.outage"), rep.entries[0].value, 1e-12);
  auto json = to_json(rep);
  for (const char* key : {"\"parameter\"", "\"value\"", "\"target\"", "\"achieved\"", "\"residual\""})
    EXPECT_NE(json.find(key), std::string::npos) << key;
}

TEST_F(CalibrationTest, UnreachableTargetFails) {
  auto m = parse_model(weather_model("weather valve=w cycle=10 probability=1 outage=const(0.2)"));
  auto spec = parse_calibration_targets("ladder ladder.scn\nreplications=2\ntarget stormy 100 param=wx.outage lo=0.1 hi=2\n",
                                        "t", dir_.string());
  try {
    calibrate(m, spec);
    FAIL();
  } catch (const CalibrationFailed& e) {
    EXPECT_EQ(e.kind(), ErrorKind::CalibrationFailed);
    ASSERT_EQ(e.report().entries.size(), 1u);
    EXPECT_EQ(e.report().entries[0].value, 2);  // best found is the upper bound
    EXPECT_FALSE(e.report().ok());
  }
}

TEST_F(CalibrationTest, TargetsFileErrors) {
  for (const char* bad : {"target stormy 33 param=wx.outage lo=0 hi=1\n", "ladder ladder.scn\n",
                          "ladder ladder.scn\ntarget stormy x param=wx.outage lo=0 hi=1\n",
                          "ladder ladder.scn\ntarget stormy 3 param=wx.outage lo=2 hi=1\n",
                          "ladder ladder.scn\ntarget stormy 3 lo=0 hi=1\n", "ladder ladder.scn\nfoo=1\n",
                          "ladder ladder.scn\ntarget ghost 3 param=wx.outage lo=0 hi=1\n"})
    EXPECT_THROW(parse_calibration_targets(bad, "t", dir_.string()), ModelError) << bad;
}
