// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails.
//
// usage: acceptance <berthsim-cli> <test_properties> <models-dir>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "berthsim/berth.hpp"
#include "berthsim/crash.hpp"
#include "berthsim/engine.hpp"
#include "berthsim/error.hpp"
#include "berthsim/model_format.hpp"
#include "berthsim/runner.hpp"
#include "berthsim/stochastics.hpp"

using namespace berthsim;

namespace {

struct Check {
  std::ostringstream notes;
  bool ok = true;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      notes << " [failed: " << what << "]";
    }
  }
};

int failures = 0;

void criterion(int n, double limit_s, const std::function<void(Check&)>& body) {
  Check c;
  auto t0 = std::chrono::steady_clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.ok = false;
    c.notes << " [exception: " << e.what() << "]";
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (limit_s > 0 && secs > limit_s) {
    c.ok = false;
    c.notes << " [took longer than " << limit_s << " s]";
  }
  if (!c.ok) ++failures;
  std::printf("criterion %d: %s (%.2f s)%s\n", n, c.ok ? "PASS" : "FAIL", secs, c.notes.str().c_str());
  std::fflush(stdout);
}

std::string fmt(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

double end_of(const char* text) { return run(CompiledModel::build(parse_model(text)), 1).end_time; }

std::string capture_output(const std::string& cmd, int& status) {
  std::string out;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) {
    status = -1;
    return out;
  }
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) out.append(buf.data(), n);
  status = pclose(p);
  return out;
}

const char* kSingle = R"(model m {
  create c count=1 interarrival=const(0)
  task t dur=const(5)
  destroy d
  link c -> t
  link t -> d
})";

const char* kPair = R"(model m {
  resource R servers=1
  create c count=2 interarrival=const(0)
  capture cap R:1
  task t dur=const(10)
  release rel R:1
  destroy d
  link c -> cap
  link cap -> t
  link t -> rel
  link rel -> d
})";

const char* kBatch = R"(model m {
  create c count=4 interarrival=const(0)
  batch b size=4
  task t dur=const(5)
  unbatch u
  destroy d
  link c -> b
  link b -> t
  link t -> u
  link u -> d
})";

const char* kValve = R"(model m {
  state open = true
  valve w state=open
  create c count=1 interarrival=const(0)
  task t dur=const(10) valve=w
  destroy d
  link c -> t
  link t -> d
  create g count=1 interarrival=const(0) background=true
  task wait dur=const(4)
  activator shut valve=w open=false
  task hold dur=const(2)
  activator reopen valve=w open=true
  destroy gd
  link g -> wait
  link wait -> shut
  link shut -> hold
  link hold -> reopen
  link reopen -> gd
})";

const char* kPreempt = R"(model m {
  resource Jackhammer servers=1
  create c count=1 interarrival=const(0)
  capture cap Jackhammer:1
  task t dur=const(30)
  release rel Jackhammer:1
  destroy d
  link c -> cap
  link cap -> t
  link t -> rel
  link rel -> d
  create g count=1 interarrival=const(0) background=true
  task lag dur=const(10)
  preempt p resource=Jackhammer
  task fix dur=const(7)
  release back Jackhammer:1
  destroy gd
  link g -> lag
  link lag -> p
  link p -> fix
  link fix -> back
  link back -> gd
})";

bool rounds_to(double v, double target) { return std::fabs(std::round(v * 100) / 100 - target) < 1e-9; }

}  // namespace

int main(int argc, char** argv) {
  if (argc != 4) {
    std::fprintf(stderr, "usage: %s <berthsim-cli> <test_properties> <models-dir>\n", argv[0]);
    return 2;
  }
  const std::string cli = argv[1];
  const std::string properties = argv[2];
  const std::string models = argv[3];

  criterion(1, 1.0, [](Check& c) {
    double single = end_of(kSingle), pair = end_of(kPair), valve = end_of(kValve), preempt = end_of(kPreempt);
    RunOptions o;
    o.trace = true;
    auto b = run(CompiledModel::build(parse_model(kBatch)), 1, o);
    std::vector<std::uint64_t> out;
    for (const auto& t : b.trace)
      if (t.element == "d" && t.action == TraceAction::destroy) out.push_back(t.entity);
    c.expect(single == 5, "single task " + fmt(single));
    c.expect(pair == 10 + 10, "contention pair " + fmt(pair));
    c.expect(b.end_time == 5 && out == std::vector<std::uint64_t>{1, 2, 3, 4}, "batch round-trip");
    c.expect(valve == 12, "valve " + fmt(valve));
    c.expect(preempt == 37, "preempt " + fmt(preempt));
    c.notes << " single=" << single << " pair=" << pair << " batch=" << b.end_time << " valve=" << valve
            << " preempt=" << preempt;
  });

  const auto model = load_reference_model();

  criterion(2, 5.0, [&](Check& c) {
    auto ideal = uncertainty_ladder().front();
    ideal.replications = 100;
    auto r = replicate(model, ideal);
    c.notes << " mean=" << fmt(r.mean_days) << " rate=" << fmt(r.production_rate_m_per_day, 4);
    c.expect(std::fabs(r.mean_days - 193.38) <= 2, "mean within 2 of 193.38");
    c.expect(rounds_to(r.production_rate_m_per_day, 0.52), "rate rounds to 0.52");
    c.expect(std::fabs(r.production_rate_m_per_day * r.mean_days - 100) <= 1e-9, "rate * mean = 100");
  });

  criterion(3, 20.0, [&](Check& c) {
    auto s = sweep(model, uncertainty_ladder());
    const std::vector<double> want{195.38, 215.00, 233.46};
    c.expect(s.reports.size() == 4, "four rungs");
    for (std::size_t i = 0; i < want.size() && i + 1 < s.reports.size(); ++i) {
      double m = s.reports[i + 1].mean_days;
      c.notes << " " << s.reports[i + 1].scenario << "=" << fmt(m);
      c.expect(std::fabs(m - want[i]) <= 3, s.reports[i + 1].scenario + " within 3 of " + fmt(want[i], 2));
      if (i > 0) c.expect(m > s.reports[i].mean_days, "increasing at " + s.reports[i + 1].scenario);
    }
  });

  double resource_final = std::numeric_limits<double>::quiet_NaN();
  criterion(4, 30.0, [&](Check& c) {
    auto s = sweep(model, resource_ladder());
    const std::vector<double> want{211.21, 191.46, 170.00, 166.71, 161.71};
    c.expect(s.reports.size() == 6, "six rungs");
    for (std::size_t i = 0; i < want.size() && i + 1 < s.reports.size(); ++i) {
      double m = s.reports[i + 1].mean_days;
      c.notes << " " << s.reports[i + 1].scenario << "=" << fmt(m);
      c.expect(std::fabs(m - want[i]) <= 5, s.reports[i + 1].scenario + " within 5 of " + fmt(want[i], 2));
      if (i > 0) c.expect(m < s.reports[i].mean_days, "decreasing at " + s.reports[i + 1].scenario);
    }
    resource_final = s.reports.back().mean_days;
    c.notes << " final rate=" << fmt(s.reports.back().production_rate_m_per_day, 4);
    c.expect(rounds_to(s.reports.back().production_rate_m_per_day, 0.62), "final rate rounds to 0.62");
  });

  criterion(5, 0, [&](Check& c) {
    const std::string cmd =
        cli + " sweep " + models + "/doha_berth.psm --ladder " + models + "/table4.scn --format json --seed 1234 --reps 20";
    int s1 = 0, s2 = 0, s3 = 0;
    auto a = capture_output(cmd + " --threads 1", s1);
    auto b = capture_output(cmd + " --threads 1", s2);
    auto d = capture_output(cmd + " --threads 3", s3);
    c.expect(s1 == 0 && s2 == 0 && s3 == 0, "cli exit status");
    c.expect(!a.empty() && a == b, "identical output for the same seed");
    c.expect(a == d, "identical output across thread counts");
    c.notes << " bytes=" << a.size();
  });

  criterion(6, 0, [&](Check& c) {
    int status = 0;
    auto out = capture_output(properties + " --gtest_brief=1 2>&1", status);
    c.expect(status == 0, "property suite");
    if (status != 0) c.notes << "\n" << out;
  });

  criterion(7, 0, [&](Check& c) {
    auto stream = derive_stream(42, "acceptance.bernoulli");
    auto bern = Distribution::bernoulli(0.3);
    int hits = 0;
    for (int i = 0; i < 10'000; ++i) hits += sample(bern, stream) == 1.0;
    double freq = hits / 1e4;
    c.notes << " bern freq=" << fmt(freq, 4);
    c.expect(std::fabs(freq - 0.3) <= 0.02, "bernoulli frequency");

    auto ideal = uncertainty_ladder().front();
    ideal.replications = 30;
    c.expect(replicate(model, ideal).std_days == 0, "deterministic std 0");

    auto weather = uncertainty_ladder()[1];
    weather.replications = 10;
    double ci10 = replicate(model, weather).ci95_halfwidth_days;
    weather.replications = 1000;
    double ci1000 = replicate(model, weather).ci95_halfwidth_days;
    c.notes << " ci10=" << fmt(ci10) << " ci1000=" << fmt(ci1000);
    c.expect(ci1000 < ci10, "interval shrinks");
  });

  criterion(8, 0, [&](Check& c) {
    auto costs = reference_costs();
    auto from = resource_ladder().front();
    const double inf = std::numeric_limits<double>::infinity();
    auto greedy = greedy_crash(model, from, costs, inf);
    double final_mean = greedy.steps.empty() ? greedy.baseline_mean : greedy.steps.back().mean_days;
    c.notes << " greedy final=" << fmt(final_mean) << " resource ladder final=" << fmt(resource_final);
    c.expect(std::fabs(final_mean - resource_final) <= 1, "greedy final within 1 of the ladder");

    auto none = greedy_crash(model, from, costs, 0);
    c.expect(none.steps.empty() && none.frontier.size() == 1 && none.frontier[0].cost == 0 &&
                 none.frontier[0].mean_days == none.baseline_mean,
             "budget 0 gives the baseline only");

    auto exhaustive = exhaustive_crash(model, from, costs, inf);
    auto dominated = [](const std::vector<FrontierPoint>& f) {
      for (const auto& p : f)
        for (const auto& q : f)
          if (&p != &q && q.cost <= p.cost && q.mean_days <= p.mean_days &&
              (q.cost < p.cost || q.mean_days < p.mean_days))
            return true;
      return false;
    };
    c.expect(!dominated(greedy.frontier), "greedy frontier nondominated");
    c.expect(!dominated(exhaustive.frontier), "exhaustive frontier nondominated");
    // no greedy purchase beats the exhaustive frontier
    for (const auto& s : greedy.steps)
      for (const auto& f : exhaustive.frontier)
        if (s.cumulative_cost <= f.cost && s.mean_days < f.mean_days - 1e-9 && s.cumulative_cost < f.cost)
          c.expect(false, "greedy step dominates the exhaustive frontier");
    c.notes << " frontier points=" << exhaustive.frontier.size();
  });

  std::printf("%s\n", failures ? "acceptance: FAIL" : "acceptance: PASS");
  return failures ? 1 : 0;
}
