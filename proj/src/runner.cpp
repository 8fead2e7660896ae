#include "berthsim/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include <boost/math/distributions/students_t.hpp>
#include <nlohmann/json.hpp>

#include "berthsim/error.hpp"
#include "berthsim/model_format.hpp"
#include "berthsim/stochastics.hpp"

namespace berthsim {

std::uint64_t replication_seed(std::uint64_t master_seed, int index) {
  return derive_stream(master_seed, "rep." + std::to_string(index)).next_u64();
}

Summary summarize(const std::vector<double>& xs) {
  Summary s;
  if (xs.empty()) return s;
  auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  if (*lo == *hi) {
    s.mean = *lo;
    return s;
  }
  double sum = 0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(xs.size());
  if (xs.size() < 2) return s;
  double ss = 0;
  for (double x : xs) ss += (x - s.mean) * (x - s.mean);
  auto n = static_cast<double>(xs.size());
  s.std = std::sqrt(ss / (n - 1));
  boost::math::students_t t(n - 1);
  s.ci95_halfwidth = boost::math::quantile(boost::math::complement(t, 0.025)) * s.std / std::sqrt(n);
  return s;
}

ScenarioReport replicate(const ModelDef& model, const ScenarioOverlay& overlay, const ReplicateOptions& options) {
  return replicate(CompiledModel::build(apply_overlay(model, overlay)), overlay, options);
}

ScenarioReport replicate(const CompiledModel& model, const ScenarioOverlay& overlay, const ReplicateOptions& options) {
  int reps = options.replications.value_or(overlay.replications);
  std::uint64_t seed = options.master_seed.value_or(overlay.master_seed);
  if (reps < 1) throw Error(ErrorKind::InvalidParams, "replications must be at least 1");

  std::vector<RunResult> results(static_cast<std::size_t>(reps));
  RunOptions ro;
  ro.event_ceiling = options.event_ceiling;
  ro.noise = overlay.noise;

  std::atomic<int> next{0};
  std::exception_ptr failure;
  int failed_index = reps;
  std::mutex mu;
  auto worker = [&] {
    for (int i; (i = next.fetch_add(1)) < reps;) {
      try {
        results[static_cast<std::size_t>(i)] = run(model, replication_seed(seed, i), ro);
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
      }
    }
  };
  unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(reps));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) {
    try {
      std::rethrow_exception(failure);
    } catch (const Error& e) {
      throw Error(e.kind(), "scenario '" + overlay.name + "', replication " + std::to_string(failed_index) + ": " +
                                e.detail());
    }
  }

  ScenarioReport r;
  r.scenario = overlay.name;
  r.comment = overlay.comment;
  r.replications = reps;
  r.master_seed = seed;
  r.berth_length_m = model.source().length_m;
  for (const auto& res : results) r.end_times.push_back(res.end_time);
  auto s = summarize(r.end_times);
  r.mean_days = s.mean;
  r.std_days = s.std;
  r.ci95_halfwidth_days = s.ci95_halfwidth;
  r.production_rate_m_per_day = r.mean_days > 0 ? r.berth_length_m / r.mean_days : 0.0;
  r.min_days = *std::min_element(r.end_times.begin(), r.end_times.end());
  r.max_days = *std::max_element(r.end_times.begin(), r.end_times.end());
  for (const auto& res : results) {
    for (const auto& [k, v] : res.utilization) r.utilization[k] += v / reps;
    for (const auto& [k, v] : res.counters) r.counters[k] += static_cast<double>(v) / reps;
  }
  return r;
}

std::vector<std::string> ladder_warnings(const std::vector<ScenarioOverlay>& ladder) {
  std::vector<std::string> out;
  for (std::size_t i = 1; i < ladder.size(); ++i) {
    const auto& prev = ladder[i - 1];
    const auto& cur = ladder[i];
    auto warn = [&](const std::string& what) {
      out.push_back("NonCumulativeLadder: '" + cur.name + "' " + what + " set by '" + prev.name + "'");
    };
    for (const auto& [r, k] : prev.resource_overrides) {
      auto it = cur.resource_overrides.find(r);
      if (it == cur.resource_overrides.end())
        warn("drops the " + r + " override");
      else if (it->second < k)
        warn("lowers " + r + " below the " + std::to_string(k) + " servers");
    }
    for (const auto& [s, on] : prev.submodel_toggles) {
      if (!on) continue;
      auto it = cur.submodel_toggles.find(s);
      if (it != cur.submodel_toggles.end() && !it->second) warn("switches off submodel " + s);
    }
  }
  return out;
}

SweepResult sweep(const ModelDef& model, const std::vector<ScenarioOverlay>& ladder, const ReplicateOptions& options) {
  if (ladder.empty()) throw Error(ErrorKind::InvalidParams, "empty scenario ladder");
  SweepResult out;
  out.master_seed = options.master_seed.value_or(ladder.front().master_seed);
  out.warnings = ladder_warnings(ladder);
  ReplicateOptions o = options;
  o.master_seed = out.master_seed;
  for (const auto& rung : ladder) out.reports.push_back(replicate(model, rung, o));
  return out;
}

std::optional<ReportFormat> report_format_from(std::string_view word) {
  if (word == "table") return ReportFormat::table;
  if (word == "csv") return ReportFormat::csv;
  if (word == "json") return ReportFormat::json;
  return std::nullopt;
}

namespace {

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

nlohmann::ordered_json to_json(const ScenarioReport& r) {
  nlohmann::ordered_json j;
  j["scenario"] = r.scenario;
  j["comment"] = r.comment;
  j["replications"] = r.replications;
  j["master_seed"] = r.master_seed;
  j["berth_length_m"] = r.berth_length_m;
  j["mean_days"] = r.mean_days;
  j["std_days"] = r.std_days;
  j["ci95_halfwidth_days"] = r.ci95_halfwidth_days;
  j["production_rate_m_per_day"] = r.production_rate_m_per_day;
  j["min_days"] = r.min_days;
  j["max_days"] = r.max_days;
  j["utilization"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.utilization) j["utilization"][k] = v;
  j["event_counts"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.counters) j["event_counts"][k] = v;
  return j;
}

}  // namespace

std::string report(const SweepResult& result, ReportFormat format) {
  std::ostringstream os;
  switch (format) {
    case ReportFormat::table: {
      std::vector<std::array<std::string, 4>> rows;
      rows.push_back({"Scenario", "Production Rate", "Total Production Time", "Comments"});
      for (const auto& r : result.reports)
        rows.push_back({r.scenario, fixed(r.production_rate_m_per_day, 2) + " m/day", fixed(r.mean_days, 2) + " days",
                        r.comment});
      std::array<std::size_t, 4> w{};
      for (const auto& row : rows)
        for (std::size_t c = 0; c < 4; ++c) w[c] = std::max(w[c], row[c].size());
      for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t c = 0; c < 4; ++c) {
          std::string cell = rows[i][c];
          if (c < 3) cell.resize(w[c], ' ');
          os << cell << (c < 3 ? " | " : "");
        }
        os << '\n';
        if (i == 0) {
          for (std::size_t c = 0; c < 4; ++c) os << std::string(w[c], '-') << (c < 3 ? "-|-" : "");
          os << '\n';
        }
      }
      for (const auto& wmsg : result.warnings) os << "warning: " << wmsg << '\n';
      break;
    }
    case ReportFormat::csv:
      os << "scenario,replications,master_seed,mean_days,std_days,ci95_halfwidth_days,production_rate_m_per_day,"
            "comment\n";
      for (const auto& r : result.reports)
        os << csv_field(r.scenario) << ',' << r.replications << ',' << r.master_seed << ','
           << format_number(r.mean_days) << ',' << format_number(r.std_days) << ','
           << format_number(r.ci95_halfwidth_days) << ',' << format_number(r.production_rate_m_per_day) << ','
           << csv_field(r.comment) << '\n';
      break;
    case ReportFormat::json: {
      nlohmann::ordered_json j;
      j["schema_version"] = kReportSchemaVersion;
      j["master_seed"] = result.master_seed;
      j["scenarios"] = nlohmann::ordered_json::array();
      for (const auto& r : result.reports) j["scenarios"].push_back(to_json(r));
      j["warnings"] = result.warnings;
      os << j.dump(2) << '\n';
      break;
    }
  }
  return os.str();
}

std::string report(const ScenarioReport& result, ReportFormat format) {
  SweepResult s;
  s.master_seed = result.master_seed;
  s.reports.push_back(result);
  return report(s, format);
}

}  // namespace berthsim
