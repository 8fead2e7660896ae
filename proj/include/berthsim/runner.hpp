#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "berthsim/engine.hpp"
#include "berthsim/model.hpp"

namespace berthsim {

struct ScenarioReport {
  std::string scenario;
  std::string comment;
  int replications = 0;
  std::uint64_t master_seed = 0;
  double berth_length_m = 0;
  double mean_days = 0;
  double std_days = 0;
  double ci95_halfwidth_days = 0;
  double production_rate_m_per_day = 0;
  double min_days = 0;
  double max_days = 0;
  std::map<std::string, double> utilization;  // mean over replications
  std::map<std::string, double> counters;     // mean per replication
  std::vector<double> end_times;              // by replication index
};

struct SweepResult {
  std::uint64_t master_seed = 0;
  std::vector<ScenarioReport> reports;
  std::vector<std::string> warnings;
};

struct ReplicateOptions {
  unsigned threads = 1;  // 0: one per hardware thread
  std::uint64_t event_ceiling = 10'000'000;
  std::optional<int> replications;           // overrides the overlay
  std::optional<std::uint64_t> master_seed;  // overrides the overlay
};

/// Seed of replication `index`: derived from the master seed and "rep.<index>".
std::uint64_t replication_seed(std::uint64_t master_seed, int index);

struct Summary {
  double mean = 0;
  double std = 0;
  double ci95_halfwidth = 0;
};

/// Sample mean, sample standard deviation and Student-t 95% half width.
Summary summarize(const std::vector<double>& xs);

/// Runs the overlay's replications and aggregates them. Errors from a run
/// are rethrown with the replication index in the message.
ScenarioReport replicate(const ModelDef& model, const ScenarioOverlay& overlay, const ReplicateOptions& options = {});
ScenarioReport replicate(const CompiledModel& model, const ScenarioOverlay& overlay, const ReplicateOptions& options = {});

/// Messages for overlays that undo something an earlier rung set.
std::vector<std::string> ladder_warnings(const std::vector<ScenarioOverlay>& ladder);

/// Runs a cumulative ladder with one master seed for every rung.
SweepResult sweep(const ModelDef& model, const std::vector<ScenarioOverlay>& ladder,
                  const ReplicateOptions& options = {});

enum class ReportFormat { table, csv, json };

std::optional<ReportFormat> report_format_from(std::string_view word);

inline constexpr int kReportSchemaVersion = 1;

std::string report(const SweepResult& result, ReportFormat format);
std::string report(const ScenarioReport& result, ReportFormat format);

}  // namespace berthsim
