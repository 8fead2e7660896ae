#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "berthsim/error.hpp"
#include "berthsim/model.hpp"
#include "berthsim/runner.hpp"

namespace berthsim {

struct ResourceOption {
  std::string resource;
  std::int64_t max_added = 0;
  double cost_per_unit = 0;
};

struct CostModel {
  double base_cost = 773'422;
  std::optional<double> delay_penalty_per_day;
  double bid_days = 156;
  std::vector<ResourceOption> options;
  std::optional<double> budget;  // from the costs file; the caller may override
};

/// Costs file lines: `option <resource> max=<k> unit_cost=<usd>`,
/// `penalty_per_day=<usd>`, `budget=<usd>`, `base_cost=<usd>`, `bid_days=<days>`.
CostModel parse_costs(std::string_view text, std::string_view filename = "<input>");

/// Errors for options naming unknown resources.
std::vector<Diagnostic> validate_costs(const ModelDef& model, const CostModel& costs);

struct CrashDelta {
  double days = 0;  // change in mean duration; negative is faster
  double cost = 0;
};

/// Effect of adding `units` servers of `option.resource` on top of
/// `overlay`, with the same replication seeds on both sides.
CrashDelta evaluate(const ModelDef& model, const ScenarioOverlay& overlay, const ResourceOption& option,
                    std::int64_t units, const ReplicateOptions& options = {});

struct CrashStep {
  std::string resource;
  std::int64_t units = 0;
  double mean_days = 0;
  double cumulative_cost = 0;
};

struct FrontierPoint {
  double cost = 0;  // added resource cost
  double mean_days = 0;
  std::map<std::string, std::int64_t> added;
};

struct CrashPlan {
  std::uint64_t master_seed = 0;
  int replications = 0;
  double baseline_mean = 0;
  std::vector<CrashStep> steps;
  std::vector<FrontierPoint> frontier;  // nondominated, by increasing cost
};

/// Repeatedly buys the addition with the most days saved per dollar until
/// nothing helps or the budget runs out. Ties prefer more days saved, then
/// the resource name, then fewer units.
CrashPlan greedy_crash(const ModelDef& model, const ScenarioOverlay& overlay, const CostModel& costs,
                       double budget, const ReplicateOptions& options = {});

inline constexpr std::uint64_t kMaxExhaustivePoints = 10'000;

/// Evaluates every affordable combination of additions. Throws
/// InvalidParams when the lattice has more than kMaxExhaustivePoints points.
CrashPlan exhaustive_crash(const ModelDef& model, const ScenarioOverlay& overlay, const CostModel& costs,
                           double budget, const ReplicateOptions& options = {});

/// Keeps the points no other point beats on both cost and days.
std::vector<FrontierPoint> nondominated(std::vector<FrontierPoint> points);

struct Recommendation {
  FrontierPoint point;
  double delay_days = 0;  // past the bid schedule
  double total_cost = 0;  // resource cost plus delay penalty
};

/// Cheapest frontier point once late days are charged. Requires a penalty.
Recommendation tradeoff(const CrashPlan& plan, const CostModel& costs);

std::string report(const CrashPlan& plan, const CostModel& costs, ReportFormat format);

}  // namespace berthsim
