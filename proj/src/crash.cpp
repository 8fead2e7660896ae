#include "berthsim/crash.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <nlohmann/json.hpp>
#include <sstream>

#include "berthsim/model_format.hpp"
#include "word_lines.hpp"

namespace berthsim {

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string render_table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> w(rows.front().size(), 0);
  for (const auto& row : rows)
    for (std::size_t c = 0; c < row.size(); ++c) w[c] = std::max(w[c], row[c].size());
  std::ostringstream os;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < w.size(); ++c) {
      std::string cell = rows[i][c];
      if (c + 1 < w.size()) cell.resize(w[c], ' ');
      os << cell << (c + 1 < w.size() ? " | " : "");
    }
    os << '\n';
    if (i == 0) {
      for (std::size_t c = 0; c < w.size(); ++c) os << std::string(w[c], '-') << (c + 1 < w.size() ? "-|-" : "");
      os << '\n';
    }
  }
  return os.str();
}

std::string describe(const std::map<std::string, std::int64_t>& added) {
  std::string out;
  for (const auto& [r, k] : added) {
    if (k == 0) continue;
    if (!out.empty()) out += ' ';
    out += r + "+" + std::to_string(k);
  }
  return out.empty() ? "baseline" : out;
}

// Mean duration per configuration, so revisited points are not rerun.
class Evaluator {
 public:
  Evaluator(const ModelDef& model, const ScenarioOverlay& overlay, const ReplicateOptions& options)
      : model_(model), overlay_(overlay), options_(options) {}

  double mean(const std::map<std::string, std::int64_t>& added) {
    std::map<std::string, std::int64_t> key;
    for (const auto& [r, k] : added)
      if (k) key[r] = k;
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    ScenarioOverlay o = overlay_;
    for (const auto& [r, k] : key) {
      auto base = o.resource_overrides.count(r) ? o.resource_overrides.at(r) : current_servers(r);
      o.resource_overrides[r] = base + k;
    }
    double m = replicate(model_, o, options_).mean_days;
    cache_.emplace(std::move(key), m);
    return m;
  }

  int replications() const { return options_.replications.value_or(overlay_.replications); }
  std::uint64_t seed() const { return options_.master_seed.value_or(overlay_.master_seed); }

 private:
  std::int64_t current_servers(const std::string& r) const {
    const auto* decl = model_.find_resource(r);
    if (!decl) throw Error(ErrorKind::UnknownResource, "no resource '" + r + "' in the model");
    return decl->servers;
  }

  const ModelDef& model_;
  const ScenarioOverlay& overlay_;
  ReplicateOptions options_;
  std::map<std::map<std::string, std::int64_t>, double> cache_;
};

void check_budget(double budget) {
  if (!(budget >= 0)) throw Error(ErrorKind::InvalidParams, "budget must be >= 0");
}

}  // namespace

CostModel parse_costs(std::string_view text, std::string_view filename) {
  using namespace detail;
  CostModel cm;
  std::vector<Diagnostic> diags;
  auto money = [&](const WordLine& wl, const Word& w, const std::string& value, const char* what) -> std::optional<double> {
    auto v = to_real(value);
    if (!v || *v < 0) {
      diags.push_back(word_error(filename, wl.line, w.col, std::string(what) + " must be a finite number >= 0"));
      return std::nullopt;
    }
    return v;
  };
  for (const auto& wl : split_word_lines(text)) {
    const auto& w = wl.words;
    if (w[0].text == "option") {
      if (w.size() < 2) {
        diags.push_back(word_error(filename, wl.line, w[0].col, "expected: option <resource> max=<k> unit_cost=<usd>"));
        continue;
      }
      ResourceOption opt;
      opt.resource = w[1].text;
      if (!is_identifier(opt.resource))
        diags.push_back(word_error(filename, wl.line, w[1].col, "'" + opt.resource + "' is not a resource name"));
      bool have_max = false, have_cost = false;
      for (std::size_t i = 2; i < w.size(); ++i) {
        auto kv = split_key_value(w[i].text);
        if (kv && kv->first == "max") {
          auto k = to_u64(kv->second);
          if (!k || *k > 1'000'000)
            diags.push_back(word_error(filename, wl.line, w[i].col, "max must be an integer in [0, 1000000]"));
          else
            opt.max_added = static_cast<std::int64_t>(*k);
          have_max = true;
        } else if (kv && kv->first == "unit_cost") {
          if (auto v = money(wl, w[i], kv->second, "unit_cost")) opt.cost_per_unit = *v;
          have_cost = true;
        } else {
          diags.push_back(word_error(filename, wl.line, w[i].col, "unexpected '" + w[i].text + "'"));
        }
      }
      if (!have_max || !have_cost)
        diags.push_back(word_error(filename, wl.line, w[0].col, "option needs max= and unit_cost="));
      for (const auto& o : cm.options)
        if (o.resource == opt.resource)
          diags.push_back(word_error(filename, wl.line, w[1].col, "option for '" + opt.resource + "' given twice"));
      cm.options.push_back(std::move(opt));
      continue;
    }
    auto kv = split_key_value(w[0].text);
    if (!kv || w.size() != 1) {
      diags.push_back(word_error(filename, wl.line, w[0].col, "unexpected '" + w[0].text + "'"));
      continue;
    }
    if (kv->first == "penalty_per_day") {
      if (auto v = money(wl, w[0], kv->second, "penalty_per_day")) cm.delay_penalty_per_day = *v;
    } else if (kv->first == "budget") {
      if (auto v = money(wl, w[0], kv->second, "budget")) cm.budget = *v;
    } else if (kv->first == "base_cost") {
      if (auto v = money(wl, w[0], kv->second, "base_cost")) cm.base_cost = *v;
    } else if (kv->first == "bid_days") {
      if (auto v = money(wl, w[0], kv->second, "bid_days")) cm.bid_days = *v;
    } else {
      diags.push_back(word_error(filename, wl.line, w[0].col, "unknown setting '" + kv->first + "'"));
    }
  }
  if (!diags.empty()) throw ModelError(ErrorKind::SyntaxError, std::move(diags));
  return cm;
}

std::vector<Diagnostic> validate_costs(const ModelDef& model, const CostModel& costs) {
  std::vector<Diagnostic> out;
  for (const auto& o : costs.options)
    if (!model.find_resource(o.resource)) {
      Diagnostic d;
      d.message = "option names unknown resource '" + o.resource + "'";
      out.push_back(std::move(d));
    }
  return out;
}

CrashDelta evaluate(const ModelDef& model, const ScenarioOverlay& overlay, const ResourceOption& option,
                    std::int64_t units, const ReplicateOptions& options) {
  if (units < 0) throw Error(ErrorKind::InvalidParams, "cannot add a negative number of servers");
  if (units > option.max_added)
    throw Error(ErrorKind::InvalidParams, "option '" + option.resource + "' allows at most " +
                                              std::to_string(option.max_added) + " more servers");
  if (units == 0) return {};
  Evaluator ev(model, overlay, options);
  double before = ev.mean({});
  double after = ev.mean({{option.resource, units}});
  return {after - before, static_cast<double>(units) * option.cost_per_unit};
}

std::vector<FrontierPoint> nondominated(std::vector<FrontierPoint> points) {
  std::sort(points.begin(), points.end(), [](const FrontierPoint& a, const FrontierPoint& b) {
    if (a.cost != b.cost) return a.cost < b.cost;
    if (a.mean_days != b.mean_days) return a.mean_days < b.mean_days;
    return a.added < b.added;
  });
  std::vector<FrontierPoint> out;
  double best_days = std::numeric_limits<double>::infinity();
  for (auto& p : points) {
    // sorted by cost, so p survives only by being strictly faster than all cheaper points
    if (p.mean_days < best_days) {
      best_days = p.mean_days;
      out.push_back(std::move(p));
    }
  }
  return out;
}

CrashPlan greedy_crash(const ModelDef& model, const ScenarioOverlay& overlay, const CostModel& costs,
                       double budget, const ReplicateOptions& options) {
  check_budget(budget);
  Evaluator ev(model, overlay, options);
  CrashPlan plan;
  plan.master_seed = ev.seed();
  plan.replications = ev.replications();
  plan.baseline_mean = ev.mean({});

  std::map<std::string, std::int64_t> added;
  double spent = 0;
  double current = plan.baseline_mean;
  std::vector<FrontierPoint> points{{0, current, {}}};

  while (true) {
    struct Pick {
      const ResourceOption* option = nullptr;
      std::int64_t units = 0;
      double saved = 0;
      double cost = 0;
      double mean = 0;
    };
    std::optional<Pick> best;
    auto better = [](const Pick& a, const Pick& b) {
      // a.saved / a.cost against b.saved / b.cost without dividing by zero
      double lhs = a.saved * b.cost, rhs = b.saved * a.cost;
      if (lhs != rhs) return lhs > rhs;
      if (a.saved != b.saved) return a.saved > b.saved;
      if (a.option->resource != b.option->resource) return a.option->resource < b.option->resource;
      return a.units < b.units;
    };
    for (const auto& opt : costs.options) {
      std::int64_t have = added.count(opt.resource) ? added.at(opt.resource) : 0;
      for (std::int64_t k = 1; have + k <= opt.max_added; ++k) {
        double cost = static_cast<double>(k) * opt.cost_per_unit;
        if (spent + cost > budget) break;
        auto trial = added;
        trial[opt.resource] = have + k;
        double m = ev.mean(trial);
        Pick p{&opt, k, current - m, cost, m};
        if (p.saved <= 0) continue;
        if (!best || better(p, *best)) best = p;
      }
    }
    if (!best) break;
    added[best->option->resource] += best->units;
    spent += best->cost;
    current = best->mean;
    plan.steps.push_back({best->option->resource, best->units, current, spent});
    points.push_back({spent, current, added});
  }
  plan.frontier = nondominated(std::move(points));
  return plan;
}

CrashPlan exhaustive_crash(const ModelDef& model, const ScenarioOverlay& overlay, const CostModel& costs,
                           double budget, const ReplicateOptions& options) {
  check_budget(budget);
  std::uint64_t lattice = 1;
  for (const auto& o : costs.options) {
    lattice *= static_cast<std::uint64_t>(o.max_added) + 1;
    if (lattice > kMaxExhaustivePoints)
      throw Error(ErrorKind::InvalidParams, "option lattice exceeds " + std::to_string(kMaxExhaustivePoints) +
                                                " points; use the greedy search");
  }
  Evaluator ev(model, overlay, options);
  CrashPlan plan;
  plan.master_seed = ev.seed();
  plan.replications = ev.replications();
  plan.baseline_mean = ev.mean({});

  std::vector<FrontierPoint> points;
  std::vector<std::int64_t> digits(costs.options.size(), 0);
  while (true) {
    std::map<std::string, std::int64_t> added;
    double cost = 0;
    for (std::size_t i = 0; i < digits.size(); ++i) {
      added[costs.options[i].resource] = digits[i];
      cost += static_cast<double>(digits[i]) * costs.options[i].cost_per_unit;
    }
    if (cost <= budget) points.push_back({cost, ev.mean(added), added});
    std::size_t i = 0;
    while (i < digits.size() && ++digits[i] > costs.options[i].max_added) digits[i++] = 0;
    if (i == digits.size()) break;
  }
  plan.frontier = nondominated(std::move(points));
  return plan;
}

Recommendation tradeoff(const CrashPlan& plan, const CostModel& costs) {
  if (!costs.delay_penalty_per_day)
    throw Error(ErrorKind::InvalidParams, "tradeoff needs penalty_per_day in the costs");
  if (plan.frontier.empty()) throw Error(ErrorKind::InvalidParams, "plan has no frontier points");
  std::optional<Recommendation> best;
  for (const auto& p : plan.frontier) {
    Recommendation r;
    r.point = p;
    r.delay_days = std::max(0.0, p.mean_days - costs.bid_days);
    r.total_cost = p.cost + *costs.delay_penalty_per_day * r.delay_days;
    // frontier is ordered by cost, so strict < keeps the cheaper point on ties
    if (!best || r.total_cost < best->total_cost) best = r;
  }
  return *best;
}

std::string report(const CrashPlan& plan, const CostModel& costs, ReportFormat format) {
  std::optional<Recommendation> rec;
  if (costs.delay_penalty_per_day && !plan.frontier.empty()) rec = tradeoff(plan, costs);
  std::ostringstream os;
  switch (format) {
    case ReportFormat::table: {
      std::vector<std::vector<std::string>> steps{{"Step", "Addition", "Mean Days", "Added Cost", "Project Cost"}};
      steps.push_back({"0", "baseline", fixed(plan.baseline_mean, 2), fixed(0, 0), fixed(costs.base_cost, 0)});
      for (std::size_t i = 0; i < plan.steps.size(); ++i) {
        const auto& s = plan.steps[i];
        steps.push_back({std::to_string(i + 1), s.resource + " +" + std::to_string(s.units), fixed(s.mean_days, 2),
                         fixed(s.cumulative_cost, 0), fixed(costs.base_cost + s.cumulative_cost, 0)});
      }
      os << render_table(steps) << '\n';
      std::vector<std::vector<std::string>> front{{"Added Cost", "Mean Days", "Additions"}};
      for (const auto& p : plan.frontier) front.push_back({fixed(p.cost, 0), fixed(p.mean_days, 2), describe(p.added)});
      os << "frontier:\n" << render_table(front);
      if (rec)
        os << "\nrecommended: " << describe(rec->point.added) << ", " << fixed(rec->point.mean_days, 2) << " days, "
           << fixed(rec->delay_days, 2) << " days late, total " << fixed(rec->total_cost, 0) << " USD\n";
      break;
    }
    case ReportFormat::csv:
      os << "kind,index,addition,mean_days,added_cost\n";
      os << "step,0,baseline," << format_number(plan.baseline_mean) << ",0\n";
      for (std::size_t i = 0; i < plan.steps.size(); ++i) {
        const auto& s = plan.steps[i];
        os << "step," << i + 1 << ',' << s.resource << " +" << s.units << ',' << format_number(s.mean_days) << ','
           << format_number(s.cumulative_cost) << '\n';
      }
      for (std::size_t i = 0; i < plan.frontier.size(); ++i) {
        const auto& p = plan.frontier[i];
        os << "frontier," << i << ',' << describe(p.added) << ',' << format_number(p.mean_days) << ','
           << format_number(p.cost) << '\n';
      }
      break;
    case ReportFormat::json: {
      nlohmann::ordered_json j;
      j["schema_version"] = kReportSchemaVersion;
      j["master_seed"] = plan.master_seed;
      j["replications"] = plan.replications;
      j["base_cost"] = costs.base_cost;
      j["bid_days"] = costs.bid_days;
      j["baseline_mean_days"] = plan.baseline_mean;
      j["steps"] = nlohmann::ordered_json::array();
      for (const auto& s : plan.steps)
        j["steps"].push_back({{"resource", s.resource},
                              {"units", s.units},
                              {"mean_days", s.mean_days},
                              {"cumulative_cost", s.cumulative_cost}});
      j["frontier"] = nlohmann::ordered_json::array();
      for (const auto& p : plan.frontier) {
        nlohmann::ordered_json added = nlohmann::ordered_json::object();
        for (const auto& [r, k] : p.added)
          if (k) added[r] = k;
        j["frontier"].push_back({{"cost", p.cost}, {"mean_days", p.mean_days}, {"added", added}});
      }
      if (rec)
        j["recommendation"] = {{"mean_days", rec->point.mean_days},
                               {"cost", rec->point.cost},
                               {"delay_days", rec->delay_days},
                               {"total_cost", rec->total_cost}};
      os << j.dump(2) << '\n';
      break;
    }
  }
  return os.str();
}

}  // namespace berthsim
