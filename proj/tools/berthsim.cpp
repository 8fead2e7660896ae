// berthsim command line: validate, run, sweep, calibrate, crash.

#include <CLI11.hpp>
#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>

#include "berthsim/calibration.hpp"
#include "berthsim/crash.hpp"
#include "berthsim/engine.hpp"
#include "berthsim/error.hpp"
#include "berthsim/model_format.hpp"
#include "berthsim/runner.hpp"

namespace fs = std::filesystem;
using namespace berthsim;

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kRuntime = 2;

struct Common {
  std::string model_path;
  std::optional<int> reps;
  std::optional<std::uint64_t> seed;
  std::string format = "table";
  unsigned threads = 0;
};

void add_common(CLI::App* cmd, Common& c, bool with_format = true) {
  cmd->add_option("model", c.model_path, "model file (.psm)")->required();
  cmd->add_option("--reps", c.reps, "replications per scenario")->check(CLI::Range(2, 1'000'000));
  cmd->add_option("--seed", c.seed, "master seed (default: $BERTHSIM_SEED, then the scenario's)");
  if (with_format)
    cmd->add_option("--format", c.format, "output format")->check(CLI::IsMember({"table", "csv", "json"}));
  cmd->add_option("--threads", c.threads, "worker threads (0: one per core)");
}

ModelDef load_model(const std::string& path) {
  ModelDef m = parse_model(read_text_file(path), path);
  auto diags = validate(m, path);
  if (has_errors(diags)) throw ModelError(ErrorKind::ValidationError, std::move(diags));
  return m;
}

ReplicateOptions replicate_options(const Common& c) {
  ReplicateOptions o;
  o.threads = c.threads;
  o.replications = c.reps;
  if (c.seed) {
    o.master_seed = c.seed;
  } else if (const char* env = std::getenv("BERTHSIM_SEED"); env && *env) {
    try {
      std::size_t used = 0;
      o.master_seed = std::stoull(env, &used);
      if (env[used] != '\0') throw std::invalid_argument("trailing text");
    } catch (const std::exception&) {
      throw Error(ErrorKind::InvalidParams, std::string("BERTHSIM_SEED is not an unsigned integer: '") + env + "'");
    }
  }
  return o;
}

void check_overlays(const ModelDef& m, const std::vector<ScenarioOverlay>& overlays) {
  std::vector<Diagnostic> diags;
  for (const auto& o : overlays) {
    auto d = validate_overlay(m, o);
    diags.insert(diags.end(), d.begin(), d.end());
  }
  if (has_errors(diags)) throw ModelError(ErrorKind::ValidationError, std::move(diags));
}

// `--scenario` is a .scn file (every scenario in it) or a scenario name
// looked up in the .scn files beside the model. "default" is the bare model.
std::vector<ScenarioOverlay> resolve_scenarios(const std::string& arg, const std::string& model_path) {
  if (fs::is_regular_file(arg)) return parse_scenarios(read_text_file(arg), arg);
  fs::path dir = fs::path(model_path).parent_path();
  if (dir.empty()) dir = ".";
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".scn") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files)
    for (auto& o : parse_scenarios(read_text_file(f.string()), f.string()))
      if (o.name == arg) return {o};
  if (arg == "default") {
    ScenarioOverlay o;
    o.name = "default";
    return {o};
  }
  throw Error(ErrorKind::InvalidParams, "no scenario file or scenario named '" + arg + "' next to " + model_path);
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path);
}

ReportFormat format_of(const Common& c) { return *report_format_from(c.format); }

int cmd_validate(const std::string& path) {
  ModelDef m = parse_model(read_text_file(path), path);
  auto diags = validate(m, path);
  for (const auto& d : diags) std::cerr << d.format() << '\n';
  if (has_errors(diags)) return kInvalid;
  std::size_t elements = m.elements.size(), links = m.links.size();
  for (const auto& s : m.submodels) {
    elements += s.elements.size();
    links += s.links.size();
  }
  std::cout << path << ": ok (" << elements << " elements, " << links << " links, " << m.submodels.size()
            << " submodels, " << m.phases.size() << " phases)\n";
  return kOk;
}

int cmd_run(const Common& c, const std::string& scenario, const std::string& trace_path) {
  ModelDef m = load_model(c.model_path);
  auto overlays = resolve_scenarios(scenario, c.model_path);
  check_overlays(m, overlays);
  auto opts = replicate_options(c);
  SweepResult result;
  for (const auto& o : overlays) {
    CompiledModel cm = CompiledModel::build(apply_overlay(m, o));
    result.reports.push_back(replicate(cm, o, opts));
    if (!trace_path.empty() && result.reports.size() == 1) {
      RunOptions ro;
      ro.trace = true;
      ro.noise = o.noise;
      auto rr = run(cm, replication_seed(result.reports.front().master_seed, 0), ro);
      write_file(trace_path, trace_csv(rr.trace));
    }
  }
  result.master_seed = result.reports.front().master_seed;
  std::cout << report(result, format_of(c));
  return kOk;
}

int cmd_sweep(const Common& c, const std::string& ladder_path) {
  ModelDef m = load_model(c.model_path);
  auto ladder = parse_scenarios(read_text_file(ladder_path), ladder_path);
  check_overlays(m, ladder);
  auto result = sweep(m, ladder, replicate_options(c));
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
  std::cout << report(result, format_of(c));
  return kOk;
}

int cmd_calibrate(const Common& c, const std::string& targets_path, std::string report_path,
                  const std::string& write_model) {
  ModelDef m = load_model(c.model_path);
  auto spec = parse_calibration_targets(read_text_file(targets_path), targets_path,
                                        fs::path(targets_path).parent_path().string());
  auto opts = replicate_options(c);
  if (opts.replications) spec.replications = *opts.replications;
  if (opts.master_seed) spec.master_seed = *opts.master_seed;
  if (report_path.empty()) report_path = (fs::path(c.model_path).parent_path() / "calibration.json").string();
  try {
    auto rep = calibrate(m, spec, c.threads);
    write_file(report_path, to_json(rep));
    if (!write_model.empty()) write_file(write_model, serialize(rep.model));
    std::cout << to_json(rep);
    return kOk;
  } catch (const CalibrationFailed& e) {
    write_file(report_path, to_json(e.report()));
    std::cout << to_json(e.report());
    throw;
  }
}

int cmd_crash(const Common& c, const std::string& costs_path, const std::string& budget_arg,
              const std::string& scenario, bool exhaustive) {
  ModelDef m = load_model(c.model_path);
  CostModel costs = parse_costs(read_text_file(costs_path), costs_path);
  auto cdiags = validate_costs(m, costs);
  for (auto& d : cdiags) d.file = costs_path;
  if (has_errors(cdiags)) throw ModelError(ErrorKind::ValidationError, std::move(cdiags));

  double budget = std::numeric_limits<double>::infinity();
  if (!budget_arg.empty() && budget_arg != "inf" && budget_arg != "unlimited") {
    try {
      std::size_t used = 0;
      budget = std::stod(budget_arg, &used);
      if (used != budget_arg.size() || !(budget >= 0)) throw std::invalid_argument("range");
    } catch (const std::exception&) {
      throw Error(ErrorKind::InvalidParams, "--budget must be a number >= 0 or 'inf', got '" + budget_arg + "'");
    }
  } else if (budget_arg.empty() && costs.budget) {
    budget = *costs.budget;
  }

  ScenarioOverlay overlay;
  overlay.name = "default";
  if (!scenario.empty()) {
    auto found = resolve_scenarios(scenario, c.model_path);
    if (found.size() != 1) throw Error(ErrorKind::InvalidParams, "crash needs exactly one scenario");
    overlay = found.front();
  }
  check_overlays(m, {overlay});
  auto opts = replicate_options(c);
  CrashPlan plan = exhaustive ? exhaustive_crash(m, overlay, costs, budget, opts)
                              : greedy_crash(m, overlay, costs, budget, opts);
  std::cout << report(plan, costs, format_of(c));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"berthsim: discrete-event simulation of construction processes"};
  app.require_subcommand(1);

  auto* validate_cmd = app.add_subcommand("validate", "parse and check a model");
  std::string validate_path;
  validate_cmd->add_option("model", validate_path, "model file (.psm)")->required();

  Common run_opts;
  std::string scenario = "default", trace_path;
  auto* run_cmd = app.add_subcommand("run", "replicate one scenario or a scenario file");
  add_common(run_cmd, run_opts);
  run_cmd->add_option("--scenario", scenario, "scenario name or .scn file");
  run_cmd->add_option("--trace", trace_path, "write replication 0's event trace as CSV");

  Common sweep_opts;
  std::string ladder_path;
  auto* sweep_cmd = app.add_subcommand("sweep", "run a cumulative scenario ladder with common random numbers");
  add_common(sweep_cmd, sweep_opts);
  sweep_cmd->add_option("--ladder", ladder_path, "ladder file (.scn)")->required();

  Common cal_opts;
  std::string targets_path, report_path, write_model;
  auto* cal_cmd = app.add_subcommand("calibrate", "fit disruption parameters to target means");
  add_common(cal_cmd, cal_opts, false);
  cal_cmd->add_option("--targets", targets_path, "targets file")->required();
  cal_cmd->add_option("--report", report_path, "report path (default: calibration.json beside the model)");
  cal_cmd->add_option("--write-model", write_model, "write the calibrated model here");

  Common crash_opts;
  std::string costs_path, budget_arg, crash_scenario;
  bool exhaustive = false;
  auto* crash_cmd = app.add_subcommand("crash", "search resource additions under a budget");
  add_common(crash_cmd, crash_opts);
  crash_cmd->add_option("--costs", costs_path, "costs file")->required();
  crash_cmd->add_option("--budget", budget_arg, "USD, or 'inf' (default: the costs file, else unlimited)");
  crash_cmd->add_option("--scenario", crash_scenario, "scenario to crash from (default: the bare model)");
  crash_cmd->add_flag("--exhaustive", exhaustive, "evaluate every combination instead of the greedy search");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kRuntime;
  }

  try {
    if (*validate_cmd) return cmd_validate(validate_path);
    if (*run_cmd) return cmd_run(run_opts, scenario, trace_path);
    if (*sweep_cmd) return cmd_sweep(sweep_opts, ladder_path);
    if (*cal_cmd) return cmd_calibrate(cal_opts, targets_path, report_path, write_model);
    if (*crash_cmd) return cmd_crash(crash_opts, costs_path, budget_arg, crash_scenario, exhaustive);
  } catch (const ModelError& e) {
    for (const auto& d : e.diagnostics()) std::cerr << d.format() << '\n';
    return kInvalid;
  } catch (const DeadlockError& e) {
    std::cerr << "error: " << e.what() << '\n';
    for (const auto& edge : e.wait_graph())
      std::cerr << "  entity " << edge.waiter << " waits for " << edge.resource << " held by "
                << (edge.holder ? "entity " + std::to_string(edge.holder) : std::string("nobody")) << '\n';
    return kRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kRuntime;
}
