#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <limits>

#include "berthsim/berth.hpp"
#include "berthsim/calibration.hpp"
#include "berthsim/crash.hpp"
#include "berthsim/engine.hpp"
#include "berthsim/error.hpp"
#include "berthsim/model_format.hpp"
#include "berthsim/runner.hpp"

namespace py = pybind11;
using namespace berthsim;

namespace {

ReportFormat format_from(const std::string& word) {
  auto f = report_format_from(word);
  if (!f) throw py::value_error("format must be table, csv or json");
  return *f;
}

ReplicateOptions replicate_options(std::optional<int> replications, std::optional<std::uint64_t> seed,
                                   unsigned threads) {
  ReplicateOptions o;
  o.replications = replications;
  o.master_seed = seed;
  o.threads = threads;
  return o;
}

py::dict to_dict(const ScenarioReport& r) {
  py::dict d;
  d["scenario"] = r.scenario;
  d["comment"] = r.comment;
  d["replications"] = r.replications;
  d["master_seed"] = r.master_seed;
  d["berth_length_m"] = r.berth_length_m;
  d["mean_days"] = r.mean_days;
  d["std_days"] = r.std_days;
  d["ci95_halfwidth_days"] = r.ci95_halfwidth_days;
  d["production_rate_m_per_day"] = r.production_rate_m_per_day;
  d["min_days"] = r.min_days;
  d["max_days"] = r.max_days;
  d["utilization"] = r.utilization;
  d["event_counts"] = r.counters;
  d["end_times"] = r.end_times;
  return d;
}

py::dict to_dict(const CalibrationReport& r) {
  py::list entries;
  for (const auto& e : r.entries) {
    py::dict d;
    d["parameter"] = e.parameter;
    d["scenario"] = e.scenario;
    d["value"] = e.value;
    d["target"] = e.target;
    d["achieved"] = e.achieved;
    d["residual"] = e.residual;
    d["tolerance"] = e.tolerance;
    d["evaluations"] = e.evaluations;
    entries.append(d);
  }
  py::dict d;
  d["master_seed"] = r.master_seed;
  d["replications"] = r.replications;
  d["ok"] = r.ok();
  d["parameters"] = entries;
  d["model"] = r.model;
  return d;
}

py::dict to_dict(const FrontierPoint& p) {
  py::dict d;
  d["cost"] = p.cost;
  d["mean_days"] = p.mean_days;
  d["added"] = p.added;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Discrete-event simulation of construction operations";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<ModelError>(m, "ModelError", base);
  py::register_exception<DeadlockError>(m, "DeadlockError", base);
  py::register_exception<CalibrationFailed>(m, "CalibrationFailed", base);

  py::class_<ResourceRequest>(m, "ResourceRequest")
      .def_readonly("resource", &ResourceRequest::resource)
      .def_readonly("servers", &ResourceRequest::servers);

  py::class_<PhaseSpec>(m, "Phase")
      .def_readonly("number", &PhaseSpec::number)
      .def_readonly("name", &PhaseSpec::name)
      .def_readonly("days", &PhaseSpec::days)
      .def_readonly("uses", &PhaseSpec::uses)
      .def_readonly("weather_sensitive", &PhaseSpec::weather_sensitive)
      .def_readonly("after", &PhaseSpec::after)
      .def("__repr__", [](const PhaseSpec& p) { return "<Phase " + std::to_string(p.number) + " " + p.name + ">"; });

  py::class_<ModelDef>(m, "Model")
      .def_readonly("name", &ModelDef::name)
      .def_readonly("length_m", &ModelDef::length_m)
      .def_readonly("phases", &ModelDef::phases)
      .def_property_readonly("resources",
                             [](const ModelDef& md) {
                               std::map<std::string, std::int64_t> out;
                               for (const auto& r : md.resources) out[r.name] = r.servers;
                               return out;
                             })
      .def_property_readonly("submodels",
                             [](const ModelDef& md) {
                               std::vector<std::string> out;
                               for (const auto& s : md.submodels) out.push_back(s.name);
                               return out;
                             })
      .def_property_readonly("element_count", [](const ModelDef& md) { return md.elements.size(); })
      .def("validate",
           [](const ModelDef& md) {
             std::vector<std::string> out;
             for (const auto& d : validate(md)) out.push_back(d.format());
             return out;
           })
      .def("serialize", [](const ModelDef& md) { return serialize(md); })
      .def("get_parameter", [](const ModelDef& md, const std::string& a) { return get_parameter(md, a); })
      .def("with_parameter",
           [](const ModelDef& md, const std::string& a, double v) {
             ModelDef copy = md;
             set_parameter(copy, a, v);
             return copy;
           })
      .def("__eq__", [](const ModelDef& a, const ModelDef& b) { return a == b; })
      .def("__repr__", [](const ModelDef& md) { return "<Model " + md.name + ">"; });

  py::class_<ScenarioOverlay>(m, "Scenario")
      .def(py::init<>())
      .def(py::init([](std::string name, std::map<std::string, std::int64_t> resources,
                       std::map<std::string, bool> submodels, int replications, std::uint64_t seed) {
             ScenarioOverlay o;
             o.name = std::move(name);
             o.resource_overrides = std::move(resources);
             o.submodel_toggles = std::move(submodels);
             o.replications = replications;
             o.master_seed = seed;
             return o;
           }),
           py::arg("name"), py::arg("resources") = std::map<std::string, std::int64_t>{},
           py::arg("submodels") = std::map<std::string, bool>{}, py::arg("replications") = 100,
           py::arg("seed") = 42)
      .def_readwrite("name", &ScenarioOverlay::name)
      .def_readwrite("comment", &ScenarioOverlay::comment)
      .def_readwrite("resources", &ScenarioOverlay::resource_overrides)
      .def_readwrite("submodels", &ScenarioOverlay::submodel_toggles)
      .def_readwrite("replications", &ScenarioOverlay::replications)
      .def_readwrite("seed", &ScenarioOverlay::master_seed)
      .def("serialize", [](const ScenarioOverlay& o) { return serialize(o); })
      .def("__eq__", [](const ScenarioOverlay& a, const ScenarioOverlay& b) { return a == b; })
      .def("__repr__", [](const ScenarioOverlay& o) { return "<Scenario " + o.name + ">"; });

  m.def("parse_model", [](const std::string& text, const std::string& filename) { return parse_model(text, filename); },
        py::arg("text"), py::arg("filename") = "<input>");
  m.def("load_model", [](const std::string& path) { return parse_model(read_text_file(path), path); }, py::arg("path"));
  m.def("parse_scenarios",
        [](const std::string& text, const std::string& filename) { return parse_scenarios(text, filename); },
        py::arg("text"), py::arg("filename") = "<input>");
  m.def("apply_scenario", &apply_overlay, py::arg("model"), py::arg("scenario"));

  m.def("reference_model", &load_reference_model, "The calibrated berth model.");
  m.def("uncertainty_ladder", &uncertainty_ladder);
  m.def("resource_ladder", &resource_ladder);

  m.def(
      "run",
      [](const ModelDef& md, std::uint64_t seed, bool trace, std::optional<ScenarioOverlay> scenario) {
        RunResult r;
        {
          py::gil_scoped_release nogil;
          auto compiled = CompiledModel::build(scenario ? apply_overlay(md, *scenario) : md);
          RunOptions o;
          o.trace = trace;
          if (scenario) o.noise = scenario->noise;
          r = run(compiled, seed, o);
        }
        py::dict d;
        d["end_time"] = r.end_time;
        d["counters"] = r.counters;
        d["utilization"] = r.utilization;
        d["events"] = r.events;
        d["created"] = r.created;
        d["destroyed"] = r.destroyed;
        d["stranded"] = r.stranded;
        py::list tr;
        for (const auto& t : r.trace)
          tr.append(py::make_tuple(t.time, t.seq, t.element, t.entity, std::string(to_string(t.action))));
        d["trace"] = tr;
        return d;
      },
      py::arg("model"), py::arg("seed") = 42, py::arg("trace") = false, py::arg("scenario") = py::none(),
      "One replication. Trace rows are (time, seq, element, entity, action).");

  m.def(
      "replicate",
      [](const ModelDef& md, const ScenarioOverlay& scenario, std::optional<int> replications,
         std::optional<std::uint64_t> seed, unsigned threads) {
        ScenarioReport r;
        {
          py::gil_scoped_release nogil;
          r = replicate(md, scenario, replicate_options(replications, seed, threads));
        }
        return to_dict(r);
      },
      py::arg("model"), py::arg("scenario"), py::arg("replications") = py::none(), py::arg("seed") = py::none(),
      py::arg("threads") = 1);

  m.def(
      "sweep",
      [](const ModelDef& md, const std::vector<ScenarioOverlay>& ladder, std::optional<int> replications,
         std::optional<std::uint64_t> seed, unsigned threads, std::optional<std::string> format) -> py::object {
        SweepResult r;
        {
          py::gil_scoped_release nogil;
          r = sweep(md, ladder, replicate_options(replications, seed, threads));
        }
        if (format) return py::str(report(r, format_from(*format)));
        py::list reports;
        for (const auto& s : r.reports) reports.append(to_dict(s));
        py::dict d;
        d["master_seed"] = r.master_seed;
        d["scenarios"] = reports;
        d["warnings"] = r.warnings;
        return d;
      },
      py::arg("model"), py::arg("ladder"), py::arg("replications") = py::none(), py::arg("seed") = py::none(),
      py::arg("threads") = 1, py::arg("format") = py::none(),
      "Runs a cumulative ladder. With `format` the rendered report is returned instead of a dict.");

  m.def(
      "calibrate",
      [](const ModelDef& md, const std::string& targets, const std::string& base_dir, unsigned threads) {
        auto spec = parse_calibration_targets(targets, "<targets>", base_dir);
        CalibrationReport r;
        {
          py::gil_scoped_release nogil;
          r = calibrate(md, spec, threads);
        }
        return to_dict(r);
      },
      py::arg("model"), py::arg("targets"), py::arg("base_dir") = ".", py::arg("threads") = 1,
      "Fits disruption parameters. `targets` is the text of a targets file.");

  m.def("reference_costs_text", [] { return std::string(berth_costs_text()); });

  m.def(
      "crash",
      [](const ModelDef& md, std::optional<ScenarioOverlay> scenario, std::optional<std::string> costs_text,
         std::optional<double> budget, bool exhaustive, std::optional<int> replications,
         std::optional<std::uint64_t> seed, unsigned threads) {
        CostModel costs = costs_text ? parse_costs(*costs_text) : reference_costs();
        ScenarioOverlay from = scenario.value_or(ScenarioOverlay{});
        double b = budget.value_or(costs.budget.value_or(std::numeric_limits<double>::infinity()));
        CrashPlan plan;
        {
          py::gil_scoped_release nogil;
          auto o = replicate_options(replications, seed, threads);
          plan = exhaustive ? exhaustive_crash(md, from, costs, b, o) : greedy_crash(md, from, costs, b, o);
        }
        py::list steps, frontier;
        for (const auto& s : plan.steps) {
          py::dict d;
          d["resource"] = s.resource;
          d["units"] = s.units;
          d["mean_days"] = s.mean_days;
          d["cumulative_cost"] = s.cumulative_cost;
          steps.append(d);
        }
        for (const auto& p : plan.frontier) frontier.append(to_dict(p));
        py::dict d;
        d["baseline_mean"] = plan.baseline_mean;
        d["steps"] = steps;
        d["frontier"] = frontier;
        if (costs.delay_penalty_per_day) {
          auto rec = tradeoff(plan, costs);
          py::dict rd = to_dict(rec.point);
          rd["delay_days"] = rec.delay_days;
          rd["total_cost"] = rec.total_cost;
          d["recommendation"] = rd;
        }
        return d;
      },
      py::arg("model"), py::arg("scenario") = py::none(), py::arg("costs") = py::none(), py::arg("budget") = py::none(),
      py::arg("exhaustive") = false, py::arg("replications") = py::none(), py::arg("seed") = py::none(),
      py::arg("threads") = 1,
      "Crash search. `costs` is the text of a costs file; the bundled berth costs are used when omitted.");
}
