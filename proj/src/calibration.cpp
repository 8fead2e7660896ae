#include "berthsim/calibration.hpp"

#include <cmath>
#include <filesystem>
#include <nlohmann/json.hpp>

#include "berthsim/model_format.hpp"
#include "berthsim/runner.hpp"
#include "word_lines.hpp"

namespace berthsim {

namespace {

struct Address {
  std::string submodel;
  std::string field;
};

Address split_address(std::string_view address) {
  auto dot = address.rfind('.');
  if (dot == std::string_view::npos || dot == 0 || dot + 1 == address.size())
    throw Error(ErrorKind::InvalidParams, "parameter address must be <submodel>.<field>: '" + std::string(address) + "'");
  return {std::string(address.substr(0, dot)), std::string(address.substr(dot + 1))};
}

// Exactly one disruption spec per submodel can be addressed.
template <typename Model, typename Fn>
auto with_field(Model& model, std::string_view address, Fn&& fn) {
  Address a = split_address(address);
  auto* sub = model.find_submodel(a.submodel);
  if (!sub) throw Error(ErrorKind::InvalidParams, "no submodel '" + a.submodel + "'");
  if (sub->weather.size() + sub->breakdowns.size() != 1)
    throw Error(ErrorKind::InvalidParams,
                "submodel '" + a.submodel + "' must hold exactly one weather or breakdown block to be calibrated");
  if (!sub->weather.empty()) {
    auto& w = sub->weather.front();
    if (a.field == "cycle") return fn(&w.cycle_days, nullptr);
    if (a.field == "probability") return fn(&w.probability, nullptr);
    if (a.field == "outage") return fn(nullptr, &w.outage);
  } else {
    auto& b = sub->breakdowns.front();
    if (a.field == "trigger") return fn(nullptr, &b.trigger);
    if (a.field == "major") return fn(&b.major_probability, nullptr);
    if (a.field == "minor_repair") return fn(nullptr, &b.minor_repair);
    if (a.field == "major_repair") return fn(nullptr, &b.major_repair);
  }
  throw Error(ErrorKind::InvalidParams, "unknown field '" + a.field + "' in '" + std::string(address) + "'");
}

}  // namespace

double get_parameter(const ModelDef& model, std::string_view address) {
  return with_field(model, address, [](const double* num, const Distribution* dist) {
    return num ? *num : dist->mean();
  });
}

void set_parameter(ModelDef& model, std::string_view address, double value) {
  with_field(model, address, [&](double* num, Distribution* dist) {
    if (num)
      *num = value;
    else
      *dist = dist->scaled_to_mean(value);
  });
}

CalibrationSpec parse_calibration_targets(std::string_view text, std::string_view filename,
                                          const std::string& base_dir) {
  using namespace detail;
  CalibrationSpec spec;
  std::vector<Diagnostic> diags;
  int ladder_line = 0;
  for (const auto& wl : split_word_lines(text)) {
    const auto& w = wl.words;
    auto fail = [&](int col, std::string msg) { diags.push_back(word_error(filename, wl.line, col, std::move(msg))); };
    if (w[0].text == "ladder") {
      if (w.size() != 2) {
        fail(w[0].col, "expected: ladder <file.scn>");
        continue;
      }
      spec.ladder_path = w[1].text;
      ladder_line = wl.line;
    } else if (w[0].text == "target") {
      if (w.size() < 4) {
        fail(w[0].col, "expected: target <scenario> <days> param=<sub>.<field> lo=<x> hi=<x>");
        continue;
      }
      CalibrationTarget t;
      t.scenario = w[1].text;
      auto days = to_real(w[2].text);
      if (!days) {
        fail(w[2].col, "expected a number of days, got '" + w[2].text + "'");
        continue;
      }
      t.days = *days;
      bool have_param = false, have_lo = false, have_hi = false, bad = false;
      for (std::size_t i = 3; i < w.size(); ++i) {
        auto kv = split_key_value(w[i].text);
        if (!kv) {
          fail(w[i].col, "expected key=value, got '" + w[i].text + "'");
          bad = true;
          continue;
        }
        auto& [key, value] = *kv;
        if (key == "param") {
          t.parameter = value;
          have_param = true;
          continue;
        }
        auto num = to_real(value);
        if (!num) {
          fail(w[i].col, "expected a number for '" + key + "'");
          bad = true;
        } else if (key == "lo") {
          t.lo = *num;
          have_lo = true;
        } else if (key == "hi") {
          t.hi = *num;
          have_hi = true;
        } else if (key == "tolerance") {
          t.tolerance = *num;
        } else {
          fail(w[i].col, "unknown parameter '" + key + "'");
          bad = true;
        }
      }
      if (bad) continue;
      if (!have_param || !have_lo || !have_hi) {
        fail(w[0].col, "target needs param=, lo= and hi=");
        continue;
      }
      if (!(t.lo < t.hi) || t.tolerance <= 0) {
        fail(w[0].col, "target needs lo < hi and a positive tolerance");
        continue;
      }
      spec.targets.push_back(std::move(t));
    } else if (auto kv = split_key_value(w[0].text); kv && w.size() == 1) {
      if (kv->first == "replications") {
        auto n = to_u64(kv->second);
        if (!n || *n < 2 || *n > 1'000'000)
          fail(w[0].col, "replications must be an integer in [2, 1000000]");
        else
          spec.replications = static_cast<int>(*n);
      } else if (kv->first == "seed") {
        auto s = to_u64(kv->second);
        if (!s)
          fail(w[0].col, "seed must be an unsigned 64-bit integer");
        else
          spec.master_seed = *s;
      } else {
        fail(w[0].col, "unknown setting '" + kv->first + "'");
      }
    } else {
      fail(w[0].col, "unexpected '" + w[0].text + "'");
    }
  }
  if (spec.ladder_path.empty()) diags.push_back(word_error(filename, 1, 1, "missing 'ladder <file.scn>' line"));
  if (spec.targets.empty()) diags.push_back(word_error(filename, 1, 1, "no targets"));
  if (!diags.empty()) throw ModelError(ErrorKind::SyntaxError, std::move(diags));

  std::filesystem::path p(spec.ladder_path);
  if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
  spec.ladder = parse_scenarios(read_text_file(p.string()), p.string());
  for (const auto& t : spec.targets) {
    bool found = false;
    for (const auto& o : spec.ladder) found = found || o.name == t.scenario;
    if (!found)
      diags.push_back(word_error(filename, ladder_line, 1, "ladder has no scenario '" + t.scenario + "'"));
  }
  if (!diags.empty()) throw ModelError(ErrorKind::ValidationError, std::move(diags));
  return spec;
}

bool CalibrationReport::ok() const {
  for (const auto& e : entries)
    if (!(std::fabs(e.residual) <= e.tolerance)) return false;
  return true;
}

std::string to_json(const CalibrationReport& report) {
  nlohmann::ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  j["master_seed"] = report.master_seed;
  j["replications"] = report.replications;
  j["ok"] = report.ok();
  auto arr = nlohmann::ordered_json::array();
  for (const auto& e : report.entries) {
    nlohmann::ordered_json o;
    o["parameter"] = e.parameter;
    o["value"] = e.value;
    o["target"] = e.target;
    o["achieved"] = e.achieved;
    o["residual"] = e.residual;
    o["scenario"] = e.scenario;
    o["tolerance"] = e.tolerance;
    o["evaluations"] = e.evaluations;
    arr.push_back(std::move(o));
  }
  j["parameters"] = std::move(arr);
  return j.dump(2) + "\n";
}

CalibrationFailed::CalibrationFailed(CalibrationReport report)
    : Error(ErrorKind::CalibrationFailed, [&] {
        std::string msg = "no setting meets every target within tolerance;";
        for (const auto& e : report.entries)
          if (!(std::fabs(e.residual) <= e.tolerance))
            msg += " " + e.parameter + " best " + format_number(e.value) + " misses " + e.scenario + " by " +
                   format_number(e.residual) + " days;";
        msg.pop_back();
        return msg;
      }()),
      report_(std::move(report)) {}

CalibrationReport calibrate(const ModelDef& model, const CalibrationSpec& spec, unsigned threads) {
  constexpr double kFine = 0.01;  // days; good enough to stop bisecting
  constexpr int kMaxSteps = 40;

  CalibrationReport rep;
  rep.master_seed = spec.master_seed;
  rep.replications = spec.replications;
  rep.model = model;

  ReplicateOptions opts;
  opts.threads = threads;
  opts.replications = spec.replications;
  opts.master_seed = spec.master_seed;

  for (const auto& t : spec.targets) {
    const ScenarioOverlay* overlay = nullptr;
    for (const auto& o : spec.ladder)
      if (o.name == t.scenario) overlay = &o;
    if (!overlay) throw Error(ErrorKind::InvalidParams, "ladder has no scenario '" + t.scenario + "'");

    const ModelDef base = rep.model;
    (void)get_parameter(base, t.parameter);  // address check before any run
    CalibrationEntry entry;
    entry.parameter = t.parameter;
    entry.scenario = t.scenario;
    entry.target = t.days;
    entry.tolerance = t.tolerance;

    auto eval = [&](double x) {
      ModelDef m = base;
      set_parameter(m, t.parameter, x);
      ++entry.evaluations;
      return replicate(m, *overlay, opts).mean_days;
    };
    double best_x = t.lo, best_f = eval(t.lo);
    auto consider = [&](double x, double f) {
      if (std::fabs(f - t.days) < std::fabs(best_f - t.days)) {
        best_x = x;
        best_f = f;
      }
    };
    double lo = t.lo, hi = t.hi;
    double flo = best_f, fhi = eval(hi);
    consider(hi, fhi);
    if (flo <= t.days && t.days <= fhi) {
      for (int step = 0; step < kMaxSteps && std::fabs(best_f - t.days) > kFine; ++step) {
        double mid = 0.5 * (lo + hi);
        double fm = eval(mid);
        consider(mid, fm);
        if (fm < t.days)
          lo = mid;
        else
          hi = mid;
      }
    }
    // Prefer a value that reads well in the model file when it is as good.
    double rounded = std::round(best_x * 1000.0) / 1000.0;
    if (rounded != best_x && rounded >= t.lo && rounded <= t.hi) {
      double fr = eval(rounded);
      if (std::fabs(fr - t.days) <= std::max(std::fabs(best_f - t.days), 0.1 * t.tolerance)) {
        best_x = rounded;
        best_f = fr;
      }
    }
    entry.value = best_x;
    entry.achieved = best_f;
    entry.residual = best_f - t.days;
    set_parameter(rep.model, t.parameter, best_x);
    rep.entries.push_back(entry);
  }
  if (!rep.ok()) throw CalibrationFailed(std::move(rep));
  return rep;
}

}  // namespace berthsim
