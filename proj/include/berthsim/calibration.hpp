#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "berthsim/error.hpp"
#include "berthsim/model.hpp"

namespace berthsim {

/// A free disruption parameter, addressed as `<submodel>.<field>`.
/// Weather fields: cycle, probability, outage. Breakdown fields: trigger,
/// major, minor_repair, major_repair. Distribution fields are rescaled to
/// the requested mean.
double get_parameter(const ModelDef& model, std::string_view address);
void set_parameter(ModelDef& model, std::string_view address, double value);

struct CalibrationTarget {
  std::string scenario;
  double days = 0;
  std::string parameter;
  double lo = 0;
  double hi = 1;
  double tolerance = 0.5;
};

struct CalibrationSpec {
  std::string ladder_path;  // as written in the targets file
  std::vector<ScenarioOverlay> ladder;
  std::vector<CalibrationTarget> targets;
  int replications = 100;
  std::uint64_t master_seed = 42;
};

/// Targets file:
///   ladder <file.scn>
///   replications=<n>
///   seed=<u64>
///   target <scenario> <days> param=<sub>.<field> lo=<x> hi=<x> [tolerance=<days>]
/// The ladder path is resolved relative to `base_dir` and loaded.
CalibrationSpec parse_calibration_targets(std::string_view text, std::string_view filename,
                                          const std::string& base_dir);

struct CalibrationEntry {
  std::string parameter;
  std::string scenario;
  double value = 0;
  double target = 0;
  double achieved = 0;
  double residual = 0;  // achieved - target
  double tolerance = 0;
  int evaluations = 0;
};

struct CalibrationReport {
  std::uint64_t master_seed = 0;
  int replications = 0;
  std::vector<CalibrationEntry> entries;
  ModelDef model;  // with every parameter set to its calibrated value

  bool ok() const;
};

std::string to_json(const CalibrationReport& report);

class CalibrationFailed : public Error {
 public:
  explicit CalibrationFailed(CalibrationReport report);
  const CalibrationReport& report() const noexcept { return report_; }

 private:
  CalibrationReport report_;
};

/// Fits the targets one after another by bisection on each parameter,
/// assuming the scenario mean grows with it. Every evaluation uses the same
/// master seed. Throws CalibrationFailed (carrying the best report) when a
/// target cannot be met within its tolerance.
CalibrationReport calibrate(const ModelDef& model, const CalibrationSpec& spec, unsigned threads = 1);

}  // namespace berthsim
