#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "berthsim/model.hpp"

namespace berthsim {

/// Expands a weather spec into a background generator that, every
/// `cycle_days`, closes `w.valve` with probability `w.probability` for an
/// outage sample. Generated element ids start with `prefix + "."`; the
/// outage count is tallied as `prefix + ".outages"`. Throws
/// Error(MissingValve).
ModelDef compile_weather(const WeatherSpec& w, const ModelDef& m, const std::string& prefix);

/// Expands a breakdown spec into a monitor that preempts one server of
/// `b.resource` whenever its wear clock reaches a trigger sample, holds it
/// for a minor or major repair, then resumes it. Failures are tallied as
/// `prefix + ".failures"`. Throws Error(UnknownResource).
ModelDef compile_breakdown(const BreakdownSpec& b, const ModelDef& m, const std::string& prefix);

/// Expands every weather/breakdown spec of every submodel in place.
ModelDef compile_disruptions(const ModelDef& m);

/// Names of the tallies compile_disruptions creates, in submodel order.
std::vector<std::string> disruption_tallies(const ModelDef& m);

}  // namespace berthsim
