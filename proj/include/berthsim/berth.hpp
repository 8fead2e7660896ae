#pragma once

#include <string_view>
#include <vector>

#include "berthsim/crash.hpp"
#include "berthsim/model.hpp"

namespace berthsim {

/// Bundled copies of the files under models/.
std::string_view berth_model_text();
std::string_view uncertainty_ladder_text();
std::string_view resource_ladder_text();
std::string_view berth_costs_text();

/// The calibrated Doha berth model.
ModelDef load_reference_model();
/// Ideal, weather, crane, all uncertainties.
std::vector<ScenarioOverlay> uncertainty_ladder();
/// Baseline and the five cumulative resource additions.
std::vector<ScenarioOverlay> resource_ladder();
CostModel reference_costs();

/// Names used by the bundled .scn files.
inline std::vector<ScenarioOverlay> table4_ladder() { return uncertainty_ladder(); }
inline std::vector<ScenarioOverlay> table5_ladder() { return resource_ladder(); }

}  // namespace berthsim
