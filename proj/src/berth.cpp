#include "berthsim/berth.hpp"

#include "berthsim/model_format.hpp"

namespace berthsim {

namespace data {
extern const std::string_view kBerthModel;
extern const std::string_view kUncertaintyLadder;
extern const std::string_view kResourceLadder;
extern const std::string_view kBerthCosts;
}  // namespace data

std::string_view berth_model_text() { return data::kBerthModel; }
std::string_view uncertainty_ladder_text() { return data::kUncertaintyLadder; }
std::string_view resource_ladder_text() { return data::kResourceLadder; }
std::string_view berth_costs_text() { return data::kBerthCosts; }

ModelDef load_reference_model() { return parse_model(data::kBerthModel, "doha_berth.psm"); }

std::vector<ScenarioOverlay> uncertainty_ladder() { return parse_scenarios(data::kUncertaintyLadder, "table4.scn"); }

std::vector<ScenarioOverlay> resource_ladder() { return parse_scenarios(data::kResourceLadder, "table5.scn"); }

CostModel reference_costs() { return parse_costs(data::kBerthCosts, "costs.usd"); }

}  // namespace berthsim
