#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "berthsim/error.hpp"
#include "berthsim/model.hpp"

namespace berthsim {

/// Parses a `.psm` model. Either the whole text is accepted or a
/// ModelError(SyntaxError) listing every syntax error is thrown.
ModelDef parse_model(std::string_view text, std::string_view filename = "<input>");

/// Static checks. An empty result (no errors) means the model can be
/// compiled and run without structural faults.
std::vector<Diagnostic> validate(const ModelDef& model, std::string_view filename = "<input>");

/// Canonical text for `model`. Comments and layout are not preserved.
std::string serialize(const ModelDef& model);

/// Parses a `.scn` file. `extends` is resolved so each returned overlay is
/// complete on its own.
std::vector<ScenarioOverlay> parse_scenarios(std::string_view text, std::string_view filename = "<input>");

std::string serialize(const ScenarioOverlay& overlay);

std::vector<Diagnostic> validate_overlay(const ModelDef& model, const ScenarioOverlay& overlay);

/// Applies resource overrides and drops disabled submodels.
ModelDef apply_overlay(const ModelDef& model, const ScenarioOverlay& overlay);

/// Reads a whole file; throws Error(Io).
std::string read_text_file(const std::string& path);

}  // namespace berthsim
