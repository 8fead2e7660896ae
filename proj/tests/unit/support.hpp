#pragma once

#include <algorithm>
#include <string>
#include <string_view>
#include <vector>

#include "berthsim/engine.hpp"
#include "berthsim/model_format.hpp"

namespace bst {

using namespace berthsim;

inline RunResult run_text(std::string_view src, std::uint64_t seed = 42, RunOptions opts = {}) {
  opts.trace = true;
  return run(CompiledModel::build(parse_model(src)), seed, opts);
}

inline std::vector<TraceRecord> records(const RunResult& r, std::string_view element, TraceAction action) {
  std::vector<TraceRecord> out;
  for (const auto& t : r.trace)
    if (t.element == element && t.action == action) out.push_back(t);
  return out;
}

inline std::vector<double> times(const std::vector<TraceRecord>& recs) {
  std::vector<double> out;
  for (const auto& t : recs) out.push_back(t.time);
  return out;
}

inline std::vector<std::uint64_t> entities(const std::vector<TraceRecord>& recs) {
  std::vector<std::uint64_t> out;
  for (const auto& t : recs) out.push_back(t.entity);
  return out;
}

inline bool any_message_contains(const std::vector<Diagnostic>& diags, std::string_view needle) {
  return std::any_of(diags.begin(), diags.end(),
                     [&](const Diagnostic& d) { return d.message.find(needle) != std::string::npos; });
}

}  // namespace bst
