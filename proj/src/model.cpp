#include "berthsim/model.hpp"

#include <algorithm>
#include <array>

namespace berthsim {

namespace {

constexpr std::array<std::string_view, kElementKindCount> kKindNames = {
    "create", "task",        "capture",  "release", "preempt",  "batch",   "unbatch", "generate",
    "consolidate", "conditional_branch", "probabilistic_branch", "valve", "activator", "execute", "counter", "destroy",
};

template <class Vec, class Key>
auto find_by_name(Vec& v, Key key) -> decltype(v.data()) {
  auto it = std::find_if(v.begin(), v.end(), [&](const auto& x) { return x.name == key; });
  return it == v.end() ? nullptr : &*it;
}

}  // namespace

std::string_view to_string(ElementKind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

std::optional<ElementKind> element_kind_from(std::string_view word) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i)
    if (kKindNames[i] == word) return static_cast<ElementKind>(i);
  return std::nullopt;
}

double as_real(const StateValue& v) {
  if (const bool* b = std::get_if<bool>(&v)) return *b ? 1.0 : 0.0;
  return std::get<double>(v);
}

bool as_bool(const StateValue& v) {
  if (const bool* b = std::get_if<bool>(&v)) return *b;
  return std::get<double>(v) != 0.0;
}

const ResourceDecl* ModelDef::find_resource(std::string_view n) const { return find_by_name(resources, n); }
ResourceDecl* ModelDef::find_resource(std::string_view n) { return find_by_name(resources, n); }
const SubmodelDef* ModelDef::find_submodel(std::string_view n) const { return find_by_name(submodels, n); }
SubmodelDef* ModelDef::find_submodel(std::string_view n) { return find_by_name(submodels, n); }

const ElementDef* ModelDef::find_element(std::string_view id) const {
  for (const auto& e : elements)
    if (e.id == id) return &e;
  for (const auto& s : submodels)
    for (const auto& e : s.elements)
      if (e.id == id) return &e;
  return nullptr;
}

const PhaseSpec* ModelDef::find_phase(int number) const {
  for (const auto& p : phases)
    if (p.number == number) return &p;
  return nullptr;
}

int output_ports(const ElementDef& e) {
  switch (e.kind) {
    case ElementKind::destroy: return 0;
    case ElementKind::conditional_branch:
    case ElementKind::generate: return 2;
    case ElementKind::probabilistic_branch: return static_cast<int>(e.probs.size());
    default: return 1;
  }
}

bool is_identifier(std::string_view s) {
  auto start = [](char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_'; };
  if (s.empty() || !start(s[0])) return false;
  return std::all_of(s.begin() + 1, s.end(), [&](char c) { return start(c) || (c >= '0' && c <= '9') || c == '.'; });
}

std::string_view to_string(NoiseMode mode) { return mode == NoiseMode::off ? "off" : "triangular10"; }

}  // namespace berthsim
