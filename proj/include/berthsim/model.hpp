#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "berthsim/stochastics.hpp"

namespace berthsim {

enum class ElementKind {
  create,
  task,
  capture,
  release,
  preempt,
  batch,
  unbatch,
  generate,
  consolidate,
  conditional_branch,
  probabilistic_branch,
  valve,
  activator,
  execute,
  counter,
  destroy,
};

inline constexpr int kElementKindCount = 16;

std::string_view to_string(ElementKind kind);
std::optional<ElementKind> element_kind_from(std::string_view word);

/// Source position of a declaration. Positions never take part in
/// structural equality: two models that differ only in layout are equal.
struct SourceLoc {
  int line = 0;
  int col = 0;

  friend bool operator==(const SourceLoc&, const SourceLoc&) { return true; }
};

using StateValue = std::variant<bool, double>;

double as_real(const StateValue& v);
bool as_bool(const StateValue& v);

struct ResourceRequest {
  std::string resource;
  std::int64_t servers = 1;

  friend bool operator==(const ResourceRequest&, const ResourceRequest&) = default;
};

struct ResourceDecl {
  std::string name;
  std::int64_t servers = 1;
  SourceLoc loc;

  friend bool operator==(const ResourceDecl&, const ResourceDecl&) = default;
};

struct FileDecl {
  std::string name;
  SourceLoc loc;

  friend bool operator==(const FileDecl&, const FileDecl&) = default;
};

struct StateDecl {
  std::string name;
  StateValue initial = 0.0;
  SourceLoc loc;

  friend bool operator==(const StateDecl&, const StateDecl&) = default;
};

/// One element of the process graph. Fields not used by `kind` keep their
/// defaults; the serializer only writes the ones the kind owns.
struct ElementDef {
  std::string id;
  ElementKind kind = ElementKind::task;
  SourceLoc loc;

  std::int64_t count = 1;                  // create count, batch/consolidate size, generate clones
  Distribution dist;                       // create interarrival, task duration
  bool background = false;                 // create: emits disruption/daemon entities
  std::string valve;                       // task: governing valve; activator: target valve
  std::string usage;                       // task: measure duration in busy server-days of this resource
  std::vector<ResourceRequest> requests;   // capture / release
  std::string file;                        // capture: wait file (empty = private file)
  std::string resource;                    // preempt
  std::vector<double> probs;               // probabilistic_branch
  std::string formula;                     // conditional_branch predicate, execute statements
  std::string state;                       // valve: backing state variable
  bool open = true;                        // activator: state to set
  std::string tally;                       // counter: tally name (empty = element id)
  std::optional<int> phase;                // task: project phase it belongs to

  friend bool operator==(const ElementDef&, const ElementDef&) = default;
};

/// Number of outgoing ports: 0 for destroy, 2 for conditional_branch
/// (true, false) and generate (original, clones), one per probability for
/// probabilistic_branch, 1 otherwise.
int output_ports(const ElementDef& e);

bool is_identifier(std::string_view s);

struct Link {
  std::string from;
  int port = 0;
  std::string to;
  SourceLoc loc;

  friend bool operator==(const Link&, const Link&) = default;
};

/// Periodic bad-weather outages that close a valve.
struct WeatherSpec {
  std::string valve;
  double cycle_days = 10;
  double probability = 0.3;
  Distribution outage = Distribution::constant(1);
  SourceLoc loc;

  friend bool operator==(const WeatherSpec&, const WeatherSpec&) = default;
};

enum class BreakdownClock { usage, calendar };

/// Equipment failures that preempt one server of a resource.
struct BreakdownSpec {
  std::string resource;
  Distribution trigger = Distribution::constant(5);
  double major_probability = 0;
  Distribution minor_repair = Distribution::constant(1);
  Distribution major_repair = Distribution::constant(7);
  BreakdownClock clock = BreakdownClock::usage;
  SourceLoc loc;

  friend bool operator==(const BreakdownSpec&, const BreakdownSpec&) = default;
};

struct SubmodelDef {
  std::string name;
  std::vector<ElementDef> elements;
  std::vector<Link> links;
  std::vector<WeatherSpec> weather;
  std::vector<BreakdownSpec> breakdowns;
  SourceLoc loc;

  friend bool operator==(const SubmodelDef&, const SubmodelDef&) = default;
};

/// Project-phase metadata: what the schedule says a phase takes and needs.
struct PhaseSpec {
  int number = 0;
  std::string name;
  double days = 0;
  std::vector<ResourceRequest> uses;
  bool weather_sensitive = false;
  std::vector<int> after;
  SourceLoc loc;

  friend bool operator==(const PhaseSpec&, const PhaseSpec&) = default;
};

struct ModelDef {
  std::string name;
  double length_m = 0;
  std::vector<ResourceDecl> resources;
  std::vector<FileDecl> files;
  std::vector<StateDecl> states;
  std::vector<ElementDef> elements;
  std::vector<Link> links;
  std::vector<SubmodelDef> submodels;
  std::vector<PhaseSpec> phases;

  const ResourceDecl* find_resource(std::string_view name) const;
  ResourceDecl* find_resource(std::string_view name);
  const SubmodelDef* find_submodel(std::string_view name) const;
  SubmodelDef* find_submodel(std::string_view name);
  const ElementDef* find_element(std::string_view id) const;
  const PhaseSpec* find_phase(int number) const;

  friend bool operator==(const ModelDef&, const ModelDef&) = default;
};

enum class NoiseMode { off, triangular10 };

std::string_view to_string(NoiseMode mode);

/// What-if configuration layered over a model.
struct ScenarioOverlay {
  std::string name;
  std::string comment;
  std::map<std::string, std::int64_t> resource_overrides;
  std::map<std::string, bool> submodel_toggles;
  NoiseMode noise = NoiseMode::off;
  int replications = 100;
  std::uint64_t master_seed = 42;

  friend bool operator==(const ScenarioOverlay&, const ScenarioOverlay&) = default;
};

}  // namespace berthsim
