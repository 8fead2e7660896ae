#include "berthsim/disruptions.hpp"

#include "berthsim/error.hpp"

namespace berthsim {

namespace {

// The submodel whose name is `prefix` or a dotted prefix of it; created
// when none exists.
SubmodelDef& submodel_for(ModelDef& m, const std::string& prefix) {
  SubmodelDef* best = nullptr;
  for (auto& s : m.submodels) {
    bool match = s.name == prefix || (prefix.size() > s.name.size() && prefix.compare(0, s.name.size(), s.name) == 0 &&
                                      prefix[s.name.size()] == '.');
    if (match && (!best || s.name.size() > best->name.size())) best = &s;
  }
  if (best) return *best;
  SubmodelDef s;
  s.name = prefix;
  m.submodels.push_back(std::move(s));
  return m.submodels.back();
}

ElementDef make(ElementKind kind, std::string id) {
  ElementDef e;
  e.kind = kind;
  e.id = std::move(id);
  return e;
}

void link(SubmodelDef& s, const std::string& from, int port, const std::string& to) {
  Link l;
  l.from = from;
  l.port = port;
  l.to = to;
  s.links.push_back(std::move(l));
}

std::string spec_prefix(const SubmodelDef& s, std::size_t index, std::size_t count) {
  return count > 1 ? s.name + "." + std::to_string(index + 1) : s.name;
}

}  // namespace

ModelDef compile_weather(const WeatherSpec& w, const ModelDef& m, const std::string& prefix) {
  const auto* v = m.find_element(w.valve);
  if (!v || v->kind != ElementKind::valve)
    throw Error(ErrorKind::MissingValve, "weather needs valve '" + w.valve + "', which is not declared");
  ModelDef out = m;
  auto& s = submodel_for(out, prefix);
  auto id = [&](const char* n) { return prefix + "." + n; };

  auto gen = make(ElementKind::create, id("gen"));
  gen.dist = Distribution::constant(0);
  gen.background = true;
  auto cycle = make(ElementKind::task, id("cycle"));
  cycle.dist = Distribution::constant(w.cycle_days);
  auto tick = make(ElementKind::generate, id("tick"));
  auto roll = make(ElementKind::probabilistic_branch, id("roll"));
  roll.probs = {w.probability, 1.0 - w.probability};
  auto close = make(ElementKind::activator, id("close"));
  close.valve = w.valve;
  close.open = false;
  auto count = make(ElementKind::counter, id("count"));
  count.tally = id("outages");
  auto outage = make(ElementKind::task, id("outage"));
  outage.dist = w.outage;
  auto open = make(ElementKind::activator, id("open"));
  open.valve = w.valve;
  open.open = true;
  auto end = make(ElementKind::destroy, id("end"));
  auto clear = make(ElementKind::destroy, id("clear"));

  for (auto* e : {&gen, &cycle, &tick, &roll, &close, &count, &outage, &open, &end, &clear}) s.elements.push_back(*e);
  link(s, gen.id, 0, cycle.id);
  link(s, cycle.id, 0, tick.id);
  link(s, tick.id, 0, cycle.id);
  link(s, tick.id, 1, roll.id);
  link(s, roll.id, 0, close.id);
  link(s, roll.id, 1, clear.id);
  link(s, close.id, 0, count.id);
  link(s, count.id, 0, outage.id);
  link(s, outage.id, 0, open.id);
  link(s, open.id, 0, end.id);
  return out;
}

ModelDef compile_breakdown(const BreakdownSpec& b, const ModelDef& m, const std::string& prefix) {
  if (!m.find_resource(b.resource))
    throw Error(ErrorKind::UnknownResource, "breakdown of undeclared resource '" + b.resource + "'");
  ModelDef out = m;
  auto& s = submodel_for(out, prefix);
  auto id = [&](const char* n) { return prefix + "." + n; };

  auto gen = make(ElementKind::create, id("gen"));
  gen.dist = Distribution::constant(0);
  gen.background = true;
  auto wear = make(ElementKind::task, id("wear"));
  wear.dist = b.trigger;
  if (b.clock == BreakdownClock::usage) wear.usage = b.resource;
  auto fail = make(ElementKind::preempt, id("fail"));
  fail.resource = b.resource;
  auto count = make(ElementKind::counter, id("count"));
  count.tally = id("failures");
  auto severity = make(ElementKind::probabilistic_branch, id("severity"));
  severity.probs = {b.major_probability, 1.0 - b.major_probability};
  auto major = make(ElementKind::task, id("major"));
  major.dist = b.major_repair;
  auto minor = make(ElementKind::task, id("minor"));
  minor.dist = b.minor_repair;
  auto fix = make(ElementKind::release, id("fix"));
  fix.requests = {{b.resource, 1}};

  for (auto* e : {&gen, &wear, &fail, &count, &severity, &major, &minor, &fix}) s.elements.push_back(*e);
  link(s, gen.id, 0, wear.id);
  link(s, wear.id, 0, fail.id);
  link(s, fail.id, 0, count.id);
  link(s, count.id, 0, severity.id);
  link(s, severity.id, 0, major.id);
  link(s, severity.id, 1, minor.id);
  link(s, major.id, 0, fix.id);
  link(s, minor.id, 0, fix.id);
  link(s, fix.id, 0, wear.id);
  return out;
}

ModelDef compile_disruptions(const ModelDef& m) {
  ModelDef out = m;
  for (auto& s : out.submodels) {
    s.weather.clear();
    s.breakdowns.clear();
  }
  for (const auto& s : m.submodels) {
    for (std::size_t i = 0; i < s.weather.size(); ++i)
      out = compile_weather(s.weather[i], out, spec_prefix(s, i, s.weather.size()));
    for (std::size_t i = 0; i < s.breakdowns.size(); ++i)
      out = compile_breakdown(s.breakdowns[i], out, spec_prefix(s, i, s.breakdowns.size()) + (s.weather.empty() ? "" : ".bd"));
  }
  return out;
}

std::vector<std::string> disruption_tallies(const ModelDef& m) {
  std::vector<std::string> out;
  for (const auto& s : m.submodels) {
    for (std::size_t i = 0; i < s.weather.size(); ++i) out.push_back(spec_prefix(s, i, s.weather.size()) + ".outages");
    for (std::size_t i = 0; i < s.breakdowns.size(); ++i)
      out.push_back(spec_prefix(s, i, s.breakdowns.size()) + (s.weather.empty() ? "" : ".bd") + ".failures");
  }
  return out;
}

}  // namespace berthsim
