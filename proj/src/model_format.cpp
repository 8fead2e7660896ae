#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "berthsim/formula.hpp"
#include "berthsim/model_format.hpp"

namespace berthsim {

namespace {

class Checker {
 public:
  Checker(const ModelDef& m, std::string_view file) : m_(m), file_(file) {}

  std::vector<Diagnostic> run() {
    names();
    resources_and_states();
    collect_elements();
    for (const auto* e : all_) element(*e);
    links();
    reachability();
    disruptions();
    phases();
    return std::move(out_);
  }

 private:
  void add(SourceLoc loc, std::string element, std::string msg, Severity sev = Severity::error) {
    Diagnostic d;
    d.file = std::string(file_);
    d.line = loc.line;
    d.col = loc.col;
    d.severity = sev;
    d.element = std::move(element);
    d.message = std::move(msg);
    out_.push_back(std::move(d));
  }

  void ident(SourceLoc loc, const std::string& name, const char* what) {
    if (!is_identifier(name)) add(loc, name, std::string("invalid ") + what + " name '" + name + "'");
  }

  void names() {
    if (!is_identifier(m_.name)) add({1, 1}, "", "invalid model name '" + m_.name + "'");
    if (!(m_.length_m >= 0) || !std::isfinite(m_.length_m)) add({1, 1}, "", "length must be a non-negative number");
  }

  void resources_and_states() {
    std::set<std::string> seen;
    for (const auto& r : m_.resources) {
      ident(r.loc, r.name, "resource");
      if (!seen.insert(r.name).second) add(r.loc, r.name, "duplicate resource '" + r.name + "'");
      if (r.servers < 1) add(r.loc, r.name, "resource '" + r.name + "' needs at least one server");
    }
    seen.clear();
    for (const auto& f : m_.files) {
      ident(f.loc, f.name, "file");
      if (!seen.insert(f.name).second) add(f.loc, f.name, "duplicate file '" + f.name + "'");
    }
    seen.clear();
    for (const auto& s : m_.states) {
      ident(s.loc, s.name, "state");
      if (is_attribute_name(s.name)) add(s.loc, s.name, "state names may not start with 'e.'");
      if (!seen.insert(s.name).second) add(s.loc, s.name, "duplicate state '" + s.name + "'");
      if (const double* d = std::get_if<double>(&s.initial); d && !std::isfinite(*d))
        add(s.loc, s.name, "state '" + s.name + "' must start finite");
      states_.insert(s.name);
    }
    seen.clear();
    for (const auto& s : m_.submodels) {
      ident(s.loc, s.name, "submodel");
      if (!seen.insert(s.name).second) add(s.loc, s.name, "duplicate submodel '" + s.name + "'");
    }
  }

  void collect_elements() {
    for (const auto& e : m_.elements) all_.push_back(&e);
    for (const auto& s : m_.submodels)
      for (const auto& e : s.elements) all_.push_back(&e);
    for (const auto* e : all_) {
      ident(e->loc, e->id, "element");
      if (!by_id_.emplace(e->id, e).second) add(e->loc, e->id, "duplicate element id '" + e->id + "'");
    }
    for (const auto& l : m_.links) links_.push_back(&l);
    for (const auto& s : m_.submodels)
      for (const auto& l : s.links) links_.push_back(&l);
    for (const auto* l : links_) {
      linked_.insert(l->from);
      linked_.insert(l->to);
    }
  }

  // A valve nobody links to only governs tasks; it takes no part in flow.
  bool governor_only(const ElementDef& e) const { return e.kind == ElementKind::valve && !linked_.count(e.id); }

  void dist(const ElementDef& e, const Distribution& d, const char* what) {
    if (auto bad = d.check()) add(e.loc, e.id, std::string(what) + " " + d.to_string() + ": " + *bad);
    else if (d.lower() < 0)
      add(e.loc, e.id, std::string(what) + " " + d.to_string() + " can produce negative durations");
  }

  const ResourceDecl* resource(const ElementDef& e, const std::string& name) {
    const auto* r = m_.find_resource(name);
    if (!r) add(e.loc, e.id, "unknown resource '" + name + "'");
    return r;
  }

  void formula(const ElementDef& e, bool predicate) {
    try {
      auto f = Formula::compile(e.formula);
      if (predicate && !f.is_predicate()) add(e.loc, e.id, "condition must be a single expression without assignments");
      for (const auto& s : f.state_names())
        if (!states_.count(s)) add(e.loc, e.id, "unknown state '" + s + "' in formula");
    } catch (const Error& err) {
      add(e.loc, e.id, "bad formula: " + err.detail());
    }
  }

  const ElementDef* valve(const ElementDef& e, const std::string& id) {
    auto it = by_id_.find(id);
    if (it == by_id_.end() || it->second->kind != ElementKind::valve) {
      add(e.loc, e.id, "unknown valve '" + id + "'");
      return nullptr;
    }
    return it->second;
  }

  void element(const ElementDef& e) {
    switch (e.kind) {
      case ElementKind::create:
        ++creates_;
        if (e.count < 1) add(e.loc, e.id, "create count must be at least 1");
        dist(e, e.dist, "interarrival");
        break;
      case ElementKind::task:
        dist(e, e.dist, "duration");
        if (!e.valve.empty()) valve(e, e.valve);
        if (!e.usage.empty()) resource(e, e.usage);
        if (e.phase && !m_.phases.empty() && !m_.find_phase(*e.phase))
          add(e.loc, e.id, "unknown phase " + std::to_string(*e.phase));
        break;
      case ElementKind::capture:
      case ElementKind::release: {
        std::set<std::string> seen;
        for (const auto& q : e.requests) {
          if (!seen.insert(q.resource).second) add(e.loc, e.id, "resource '" + q.resource + "' listed twice");
          if (q.servers < 1) add(e.loc, e.id, "server count for '" + q.resource + "' must be at least 1");
          const auto* r = resource(e, q.resource);
          if (r && q.servers > r->servers)
            add(e.loc, e.id,
                "unsatisfiable request " + q.resource + ":" + std::to_string(q.servers) + " (resource has " +
                    std::to_string(r->servers) + ")");
        }
        if (e.kind == ElementKind::capture && !e.file.empty()) {
          bool found = false;
          for (const auto& f : m_.files) found |= f.name == e.file;
          if (!found) add(e.loc, e.id, "unknown file '" + e.file + "'");
        }
        break;
      }
      case ElementKind::preempt: resource(e, e.resource); break;
      case ElementKind::batch:
      case ElementKind::consolidate:
        if (e.count < 1) add(e.loc, e.id, "size must be at least 1");
        break;
      case ElementKind::generate:
        if (e.count < 1) add(e.loc, e.id, "clones must be at least 1");
        break;
      case ElementKind::probabilistic_branch: {
        double sum = 0;
        bool ok = !e.probs.empty();
        for (double p : e.probs) {
          ok &= std::isfinite(p) && p >= 0 && p <= 1;
          sum += p;
        }
        if (!ok || std::fabs(sum - 1.0) > 1e-9) {
          std::ostringstream os;
          os << "probabilities must be in [0,1] and sum to 1 (sum is " << format_number(sum) << ")";
          add(e.loc, e.id, os.str());
        }
        break;
      }
      case ElementKind::conditional_branch: formula(e, true); break;
      case ElementKind::execute: formula(e, false); break;
      case ElementKind::valve:
        if (!states_.count(e.state)) add(e.loc, e.id, "unknown state '" + e.state + "'");
        break;
      case ElementKind::activator: valve(e, e.valve); break;
      case ElementKind::counter:
        if (!e.tally.empty() && !is_identifier(e.tally)) add(e.loc, e.id, "invalid tally name '" + e.tally + "'");
        break;
      case ElementKind::destroy: ++destroys_; break;
      case ElementKind::unbatch: break;
    }
  }

  void links() {
    std::map<std::pair<std::string, int>, int> used;
    for (const auto* l : links_) {
      auto from = by_id_.find(l->from);
      auto to = by_id_.find(l->to);
      if (from == by_id_.end()) add(l->loc, l->from, "dangling link: no element '" + l->from + "'");
      if (to == by_id_.end()) add(l->loc, l->to, "dangling link: no element '" + l->to + "'");
      if (from == by_id_.end() || to == by_id_.end()) continue;
      if (to->second->kind == ElementKind::create) add(l->loc, l->to, "links may not enter a create element");
      int ports = output_ports(*from->second);
      if (l->port < 0 || l->port >= ports) {
        add(l->loc, l->from,
            "'" + l->from + "' has no output port " + std::to_string(l->port) + " (it has " + std::to_string(ports) + ")");
        continue;
      }
      if (++used[{l->from, l->port}] == 2)
        add(l->loc, l->from, "output port " + std::to_string(l->port) + " of '" + l->from + "' is linked twice");
    }
    for (const auto* e : all_) {
      if (governor_only(*e)) continue;
      for (int p = 0; p < output_ports(*e); ++p)
        if (!used.count({e->id, p}))
          add(e->loc, e->id, "output port " + std::to_string(p) + " of '" + e->id + "' is not linked");
    }
    if (creates_ == 0) add({1, 1}, "", "model has no create element");
    if (destroys_ == 0) add({1, 1}, "", "model has no destroy element");
  }

  void reachability() {
    std::map<std::string, std::vector<std::string>> next;
    for (const auto* l : links_) next[l->from].push_back(l->to);
    std::set<std::string> seen;
    std::vector<std::string> todo;
    for (const auto* e : all_)
      if (e->kind == ElementKind::create && seen.insert(e->id).second) todo.push_back(e->id);
    while (!todo.empty()) {
      auto id = todo.back();
      todo.pop_back();
      for (const auto& n : next[id])
        if (seen.insert(n).second) todo.push_back(n);
    }
    for (const auto* e : all_)
      if (!seen.count(e->id) && !governor_only(*e)) add(e->loc, e->id, "'" + e->id + "' is unreachable from any create");
  }

  void disruptions() {
    for (const auto& s : m_.submodels) {
      for (const auto& w : s.weather) {
        auto it = by_id_.find(w.valve);
        if (it == by_id_.end() || it->second->kind != ElementKind::valve)
          add(w.loc, s.name, "weather valve '" + w.valve + "' is missing");
        if (!(w.cycle_days > 0) || !std::isfinite(w.cycle_days)) add(w.loc, s.name, "weather cycle must be positive");
        if (!(w.probability >= 0 && w.probability <= 1)) add(w.loc, s.name, "weather probability must be in [0,1]");
        if (auto bad = w.outage.check()) add(w.loc, s.name, "outage: " + *bad);
        else if (w.outage.lower() < 0) add(w.loc, s.name, "outage can be negative");
      }
      for (const auto& b : s.breakdowns) {
        if (!m_.find_resource(b.resource)) add(b.loc, s.name, "breakdown of unknown resource '" + b.resource + "'");
        if (auto bad = b.trigger.check()) add(b.loc, s.name, "trigger: " + *bad);
        else if (!(b.trigger.lower() > 0) && b.trigger.kind() != DistKind::exponential)
          add(b.loc, s.name, "trigger samples must be positive");
        if (!(b.major_probability >= 0 && b.major_probability <= 1))
          add(b.loc, s.name, "major probability must be in [0,1]");
        for (const auto* d : {&b.minor_repair, &b.major_repair}) {
          if (auto bad = d->check()) add(b.loc, s.name, "repair: " + *bad);
          else if (d->lower() < 0) add(b.loc, s.name, "repair can be negative");
        }
      }
    }
  }

  void phases() {
    std::set<int> seen;
    for (const auto& p : m_.phases) {
      std::string tag = "phase " + std::to_string(p.number);
      if (!seen.insert(p.number).second) add(p.loc, tag, "duplicate " + tag);
      if (!(p.days > 0) || !std::isfinite(p.days)) add(p.loc, tag, tag + " needs a positive duration");
      for (const auto& u : p.uses)
        if (!m_.find_resource(u.resource)) add(p.loc, tag, tag + " uses unknown resource '" + u.resource + "'");
    }
    // predecessors must exist and form a DAG
    std::map<int, std::vector<int>> after;
    for (const auto& p : m_.phases) {
      for (int a : p.after) {
        if (!seen.count(a)) add(p.loc, "phase " + std::to_string(p.number), "unknown predecessor phase " + std::to_string(a));
        after[p.number].push_back(a);
      }
    }
    std::map<int, int> color;
    bool cyclic = false;
    std::function<void(int)> dfs = [&](int n) {
      color[n] = 1;
      for (int a : after[n]) {
        if (color[a] == 1) cyclic = true;
        else if (color[a] == 0) dfs(a);
      }
      color[n] = 2;
    };
    for (const auto& p : m_.phases)
      if (color[p.number] == 0) dfs(p.number);
    if (cyclic) add({1, 1}, "", "phase predecessors form a cycle");
  }

  const ModelDef& m_;
  std::string_view file_;
  std::vector<Diagnostic> out_;
  std::vector<const ElementDef*> all_;
  std::vector<const Link*> links_;
  std::map<std::string, const ElementDef*> by_id_;
  std::set<std::string> states_;
  std::set<std::string> linked_;
  int creates_ = 0;
  int destroys_ = 0;
};

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out + "\"";
}

std::string b(bool v) { return v ? "true" : "false"; }

std::string requests(const std::vector<ResourceRequest>& rs, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < rs.size(); ++i) {
    if (i) out += sep;
    out += rs[i].resource + ":" + std::to_string(rs[i].servers);
  }
  return out;
}

void write_element(std::ostream& os, const ElementDef& e, const std::string& indent) {
  os << indent << to_string(e.kind) << ' ' << e.id;
  switch (e.kind) {
    case ElementKind::create:
      os << " count=" << e.count << " interarrival=" << e.dist.to_string();
      if (e.background) os << " background=true";
      break;
    case ElementKind::task:
      os << " dur=" << e.dist.to_string();
      if (!e.valve.empty()) os << " valve=" << e.valve;
      if (!e.usage.empty()) os << " usage=" << e.usage;
      if (e.phase) os << " phase=" << *e.phase;
      break;
    case ElementKind::capture:
      os << ' ' << requests(e.requests, " ");
      if (!e.file.empty()) os << " file=" << e.file;
      break;
    case ElementKind::release: os << ' ' << requests(e.requests, " "); break;
    case ElementKind::preempt: os << " resource=" << e.resource; break;
    case ElementKind::batch:
    case ElementKind::consolidate: os << " size=" << e.count; break;
    case ElementKind::generate: os << " clones=" << e.count; break;
    case ElementKind::conditional_branch: os << " cond=" << quote(e.formula); break;
    case ElementKind::execute: os << " formula=" << quote(e.formula); break;
    case ElementKind::probabilistic_branch:
      os << " probs=";
      for (std::size_t i = 0; i < e.probs.size(); ++i) os << (i ? "," : "") << format_number(e.probs[i]);
      break;
    case ElementKind::valve: os << " state=" << e.state; break;
    case ElementKind::activator: os << " valve=" << e.valve << " open=" << b(e.open); break;
    case ElementKind::counter:
      if (!e.tally.empty()) os << " tally=" << e.tally;
      break;
    case ElementKind::unbatch:
    case ElementKind::destroy: break;
  }
  os << '\n';
}

void write_link(std::ostream& os, const Link& l, const std::string& indent) {
  os << indent << "link " << l.from;
  if (l.port != 0) os << '.' << l.port;
  os << " -> " << l.to << '\n';
}

}  // namespace

std::vector<Diagnostic> validate(const ModelDef& model, std::string_view filename) {
  return Checker(model, filename).run();
}

std::string serialize(const ModelDef& m) {
  std::ostringstream os;
  os << "model " << m.name << " {\n";
  os << "  length=" << format_number(m.length_m) << '\n';
  for (const auto& r : m.resources) os << "  resource " << r.name << " servers=" << r.servers << '\n';
  for (const auto& f : m.files) os << "  file " << f.name << '\n';
  for (const auto& s : m.states) {
    os << "  state " << s.name << " = ";
    if (const bool* v = std::get_if<bool>(&s.initial))
      os << b(*v);
    else
      os << format_number(std::get<double>(s.initial));
    os << '\n';
  }
  for (const auto& p : m.phases) {
    os << "  phase " << p.number << " name=" << quote(p.name) << " days=" << format_number(p.days);
    if (!p.uses.empty()) os << " uses=" << requests(p.uses, ",");
    os << " weather=" << b(p.weather_sensitive);
    if (!p.after.empty()) {
      os << " after=";
      for (std::size_t i = 0; i < p.after.size(); ++i) os << (i ? "," : "") << p.after[i];
    }
    os << '\n';
  }
  for (const auto& e : m.elements) write_element(os, e, "  ");
  for (const auto& l : m.links) write_link(os, l, "  ");
  for (const auto& s : m.submodels) {
    os << "  submodel " << s.name << " {\n";
    for (const auto& e : s.elements) write_element(os, e, "    ");
    for (const auto& l : s.links) write_link(os, l, "    ");
    for (const auto& w : s.weather)
      os << "    weather valve=" << w.valve << " cycle=" << format_number(w.cycle_days)
         << " probability=" << format_number(w.probability) << " outage=" << w.outage.to_string() << '\n';
    for (const auto& bd : s.breakdowns)
      os << "    breakdown resource=" << bd.resource << " trigger=" << bd.trigger.to_string()
         << " major=" << format_number(bd.major_probability) << " minor_repair=" << bd.minor_repair.to_string()
         << " major_repair=" << bd.major_repair.to_string()
         << " clock=" << (bd.clock == BreakdownClock::usage ? "usage" : "calendar") << '\n';
    os << "  }\n";
  }
  os << "}\n";
  return os.str();
}

std::string serialize(const ScenarioOverlay& o) {
  std::ostringstream os;
  os << "scenario " << o.name << " {\n";
  if (!o.comment.empty()) os << "  comment " << quote(o.comment) << '\n';
  for (const auto& [r, k] : o.resource_overrides) os << "  resource " << r << " servers=" << k << '\n';
  for (const auto& [s, on] : o.submodel_toggles) os << "  submodel " << s << ' ' << (on ? "on" : "off") << '\n';
  os << "  replications=" << o.replications << '\n';
  os << "  seed=" << o.master_seed << '\n';
  os << "  noise=" << to_string(o.noise) << '\n';
  os << "}\n";
  return os.str();
}

std::vector<Diagnostic> validate_overlay(const ModelDef& model, const ScenarioOverlay& overlay) {
  std::vector<Diagnostic> out;
  auto add = [&](std::string msg) {
    Diagnostic d;
    d.file = overlay.name;
    d.element = overlay.name;
    d.message = std::move(msg);
    out.push_back(std::move(d));
  };
  for (const auto& [r, k] : overlay.resource_overrides) {
    if (!model.find_resource(r)) add("scenario overrides unknown resource '" + r + "'");
    if (k < 1) add("resource '" + r + "' needs at least one server");
  }
  for (const auto& [s, on] : overlay.submodel_toggles)
    if (!model.find_submodel(s)) add("scenario toggles unknown submodel '" + s + "'");
  if (overlay.replications < 1) add("replications must be at least 1");
  return out;
}

ModelDef apply_overlay(const ModelDef& model, const ScenarioOverlay& overlay) {
  auto diags = validate_overlay(model, overlay);
  if (has_errors(diags)) throw ModelError(ErrorKind::ValidationError, std::move(diags));
  ModelDef m = model;
  for (const auto& [r, k] : overlay.resource_overrides) m.find_resource(r)->servers = k;
  std::erase_if(m.submodels, [&](const SubmodelDef& s) {
    auto it = overlay.submodel_toggles.find(s.name);
    return it != overlay.submodel_toggles.end() && !it->second;
  });
  return m;
}

}  // namespace berthsim
