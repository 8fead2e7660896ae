#include "berthsim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>
#include <set>
#include <sstream>

#include "berthsim/disruptions.hpp"
#include "berthsim/error.hpp"
#include "berthsim/formula.hpp"
#include "berthsim/kernel.hpp"
#include "berthsim/model_format.hpp"
#include "berthsim/stochastics.hpp"

namespace berthsim {

std::string_view to_string(TraceAction a) {
  static constexpr std::string_view names[] = {
      "create", "enter",       "capture",    "release",     "preempt", "resume",  "branch",
      "batch",  "unbatch",     "consolidate", "valve_open", "valve_close", "count", "destroy",
  };
  return names[static_cast<int>(a)];
}

struct CompiledModel::Impl {
  struct Request {
    int res;
    std::int64_t n;
  };
  struct Node {
    const ElementDef* def = nullptr;
    std::vector<int> next;  // per output port
    std::vector<Request> requests;
    int file = -1;       // capture
    int valve = -1;      // task governor / activator target (element index)
    int state = -1;      // valve backing state
    int usage = -1;      // task usage resource
    int resource = -1;   // preempt
    std::optional<Formula> formula;
    std::string tally;
  };

  ModelDef source;
  ModelDef expanded;
  std::vector<ElementDef> defs;
  std::vector<Node> nodes;
  std::vector<std::string> resource_names;
  std::vector<std::int64_t> servers;
  std::vector<std::string> file_names;  // named files, then one private file per bare capture
  std::vector<std::vector<int>> valves_of_state;
  std::vector<int> creates;
};

namespace {

constexpr int kCreateEmit = 1;
constexpr int kTaskDone = 2;

enum class Where { transit, task, file, valve_queue, buffer, inside, destroyed };

struct Hold {
  int res;
  std::int64_t n;
  std::int64_t lost;
  std::uint64_t grant;
};

struct Token {
  std::uint64_t holder;
  std::uint64_t victim;  // 0: the server was idle when withdrawn
};

struct Entity {
  std::uint64_t id = 0;
  double created_at = 0;
  bool background = false;
  std::map<std::string, double, std::less<>> attrs;
  std::vector<std::uint64_t> contents;
  std::vector<Hold> holds;
  int tokens = 0;
  int suspended = 0;
  int suspended_bg = 0;

  Where where = Where::transit;
  int at = -1;

  // task progress
  bool paused = false;
  bool has_event = false;
  Calendar::Key key{};
  double due = 0;
  double pause_start = 0;
  double work_left = 0;
  double last_update = 0;
  double rate = 0;
};

struct Waiter {
  std::uint64_t entity;
  int element;
  std::uint64_t seq;
};

struct Pool {
  std::int64_t total = 0;
  std::int64_t busy = 0;
  std::int64_t preempted = 0;
  std::vector<Token> tokens;
  std::vector<std::uint64_t> watchers;  // entities in usage-clock tasks
  double area = 0;
  double last = 0;
  int bg_busy = 0;  // servers held by background entities
};

class Sim : public FormulaScope {
 public:
  Sim(const CompiledModel::Impl& m, std::uint64_t seed, const RunOptions& opt)
      : m_(m), opt_(opt), states_(m.expanded.states) {
    for (std::size_t r = 0; r < m.resource_names.size(); ++r) {
      Pool p;
      p.total = m.servers[r];
      pools_.push_back(std::move(p));
    }
    files_.resize(m.file_names.size());
    streams_.reserve(m.nodes.size());
    for (const auto& n : m.nodes) streams_.push_back(derive_stream(seed, "el." + n.def->id));
    buffers_.resize(m.nodes.size());
    valve_queue_.resize(m.nodes.size());
    governed_.resize(m.nodes.size());
    remaining_.assign(m.nodes.size(), 0);
    closed_by_bg_.assign(m.nodes.size(), false);
    for (const auto& n : m.nodes)
      if (n.def->kind == ElementKind::counter) result_.counters[n.tally] = 0;
    states_.on_change([this](int idx, const StateValue& o, const StateValue& v) { state_changed(idx, o, v); });
  }

  RunResult run() {
    for (int c : m_.creates) {
      remaining_[c] = m_.nodes[c].def->count;
      schedule(0, c, 0, kCreateEmit, !m_.nodes[c].def->background);
    }
    for (;;) {
      if (cal_.empty()) {
        finish();
        break;
      }
      if (cal_.foreground() == 0) {
        if (primary_ == 0) break;
        if (!held_by_background()) {
          finish();
          break;
        }
      }
      auto ev = cal_.advance();
      if (++result_.events > opt_.event_ceiling)
        throw Error(ErrorKind::NonTermination, "run exceeded " + std::to_string(opt_.event_ceiling) + " events at t=" +
                                                   format_number(cal_.clock()));
      now_ = ev->fire_at;
      seq_ = ev->seq;
      dispatch(*ev);
      if (opt_.observer) opt_.observer(view());
    }
    result_.end_time = now_;
    for (std::size_t r = 0; r < pools_.size(); ++r) {
      auto& p = pools_[r];
      integrate(p);
      double u = (now_ > 0 && p.total > 0) ? p.area / (static_cast<double>(p.total) * now_) : 0.0;
      result_.utilization[m_.resource_names[r]] = std::clamp(u, 0.0, 1.0);
    }
    result_.in_system = result_.created - result_.destroyed;
    for (const auto& b : buffers_) result_.stranded += b.size();
    return std::move(result_);
  }

  // FormulaScope
  double get(std::string_view name) const override {
    if (is_attribute_name(name)) {
      const auto& e = entities_[current_ - 1];
      auto it = e.attrs.find(name.substr(2));
      if (it == e.attrs.end())
        throw Error(ErrorKind::PredicateEvalError, "entity " + std::to_string(current_) + " has no attribute '" +
                                                       std::string(name.substr(2)) + "'");
      return it->second;
    }
    return as_real(states_.get(name));
  }

  void set(std::string_view name, double value) override {
    if (is_attribute_name(name)) {
      entities_[current_ - 1].attrs[std::string(name.substr(2))] = value;
      return;
    }
    int idx = states_.index_of(name);
    if (idx < 0) throw Error(ErrorKind::UnknownState, "undeclared state '" + std::string(name) + "'");
    if (std::holds_alternative<bool>(states_.get(idx)))
      write_state(idx, StateValue(value != 0.0));
    else
      write_state(idx, StateValue(value));
  }

 private:
  Entity& ent(std::uint64_t id) { return entities_[id - 1]; }

  void schedule(double at, int target, std::uint64_t subject, int action, bool fg, Entity* e = nullptr) {
    Event ev;
    ev.fire_at = at;
    ev.target = target;
    ev.subject = subject;
    ev.action = action;
    ev.foreground = fg;
    auto key = cal_.schedule(ev);
    if (e) {
      e->key = key;
      e->has_event = true;
    }
  }

  void trace(int element, std::uint64_t entity, TraceAction a) {
    if (!opt_.trace) return;
    result_.trace.push_back({now_, seq_, m_.nodes[element].def->id, entity, a});
  }

  std::uint64_t spawn(bool background, int element) {
    Entity e;
    e.id = entities_.size() + 1;
    e.created_at = now_;
    e.background = background;
    entities_.push_back(std::move(e));
    ++result_.created;
    if (!background) ++primary_;
    trace(element, entities_.size(), TraceAction::create);
    return entities_.size();
  }

  void kill(std::uint64_t id, int element) {
    auto& e = ent(id);
    if (!e.holds.empty() || e.tokens > 0)
      throw Error(ErrorKind::DestroyWhileHolding, "entity " + std::to_string(id) + " destroyed at '" +
                                                      m_.nodes[element].def->id + "' while holding resources");
    auto contents = std::move(e.contents);
    e.contents.clear();
    e.where = Where::destroyed;
    ++result_.destroyed;
    if (!e.background) --primary_;
    trace(element, id, TraceAction::destroy);
    for (auto c : contents) kill(c, element);
  }

  void forward(std::uint64_t id, int element, int port) {
    ent(id).where = Where::transit;
    work_.push_back({id, m_.nodes[element].next[port]});
  }

  void dispatch(const Event& ev) {
    if (ev.action == kCreateEmit) {
      const auto& def = *m_.nodes[ev.target].def;
      auto id = spawn(def.background, ev.target);
      forward(id, ev.target, 0);
      if (--remaining_[ev.target] > 0) {
        double d = sample(def.dist, streams_[ev.target]);
        if (d < 0) throw negative(ev.target, d);
        schedule(now_ + d, ev.target, 0, kCreateEmit, !def.background);
      }
    } else {
      auto& e = ent(ev.subject);
      e.has_event = false;
      finish_task(e);
      forward(e.id, e.at, 0);
    }
    drain();
  }

  Error negative(int element, double d) {
    return Error(ErrorKind::NegativeDuration,
                 "'" + m_.nodes[element].def->id + "' sampled a negative duration " + format_number(d));
  }

  void drain() {
    std::uint64_t steps = 0;
    while (!work_.empty()) {
      auto [id, element] = work_.front();
      work_.pop_front();
      if (++steps > opt_.event_ceiling)
        throw Error(ErrorKind::NonTermination, "zero-time loop at t=" + format_number(now_));
      arrive(id, element);
    }
  }

  void arrive(std::uint64_t id, int el) {
    const auto& node = m_.nodes[el];
    const auto& def = *node.def;
    auto& e = ent(id);
    current_ = id;
    e.at = el;
    switch (def.kind) {
      case ElementKind::create: forward(id, el, 0); break;  // unreachable after validation
      case ElementKind::task: start_task(e, el); break;
      case ElementKind::capture:
        trace(el, id, TraceAction::enter);
        e.where = Where::file;
        files_[node.file].push_back({id, el, arrivals_++});
        grant();
        break;
      case ElementKind::release: release(e, el); break;
      case ElementKind::preempt: preempt(e, el); break;
      case ElementKind::batch: {
        trace(el, id, TraceAction::enter);
        e.where = Where::buffer;
        auto& buf = buffers_[el];
        buf.push_back(id);
        if (static_cast<std::int64_t>(buf.size()) == def.count) {
          bool bg = std::all_of(buf.begin(), buf.end(), [&](auto c) { return ent(c).background; });
          std::vector<std::uint64_t> contents(buf.begin(), buf.end());
          buf.clear();
          auto w = spawn(bg, el);
          for (auto c : contents) ent(c).where = Where::inside;
          ent(w).contents = std::move(contents);
          trace(el, w, TraceAction::batch);
          forward(w, el, 0);
        }
        break;
      }
      case ElementKind::unbatch: {
        if (e.contents.empty())
          throw Error(ErrorKind::UnbatchOfPlainEntity,
                      "entity " + std::to_string(id) + " reached unbatch '" + def.id + "' without contents");
        trace(el, id, TraceAction::unbatch);
        auto contents = std::move(e.contents);
        e.contents.clear();
        kill(id, el);
        for (auto c : contents) forward(c, el, 0);
        break;
      }
      case ElementKind::generate: {
        trace(el, id, TraceAction::enter);
        forward(id, el, 0);
        for (std::int64_t k = 0; k < def.count; ++k) {
          auto attrs = ent(id).attrs;
          auto c = spawn(ent(id).background, el);
          ent(c).attrs = std::move(attrs);
          forward(c, el, 1);
        }
        break;
      }
      case ElementKind::consolidate: {
        trace(el, id, TraceAction::enter);
        e.where = Where::buffer;
        auto& buf = buffers_[el];
        buf.push_back(id);
        if (static_cast<std::int64_t>(buf.size()) == def.count) {
          std::vector<std::uint64_t> absorbed(buf.begin(), buf.end() - 1);
          buf.clear();
          for (auto a : absorbed) kill(a, el);
          trace(el, id, TraceAction::consolidate);
          forward(id, el, 0);
        }
        break;
      }
      case ElementKind::conditional_branch: {
        bool yes = node.formula->test(*this);
        trace(el, id, TraceAction::branch);
        forward(id, el, yes ? 0 : 1);
        break;
      }
      case ElementKind::probabilistic_branch: {
        double u = streams_[el].next_uniform();
        std::size_t pick = def.probs.size() - 1;
        double acc = 0;
        for (std::size_t i = 0; i < def.probs.size(); ++i) {
          acc += def.probs[i];
          if (u < acc) {
            pick = i;
            break;
          }
        }
        trace(el, id, TraceAction::branch);
        forward(id, el, static_cast<int>(pick));
        break;
      }
      case ElementKind::valve:
        trace(el, id, TraceAction::enter);
        if (valve_open(el)) {
          forward(id, el, 0);
        } else {
          e.where = Where::valve_queue;
          valve_queue_[el].push_back(id);
        }
        break;
      case ElementKind::activator: {
        trace(el, id, TraceAction::enter);
        int st = m_.nodes[node.valve].state;
        if (std::holds_alternative<bool>(states_.get(st)))
          write_state(st, StateValue(def.open));
        else
          write_state(st, StateValue(def.open ? 1.0 : 0.0));
        forward(id, el, 0);
        break;
      }
      case ElementKind::execute:
        trace(el, id, TraceAction::enter);
        node.formula->run(*this);
        forward(id, el, 0);
        break;
      case ElementKind::counter:
        ++result_.counters[node.tally];
        trace(el, id, TraceAction::count);
        forward(id, el, 0);
        break;
      case ElementKind::destroy: kill(id, el); break;
    }
  }

  // ---- tasks ----

  bool should_pause(const Entity& e) const {
    int v = m_.nodes[e.at].valve;
    return e.suspended > 0 || (v >= 0 && !valve_open(v));
  }

  void start_task(Entity& e, int el) {
    const auto& node = m_.nodes[el];
    const auto& def = *node.def;
    trace(el, e.id, TraceAction::enter);
    double d;
    if (opt_.noise == NoiseMode::triangular10 && def.phase && def.dist.kind() == DistKind::constant) {
      double c = def.dist.params()[0];
      d = sample(Distribution::triangular(0.9 * c, c, 1.1 * c), streams_[el]);
    } else {
      d = sample(def.dist, streams_[el]);
    }
    if (d < 0) throw negative(el, d);
    e.where = Where::task;
    e.paused = false;
    if (node.valve >= 0) governed_[node.valve].push_back(e.id);
    if (node.usage >= 0) {
      e.work_left = d;
      e.last_update = now_;
      e.rate = 0;
      pools_[node.usage].watchers.push_back(e.id);
      if (d == 0)
        schedule(now_, el, e.id, kTaskDone, !e.background, &e);
      else
        update_usage(e);
      return;
    }
    e.due = now_ + d;
    if (should_pause(e)) {
      e.paused = true;
      e.pause_start = now_;
    } else {
      schedule(e.due, el, e.id, kTaskDone, !e.background, &e);
    }
  }

  void update_usage(Entity& e) {
    const auto& node = m_.nodes[e.at];
    e.work_left = std::max(0.0, e.work_left - e.rate * (now_ - e.last_update));
    e.last_update = now_;
    double rate = should_pause(e) ? 0.0 : static_cast<double>(pools_[node.usage].busy);
    if (rate == e.rate && (e.has_event || rate == 0)) return;
    if (e.has_event) {
      cal_.cancel(e.key);
      e.has_event = false;
    }
    e.rate = rate;
    if (rate > 0) schedule(now_ + e.work_left / rate, e.at, e.id, kTaskDone, !e.background, &e);
  }

  void update_task(Entity& e) {
    if (e.where != Where::task) return;
    if (m_.nodes[e.at].usage >= 0) {
      if (e.has_event && e.rate == 0) return;  // zero-length usage task already due
      update_usage(e);
      return;
    }
    bool pause = should_pause(e);
    if (pause && !e.paused) {
      if (e.has_event) cal_.cancel(e.key);
      e.has_event = false;
      e.paused = true;
      e.pause_start = now_;
    } else if (!pause && e.paused) {
      e.paused = false;
      e.due += now_ - e.pause_start;
      schedule(e.due, e.at, e.id, kTaskDone, !e.background, &e);
    }
  }

  void finish_task(Entity& e) {
    const auto& node = m_.nodes[e.at];
    if (node.valve >= 0) std::erase(governed_[node.valve], e.id);
    if (node.usage >= 0) std::erase(pools_[node.usage].watchers, e.id);
    e.where = Where::transit;
  }

  // ---- valves and state ----

  bool valve_open(int valve_el) const { return as_bool(states_.get(m_.nodes[valve_el].state)); }

  void write_state(int idx, StateValue v) {
    writer_bg_ = current_ != 0 && ent(current_).background;
    states_.set(idx, std::move(v));
  }

  void state_changed(int idx, const StateValue& old_v, const StateValue& new_v) {
    bool was = as_bool(old_v), is = as_bool(new_v);
    if (was == is) return;
    for (int v : m_.valves_of_state[idx]) {
      closed_by_bg_[v] = !is && writer_bg_;
      trace(v, current_, is ? TraceAction::valve_open : TraceAction::valve_close);
      if (is) {
        auto queued = std::move(valve_queue_[v]);
        valve_queue_[v].clear();
        for (auto q : queued) forward(q, v, 0);
      }
      auto governed = governed_[v];
      for (auto g : governed) update_task(ent(g));
    }
  }

  // ---- resources ----

  void integrate(Pool& p) {
    p.area += static_cast<double>(p.busy) * (now_ - p.last);
    p.last = now_;
  }

  void busy_changed(int r, std::int64_t delta, bool bg) {
    auto& p = pools_[r];
    integrate(p);
    p.busy += delta;
    if (bg) p.bg_busy += static_cast<int>(delta);
    auto watchers = p.watchers;
    for (auto w : watchers) update_task(ent(w));
  }

  Hold* hold_of(Entity& e, int r) {
    for (auto& h : e.holds)
      if (h.res == r) return &h;
    return nullptr;
  }

  bool satisfiable(const Waiter& w) const {
    for (const auto& q : m_.nodes[w.element].requests) {
      const auto& p = pools_[q.res];
      if (p.total - p.busy - p.preempted < q.n) return false;
    }
    return true;
  }

  void grant() {
    for (;;) {
      int best = -1;
      for (std::size_t f = 0; f < files_.size(); ++f) {
        if (files_[f].empty() || !satisfiable(files_[f].front())) continue;
        if (best < 0 || files_[f].front().seq < files_[best].front().seq) best = static_cast<int>(f);
      }
      if (best < 0) return;
      Waiter w = files_[best].front();
      files_[best].pop_front();
      auto& e = ent(w.entity);
      for (const auto& q : m_.nodes[w.element].requests) {
        if (auto* h = hold_of(e, q.res))
          h->n += q.n;
        else
          e.holds.push_back({q.res, q.n, 0, grants_++});
        busy_changed(q.res, q.n, e.background);
      }
      trace(w.element, w.entity, TraceAction::capture);
      forward(w.entity, w.element, 0);
    }
  }

  void release(Entity& e, int el) {
    const auto& node = m_.nodes[el];
    for (const auto& q : node.requests) {
      std::int64_t have = 0;
      for (const auto& t : pools_[q.res].tokens) have += t.holder == e.id;
      if (auto* h = hold_of(e, q.res)) have += h->n;
      if (have < q.n)
        throw Error(ErrorKind::ReleaseWithoutHold, "entity " + std::to_string(e.id) + " at '" + node.def->id +
                                                       "' releases " + m_.resource_names[q.res] + ":" +
                                                       std::to_string(q.n) + " but holds " + std::to_string(have));
    }
    trace(el, e.id, TraceAction::release);
    for (const auto& q : node.requests) {
      auto& p = pools_[q.res];
      std::int64_t k = q.n;
      // preemption tokens first: releasing one resumes the withdrawn server
      for (std::size_t i = 0; i < p.tokens.size() && k > 0;) {
        if (p.tokens[i].holder != e.id) {
          ++i;
          continue;
        }
        Token t = p.tokens[i];
        p.tokens.erase(p.tokens.begin() + static_cast<std::ptrdiff_t>(i));
        --e.tokens;
        --k;
        --p.preempted;
        if (t.victim != 0) {
          auto& v = ent(t.victim);
          auto* h = hold_of(v, q.res);
          --h->lost;
          --v.suspended;
          if (e.background) --v.suspended_bg;
          busy_changed(q.res, 1, v.background);
          trace(el, t.victim, TraceAction::resume);
          update_task(v);
        } else {
          trace(el, e.id, TraceAction::resume);
        }
      }
      if (k == 0) continue;
      auto* h = hold_of(e, q.res);
      std::int64_t lost = std::min(k, h->lost);
      for (std::int64_t i = 0; i < lost; ++i) {
        for (auto& t : p.tokens) {
          if (t.victim == e.id) {
            t.victim = 0;
            --e.suspended;
            if (ent(t.holder).background) --e.suspended_bg;
            break;
          }
        }
      }
      h->lost -= lost;
      h->n -= k;
      if (k - lost > 0) busy_changed(q.res, -(k - lost), e.background);
      if (h->n == 0) std::erase_if(e.holds, [&](const Hold& x) { return x.res == q.res; });
    }
    forward(e.id, el, 0);
    grant();
  }

  void preempt(Entity& e, int el) {
    const auto& node = m_.nodes[el];
    int r = node.resource;
    auto& p = pools_[r];
    if (p.preempted >= p.total)
      throw Error(ErrorKind::AlreadyFullyPreempted, "'" + node.def->id + "': every server of " +
                                                        m_.resource_names[r] + " is already preempted");
    std::uint64_t victim = 0;
    if (p.total - p.busy - p.preempted <= 0) {
      // all servers busy: take the one granted longest ago
      std::uint64_t oldest = ~0ULL;
      for (auto& cand : entities_) {
        if (cand.where == Where::destroyed) continue;
        for (const auto& h : cand.holds)
          if (h.res == r && h.n - h.lost > 0 && h.grant < oldest) {
            oldest = h.grant;
            victim = cand.id;
          }
      }
    }
    ++p.preempted;
    p.tokens.push_back({e.id, victim});
    ++e.tokens;
    trace(el, e.id, TraceAction::preempt);
    if (victim != 0) {
      auto& v = ent(victim);
      ++hold_of(v, r)->lost;
      ++v.suspended;
      if (e.background) ++v.suspended_bg;
      busy_changed(r, -1, v.background);
      update_task(v);
    }
    forward(e.id, el, 0);
  }

  // ---- termination ----

  // True when some primary entity is stuck only because of something a
  // background entity holds, so background events must keep running.
  bool held_by_background() {
    for (const auto& e : entities_) {
      if (e.background || e.where == Where::destroyed) continue;
      if (e.where == Where::task) {
        if (e.suspended_bg > 0) return true;
        int v = m_.nodes[e.at].valve;
        if (v >= 0 && !valve_open(v) && closed_by_bg_[v]) return true;
        if (m_.nodes[e.at].usage >= 0 && pools_[m_.nodes[e.at].usage].bg_busy > 0) return true;
      } else if (e.where == Where::valve_queue) {
        if (closed_by_bg_[e.at]) return true;
      } else if (e.where == Where::file) {
        for (const auto& q : m_.nodes[e.at].requests) {
          const auto& p = pools_[q.res];
          if (p.bg_busy > 0) return true;
          for (const auto& t : p.tokens)
            if (ent(t.holder).background) return true;
        }
      }
    }
    return false;
  }

  void finish() {
    std::vector<std::uint64_t> blocked;
    std::vector<WaitEdge> edges;
    for (const auto& e : entities_) {
      if (e.background) continue;
      if (e.where == Where::file) {
        blocked.push_back(e.id);
        for (const auto& q : m_.nodes[e.at].requests) {
          const auto& p = pools_[q.res];
          if (p.total - p.busy - p.preempted >= q.n) continue;
          for (const auto& h : entities_) {
            if (h.where == Where::destroyed) continue;
            for (const auto& hd : h.holds)
              if (hd.res == q.res) edges.push_back({e.id, m_.resource_names[q.res], h.id});
          }
          if (p.preempted > 0) edges.push_back({e.id, m_.resource_names[q.res], 0});
        }
      } else if (e.where == Where::valve_queue || e.where == Where::task) {
        blocked.push_back(e.id);
      }
    }
    if (blocked.empty()) return;
    // look for a cycle in the waiter -> holder graph
    std::map<std::uint64_t, std::vector<std::uint64_t>> g;
    for (const auto& ed : edges)
      if (ed.holder) g[ed.waiter].push_back(ed.holder);
    std::vector<std::uint64_t> cycle, stack;
    std::map<std::uint64_t, int> color;
    std::function<bool(std::uint64_t)> dfs = [&](std::uint64_t n) {
      color[n] = 1;
      stack.push_back(n);
      for (auto nx : g[n]) {
        if (color[nx] == 1) {
          auto it = std::find(stack.begin(), stack.end(), nx);
          cycle.assign(it, stack.end());
          return true;
        }
        if (color[nx] == 0 && dfs(nx)) return true;
      }
      stack.pop_back();
      color[n] = 2;
      return false;
    };
    for (const auto& [n, _] : g)
      if (color[n] == 0 && dfs(n)) break;
    throw DeadlockError(now_, std::move(edges), std::move(cycle), std::move(blocked));
  }

  RunView view() const {
    RunView v;
    v.time = now_;
    v.seq = seq_;
    for (std::size_t r = 0; r < pools_.size(); ++r)
      v.resources.push_back({m_.resource_names[r], pools_[r].total, pools_[r].busy, pools_[r].preempted});
    for (const auto& f : files_) {
      for (const auto& w : f) {
        WaitingSnapshot s;
        s.entity = w.entity;
        s.element = m_.nodes[w.element].def->id;
        const auto& e = entities_[w.entity - 1];
        for (const auto& q : m_.nodes[w.element].requests) {
          s.request.push_back({m_.resource_names[q.res], q.n});
          std::int64_t held = 0;
          for (const auto& h : e.holds)
            if (h.res == q.res) held = h.n;
          s.held.push_back(held);
        }
        v.waiting.push_back(std::move(s));
      }
    }
    return v;
  }

  const CompiledModel::Impl& m_;
  const RunOptions& opt_;
  Calendar cal_;
  StateTable states_;
  RunResult result_;
  std::deque<Entity> entities_;
  std::vector<Pool> pools_;
  std::vector<std::deque<Waiter>> files_;
  std::vector<RandomStream> streams_;
  std::vector<std::vector<std::uint64_t>> buffers_;
  std::vector<std::vector<std::uint64_t>> valve_queue_;
  std::vector<std::vector<std::uint64_t>> governed_;
  std::vector<std::int64_t> remaining_;
  std::vector<bool> closed_by_bg_;
  std::deque<std::pair<std::uint64_t, int>> work_;
  double now_ = 0;
  std::uint64_t seq_ = 0;
  std::uint64_t current_ = 0;
  std::uint64_t arrivals_ = 0;
  std::uint64_t grants_ = 0;
  std::uint64_t primary_ = 0;
  bool writer_bg_ = false;
};

}  // namespace

CompiledModel CompiledModel::build(const ModelDef& model) {
  auto diags = validate(model);
  if (has_errors(diags)) throw ModelError(ErrorKind::ValidationError, std::move(diags));
  auto impl = std::make_shared<Impl>();
  impl->source = model;
  impl->expanded = compile_disruptions(model);
  diags = validate(impl->expanded, "<expanded>");
  if (has_errors(diags)) throw ModelError(ErrorKind::ValidationError, std::move(diags));

  auto& m = impl->expanded;
  for (const auto& e : m.elements) impl->defs.push_back(e);
  for (const auto& s : m.submodels)
    for (const auto& e : s.elements) impl->defs.push_back(e);

  std::map<std::string, int> idx, res, files, states;
  for (std::size_t i = 0; i < impl->defs.size(); ++i) idx[impl->defs[i].id] = static_cast<int>(i);
  for (const auto& r : m.resources) {
    res[r.name] = static_cast<int>(impl->resource_names.size());
    impl->resource_names.push_back(r.name);
    impl->servers.push_back(r.servers);
  }
  for (const auto& f : m.files) {
    files[f.name] = static_cast<int>(impl->file_names.size());
    impl->file_names.push_back(f.name);
  }
  for (std::size_t i = 0; i < m.states.size(); ++i) states[m.states[i].name] = static_cast<int>(i);
  impl->valves_of_state.resize(m.states.size());

  impl->nodes.resize(impl->defs.size());
  for (std::size_t i = 0; i < impl->defs.size(); ++i) {
    const auto& d = impl->defs[i];
    auto& n = impl->nodes[i];
    n.def = &impl->defs[i];
    n.next.assign(static_cast<std::size_t>(output_ports(d)), -1);
    for (const auto& q : d.requests) n.requests.push_back({res.at(q.resource), q.servers});
    switch (d.kind) {
      case ElementKind::create: impl->creates.push_back(static_cast<int>(i)); break;
      case ElementKind::capture:
        if (d.file.empty()) {
          n.file = static_cast<int>(impl->file_names.size());
          impl->file_names.push_back(d.id);
        } else {
          n.file = files.at(d.file);
        }
        break;
      case ElementKind::task:
        if (!d.valve.empty()) n.valve = idx.at(d.valve);
        if (!d.usage.empty()) n.usage = res.at(d.usage);
        break;
      case ElementKind::activator: n.valve = idx.at(d.valve); break;
      case ElementKind::valve:
        n.state = states.at(d.state);
        impl->valves_of_state[n.state].push_back(static_cast<int>(i));
        break;
      case ElementKind::preempt: n.resource = res.at(d.resource); break;
      case ElementKind::conditional_branch:
      case ElementKind::execute: n.formula = Formula::compile(d.formula); break;
      case ElementKind::counter: n.tally = d.tally.empty() ? d.id : d.tally; break;
      default: break;
    }
  }
  auto wire = [&](const std::vector<Link>& links) {
    for (const auto& l : links) impl->nodes[idx.at(l.from)].next[l.port] = idx.at(l.to);
  };
  wire(m.links);
  for (const auto& s : m.submodels) wire(s.links);

  CompiledModel out;
  out.impl_ = std::move(impl);
  return out;
}

const ModelDef& CompiledModel::source() const { return impl_->source; }
const ModelDef& CompiledModel::expanded() const { return impl_->expanded; }

RunResult run(const CompiledModel& model, std::uint64_t seed, const RunOptions& options) {
  Sim sim(model.impl(), seed, options);
  return sim.run();
}

std::string trace_csv(const std::vector<TraceRecord>& trace) {
  std::ostringstream os;
  os << "time,seq,element_id,entity_id,action\n";
  for (const auto& r : trace)
    os << format_number(r.time) << ',' << r.seq << ',' << r.element << ',' << r.entity << ',' << to_string(r.action)
       << '\n';
  return os.str();
}

}  // namespace berthsim
