#include "berthsim/kernel.hpp"

#include <cmath>

#include "berthsim/error.hpp"
#include "berthsim/stochastics.hpp"

namespace berthsim {

Calendar::Key Calendar::schedule(Event ev) {
  if (!(ev.fire_at >= clock_) || std::isnan(ev.fire_at))
    throw Error(ErrorKind::PastTime,
                "cannot schedule at t=" + format_number(ev.fire_at) + ", clock is " + format_number(clock_));
  ev.seq = next_seq_++;
  Key key{ev.fire_at, ev.seq};
  if (ev.foreground) ++foreground_;
  events_.emplace(key, ev);
  return key;
}

bool Calendar::cancel(const Key& key) {
  auto it = events_.find(key);
  if (it == events_.end()) return false;
  if (it->second.foreground) --foreground_;
  events_.erase(it);
  return true;
}

std::optional<Event> Calendar::advance() {
  if (events_.empty()) return std::nullopt;
  auto node = events_.extract(events_.begin());
  Event ev = node.mapped();
  if (ev.foreground) --foreground_;
  clock_ = ev.fire_at;
  return ev;
}

StateTable::StateTable(const std::vector<StateDecl>& decls) {
  for (const auto& d : decls) {
    index_.emplace(d.name, static_cast<int>(names_.size()));
    names_.push_back(d.name);
    values_.push_back(d.initial);
  }
}

int StateTable::index_of(std::string_view name) const {
  auto it = index_.find(name);
  return it == index_.end() ? -1 : it->second;
}

const StateValue& StateTable::get(std::string_view name) const {
  int i = index_of(name);
  if (i < 0) throw Error(ErrorKind::UnknownState, "undeclared state '" + std::string(name) + "'");
  return values_[i];
}

void StateTable::set(std::string_view name, StateValue value) {
  int i = index_of(name);
  if (i < 0) throw Error(ErrorKind::UnknownState, "undeclared state '" + std::string(name) + "'");
  set(i, std::move(value));
}

void StateTable::set(int index, StateValue value) {
  StateValue old = values_[index];
  values_[index] = std::move(value);
  if (listener_) listener_(index, old, values_[index]);
}

}  // namespace berthsim
