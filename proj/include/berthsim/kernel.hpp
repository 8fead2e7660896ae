#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "berthsim/model.hpp"

namespace berthsim {

struct Event {
  double fire_at = 0;
  std::uint64_t seq = 0;
  int target = -1;            // element index
  std::uint64_t subject = 0;  // entity id, 0 for none
  int action = 0;             // element-specific code
  bool foreground = true;     // background events never keep a run alive
};

/// Future-event list. Events pop in (fire_at, seq) order, so equal times
/// fire in the order they were scheduled.
class Calendar {
 public:
  using Key = std::pair<double, std::uint64_t>;

  /// Fills in `ev.seq` and returns the key needed to cancel it. Throws
  /// Error(PastTime) if `ev.fire_at` is before the clock.
  Key schedule(Event ev);
  bool cancel(const Key& key);
  std::optional<Event> advance();

  double clock() const noexcept { return clock_; }
  std::size_t size() const noexcept { return events_.size(); }
  bool empty() const noexcept { return events_.empty(); }
  std::size_t foreground() const noexcept { return foreground_; }
  std::uint64_t scheduled() const noexcept { return next_seq_; }

 private:
  std::map<Key, Event> events_;
  double clock_ = 0;
  std::uint64_t next_seq_ = 0;
  std::size_t foreground_ = 0;
};

/// Declared state variables. Writes notify the listener after the value
/// is stored, so reads from inside the listener see the new value.
class StateTable {
 public:
  using Listener = std::function<void(int index, const StateValue& old_value, const StateValue& new_value)>;

  StateTable() = default;
  explicit StateTable(const std::vector<StateDecl>& decls);

  int index_of(std::string_view name) const;  // -1 if undeclared
  const StateValue& get(std::string_view name) const;
  const StateValue& get(int index) const { return values_[index]; }
  void set(std::string_view name, StateValue value);
  void set(int index, StateValue value);
  const std::string& name(int index) const { return names_[index]; }
  std::size_t size() const noexcept { return values_.size(); }

  void on_change(Listener fn) { listener_ = std::move(fn); }

 private:
  std::vector<std::string> names_;
  std::vector<StateValue> values_;
  std::map<std::string, int, std::less<>> index_;
  Listener listener_;
};

}  // namespace berthsim
