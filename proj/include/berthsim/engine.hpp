#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "berthsim/model.hpp"

namespace berthsim {

enum class TraceAction {
  create,
  enter,
  capture,
  release,
  preempt,
  resume,
  branch,
  batch,
  unbatch,
  consolidate,
  valve_open,
  valve_close,
  count,
  destroy,
};

std::string_view to_string(TraceAction a);

struct TraceRecord {
  double time = 0;
  std::uint64_t seq = 0;
  std::string element;
  std::uint64_t entity = 0;
  TraceAction action = TraceAction::enter;

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

struct ResourceSnapshot {
  std::string name;
  std::int64_t total = 0;
  std::int64_t busy = 0;
  std::int64_t preempted = 0;
};

/// An entity queued at a capture element, with what it already holds of
/// each resource it is asking for.
struct WaitingSnapshot {
  std::uint64_t entity = 0;
  std::string element;
  std::vector<ResourceRequest> request;
  std::vector<std::int64_t> held;
};

/// State handed to RunOptions::observer after every event.
struct RunView {
  double time = 0;
  std::uint64_t seq = 0;
  std::vector<ResourceSnapshot> resources;
  std::vector<WaitingSnapshot> waiting;
};

struct RunOptions {
  bool trace = false;
  std::uint64_t event_ceiling = 10'000'000;
  NoiseMode noise = NoiseMode::off;
  std::function<void(const RunView&)> observer;
};

struct RunResult {
  double end_time = 0;
  std::map<std::string, std::int64_t> counters;
  std::map<std::string, double> utilization;
  std::vector<TraceRecord> trace;
  std::uint64_t events = 0;
  std::uint64_t created = 0;
  std::uint64_t destroyed = 0;
  std::uint64_t in_system = 0;
  // entities left waiting in batch/consolidate buffers at the end
  std::uint64_t stranded = 0;

  friend bool operator==(const RunResult&, const RunResult&) = default;
};

/// A model with its disruption submodels expanded, validated and indexed.
/// Immutable and cheap to share between threads.
class CompiledModel {
 public:
  /// Throws ModelError(ValidationError) with every diagnostic.
  static CompiledModel build(const ModelDef& model);

  const ModelDef& source() const;
  /// The model actually executed (disruptions expanded).
  const ModelDef& expanded() const;

  struct Impl;
  const Impl& impl() const { return *impl_; }

 private:
  std::shared_ptr<const Impl> impl_;
};

/// One replication. Deterministic in (model, seed, options).
RunResult run(const CompiledModel& model, std::uint64_t seed, const RunOptions& options = {});

/// `time,seq,element_id,entity_id,action` with a header line.
std::string trace_csv(const std::vector<TraceRecord>& trace);

}  // namespace berthsim
