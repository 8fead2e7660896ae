#include "berthsim/error.hpp"

#include <algorithm>
#include <sstream>

namespace berthsim {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::PastTime: return "PastTime";
    case ErrorKind::NonTermination: return "NonTermination";
    case ErrorKind::UnknownState: return "UnknownState";
    case ErrorKind::InvalidParams: return "InvalidParams";
    case ErrorKind::NegativeDuration: return "NegativeDuration";
    case ErrorKind::UnsatisfiableRequest: return "UnsatisfiableRequest";
    case ErrorKind::ReleaseWithoutHold: return "ReleaseWithoutHold";
    case ErrorKind::AlreadyFullyPreempted: return "AlreadyFullyPreempted";
    case ErrorKind::UnbatchOfPlainEntity: return "UnbatchOfPlainEntity";
    case ErrorKind::BadProbabilities: return "BadProbabilities";
    case ErrorKind::UnknownValve: return "UnknownValve";
    case ErrorKind::PredicateEvalError: return "PredicateEvalError";
    case ErrorKind::Deadlock: return "Deadlock";
    case ErrorKind::SyntaxError: return "SyntaxError";
    case ErrorKind::ValidationError: return "ValidationError";
    case ErrorKind::MissingValve: return "MissingValve";
    case ErrorKind::UnknownResource: return "UnknownResource";
    case ErrorKind::CalibrationFailed: return "CalibrationFailed";
    case ErrorKind::DestroyWhileHolding: return "DestroyWhileHolding";
    case ErrorKind::Replication: return "Replication";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind), detail_(message) {}

std::string Diagnostic::format() const {
  std::ostringstream os;
  os << (file.empty() ? "<input>" : file) << ':' << line << ':' << col << ": "
     << (severity == Severity::error ? "error" : "warning") << ": ";
  if (!element.empty()) os << '[' << element << "] ";
  os << message;
  return os.str();
}

bool has_errors(const std::vector<Diagnostic>& diags) {
  return std::any_of(diags.begin(), diags.end(),
                     [](const Diagnostic& d) { return d.severity == Severity::error; });
}

namespace {

std::string join_diagnostics(const std::vector<Diagnostic>& diags) {
  std::string out;
  for (const auto& d : diags) {
    if (!out.empty()) out += '\n';
    out += d.format();
  }
  return out;
}

std::string describe_deadlock(double at, const std::vector<WaitEdge>& edges,
                              const std::vector<std::uint64_t>& cycle,
                              const std::vector<std::uint64_t>& blocked) {
  std::ostringstream os;
  os << "no further events at t=" << at << " while " << blocked.size() << " entities are blocked";
  for (const auto& e : edges) {
    os << "\n  entity " << e.waiter << " waits for " << e.resource;
    if (e.holder != 0) os << " held by entity " << e.holder;
  }
  if (!cycle.empty()) {
    os << "\n  cycle:";
    for (auto id : cycle) os << ' ' << id;
  }
  return os.str();
}

}  // namespace

ModelError::ModelError(ErrorKind kind, std::vector<Diagnostic> diags)
    : Error(kind, join_diagnostics(diags)), diags_(std::move(diags)) {}

DeadlockError::DeadlockError(double at, std::vector<WaitEdge> edges, std::vector<std::uint64_t> cycle,
                             std::vector<std::uint64_t> blocked)
    : Error(ErrorKind::Deadlock, describe_deadlock(at, edges, cycle, blocked)),
      at_(at),
      edges_(std::move(edges)),
      cycle_(std::move(cycle)),
      blocked_(std::move(blocked)) {}

}  // namespace berthsim
