#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace berthsim {

enum class ErrorKind {
  PastTime,
  NonTermination,
  UnknownState,
  InvalidParams,
  NegativeDuration,
  UnsatisfiableRequest,
  ReleaseWithoutHold,
  AlreadyFullyPreempted,
  UnbatchOfPlainEntity,
  BadProbabilities,
  UnknownValve,
  PredicateEvalError,
  Deadlock,
  SyntaxError,
  ValidationError,
  MissingValve,
  UnknownResource,
  CalibrationFailed,
  DestroyWhileHolding,
  Replication,
  Io,
};

std::string_view to_string(ErrorKind kind);

/// Base of every error raised by the library. `kind()` is the stable,
/// machine-checkable part; `what()` carries a human readable diagnostic.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

enum class Severity { error, warning };

struct Diagnostic {
  std::string file;
  int line = 0;
  int col = 0;
  Severity severity = Severity::error;
  std::string element;
  std::string message;

  /// `<file>:<line>:<col>: <severity>: <message>`
  std::string format() const;
};

bool has_errors(const std::vector<Diagnostic>& diags);

/// Raised by the parser (SyntaxError) and by model compilation
/// (ValidationError). Carries every diagnostic found.
class ModelError : public Error {
 public:
  ModelError(ErrorKind kind, std::vector<Diagnostic> diags);

  const std::vector<Diagnostic>& diagnostics() const noexcept { return diags_; }

 private:
  std::vector<Diagnostic> diags_;
};

struct WaitEdge {
  std::uint64_t waiter = 0;
  std::string resource;
  std::uint64_t holder = 0;  // 0 when the server is preempted or simply absent
};

/// The calendar emptied while entities were still queued for resources or
/// behind a closed valve.
class DeadlockError : public Error {
 public:
  DeadlockError(double at, std::vector<WaitEdge> edges, std::vector<std::uint64_t> cycle,
                std::vector<std::uint64_t> blocked);

  double at() const noexcept { return at_; }
  const std::vector<WaitEdge>& wait_graph() const noexcept { return edges_; }
  const std::vector<std::uint64_t>& cycle() const noexcept { return cycle_; }
  const std::vector<std::uint64_t>& blocked() const noexcept { return blocked_; }

 private:
  double at_;
  std::vector<WaitEdge> edges_;
  std::vector<std::uint64_t> cycle_;
  std::vector<std::uint64_t> blocked_;
};

}  // namespace berthsim
