#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace berthsim {

enum class DistKind { constant, uniform, triangular, exponential, bernoulli, discrete };

std::string_view to_string(DistKind kind);

/// A univariate input distribution. Construction does not validate so that
/// the model parser can build whatever the user wrote and report it; call
/// `check()` (or let `sample()` throw) to enforce the invariants.
class Distribution {
 public:
  Distribution() = default;

  static Distribution constant(double v);
  static Distribution uniform(double a, double b);
  static Distribution triangular(double a, double mode, double b);
  static Distribution exponential(double mean);
  static Distribution bernoulli(double p);
  static Distribution discrete(std::vector<std::pair<double, double>> value_weights);

  DistKind kind() const noexcept { return kind_; }
  std::span<const double> params() const noexcept { return params_; }
  const std::vector<std::pair<double, double>>& table() const noexcept { return table_; }

  /// Empty when the parameters satisfy the kind's invariants.
  std::optional<std::string> check() const;

  double mean() const;
  double variance() const;
  double lower() const;
  double upper() const;

  /// Same shape, rescaled so that mean() == target. Constant and
  /// exponential map directly; uniform and triangular scale every
  /// parameter. Bernoulli and discrete cannot be rescaled.
  Distribution scaled_to_mean(double target) const;

  /// Literal form used by the model format: const(30), tri(2,3,4), ...
  std::string to_string() const;

  friend bool operator==(const Distribution&, const Distribution&) = default;

 private:
  DistKind kind_ = DistKind::constant;
  std::vector<double> params_{0.0};
  std::vector<std::pair<double, double>> table_;
};

/// Parses a distribution literal; throws Error(InvalidParams) on malformed
/// text. Parameter invariants are not checked here.
Distribution parse_distribution(std::string_view text);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_number(double v);

/// A named, counter-based random stream. The next variate is a pure
/// function of (master_seed, name, draw_count), so streams are cheap to
/// derive, copy and hand to another worker.
class RandomStream {
 public:
  RandomStream() = default;
  RandomStream(std::uint64_t master_seed, std::string name);

  /// Uniform on [0, 1) with 53 bits of resolution.
  double next_uniform();
  std::uint64_t next_u64();

  std::uint64_t master_seed() const noexcept { return master_seed_; }
  const std::string& name() const noexcept { return name_; }
  std::uint64_t draw_count() const noexcept { return draws_; }

 private:
  std::uint64_t master_seed_ = 0;
  std::string name_;
  std::uint64_t key_ = 0;
  std::uint64_t draws_ = 0;
};

RandomStream derive_stream(std::uint64_t master_seed, std::string_view stream_name);

/// Draws one variate. Every kind consumes exactly one draw from `stream`.
double sample(const Distribution& d, RandomStream& stream);

}  // namespace berthsim
