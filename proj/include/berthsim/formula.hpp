#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace berthsim {

/// Name resolution for formula evaluation. Names starting with "e." are
/// entity attributes; everything else is a state variable.
class FormulaScope {
 public:
  virtual ~FormulaScope() = default;
  virtual double get(std::string_view name) const = 0;
  virtual void set(std::string_view name, double value) = 0;
};

/// Arithmetic/logical formulas over attributes and state variables.
///
///   stmt   := name '=' expr | expr
///   source := stmt (';' stmt)*
///
/// Operators: || && ! == != < <= > >= + - * / % unary-, parentheses,
/// literals true/false, and the functions min, max, abs. Booleans are 1/0.
class Formula {
 public:
  Formula();
  ~Formula();
  Formula(const Formula&);
  Formula& operator=(const Formula&);
  Formula(Formula&&) noexcept;
  Formula& operator=(Formula&&) noexcept;

  /// Throws Error(PredicateEvalError) with the column of the fault.
  static Formula compile(std::string_view source);

  /// Runs every statement; returns the value of the last one.
  double run(FormulaScope& scope) const;
  /// Evaluates a single side-effect-free expression as a predicate.
  bool test(const FormulaScope& scope) const;

  bool is_predicate() const;
  /// State-variable names read or written (attributes excluded).
  std::vector<std::string> state_names() const;
  const std::string& source() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

inline bool is_attribute_name(std::string_view name) { return name.size() > 2 && name.substr(0, 2) == "e."; }

}  // namespace berthsim
