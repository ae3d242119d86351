#pragma once

#include <set>
#include <stdexcept>
#include <string>
#include <variant>

namespace fatk {

// Thrown when a caller violates an operation's contract (open term where a
// closed one is required, zero budgets, free variables outside the context).
struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct OpenTermError : UsageError {
  using UsageError::UsageError;
};

struct BudgetError : UsageError {
  using UsageError::UsageError;
};

struct UnboundVarError : UsageError {
  using UsageError::UsageError;
};

// Value-or-error result used by the checker; errors are ordinary outcomes
// there, not exceptions.
template <class T, class E>
class Expected {
 public:
  Expected(T v) : v_(std::in_place_index<0>, std::move(v)) {}
  Expected(E e) : v_(std::in_place_index<1>, std::move(e)) {}

  bool ok() const { return v_.index() == 0; }
  explicit operator bool() const { return ok(); }

  const T& value() const& { return std::get<0>(v_); }
  T& value() & { return std::get<0>(v_); }
  T&& value() && { return std::get<0>(std::move(v_)); }
  const E& error() const { return std::get<1>(v_); }

 private:
  std::variant<T, E> v_;
};

// First name derived from `base` that is not in `avoid`: base, base2, base3...
inline std::string freshen(const std::string& base,
                           const std::set<std::string>& avoid) {
  if (!avoid.count(base)) return base;
  for (int i = 2;; ++i) {
    std::string candidate = base + std::to_string(i);
    if (!avoid.count(candidate)) return candidate;
  }
}

}  // namespace fatk
