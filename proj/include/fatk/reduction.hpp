#pragma once

// Beta-reduction: single normal-order steps, fueled normalization with a
// machine-checkable trace, eta-expansion, and normal-form testing.
//
// Redex paths are child-index sequences: App fun=0 arg=1; TApp fun=0;
// Lam/TLam body=0. Annotations and constant formulas hold no redexes.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fatk/syntax.hpp"
#include "fatk/util.hpp"

namespace fatk {

struct Fuel {
  int max_steps = 10000;
};

enum class StepRule { BetaTerm, BetaAtom, EtaExpand };

inline const char* step_rule_name(StepRule r) {
  switch (r) {
    case StepRule::BetaTerm: return "beta-term";
    case StepRule::BetaAtom: return "beta-atom";
    case StepRule::EtaExpand: return "eta-expand";
  }
  return "?";
}

struct StepRecord {
  std::vector<int> path;
  StepRule rule;
  Term result;  // whole term after the step
};

enum class TraceStatus { Normalized, FuelExhausted };

struct ReductionTrace {
  Term start;
  std::vector<StepRecord> steps;
  TraceStatus status;

  const Term& final() const { return steps.empty() ? start : steps.back().result; }
};

namespace detail {

// Leftmost-outermost redex; returns its path and rule.
inline bool locate_redex(const Term& t, std::vector<int>& path) {
  switch (t.kind()) {
    case Term::Kind::FreeVar:
    case Term::Kind::BoundVar:
    case Term::Kind::Const:
      return false;
    case Term::Kind::App:
      if (t.fun().kind() == Term::Kind::Lam) return true;
      path.push_back(0);
      if (locate_redex(t.fun(), path)) return true;
      path.back() = 1;
      if (locate_redex(t.arg(), path)) return true;
      path.pop_back();
      return false;
    case Term::Kind::TApp:
      if (t.fun().kind() == Term::Kind::TLam) return true;
      path.push_back(0);
      if (locate_redex(t.fun(), path)) return true;
      path.pop_back();
      return false;
    case Term::Kind::Lam:
    case Term::Kind::TLam:
      path.push_back(0);
      if (locate_redex(t.body(), path)) return true;
      path.pop_back();
      return false;
  }
  return false;
}

inline std::optional<Term> contract(const Term& t, StepRule rule) {
  switch (rule) {
    case StepRule::BetaTerm:
      if (t.kind() != Term::Kind::App || t.fun().kind() != Term::Kind::Lam)
        return std::nullopt;
      return instantiate_var(t.fun().body(), t.arg());
    case StepRule::BetaAtom:
      if (t.kind() != Term::Kind::TApp || t.fun().kind() != Term::Kind::TLam)
        return std::nullopt;
      return instantiate_atom(t.fun().body(), t.atom_ref());
    case StepRule::EtaExpand:
      return std::nullopt;  // handled by apply_rule_at
  }
  return std::nullopt;
}

}  // namespace detail

inline bool is_normal(const Term& t) {
  std::vector<int> path;
  return !detail::locate_redex(t, path);
}

// eta-expansion: t => \x. t x  (or /\X. t @X). The binder is fresh for t by
// construction; the hint is only a display name.
enum class EtaMode { TermMode, AtomMode };

inline Term eta_expand(const Term& t, EtaMode mode) {
  if (mode == EtaMode::TermMode) {
    Term lifted = detail::shift_term(t, 1, 0, 0, 0);
    return Term::lam_raw("x", std::nullopt,
                         app(std::move(lifted), Term::bound_var(0)));
  }
  Term lifted = detail::shift_term(t, 0, 0, 1, 0);
  return Term::tlam_raw("X", tapp(std::move(lifted), AtomRef::bound(0)));
}

// Rewrite the subterm at `path` by `rule`; nullopt when the path or the shape
// does not match. EtaExpand accepts either mode (the record's result
// disambiguates when validating traces).
inline std::optional<Term> apply_rule_at(const Term& t,
                                         const std::vector<int>& path,
                                         StepRule rule, size_t at = 0) {
  if (at == path.size()) {
    if (rule == StepRule::EtaExpand) return std::nullopt;  // needs mode; see below
    return detail::contract(t, rule);
  }
  int idx = path[at];
  switch (t.kind()) {
    case Term::Kind::App: {
      if (idx == 0) {
        auto sub = apply_rule_at(t.fun(), path, rule, at + 1);
        if (!sub) return std::nullopt;
        return app(std::move(*sub), t.arg());
      }
      if (idx == 1) {
        auto sub = apply_rule_at(t.arg(), path, rule, at + 1);
        if (!sub) return std::nullopt;
        return app(t.fun(), std::move(*sub));
      }
      return std::nullopt;
    }
    case Term::Kind::TApp: {
      if (idx != 0) return std::nullopt;
      auto sub = apply_rule_at(t.fun(), path, rule, at + 1);
      if (!sub) return std::nullopt;
      return tapp(std::move(*sub), t.atom_ref());
    }
    case Term::Kind::Lam: {
      if (idx != 0) return std::nullopt;
      auto sub = apply_rule_at(t.body(), path, rule, at + 1);
      if (!sub) return std::nullopt;
      return Term::lam_raw(t.binder_hint(), t.annotation(), std::move(*sub));
    }
    case Term::Kind::TLam: {
      if (idx != 0) return std::nullopt;
      auto sub = apply_rule_at(t.body(), path, rule, at + 1);
      if (!sub) return std::nullopt;
      return Term::tlam_raw(t.binder_hint(), std::move(*sub));
    }
    default:
      return std::nullopt;
  }
}

// One normal-order step; nullopt when t is already normal.
inline std::optional<StepRecord> step(const Term& t) {
  std::vector<int> path;
  if (!detail::locate_redex(t, path)) return std::nullopt;
  Term cur = t;
  for (int idx : path) {
    switch (cur.kind()) {
      case Term::Kind::App:
        cur = idx == 0 ? cur.fun() : cur.arg();
        break;
      case Term::Kind::TApp:
        cur = cur.fun();
        break;
      case Term::Kind::Lam:
      case Term::Kind::TLam:
        cur = cur.body();
        break;
      default:
        return std::nullopt;
    }
  }
  StepRule rule = cur.kind() == Term::Kind::TApp ? StepRule::BetaAtom
                                                 : StepRule::BetaTerm;
  auto result = apply_rule_at(t, path, rule);
  if (!result) return std::nullopt;
  return StepRecord{std::move(path), rule, std::move(*result)};
}

// Iterated normal-order reduction. Every step is recorded; FuelExhausted is a
// status, not an error.
inline ReductionTrace normalize(const Term& t, Fuel fuel) {
  if (fuel.max_steps < 1) throw BudgetError("fuel must be >= 1");
  ReductionTrace trace{t, {}, TraceStatus::Normalized};
  Term cur = t;
  for (int i = 0; i < fuel.max_steps; ++i) {
    auto s = step(cur);
    if (!s) {
      trace.status = TraceStatus::Normalized;
      return trace;
    }
    cur = s->result;
    trace.steps.push_back(std::move(*s));
  }
  trace.status = is_normal(cur) ? TraceStatus::Normalized
                                : TraceStatus::FuelExhausted;
  return trace;
}

// Validate a trace: each step's result must arise from its predecessor by the
// recorded rule at the recorded path, and a Normalized trace must end normal.
inline bool replay_trace(const ReductionTrace& trace) {
  Term cur = trace.start;
  for (const auto& s : trace.steps) {
    if (s.rule == StepRule::EtaExpand) {
      // Applied only at the top by the I-phase checker.
      if (!s.path.empty()) return false;
      if (!(s.result == eta_expand(cur, EtaMode::TermMode)) &&
          !(s.result == eta_expand(cur, EtaMode::AtomMode)))
        return false;
    } else {
      auto next = apply_rule_at(cur, s.path, s.rule);
      if (!next || !(*next == s.result)) return false;
    }
    cur = s.result;
  }
  if (trace.status == TraceStatus::Normalized && !is_normal(cur)) return false;
  return true;
}

}  // namespace fatk
