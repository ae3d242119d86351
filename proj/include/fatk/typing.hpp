#pragma once

// Bidirectional derivability for ILat sequents: checking mode for
// abstractions against their connective, synthesis for spines headed by a
// variable or constant. Complete for beta-normal terms and for terms whose
// lambda binders are all annotated. `replay` is the trusted kernel: it
// revalidates a finished Derivation node by node, independently of check.

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fatk/syntax.hpp"
#include "fatk/util.hpp"

namespace fatk {

struct TypeError {
  enum class Kind {
    UnboundVariable,
    AtomRestrictionViolated,
    SideConditionViolated,
    Mismatch,
    CannotSynthesize,
    DuplicateVariable,
  };
  Kind kind;
  std::string message;
  std::optional<Formula> expected;
  std::optional<Formula> actual;
};

// Ordered entries, distinct variables. Values are immutable; `extended`
// returns a copy.
class Context {
 public:
  static Context empty() { return Context(); }

  // Unchecked construction (deserialization, forged-derivation tests).
  // Well-formedness is what `replay` verifies.
  static Context from_entries(
      std::vector<std::pair<std::string, Formula>> entries) {
    Context c;
    c.entries_ = std::move(entries);
    for (const auto& [_, f] : c.entries_)
      for (const auto& a : free_atoms(f)) c.pfv_.insert(a);
    return c;
  }

  bool contains(const std::string& name) const {
    for (const auto& [n, _] : entries_)
      if (n == name) return true;
    return false;
  }

  std::optional<Formula> lookup(const std::string& name) const {
    for (const auto& [n, f] : entries_)
      if (n == name) return f;
    return std::nullopt;
  }

  Expected<Context, TypeError> extended(const std::string& name,
                                        const Formula& f) const {
    if (contains(name))
      return TypeError{TypeError::Kind::DuplicateVariable,
                       "duplicate context variable '" + name + "'",
                       {},
                       {}};
    Context c = *this;
    c.entries_.emplace_back(name, f);
    for (const auto& a : free_atoms(f)) c.pfv_.insert(a);
    return c;
  }

  const std::vector<std::pair<std::string, Formula>>& entries() const {
    return entries_;
  }
  size_t size() const { return entries_.size(); }

  // PFV(ctx): free atoms of all formulas, maintained eagerly.
  const std::set<std::string>& pfv() const { return pfv_; }

  std::set<std::string> names() const {
    std::set<std::string> out;
    for (const auto& [n, _] : entries_) out.insert(n);
    return out;
  }

  bool well_formed() const {
    std::set<std::string> seen;
    for (const auto& [n, _] : entries_)
      if (!seen.insert(n).second) return false;
    return true;
  }

  friend bool operator==(const Context& a, const Context& b) {
    if (a.entries_.size() != b.entries_.size()) return false;
    for (size_t i = 0; i < a.entries_.size(); ++i) {
      if (a.entries_[i].first != b.entries_[i].first) return false;
      if (!(a.entries_[i].second == b.entries_[i].second)) return false;
    }
    return true;
  }
  friend bool operator!=(const Context& a, const Context& b) {
    return !(a == b);
  }

 private:
  std::vector<std::pair<std::string, Formula>> entries_;
  std::set<std::string> pfv_;
};

inline std::string to_string(const Context& ctx) {
  std::string out;
  for (size_t i = 0; i < ctx.entries().size(); ++i) {
    if (i) out += ", ";
    out += ctx.entries()[i].first + ":" + to_string(ctx.entries()[i].second);
  }
  return out;
}

struct Judgment {
  Context ctx;
  Term term;
  Formula formula;
};

inline std::string to_string(const Judgment& j) {
  std::string c = to_string(j.ctx);
  return (c.empty() ? "|- " : c + " |- ") + to_string(j.term) + " : " +
         to_string(j.formula);
}

enum class Rule { AxVar, AxConst, ArrowI, ArrowE, ForallI, ForallE };

inline const char* rule_name(Rule r) {
  switch (r) {
    case Rule::AxVar: return "ax-var";
    case Rule::AxConst: return "ax-const";
    case Rule::ArrowI: return "arrow-i";
    case Rule::ArrowE: return "arrow-e";
    case Rule::ForallI: return "forall-i";
    case Rule::ForallE: return "forall-e";
  }
  return "?";
}

struct Derivation {
  Rule rule;
  Judgment conclusion;
  std::vector<Derivation> premises;
  // ArrowI: the variable the premise opens the body with; ForallI: the atom.
  std::string opened;
};

using TypingResult = Expected<Derivation, TypeError>;

inline TypingResult check(const Context& ctx, const Term& t, const Formula& a);

namespace detail {

inline TypeError mismatch(const Formula& expected, const Formula& actual,
                          const std::string& what) {
  return TypeError{TypeError::Kind::Mismatch,
                   "mismatch: expected " + to_string(expected) + ", got " +
                       to_string(actual) + (what.empty() ? "" : " (" + what + ")"),
                   expected, actual};
}

inline void require_locally_closed(const Term& t) {
  if (!locally_closed(t))
    throw UsageError("term is not locally closed (dangling bound index)");
}

}  // namespace detail

inline TypingResult synthesize(const Context& ctx, const Term& t) {
  switch (t.kind()) {
    case Term::Kind::FreeVar: {
      auto f = ctx.lookup(t.var_name());
      if (!f)
        return TypeError{TypeError::Kind::UnboundVariable,
                         "unbound variable '" + t.var_name() + "'",
                         {},
                         {}};
      return Derivation{Rule::AxVar, Judgment{ctx, t, *f}, {}, ""};
    }
    case Term::Kind::BoundVar:
      detail::require_locally_closed(t);
      return TypeError{TypeError::Kind::UnboundVariable, "dangling index", {}, {}};
    case Term::Kind::Const:
      return Derivation{Rule::AxConst, Judgment{ctx, t, t.const_formula()}, {},
                        ""};
    case Term::Kind::Lam: {
      if (!t.annotation())
        return TypeError{TypeError::Kind::CannotSynthesize,
                         "cannot synthesize: unannotated lambda",
                         {},
                         {}};
      const Formula& dom = *t.annotation();
      std::set<std::string> avoid = ctx.names();
      detail::term_fv_into(t.body(), avoid);
      std::string x =
          freshen(t.binder_hint().empty() ? "x" : t.binder_hint(), avoid);
      auto ctx2 = ctx.extended(x, dom);
      auto sub = synthesize(ctx2.value(), open_var(t.body(), x));
      if (!sub) return sub.error();
      Formula result = arrow(dom, sub.value().conclusion.formula);
      return Derivation{Rule::ArrowI, Judgment{ctx, t, result},
                        {std::move(sub).value()}, x};
    }
    case Term::Kind::TLam: {
      std::set<std::string> avoid = ctx.pfv();
      detail::term_free_atoms_into(t, avoid);
      std::string z =
          freshen(t.binder_hint().empty() ? "X" : t.binder_hint(), avoid);
      auto sub = synthesize(ctx, open_atom_in_term(t.body(), z));
      if (!sub) return sub.error();
      Formula result = Formula::forall_raw(
          t.binder_hint().empty() ? "X" : t.binder_hint(),
          close_atom(sub.value().conclusion.formula, z));
      return Derivation{Rule::ForallI, Judgment{ctx, t, result},
                        {std::move(sub).value()}, z};
    }
    case Term::Kind::App: {
      auto df = synthesize(ctx, t.fun());
      if (!df) return df.error();
      const Formula& f = df.value().conclusion.formula;
      if (f.kind() != Formula::Kind::Arrow)
        return TypeError{TypeError::Kind::Mismatch,
                         "mismatch: applied a term of non-function type " +
                             to_string(f),
                         {},
                         f};
      auto da = check(ctx, t.arg(), f.left());
      if (!da) return da.error();
      Formula result = f.right();
      return Derivation{Rule::ArrowE, Judgment{ctx, t, result},
                        {std::move(df).value(), std::move(da).value()},
                        ""};
    }
    case Term::Kind::TApp: {
      if (t.atom_ref().is_bound()) {
        detail::require_locally_closed(t);
        return TypeError{TypeError::Kind::AtomRestrictionViolated,
                         "dangling atom index in application",
                         {},
                         {}};
      }
      auto df = synthesize(ctx, t.fun());
      if (!df) return df.error();
      const Formula& f = df.value().conclusion.formula;
      if (f.kind() != Formula::Kind::Forall)
        return TypeError{
            TypeError::Kind::Mismatch,
            "mismatch: atom application to a term of non-forall type " +
                to_string(f),
            {},
            f};
      Formula result = open_atom(f.body(), t.atom_ref());
      return Derivation{Rule::ForallE, Judgment{ctx, t, result},
                        {std::move(df).value()}, ""};
    }
  }
  return TypeError{TypeError::Kind::CannotSynthesize, "unreachable", {}, {}};
}

inline TypingResult check(const Context& ctx, const Term& t, const Formula& a) {
  switch (t.kind()) {
    case Term::Kind::Lam: {
      if (a.kind() != Formula::Kind::Arrow)
        return TypeError{TypeError::Kind::Mismatch,
                         "mismatch: lambda against non-function type " +
                             to_string(a),
                         a,
                         {}};
      Formula dom = a.left(), cod = a.right();
      if (t.annotation() && !(*t.annotation() == dom))
        return detail::mismatch(dom, *t.annotation(), "binder annotation");
      std::set<std::string> avoid = ctx.names();
      detail::term_fv_into(t.body(), avoid);
      std::string x =
          freshen(t.binder_hint().empty() ? "x" : t.binder_hint(), avoid);
      auto ctx2 = ctx.extended(x, dom);
      auto sub = check(ctx2.value(), open_var(t.body(), x), cod);
      if (!sub) return sub.error();
      return Derivation{Rule::ArrowI, Judgment{ctx, t, a},
                        {std::move(sub).value()}, x};
    }
    case Term::Kind::TLam: {
      if (a.kind() != Formula::Kind::Forall)
        return TypeError{TypeError::Kind::Mismatch,
                         "mismatch: type abstraction against non-forall type " +
                             to_string(a),
                         a,
                         {}};
      std::set<std::string> avoid = ctx.pfv();
      detail::term_free_atoms_into(t, avoid);
      detail::free_atoms_into(a, avoid);
      std::string z =
          freshen(t.binder_hint().empty() ? "X" : t.binder_hint(), avoid);
      auto sub = check(ctx, open_atom_in_term(t.body(), z), open_atom(a.body(), z));
      if (!sub) {
        // The forall-i side condition is the one failure alpha-renaming can
        // hide: if the intended binder name is in PFV(ctx) and keeping it
        // would have made the premise check, report it as such.
        const std::string& h = t.binder_hint();
        if (!h.empty() && ctx.pfv().count(h)) {
          auto diag =
              check(ctx, open_atom_in_term(t.body(), h), open_atom(a.body(), h));
          if (diag.ok())
            return TypeError{TypeError::Kind::SideConditionViolated,
                             "forall-i side condition violated: '" + h +
                                 "' occurs in PFV(context)",
                             {},
                             {}};
        }
        return sub.error();
      }
      return Derivation{Rule::ForallI, Judgment{ctx, t, a},
                        {std::move(sub).value()}, z};
    }
    default: {
      auto d = synthesize(ctx, t);
      if (!d) return d.error();
      if (!(d.value().conclusion.formula == a))
        return detail::mismatch(a, d.value().conclusion.formula, "");
      return d;
    }
  }
}

// ---------------------------------------------------------------------------
// Derivation replay (trusted kernel)
// ---------------------------------------------------------------------------

namespace detail {

inline bool replay_node(const Derivation& d, std::vector<size_t>& path,
                        std::vector<size_t>* offending) {
  auto fail = [&]() {
    if (offending) *offending = path;
    return false;
  };
  const Context& ctx = d.conclusion.ctx;
  const Term& t = d.conclusion.term;
  const Formula& a = d.conclusion.formula;
  if (!ctx.well_formed()) return fail();

  auto recurse = [&](size_t i) {
    path.push_back(i);
    bool ok = replay_node(d.premises[i], path, offending);
    path.pop_back();
    return ok;
  };

  switch (d.rule) {
    case Rule::AxVar: {
      if (!d.premises.empty() || t.kind() != Term::Kind::FreeVar) return fail();
      auto f = ctx.lookup(t.var_name());
      return (f && *f == a) ? true : fail();
    }
    case Rule::AxConst: {
      if (!d.premises.empty() || t.kind() != Term::Kind::Const) return fail();
      return t.const_formula() == a ? true : fail();
    }
    case Rule::ArrowI: {
      if (d.premises.size() != 1 || t.kind() != Term::Kind::Lam) return fail();
      if (a.kind() != Formula::Kind::Arrow) return fail();
      Formula dom = a.left(), cod = a.right();
      if (t.annotation() && !(*t.annotation() == dom)) return fail();
      const std::string& x = d.opened;
      if (x.empty() || ctx.contains(x)) return fail();
      if (term_fv(t.body()).count(x)) return fail();
      const Derivation& p = d.premises[0];
      auto ext = ctx.extended(x, dom);
      if (!ext.ok() || p.conclusion.ctx != ext.value()) return fail();
      if (!(p.conclusion.term == open_var(t.body(), x))) return fail();
      if (!(p.conclusion.formula == cod)) return fail();
      return recurse(0);
    }
    case Rule::ArrowE: {
      if (d.premises.size() != 2 || t.kind() != Term::Kind::App) return fail();
      const Derivation& pf = d.premises[0];
      const Derivation& pa = d.premises[1];
      if (pf.conclusion.ctx != ctx || pa.conclusion.ctx != ctx) return fail();
      if (!(pf.conclusion.term == t.fun()) || !(pa.conclusion.term == t.arg()))
        return fail();
      const Formula& f = pf.conclusion.formula;
      if (f.kind() != Formula::Kind::Arrow) return fail();
      if (!(pa.conclusion.formula == f.left())) return fail();
      if (!(f.right() == a)) return fail();
      return recurse(0) && recurse(1);
    }
    case Rule::ForallI: {
      if (d.premises.size() != 1 || t.kind() != Term::Kind::TLam) return fail();
      if (a.kind() != Formula::Kind::Forall) return fail();
      const std::string& z = d.opened;
      if (z.empty()) return fail();
      // The side condition proper, plus the freshness that makes opening
      // injective.
      if (ctx.pfv().count(z)) return fail();
      if (term_free_atoms(t).count(z)) return fail();
      if (free_atoms(a).count(z)) return fail();
      const Derivation& p = d.premises[0];
      if (p.conclusion.ctx != ctx) return fail();
      if (!(p.conclusion.term == open_atom_in_term(t.body(), z))) return fail();
      if (!(p.conclusion.formula == open_atom(a.body(), z))) return fail();
      return recurse(0);
    }
    case Rule::ForallE: {
      if (d.premises.size() != 1 || t.kind() != Term::Kind::TApp) return fail();
      if (t.atom_ref().is_bound()) return fail();  // atom restriction
      const Derivation& p = d.premises[0];
      if (p.conclusion.ctx != ctx) return fail();
      if (!(p.conclusion.term == t.fun())) return fail();
      const Formula& f = p.conclusion.formula;
      if (f.kind() != Formula::Kind::Forall) return fail();
      if (!(open_atom(f.body(), t.atom_ref()) == a)) return fail();
      return recurse(0);
    }
  }
  return fail();
}

}  // namespace detail

// True iff every node is a correct rule instance. On failure `offending`, if
// given, receives the premise-index path of the bad node.
inline bool replay(const Derivation& d, std::vector<size_t>* offending = nullptr) {
  std::vector<size_t> path;
  return detail::replay_node(d, path, offending);
}

inline std::string to_string(const Derivation& d, int indent = 0) {
  std::string out(static_cast<size_t>(indent) * 2, ' ');
  out += std::string(rule_name(d.rule)) + ": " + to_string(d.conclusion) + "\n";
  for (const auto& p : d.premises) out += to_string(p, indent + 1);
  return out;
}

}  // namespace fatk
