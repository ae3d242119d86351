#pragma once

// Proof-theoretic validity over the singleton-monoid phase models:
//
//   outer_v      membership in <A> (normalize, then check the normal form)
//   e_member     elimination-based membership A* with bounded witness sets
//   i_member     introduction-based membership A† (normalize, eta-expand once)
//   q_valid      validity of open terms by substituting witness tuples
//   is_valid     proof-term gate + q_valid
//   extract      the executable content of the completeness theorem
//   enumerate_normal  exhaustive normal proof-term search (also the witness
//                     generator for the checkers)
//
// The "for any" quantifiers of the definitions are finitized honestly: a
// verdict is Certified or Refuted only when backed by replayable evidence,
// BoundedOk when every sampled instance passed, Unknown when fuel or depth
// ran out.

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fatk/reduction.hpp"
#include "fatk/syntax.hpp"
#include "fatk/typing.hpp"
#include "fatk/util.hpp"

namespace fatk {

// The S of the paper-level definitions: constants c{X} with X in S are
// axioms; proof-terms may contain no other constants.
struct AtomicBase {
  std::set<std::string> atoms;

  bool contains(const std::string& name) const { return atoms.count(name) > 0; }
};

struct WitnessBudget {
  int term_size_bound = 7;
  std::set<std::string> atom_sample;  // empty = derive from goal and base
  Fuel fuel{10000};
  int unfold_depth = 8;
  std::vector<std::pair<Term, Formula>> user_witnesses;
};

enum class Status { Certified, Refuted, BoundedOk, Unknown };

inline const char* status_name(Status s) {
  switch (s) {
    case Status::Certified: return "Certified";
    case Status::Refuted: return "Refuted";
    case Status::BoundedOk: return "BoundedOk";
    case Status::Unknown: return "Unknown";
  }
  return "?";
}

enum class Flavor { E, I };

struct Counterexample {
  std::vector<std::string> applied;  // instantiation chain down to the failure
  Term instance;                     // closed term whose final test failed
  Formula at;                        // formula of the failing test
  std::optional<ReductionTrace> trace;
  std::string reason;
};

struct Verdict {
  Status status;
  std::string note;
  std::optional<Derivation> derivation;
  std::optional<ReductionTrace> trace;
  std::optional<Counterexample> counterexample;
  std::vector<std::string> witnesses_tried;
  long fuel_used = 0;
};

inline bool is_proof_term(const Term& t, const AtomicBase& base) {
  switch (t.kind()) {
    case Term::Kind::FreeVar:
    case Term::Kind::BoundVar:
      return true;
    case Term::Kind::Const:
      return t.const_formula().kind() == Formula::Kind::Atom &&
             base.contains(t.const_formula().atom_name());
    case Term::Kind::Lam:
    case Term::Kind::TLam:
      return is_proof_term(t.body(), base);
    case Term::Kind::App:
      return is_proof_term(t.fun(), base) && is_proof_term(t.arg(), base);
    case Term::Kind::TApp:
      return is_proof_term(t.fun(), base);
  }
  return false;
}

// Membership in <A>: t reduces to a normal s with |- s : A derivable. The
// checker is complete for beta-normal terms, so Refuted here is decisive.
inline Verdict outer_v(const Term& t, const Formula& a, Fuel fuel) {
  if (!closed(t))
    throw OpenTermError("outer_v requires a closed term: " + to_string(t));
  ReductionTrace tr = normalize(t, fuel);
  long used = static_cast<long>(tr.steps.size());
  if (tr.status == TraceStatus::FuelExhausted) {
    Verdict v{Status::Unknown, "fuel exhausted before a normal form", {}, tr,
              {}, {}, used};
    return v;
  }
  auto d = check(Context::empty(), tr.final(), a);
  if (d.ok()) {
    return Verdict{Status::Certified,
                   "normalizes to a derivable normal form",
                   std::move(d).value(),
                   std::move(tr),
                   {},
                   {},
                   used};
  }
  Counterexample ce{{},
                    t,
                    a,
                    tr,
                    "normal form " + to_string(tr.final()) +
                        " is not derivable at " + to_string(a) + ": " +
                        d.error().message};
  return Verdict{Status::Refuted,
                 "normal form fails to check",
                 {},
                 std::move(tr),
                 std::move(ce),
                 {},
                 used};
}

namespace detail {

inline bool const_headed_spine(const Term& t) {
  Term cur = t;
  for (;;) {
    switch (cur.kind()) {
      case Term::Kind::Const:
        return true;
      case Term::Kind::App:
      case Term::Kind::TApp:
        cur = cur.fun();
        continue;
      default:
        return false;
    }
  }
}

// Hint-free structural encodings; used as memo keys and for alpha-dedup.
inline void skey(const Formula& f, std::string& out) {
  switch (f.kind()) {
    case Formula::Kind::Atom:
      out += 'A';
      out += f.atom_name();
      out += ';';
      return;
    case Formula::Kind::BoundAtom:
      out += 'B';
      out += std::to_string(f.bound_index());
      out += ';';
      return;
    case Formula::Kind::Arrow:
      out += '>';
      out += '(';
      skey(f.left(), out);
      skey(f.right(), out);
      out += ')';
      return;
    case Formula::Kind::Forall:
      out += 'F';
      out += '(';
      skey(f.body(), out);
      out += ')';
      return;
  }
}

inline void skey(const Term& t, std::string& out, bool with_tags = true) {
  switch (t.kind()) {
    case Term::Kind::FreeVar:
      out += 'v';
      out += t.var_name();
      if (with_tags && t.tag()) out += '#' + std::to_string(*t.tag());
      out += ';';
      return;
    case Term::Kind::BoundVar:
      out += 'b';
      out += std::to_string(t.bound_index());
      out += ';';
      return;
    case Term::Kind::Const:
      out += 'c';
      out += '(';
      skey(t.const_formula(), out);
      out += ')';
      if (with_tags && t.tag()) out += '#' + std::to_string(*t.tag());
      return;
    case Term::Kind::Lam:
      out += 'L';
      out += '(';
      if (t.annotation()) skey(*t.annotation(), out);
      out += ':';
      skey(t.body(), out, with_tags);
      out += ')';
      return;
    case Term::Kind::TLam:
      out += 'G';
      out += '(';
      skey(t.body(), out, with_tags);
      out += ')';
      return;
    case Term::Kind::App:
      out += '@';
      out += '(';
      skey(t.fun(), out, with_tags);
      skey(t.arg(), out, with_tags);
      out += ')';
      return;
    case Term::Kind::TApp:
      out += 'T';
      out += '(';
      skey(t.fun(), out, with_tags);
      if (t.atom_ref().is_bound())
        out += 'B' + std::to_string(t.atom_ref().index());
      else
        out += 'A' + t.atom_ref().name();
      out += ')';
      return;
  }
}

inline std::string term_key(const Term& t, bool with_tags = true) {
  std::string out;
  skey(t, out, with_tags);
  return out;
}

inline std::string formula_key(const Formula& f) {
  std::string out;
  skey(f, out);
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Exhaustive enumeration of beta-normal proof-terms
// ---------------------------------------------------------------------------

namespace detail {

// Goal-directed search in spine form: a normal inhabitant is an abstraction
// matched against its connective or a head (context variable / base
// constant) applied to normal arguments and atoms. Atom instantiations are
// drawn from the atoms of the problem (context, goal, base) plus binders
// opened along the way, so the result is exhaustive relative to that
// alphabet.
class Enumerator {
 public:
  Enumerator(const Context& ctx, const AtomicBase& base)
      : root_ctx_(ctx), base_(base) {}

  std::vector<Term> run(const Formula& goal, int size_bound) {
    std::set<std::string> scope = root_ctx_.pfv();
    free_atoms_into(goal, scope);
    for (const auto& a : base_.atoms) scope.insert(a);
    std::vector<Term> out;
    std::set<std::string> seen;
    for (int n = 1; n <= size_bound; ++n) {
      for (const Term& t : exact(root_ctx_, goal, n, scope)) {
        std::string k = term_key(t);
        if (seen.insert(k).second) out.push_back(t);
      }
    }
    std::sort(out.begin(), out.end(), [](const Term& a, const Term& b) {
      return to_string(a) < to_string(b);
    });
    return out;
  }

 private:
  const std::vector<Term>& exact(const Context& ctx, const Formula& goal,
                                 int n, const std::set<std::string>& scope) {
    std::string key = formula_key(goal) + "|" + std::to_string(n) + "|";
    for (const auto& [name, f] : ctx.entries())
      key += name + ":" + formula_key(f) + ",";
    key += "|";
    for (const auto& s : scope) key += s + ",";
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;

    std::vector<Term> out;
    if (n >= 1) {
      if (n >= 2 && goal.kind() == Formula::Kind::Arrow) {
        std::string x = freshen("x", ctx.names());
        Context inner = ctx.extended(x, goal.left()).value();
        for (const Term& b : exact(inner, goal.right(), n - 1, scope))
          out.push_back(lam(x, std::nullopt, b));
      }
      if (n >= 2 && goal.kind() == Formula::Kind::Forall) {
        std::set<std::string> avoid = scope;
        for (const auto& a : ctx.pfv()) avoid.insert(a);
        free_atoms_into(goal, avoid);
        std::string z = freshen(
            goal.binder_hint().empty() ? "X" : goal.binder_hint(), avoid);
        std::set<std::string> inner_scope = scope;
        inner_scope.insert(z);
        for (const Term& b :
             exact(ctx, open_atom(goal.body(), z), n - 1, inner_scope))
          out.push_back(tlam(z, b));
      }
      for (const auto& [name, f] : ctx.entries())
        spine(ctx, Term::free_var(name), f, 1, n, goal, scope, out);
      for (const auto& a : base_.atoms)
        spine(ctx, Term::constant(Formula::atom(a)), Formula::atom(a), 1, n,
              goal, scope, out);
    }
    auto [pos, _] = memo_.emplace(std::move(key), std::move(out));
    return pos->second;
  }

  void spine(const Context& ctx, const Term& head, const Formula& type,
             int used, int limit, const Formula& goal,
             const std::set<std::string>& scope, std::vector<Term>& out) {
    if (used == limit && type == goal) out.push_back(head);
    if (used >= limit) return;
    if (type.kind() == Formula::Kind::Arrow) {
      for (int arg_size = 1; arg_size <= limit - used - 1; ++arg_size) {
        for (const Term& u : exact(ctx, type.left(), arg_size, scope))
          spine(ctx, app(head, u), type.right(), used + 1 + arg_size, limit,
                goal, scope, out);
      }
    } else if (type.kind() == Formula::Kind::Forall) {
      for (const auto& y : scope)
        spine(ctx, tapp(head, y), open_atom(type.body(), y), used + 1, limit,
              goal, scope, out);
    }
  }

  Context root_ctx_;
  AtomicBase base_;
  std::map<std::string, std::vector<Term>> memo_;
};

}  // namespace detail

// All beta-normal proof-terms t with node_count(t) <= size_bound and
// check(ctx, t, A) derivable, up to alpha-equivalence, sorted by canonical
// form. Atom instantiations range over the atoms of (ctx, A, base) plus
// locally opened binders.
inline std::vector<Term> enumerate_normal(const Context& ctx,
                                          const Formula& goal,
                                          const AtomicBase& base,
                                          int size_bound) {
  if (size_bound < 1) throw BudgetError("size bound must be >= 1");
  std::string key = detail::formula_key(goal) + "!" + std::to_string(size_bound) + "!";
  for (const auto& [name, f] : ctx.entries())
    key += name + ":" + detail::formula_key(f) + ",";
  key += "!";
  for (const auto& a : base.atoms) key += a + ",";

  static std::mutex mu;
  static std::map<std::string, std::shared_ptr<const std::vector<Term>>> cache;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return *it->second;
  }
  auto result = std::make_shared<const std::vector<Term>>(
      detail::Enumerator(ctx, base).run(goal, size_bound));
  {
    std::lock_guard<std::mutex> lock(mu);
    cache.emplace(std::move(key), result);
  }
  return *result;
}

// ---------------------------------------------------------------------------
// E- and I-phase membership
// ---------------------------------------------------------------------------

namespace detail {

inline void validate_budget(const WitnessBudget& b) {
  if (b.term_size_bound < 1 || b.fuel.max_steps < 1 || b.unfold_depth < 1)
    throw BudgetError("witness budget bounds must be positive");
}

class MembershipEval {
 public:
  MembershipEval(Flavor flavor, const AtomicBase& base,
                 const WitnessBudget& budget)
      : flavor_(flavor), base_(base), budget_(budget) {}

  Verdict run(const Term& t, const Formula& a) {
    if (!closed(t))
      throw OpenTermError("membership requires a closed term: " + to_string(t));
    validate_budget(budget_);
    Verdict v = rec(t, a, 0, {});
    v.witnesses_tried.assign(tried_.begin(), tried_.end());
    v.fuel_used = fuel_used_;
    return v;
  }

 private:
  Verdict rec(const Term& t, const Formula& a, int depth,
              std::vector<std::string> chain) {
    if (a.kind() == Formula::Kind::Atom) return outer(t, a, chain);
    if (depth >= budget_.unfold_depth)
      return Verdict{Status::Unknown,
                     "unfold depth exhausted at " + to_string(a),
                     {}, {}, {}, {}, 0};

    bool sub_unknown = false;
    Term subject = t;  // E tests t directly; I tests the normal form

    if (flavor_ == Flavor::I) {
      ReductionTrace tr = normalize(t, budget_.fuel);
      fuel_used_ += static_cast<long>(tr.steps.size());
      if (tr.status == TraceStatus::FuelExhausted)
        return Verdict{Status::Unknown,
                       "normalization fuel exhausted", {}, std::move(tr),
                       {}, {}, 0};
      subject = tr.final();
      // The eta-expansion of the definition: subject x [x := s] is subject s,
      // so the tests below apply subject directly.
    }

    if (a.kind() == Formula::Kind::Arrow) {
      for (const Term& w : witnesses(a.left())) {
        std::vector<std::string> chain2 = chain;
        chain2.push_back("apply " + to_string(w) + " : " + to_string(a.left()));
        Verdict v = rec(app(subject, w), a.right(), depth + 1, std::move(chain2));
        if (v.status == Status::Refuted) return v;
        if (v.status == Status::Unknown) sub_unknown = true;
      }
    } else {  // Forall
      for (const auto& y : sample(a, t)) {
        std::vector<std::string> chain2 = chain;
        chain2.push_back("instantiate @" + y);
        Verdict v = rec(tapp(subject, y), open_atom(a.body(), y), depth + 1,
                        std::move(chain2));
        if (v.status == Status::Refuted) return v;
        if (v.status == Status::Unknown) sub_unknown = true;
      }
    }

    // Certification: a constant-headed spine in <A> is in the set, and any
    // derivable term is (soundness). Anything else stays a bounded claim.
    if (const_headed_spine(subject)) {
      Verdict ov = outer_v(subject, a, budget_.fuel);
      fuel_used_ += ov.fuel_used;
      if (ov.status == Status::Certified) {
        ov.note = "constant-headed spine with a derivable normal form";
        return ov;
      }
    }
    auto d = check(Context::empty(), t, a);
    if (d.ok())
      return Verdict{Status::Certified, "derivable, hence valid",
                     std::move(d).value(), {}, {}, {}, 0};
    if (sub_unknown)
      return Verdict{Status::Unknown, "a sampled instance ran out of fuel",
                     {}, {}, {}, {}, 0};
    return Verdict{Status::BoundedOk, "all sampled instances passed",
                   {}, {}, {}, {}, 0};
  }

  Verdict outer(const Term& t, const Formula& a,
                const std::vector<std::string>& chain) {
    Verdict v = outer_v(t, a, budget_.fuel);
    fuel_used_ += v.fuel_used;
    if (v.status == Status::Refuted && v.counterexample)
      v.counterexample->applied = chain;
    return v;
  }

  // Witness set for "for any s in B*": the constant c{B} (what the proofs
  // instantiate), every enumerable normal proof-term of B, and user-supplied
  // witnesses. A user witness may drive refutations only once outer_v
  // certifies it at its declared formula; an unsound witness would make
  // Refuted verdicts meaningless.
  std::vector<Term> witnesses(const Formula& b) {
    std::vector<Term> out;
    std::set<std::string> seen;
    auto add = [&](const Term& w) {
      if (seen.insert(term_key(w, /*with_tags=*/false)).second) {
        out.push_back(w);
        tried_.insert(to_string(w) + " : " + to_string(b));
      }
    };
    add(constant(b));
    for (const Term& w :
         enumerate_normal(Context::empty(), b, base_, budget_.term_size_bound))
      add(w);
    for (const auto& [w, f] : budget_.user_witnesses) {
      if (!(f == b) || !closed(w)) continue;
      Verdict ok = outer_v(w, f, budget_.fuel);
      fuel_used_ += ok.fuel_used;
      if (ok.status == Status::Certified) add(w);
    }
    return out;
  }

  // "for any atom Y": the sample atoms plus one fresh atom; the fresh one is
  // what gives the clause its refutation power on vacuous quantifiers.
  std::set<std::string> sample(const Formula& goal, const Term& t) {
    std::set<std::string> s = budget_.atom_sample;
    if (s.empty()) {
      free_atoms_into(goal, s);
      for (const auto& a : base_.atoms) s.insert(a);
    }
    std::set<std::string> avoid = s;
    free_atoms_into(goal, avoid);
    for (const auto& a : base_.atoms) avoid.insert(a);
    term_free_atoms_into(t, avoid);
    s.insert(freshen("W", avoid));
    return s;
  }

  Flavor flavor_;
  const AtomicBase& base_;
  const WitnessBudget& budget_;
  std::set<std::string> tried_;
  long fuel_used_ = 0;
};

}  // namespace detail

inline Verdict e_member(const Term& t, const Formula& a, const AtomicBase& base,
                        const WitnessBudget& budget) {
  return detail::MembershipEval(Flavor::E, base, budget).run(t, a);
}

inline Verdict i_member(const Term& t, const Formula& a, const AtomicBase& base,
                        const WitnessBudget& budget) {
  return detail::MembershipEval(Flavor::I, base, budget).run(t, a);
}

// ---------------------------------------------------------------------------
// Validity of open terms
// ---------------------------------------------------------------------------

namespace detail {

inline Term strip_tags(const Term& t) {
  switch (t.kind()) {
    case Term::Kind::FreeVar:
      return Term::free_var(t.var_name());
    case Term::Kind::BoundVar:
      return t;
    case Term::Kind::Const:
      return Term::constant(t.const_formula());
    case Term::Kind::Lam:
      return Term::lam_raw(t.binder_hint(), t.annotation(),
                           strip_tags(t.body()));
    case Term::Kind::TLam:
      return Term::tlam_raw(t.binder_hint(), strip_tags(t.body()));
    case Term::Kind::App:
      return app(strip_tags(t.fun()), strip_tags(t.arg()));
    case Term::Kind::TApp:
      return tapp(strip_tags(t.fun()), t.atom_ref());
  }
  return t;
}

}  // namespace detail

// Validity of t : A from ctx, finitized: every tuple of witnesses (one per
// assumption, the tagged constant always among them) is substituted and the
// closed instance run through the membership checker. The constant tuple is
// evaluated first; it is the instance the extraction theorem consumes, so a
// run in which every evaluated tuple certifies is reported Certified even if
// the tuple product was capped.
inline Verdict q_valid(const Term& t, const Context& ctx, const Formula& a,
                       Flavor flavor, const AtomicBase& base,
                       const WitnessBudget& budget) {
  for (const auto& x : term_fv(t))
    if (!ctx.contains(x))
      throw UnboundVarError("free variable '" + x + "' not in context");
  detail::validate_budget(budget);

  auto member = [&](const Term& inst) {
    return detail::MembershipEval(flavor, base, budget).run(inst, a);
  };
  if (ctx.size() == 0) return member(t);

  std::vector<std::vector<Term>> sets;
  for (size_t i = 0; i < ctx.entries().size(); ++i) {
    const Formula& ai = ctx.entries()[i].second;
    std::vector<Term> set;
    std::set<std::string> seen;
    auto add = [&](const Term& w) {
      if (seen.insert(detail::term_key(detail::strip_tags(w))).second)
        set.push_back(w);
    };
    add(constant(ai, static_cast<int>(i)));
    for (const Term& w : enumerate_normal(Context::empty(), ai, base,
                                          budget.term_size_bound))
      add(w);
    for (const auto& [w, f] : budget.user_witnesses) {
      if (!(f == ai) || !closed(w)) continue;
      if (outer_v(w, f, budget.fuel).status == Status::Certified) add(w);
    }
    sets.push_back(std::move(set));
  }

  const size_t kTupleCap = 512;
  std::vector<size_t> odo(sets.size(), 0);
  size_t evaluated = 0;
  bool truncated = false;
  bool any_bounded = false, any_unknown = false;
  std::vector<std::string> tried;
  long fuel_used = 0;

  for (;;) {
    if (evaluated >= kTupleCap) {
      truncated = true;
      break;
    }
    Term inst = t;
    std::string desc;
    for (size_t i = 0; i < sets.size(); ++i) {
      const Term& w = sets[i][odo[i]];
      inst = subst_term(inst, ctx.entries()[i].first, w);
      if (i) desc += ", ";
      desc += ctx.entries()[i].first + " := " + to_string(w);
    }
    Verdict v = member(inst);
    ++evaluated;
    fuel_used += v.fuel_used;
    tried.push_back("[" + desc + "]");
    if (v.status == Status::Refuted) {
      v.note = "refuted instance " + to_string(inst) + " with " + desc;
      v.witnesses_tried = std::move(tried);
      v.fuel_used = fuel_used;
      return v;
    }
    if (v.status == Status::BoundedOk) any_bounded = true;
    if (v.status == Status::Unknown) any_unknown = true;

    size_t i = 0;
    for (; i < sets.size(); ++i) {
      if (++odo[i] < sets[i].size()) break;
      odo[i] = 0;
    }
    if (i == sets.size()) break;
  }

  Verdict out{Status::Certified, "", {}, {}, {}, std::move(tried), fuel_used};
  if (any_unknown) {
    out.status = Status::Unknown;
    out.note = "an instance ran out of fuel";
  } else if (any_bounded) {
    out.status = Status::BoundedOk;
    out.note = "all evaluated instances passed within bounds";
  } else {
    out.note = "all evaluated instances certified";
    if (truncated) out.note += " (tuple product capped)";
  }
  return out;
}

// E/I-validity proper: a proof-term that is q-valid.
inline Verdict is_valid(const Term& t, const Context& ctx, const Formula& a,
                        Flavor flavor, const AtomicBase& base,
                        const WitnessBudget& budget) {
  if (!is_proof_term(t, base)) {
    return Verdict{Status::Refuted,
                   "not a proof-term over base {" +
                       [&] {
                         std::string s;
                         for (const auto& x : base.atoms)
                           s += (s.empty() ? "" : ",") + x;
                         return s;
                       }() +
                       "}",
                   {}, {}, {}, {}, 0};
  }
  return q_valid(t, ctx, a, flavor, base, budget);
}

// ---------------------------------------------------------------------------
// Completeness extraction
// ---------------------------------------------------------------------------

struct ExtractOutcome {
  enum class Status { Ok, FuelExhausted, CheckFailed };
  Status status;
  Term result_term;  // Ok/CheckFailed: the restored normal form
  std::optional<Derivation> derivation;
  ReductionTrace trace;  // reduction of t with variables restored
  std::string diagnostics;
};

namespace detail {

inline bool has_tagged_const(const Term& t) {
  switch (t.kind()) {
    case Term::Kind::FreeVar:
    case Term::Kind::BoundVar:
      return false;
    case Term::Kind::Const:
      return t.tag().has_value();
    case Term::Kind::Lam:
    case Term::Kind::TLam:
      return has_tagged_const(t.body());
    case Term::Kind::App:
      return has_tagged_const(t.fun()) || has_tagged_const(t.arg());
    case Term::Kind::TApp:
      return has_tagged_const(t.fun());
  }
  return false;
}

inline Term untag_consts(const Term& t, const Context& ctx) {
  switch (t.kind()) {
    case Term::Kind::FreeVar:
    case Term::Kind::BoundVar:
      return t;
    case Term::Kind::Const:
      if (t.tag()) {
        size_t i = static_cast<size_t>(*t.tag());
        if (i >= ctx.size())
          throw std::logic_error("extraction tag out of range");
        return Term::free_var(ctx.entries()[i].first);
      }
      return t;
    case Term::Kind::Lam:
      return Term::lam_raw(t.binder_hint(), t.annotation(),
                           untag_consts(t.body(), ctx));
    case Term::Kind::TLam:
      return Term::tlam_raw(t.binder_hint(), untag_consts(t.body(), ctx));
    case Term::Kind::App:
      return app(untag_consts(t.fun(), ctx), untag_consts(t.arg(), ctx));
    case Term::Kind::TApp:
      return tapp(untag_consts(t.fun(), ctx), t.atom_ref());
  }
  return t;
}

}  // namespace detail

// The executable content of the completeness theorem: substitute the tagged
// constant c{A_i} (tag i) for each x_i, normalize, replace the tagged
// constants back with their variables, and check the result. Tags keep the
// un-substitution exact even when assumption formulas coincide.
inline ExtractOutcome extract(const Term& t, const Context& ctx,
                              const Formula& a, Fuel fuel) {
  for (const auto& x : term_fv(t))
    if (!ctx.contains(x))
      throw UnboundVarError("free variable '" + x + "' not in context");
  if (detail::has_tagged_const(t))
    throw UsageError("input term already carries extraction tags");

  Term inst = t;
  for (size_t i = 0; i < ctx.entries().size(); ++i)
    inst = subst_term(inst, ctx.entries()[i].first,
                      constant(ctx.entries()[i].second, static_cast<int>(i)));

  ReductionTrace tr = normalize(inst, fuel);

  // Restore variables throughout the trace; replacing a closed constant leaf
  // by a free variable commutes with every recorded step.
  ReductionTrace restored{detail::untag_consts(tr.start, ctx), {}, tr.status};
  for (const auto& s : tr.steps)
    restored.steps.push_back(
        StepRecord{s.path, s.rule, detail::untag_consts(s.result, ctx)});
  if (!replay_trace(restored))
    throw std::logic_error("restored extraction trace does not replay");

  if (tr.status == TraceStatus::FuelExhausted) {
    return ExtractOutcome{ExtractOutcome::Status::FuelExhausted,
                          restored.final(),
                          {},
                          std::move(restored),
                          "fuel exhausted before a normal form"};
  }
  Term s = restored.final();
  auto d = check(ctx, s, a);
  if (!d.ok()) {
    return ExtractOutcome{ExtractOutcome::Status::CheckFailed, s, {},
                          std::move(restored),
                          "normal form does not check: " + d.error().message};
  }
  return ExtractOutcome{ExtractOutcome::Status::Ok, s, std::move(d).value(),
                        std::move(restored), ""};
}

}  // namespace fatk
