#pragma once

// The second-order encodings of bot, negation, conjunction, disjunction and
// the atomic existential, together with proof-term combinators for them.
//
// Forall-elimination instantiates atoms only, so eliminating an encoding at a
// composite formula cannot be a single instantiation; the *_inst elaborators
// compile it into atomic instantiations by recursion on the target formula
// (instantiation overflow). io_elab is the same elaborator for bot.

#include <optional>
#include <set>
#include <string>
#include <utility>

#include "fatk/syntax.hpp"

namespace fatk {
namespace enc {

namespace detail_enc {

inline std::string fresh_binder(const std::set<std::string>& avoid) {
  for (const char* c : {"Z", "W", "V", "U"})
    if (!avoid.count(c)) return c;
  for (int i = 2;; ++i) {
    std::string s = "Z" + std::to_string(i);
    if (!avoid.count(s)) return s;
  }
}

inline std::set<std::string> atoms_of(const Formula& a) { return free_atoms(a); }

}  // namespace detail_enc

// Bot := forall Z. Z
inline Formula bot() { return Formula::forall_raw("Z", Formula::bound_atom(0)); }

// ~A := A -> Bot
inline Formula neg(const Formula& a) { return arrow(a, bot()); }

// A & B := forall Z. ((A -> (B -> Z)) -> Z)
// Components may carry dangling indices (the sugar hooks run under parser
// scopes), so they are lifted past the new binder.
inline Formula conj(const Formula& a, const Formula& b) {
  std::set<std::string> avoid = detail_enc::atoms_of(a);
  for (const auto& x : detail_enc::atoms_of(b)) avoid.insert(x);
  std::string z = detail_enc::fresh_binder(avoid);
  Formula a1 = detail::shift_atoms(a, 1, 0);
  Formula b1 = detail::shift_atoms(b, 1, 0);
  return forall(z, arrow(arrow(a1, arrow(b1, atom(z))), atom(z)));
}

// A | B := forall Z. ((A -> Z) -> ((B -> Z) -> Z))
inline Formula disj(const Formula& a, const Formula& b) {
  std::set<std::string> avoid = detail_enc::atoms_of(a);
  for (const auto& x : detail_enc::atoms_of(b)) avoid.insert(x);
  std::string z = detail_enc::fresh_binder(avoid);
  Formula a1 = detail::shift_atoms(a, 1, 0);
  Formula b1 = detail::shift_atoms(b, 1, 0);
  return forall(z, arrow(arrow(a1, atom(z)), arrow(arrow(b1, atom(z)), atom(z))));
}

// exists X. A := forall Y. ((forall X. (A -> Y)) -> Y), Y fresh.
// `body` uses index 0 for the exists binder (what the parser hands over);
// the inner forall realigns it, the outer one needs a lift.
inline Formula exists_raw(const std::string& hint, const Formula& body) {
  std::set<std::string> avoid = free_atoms(body);
  avoid.insert(hint);
  std::string y = detail_enc::fresh_binder(avoid);
  Formula inner = Formula::forall_raw(hint, arrow(body, atom(y)));
  return forall(y, arrow(detail::shift_atoms(inner, 1, 0), atom(y)));
}

// exists `name`. A with `name` free in A.
inline Formula exists(const std::string& name, const Formula& a) {
  return exists_raw(name, close_atom(a, name));
}

inline const SugarExpander& sugar() {
  static const SugarExpander s{
      []() { return bot(); },
      [](Formula a) { return neg(a); },
      [](Formula a, Formula b) { return conj(std::move(a), std::move(b)); },
      [](Formula a, Formula b) { return disj(std::move(a), std::move(b)); },
      [](std::string hint, Formula body) {
        return exists_raw(hint, std::move(body));
      }};
  return s;
}

// ---------------------------------------------------------------------------
// Instantiation-overflow elaborator for Bot
// ---------------------------------------------------------------------------

// t : forall X. X  ~~>  a term of A. Output size is linear in |A|.
inline Term io_elab(const Term& t, const Formula& a) {
  switch (a.kind()) {
    case Formula::Kind::Atom:
      return tapp(t, a.atom_name());
    case Formula::Kind::Arrow: {
      Term body = io_elab(t, a.right());
      return Term::lam_raw("x", std::nullopt, body);  // binder unused
    }
    case Formula::Kind::Forall: {
      std::set<std::string> avoid = term_free_atoms(t);
      detail::free_atoms_into(a, avoid);
      std::string z = freshen(
          a.binder_hint().empty() ? "X" : a.binder_hint(), avoid);
      return tlam(z, io_elab(t, open_atom(a.body(), z)));
    }
    case Formula::Kind::BoundAtom:
      break;
  }
  throw UsageError("io_elab: formula is not locally closed");
}

// ---------------------------------------------------------------------------
// Combinators
// ---------------------------------------------------------------------------

namespace detail_enc {

inline std::string fresh_var(const std::string& base,
                             std::set<std::string>& used) {
  std::string v = freshen(base, used);
  used.insert(v);
  return v;
}

// t : A & B  ~~>  a term of (A -> (B -> C)) -> C, any C.
inline Term and_inst(const Formula& a, const Formula& b, const Term& t,
                     const Formula& c) {
  switch (c.kind()) {
    case Formula::Kind::Atom:
      return tapp(t, c.atom_name());
    case Formula::Kind::Arrow: {
      std::set<std::string> used = term_fv(t);
      std::string h = fresh_var("h", used);
      std::string c1 = fresh_var("c1", used);
      std::string xa = fresh_var("a", used);
      std::string xb = fresh_var("b", used);
      Term reducer =
          lam(xa, a,
              lam(xb, b,
                  app(app(app(var(h), var(xa)), var(xb)), var(c1))));
      Term body = app(and_inst(a, b, t, c.right()), reducer);
      return lam(h, arrow(a, arrow(b, c)), lam(c1, c.left(), body));
    }
    case Formula::Kind::Forall: {
      std::set<std::string> avoid = atoms_of(a);
      for (const auto& x : atoms_of(b)) avoid.insert(x);
      for (const auto& x : atoms_of(c)) avoid.insert(x);
      for (const auto& x : term_free_atoms(t)) avoid.insert(x);
      std::string z = freshen("Z", avoid);
      std::set<std::string> used = term_fv(t);
      std::string h = fresh_var("h", used);
      std::string xa = fresh_var("a", used);
      std::string xb = fresh_var("b", used);
      Term reducer =
          lam(xa, a,
              lam(xb, b, tapp(app(app(var(h), var(xa)), var(xb)), z)));
      Term body = app(and_inst(a, b, t, open_atom(c.body(), z)), reducer);
      return lam(h, arrow(a, arrow(b, c)), tlam(z, body));
    }
    case Formula::Kind::BoundAtom:
      break;
  }
  throw UsageError("and_inst: formula is not locally closed");
}

// t : A | B  ~~>  a term of (A -> C) -> ((B -> C) -> C), any C.
inline Term or_inst(const Formula& a, const Formula& b, const Term& t,
                    const Formula& c) {
  switch (c.kind()) {
    case Formula::Kind::Atom:
      return tapp(t, c.atom_name());
    case Formula::Kind::Arrow: {
      std::set<std::string> used = term_fv(t);
      std::string h = fresh_var("h", used);
      std::string k = fresh_var("k", used);
      std::string c1 = fresh_var("c1", used);
      std::string xa = fresh_var("a", used);
      std::string xb = fresh_var("b", used);
      Term left = lam(xa, a, app(app(var(h), var(xa)), var(c1)));
      Term right = lam(xb, b, app(app(var(k), var(xb)), var(c1)));
      Term body = app(app(or_inst(a, b, t, c.right()), left), right);
      return lam(h, arrow(a, c),
                 lam(k, arrow(b, c), lam(c1, c.left(), body)));
    }
    case Formula::Kind::Forall: {
      std::set<std::string> avoid = atoms_of(a);
      for (const auto& x : atoms_of(b)) avoid.insert(x);
      for (const auto& x : atoms_of(c)) avoid.insert(x);
      for (const auto& x : term_free_atoms(t)) avoid.insert(x);
      std::string z = freshen("Z", avoid);
      std::set<std::string> used = term_fv(t);
      std::string h = fresh_var("h", used);
      std::string k = fresh_var("k", used);
      std::string xa = fresh_var("a", used);
      std::string xb = fresh_var("b", used);
      Term left = lam(xa, a, tapp(app(var(h), var(xa)), z));
      Term right = lam(xb, b, tapp(app(var(k), var(xb)), z));
      Term body = app(app(or_inst(a, b, t, open_atom(c.body(), z)), left), right);
      return lam(h, arrow(a, c), lam(k, arrow(b, c), tlam(z, body)));
    }
    case Formula::Kind::BoundAtom:
      break;
  }
  throw UsageError("or_inst: formula is not locally closed");
}

// t : exists X. A  ~~>  a term of (forall X. (A -> C)) -> C, any C with
// X not free in C.
inline Term ex_inst(const std::string& x, const Formula& a, const Term& t,
                    const Formula& c) {
  switch (c.kind()) {
    case Formula::Kind::Atom:
      return tapp(t, c.atom_name());
    case Formula::Kind::Arrow: {
      std::set<std::string> avoid = atoms_of(a);
      for (const auto& s : atoms_of(c)) avoid.insert(s);
      for (const auto& s : term_free_atoms(t)) avoid.insert(s);
      avoid.insert(x);
      std::string x2 = freshen(x, avoid);
      std::set<std::string> used = term_fv(t);
      std::string h = fresh_var("h", used);
      std::string c1 = fresh_var("c1", used);
      std::string xa = fresh_var("a", used);
      Term arg = tlam(
          x2, lam(xa, subst_atom(a, x, x2),
                  app(app(tapp(var(h), x2), var(xa)), var(c1))));
      Term body = app(ex_inst(x, a, t, c.right()), arg);
      return lam(h, forall(x, arrow(a, c)), lam(c1, c.left(), body));
    }
    case Formula::Kind::Forall: {
      std::set<std::string> avoid = atoms_of(a);
      for (const auto& s : atoms_of(c)) avoid.insert(s);
      for (const auto& s : term_free_atoms(t)) avoid.insert(s);
      avoid.insert(x);
      std::string x2 = freshen(x, avoid);
      avoid.insert(x2);
      std::string z = freshen("Z", avoid);
      std::set<std::string> used = term_fv(t);
      std::string h = fresh_var("h", used);
      std::string xa = fresh_var("a", used);
      Term arg = tlam(x2, lam(xa, subst_atom(a, x, x2),
                              tapp(app(tapp(var(h), x2), var(xa)), z)));
      Term body = app(ex_inst(x, a, t, open_atom(c.body(), z)), arg);
      return lam(h, forall(x, arrow(a, c)), tlam(z, body));
    }
    case Formula::Kind::BoundAtom:
      break;
  }
  throw UsageError("ex_inst: formula is not locally closed");
}

}  // namespace detail_enc

// <t, s> : A & B
inline Term pair(const Formula& a, const Formula& b, const Term& t,
                 const Term& s) {
  std::set<std::string> avoid = detail_enc::atoms_of(a);
  for (const auto& x : detail_enc::atoms_of(b)) avoid.insert(x);
  for (const auto& x : term_free_atoms(t)) avoid.insert(x);
  for (const auto& x : term_free_atoms(s)) avoid.insert(x);
  std::string z = detail_enc::fresh_binder(avoid);
  std::set<std::string> used = term_fv(t);
  for (const auto& v : term_fv(s)) used.insert(v);
  std::string f = detail_enc::fresh_var("f", used);
  return tlam(z, lam(f, arrow(a, arrow(b, atom(z))),
                     app(app(var(f), t), s)));
}

inline Term proj1(const Formula& a, const Formula& b, const Term& t) {
  std::set<std::string> used = term_fv(t);
  std::string xa = detail_enc::fresh_var("a", used);
  std::string xb = detail_enc::fresh_var("b", used);
  return app(detail_enc::and_inst(a, b, t, a), lam(xa, a, lam(xb, b, var(xa))));
}

inline Term proj2(const Formula& a, const Formula& b, const Term& t) {
  std::set<std::string> used = term_fv(t);
  std::string xa = detail_enc::fresh_var("a", used);
  std::string xb = detail_enc::fresh_var("b", used);
  return app(detail_enc::and_inst(a, b, t, b), lam(xa, a, lam(xb, b, var(xb))));
}

// inl t / inr t : A | B
inline Term inl(const Formula& a, const Formula& b, const Term& t) {
  std::set<std::string> avoid = detail_enc::atoms_of(a);
  for (const auto& x : detail_enc::atoms_of(b)) avoid.insert(x);
  for (const auto& x : term_free_atoms(t)) avoid.insert(x);
  std::string z = detail_enc::fresh_binder(avoid);
  std::set<std::string> used = term_fv(t);
  std::string f = detail_enc::fresh_var("f", used);
  std::string g = detail_enc::fresh_var("g", used);
  return tlam(z, lam(f, arrow(a, atom(z)),
                     lam(g, arrow(b, atom(z)), app(var(f), t))));
}

inline Term inr(const Formula& a, const Formula& b, const Term& t) {
  std::set<std::string> avoid = detail_enc::atoms_of(a);
  for (const auto& x : detail_enc::atoms_of(b)) avoid.insert(x);
  for (const auto& x : term_free_atoms(t)) avoid.insert(x);
  std::string z = detail_enc::fresh_binder(avoid);
  std::set<std::string> used = term_fv(t);
  std::string f = detail_enc::fresh_var("f", used);
  std::string g = detail_enc::fresh_var("g", used);
  return tlam(z, lam(f, arrow(a, atom(z)),
                     lam(g, arrow(b, atom(z)), app(var(g), t))));
}

// case t of inl -> f | inr -> g, at result formula C.
inline Term case_at(const Formula& a, const Formula& b, const Formula& c,
                    const Term& t, const Term& f, const Term& g) {
  return app(app(detail_enc::or_inst(a, b, t, c), f), g);
}

// Witness an existential with atom Y: payload : A[X:=Y].
inline Term ex_intro(const std::string& x, const Formula& a,
                     const std::string& witness_atom, const Term& payload) {
  std::set<std::string> avoid = detail_enc::atoms_of(a);
  avoid.insert(x);
  avoid.insert(witness_atom);
  for (const auto& s : term_free_atoms(payload)) avoid.insert(s);
  std::string w = detail_enc::fresh_binder(avoid);
  std::set<std::string> used = term_fv(payload);
  std::string f = detail_enc::fresh_var("f", used);
  return tlam(w, lam(f, forall(x, arrow(a, atom(w))),
                     app(tapp(var(f), witness_atom), payload)));
}

// Eliminate t : exists X. A with g : forall X. (A -> C), X not free in C.
inline Term ex_elim(const std::string& x, const Formula& a, const Formula& c,
                    const Term& t, const Term& g) {
  return app(detail_enc::ex_inst(x, a, t, c), g);
}

// Ex falso: t : Bot gives a term of any C.
inline Term abort_at(const Term& t, const Formula& c) { return io_elab(t, c); }

}  // namespace enc
}  // namespace fatk
