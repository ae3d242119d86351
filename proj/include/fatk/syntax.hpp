#pragma once

// Abstract syntax for ILat formulas and terms.
//
// Representation is locally nameless: bound variables and bound atoms are de
// Bruijn indices, free ones carry names. Alpha-equivalence is therefore plain
// structural equality (binder hints are kept only for printing), and
// substitution of locally closed values can never capture.
//
// Atom indices count atom binders (Forall in formulas, TLam in terms) and the
// counting crosses the term/formula boundary, so a formula embedded in a term
// (a constant's formula or a lambda annotation) may reference an enclosing
// TLam binder.

#include <cassert>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fatk/util.hpp"

namespace fatk {

class Formula;
class Term;

// Argument of an atom application `t @X`: a free atom name or a de Bruijn
// index pointing at an enclosing atom binder. Never a composite formula.
class AtomRef {
 public:
  static AtomRef free(std::string name) { return AtomRef(std::move(name), -1); }
  static AtomRef bound(int index) { return AtomRef("", index); }

  bool is_bound() const { return index_ >= 0; }
  const std::string& name() const { return name_; }
  int index() const { return index_; }

  friend bool operator==(const AtomRef& a, const AtomRef& b) {
    if (a.is_bound() != b.is_bound()) return false;
    return a.is_bound() ? a.index_ == b.index_ : a.name_ == b.name_;
  }
  friend bool operator!=(const AtomRef& a, const AtomRef& b) { return !(a == b); }

 private:
  AtomRef(std::string name, int index) : name_(std::move(name)), index_(index) {}
  std::string name_;
  int index_;
};

// ---------------------------------------------------------------------------
// Formula
// ---------------------------------------------------------------------------

class Formula {
 public:
  enum class Kind { Atom, BoundAtom, Arrow, Forall };

  static Formula atom(std::string name) {
    Node n;
    n.kind = Kind::Atom;
    n.name = std::move(name);
    return Formula(std::make_shared<Node>(std::move(n)));
  }
  static Formula bound_atom(int index) {
    Node n;
    n.kind = Kind::BoundAtom;
    n.index = index;
    return Formula(std::make_shared<Node>(std::move(n)));
  }
  static Formula arrow(Formula left, Formula right) {
    Node n;
    n.kind = Kind::Arrow;
    n.a = std::move(left.node_);
    n.b = std::move(right.node_);
    return Formula(std::make_shared<Node>(std::move(n)));
  }
  // Body already uses index 0 for this binder.
  static Formula forall_raw(std::string hint, Formula body) {
    Node n;
    n.kind = Kind::Forall;
    n.name = std::move(hint);
    n.a = std::move(body.node_);
    return Formula(std::make_shared<Node>(std::move(n)));
  }

  Kind kind() const { return node_->kind; }
  const std::string& atom_name() const { return node_->name; }
  int bound_index() const { return node_->index; }
  Formula left() const { return Formula(node_->a); }
  Formula right() const { return Formula(node_->b); }
  const std::string& binder_hint() const { return node_->name; }
  Formula body() const { return Formula(node_->a); }

  friend bool operator==(const Formula& x, const Formula& y) {
    return eq(*x.node_, *y.node_);
  }
  friend bool operator!=(const Formula& x, const Formula& y) { return !(x == y); }

 private:
  struct Node {
    Kind kind;
    std::string name;  // Atom: name; Forall: binder hint (not compared)
    int index = 0;     // BoundAtom
    std::shared_ptr<const Node> a, b;
  };

  explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

  static bool eq(const Node& x, const Node& y) {
    if (x.kind != y.kind) return false;
    switch (x.kind) {
      case Kind::Atom:
        return x.name == y.name;
      case Kind::BoundAtom:
        return x.index == y.index;
      case Kind::Arrow:
        return eq(*x.a, *y.a) && eq(*x.b, *y.b);
      case Kind::Forall:
        return eq(*x.a, *y.a);
    }
    return false;
  }

  std::shared_ptr<const Node> node_;
};

inline Formula atom(std::string name) { return Formula::atom(std::move(name)); }
inline Formula arrow(Formula l, Formula r) {
  return Formula::arrow(std::move(l), std::move(r));
}

inline bool alpha_eq(const Formula& a, const Formula& b) { return a == b; }

inline int node_count(const Formula& f) {
  switch (f.kind()) {
    case Formula::Kind::Atom:
    case Formula::Kind::BoundAtom:
      return 1;
    case Formula::Kind::Arrow:
      return 1 + node_count(f.left()) + node_count(f.right());
    case Formula::Kind::Forall:
      return 1 + node_count(f.body());
  }
  return 0;
}

namespace detail {

inline void free_atoms_into(const Formula& f, std::set<std::string>& out) {
  switch (f.kind()) {
    case Formula::Kind::Atom:
      out.insert(f.atom_name());
      break;
    case Formula::Kind::BoundAtom:
      break;
    case Formula::Kind::Arrow:
      free_atoms_into(f.left(), out);
      free_atoms_into(f.right(), out);
      break;
    case Formula::Kind::Forall:
      free_atoms_into(f.body(), out);
      break;
  }
}

// Shift dangling atom indices (>= cut) by `by`.
inline Formula shift_atoms(const Formula& f, int by, int cut) {
  switch (f.kind()) {
    case Formula::Kind::Atom:
      return f;
    case Formula::Kind::BoundAtom:
      return f.bound_index() >= cut ? Formula::bound_atom(f.bound_index() + by)
                                    : f;
    case Formula::Kind::Arrow:
      return Formula::arrow(shift_atoms(f.left(), by, cut),
                            shift_atoms(f.right(), by, cut));
    case Formula::Kind::Forall:
      return Formula::forall_raw(f.binder_hint(),
                                 shift_atoms(f.body(), by, cut + 1));
  }
  return f;
}

inline AtomRef shift_ref(const AtomRef& r, int by) {
  return r.is_bound() ? AtomRef::bound(r.index() + by) : r;
}

// Replace index `depth` by `r`; decrement indices above it (one binder gone).
inline Formula inst_atom(const Formula& f, const AtomRef& r, int depth) {
  switch (f.kind()) {
    case Formula::Kind::Atom:
      return f;
    case Formula::Kind::BoundAtom: {
      int k = f.bound_index();
      if (k == depth)
        return r.is_bound() ? Formula::bound_atom(r.index() + depth)
                            : Formula::atom(r.name());
      if (k > depth) return Formula::bound_atom(k - 1);
      return f;
    }
    case Formula::Kind::Arrow:
      return Formula::arrow(inst_atom(f.left(), r, depth),
                            inst_atom(f.right(), r, depth));
    case Formula::Kind::Forall:
      return Formula::forall_raw(f.binder_hint(),
                                 inst_atom(f.body(), r, depth + 1));
  }
  return f;
}

inline Formula close_atom_at(const Formula& f, const std::string& name,
                             int depth) {
  switch (f.kind()) {
    case Formula::Kind::Atom:
      return f.atom_name() == name ? Formula::bound_atom(depth) : f;
    case Formula::Kind::BoundAtom:
      return f;
    case Formula::Kind::Arrow:
      return Formula::arrow(close_atom_at(f.left(), name, depth),
                            close_atom_at(f.right(), name, depth));
    case Formula::Kind::Forall:
      return Formula::forall_raw(f.binder_hint(),
                                 close_atom_at(f.body(), name, depth + 1));
  }
  return f;
}

}  // namespace detail

inline std::set<std::string> free_atoms(const Formula& f) {
  std::set<std::string> out;
  detail::free_atoms_into(f, out);
  return out;
}

// Instantiate the outermost binder's index with `r` (the body of a Forall).
inline Formula open_atom(const Formula& body, const AtomRef& r) {
  return detail::inst_atom(body, r, 0);
}
inline Formula open_atom(const Formula& body, const std::string& name) {
  return detail::inst_atom(body, AtomRef::free(name), 0);
}

// Abstract free atom `name` so the result can be placed under a new binder.
inline Formula close_atom(const Formula& f, const std::string& name) {
  return detail::close_atom_at(f, name, 0);
}

// forall `name`. f  — binds the free occurrences of `name` in f.
inline Formula forall(const std::string& name, const Formula& f) {
  return Formula::forall_raw(name, close_atom(f, name));
}

// A[X := Y], atom for atom. Capture is impossible in this representation.
inline Formula subst_atom(const Formula& f, const std::string& x,
                          const std::string& y) {
  switch (f.kind()) {
    case Formula::Kind::Atom:
      return f.atom_name() == x ? Formula::atom(y) : f;
    case Formula::Kind::BoundAtom:
      return f;
    case Formula::Kind::Arrow:
      return Formula::arrow(subst_atom(f.left(), x, y),
                            subst_atom(f.right(), x, y));
    case Formula::Kind::Forall:
      return Formula::forall_raw(f.binder_hint(), subst_atom(f.body(), x, y));
  }
  return f;
}

// A[X := B] for a locally closed B; used by the encodings layer.
inline Formula subst_atom_formula(const Formula& f, const std::string& x,
                                  const Formula& b) {
  switch (f.kind()) {
    case Formula::Kind::Atom:
      return f.atom_name() == x ? b : f;
    case Formula::Kind::BoundAtom:
      return f;
    case Formula::Kind::Arrow:
      return Formula::arrow(subst_atom_formula(f.left(), x, b),
                            subst_atom_formula(f.right(), x, b));
    case Formula::Kind::Forall:
      return Formula::forall_raw(f.binder_hint(),
                                 subst_atom_formula(f.body(), x, b));
  }
  return f;
}

inline bool locally_closed(const Formula& f, int depth = 0) {
  switch (f.kind()) {
    case Formula::Kind::Atom:
      return true;
    case Formula::Kind::BoundAtom:
      return f.bound_index() < depth;
    case Formula::Kind::Arrow:
      return locally_closed(f.left(), depth) && locally_closed(f.right(), depth);
    case Formula::Kind::Forall:
      return locally_closed(f.body(), depth + 1);
  }
  return false;
}

// ---------------------------------------------------------------------------
// Term
// ---------------------------------------------------------------------------

class Term {
 public:
  enum class Kind { FreeVar, BoundVar, Const, Lam, TLam, App, TApp };

  static Term free_var(std::string name, std::optional<int> tag = {}) {
    Node n;
    n.kind = Kind::FreeVar;
    n.name = std::move(name);
    n.tag = tag;
    return Term(std::make_shared<Node>(std::move(n)));
  }
  static Term bound_var(int index) {
    Node n;
    n.kind = Kind::BoundVar;
    n.index = index;
    return Term(std::make_shared<Node>(std::move(n)));
  }
  static Term constant(Formula f, std::optional<int> tag = {}) {
    Node n;
    n.kind = Kind::Const;
    n.formula = std::move(f);
    n.tag = tag;
    return Term(std::make_shared<Node>(std::move(n)));
  }
  // Body already uses index 0 for this binder.
  static Term lam_raw(std::string hint, std::optional<Formula> ann, Term body) {
    Node n;
    n.kind = Kind::Lam;
    n.name = std::move(hint);
    n.formula = std::move(ann);
    n.a = std::move(body.node_);
    return Term(std::make_shared<Node>(std::move(n)));
  }
  static Term tlam_raw(std::string hint, Term body) {
    Node n;
    n.kind = Kind::TLam;
    n.name = std::move(hint);
    n.a = std::move(body.node_);
    return Term(std::make_shared<Node>(std::move(n)));
  }
  static Term app(Term fun, Term arg) {
    Node n;
    n.kind = Kind::App;
    n.a = std::move(fun.node_);
    n.b = std::move(arg.node_);
    return Term(std::make_shared<Node>(std::move(n)));
  }
  static Term tapp(Term fun, AtomRef r) {
    Node n;
    n.kind = Kind::TApp;
    n.a = std::move(fun.node_);
    n.atom = std::move(r);
    return Term(std::make_shared<Node>(std::move(n)));
  }

  Kind kind() const { return node_->kind; }
  const std::string& var_name() const { return node_->name; }
  int bound_index() const { return node_->index; }
  std::optional<int> tag() const { return node_->tag; }
  const Formula& const_formula() const { return *node_->formula; }
  const std::string& binder_hint() const { return node_->name; }
  const std::optional<Formula>& annotation() const { return node_->formula; }
  Term body() const { return Term(node_->a); }
  Term fun() const { return Term(node_->a); }
  Term arg() const { return Term(node_->b); }
  const AtomRef& atom_ref() const { return *node_->atom; }

  friend bool operator==(const Term& x, const Term& y) {
    return eq(*x.node_, *y.node_);
  }
  friend bool operator!=(const Term& x, const Term& y) { return !(x == y); }

 private:
  struct Node {
    Kind kind;
    std::string name;  // FreeVar name; Lam/TLam binder hint (not compared)
    int index = 0;     // BoundVar
    std::optional<int> tag;
    std::optional<Formula> formula;  // Const formula / Lam annotation
    std::shared_ptr<const Node> a, b;
    std::optional<AtomRef> atom;  // TApp
  };

  explicit Term(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

  static bool eq(const Node& x, const Node& y) {
    if (x.kind != y.kind) return false;
    switch (x.kind) {
      case Kind::FreeVar:
        return x.name == y.name && x.tag == y.tag;
      case Kind::BoundVar:
        return x.index == y.index;
      case Kind::Const:
        return x.tag == y.tag && *x.formula == *y.formula;
      case Kind::Lam:
        if (x.formula.has_value() != y.formula.has_value()) return false;
        if (x.formula && !(*x.formula == *y.formula)) return false;
        return eq(*x.a, *y.a);
      case Kind::TLam:
        return eq(*x.a, *y.a);
      case Kind::App:
        return eq(*x.a, *y.a) && eq(*x.b, *y.b);
      case Kind::TApp:
        return *x.atom == *y.atom && eq(*x.a, *y.a);
    }
    return false;
  }

  std::shared_ptr<const Node> node_;
};

inline Term var(std::string name) { return Term::free_var(std::move(name)); }
inline Term var(std::string name, int tag) {
  return Term::free_var(std::move(name), tag);
}
inline Term constant(Formula f) { return Term::constant(std::move(f)); }
inline Term constant(Formula f, int tag) {
  return Term::constant(std::move(f), tag);
}
inline Term app(Term f, Term a) { return Term::app(std::move(f), std::move(a)); }
inline Term tapp(Term f, AtomRef r) {
  return Term::tapp(std::move(f), std::move(r));
}
inline Term tapp(Term f, const std::string& atom_name) {
  return Term::tapp(std::move(f), AtomRef::free(atom_name));
}

inline bool alpha_eq(const Term& a, const Term& b) { return a == b; }

inline int node_count(const Term& t) {
  switch (t.kind()) {
    case Term::Kind::FreeVar:
    case Term::Kind::BoundVar:
    case Term::Kind::Const:
      return 1;
    case Term::Kind::Lam:
    case Term::Kind::TLam:
      return 1 + node_count(t.body());
    case Term::Kind::App:
      return 1 + node_count(t.fun()) + node_count(t.arg());
    case Term::Kind::TApp:
      return 1 + node_count(t.fun());
  }
  return 0;
}

namespace detail {

inline void term_fv_into(const Term& t, std::set<std::string>& out) {
  switch (t.kind()) {
    case Term::Kind::FreeVar:
      out.insert(t.var_name());
      break;
    case Term::Kind::BoundVar:
    case Term::Kind::Const:
      break;
    case Term::Kind::Lam:
    case Term::Kind::TLam:
      term_fv_into(t.body(), out);
      break;
    case Term::Kind::App:
      term_fv_into(t.fun(), out);
      term_fv_into(t.arg(), out);
      break;
    case Term::Kind::TApp:
      term_fv_into(t.fun(), out);
      break;
  }
}

inline void term_free_atoms_into(const Term& t, std::set<std::string>& out) {
  switch (t.kind()) {
    case Term::Kind::FreeVar:
    case Term::Kind::BoundVar:
      break;
    case Term::Kind::Const:
      free_atoms_into(t.const_formula(), out);
      break;
    case Term::Kind::Lam:
      if (t.annotation()) free_atoms_into(*t.annotation(), out);
      term_free_atoms_into(t.body(), out);
      break;
    case Term::Kind::TLam:
      term_free_atoms_into(t.body(), out);
      break;
    case Term::Kind::App:
      term_free_atoms_into(t.fun(), out);
      term_free_atoms_into(t.arg(), out);
      break;
    case Term::Kind::TApp:
      term_free_atoms_into(t.fun(), out);
      if (!t.atom_ref().is_bound()) out.insert(t.atom_ref().name());
      break;
  }
}

// Shift dangling indices: term variables >= cut_v by by_v, atoms >= cut_a by
// by_a (descending into embedded formulas for the atom space).
inline Term shift_term(const Term& t, int by_v, int cut_v, int by_a, int cut_a) {
  switch (t.kind()) {
    case Term::Kind::FreeVar:
      return t;
    case Term::Kind::BoundVar:
      return t.bound_index() >= cut_v ? Term::bound_var(t.bound_index() + by_v)
                                      : t;
    case Term::Kind::Const:
      return Term::constant(shift_atoms(t.const_formula(), by_a, cut_a),
                            t.tag());
    case Term::Kind::Lam: {
      std::optional<Formula> ann;
      if (t.annotation()) ann = shift_atoms(*t.annotation(), by_a, cut_a);
      return Term::lam_raw(t.binder_hint(), std::move(ann),
                           shift_term(t.body(), by_v, cut_v + 1, by_a, cut_a));
    }
    case Term::Kind::TLam:
      return Term::tlam_raw(t.binder_hint(), shift_term(t.body(), by_v, cut_v,
                                                        by_a, cut_a + 1));
    case Term::Kind::App:
      return Term::app(shift_term(t.fun(), by_v, cut_v, by_a, cut_a),
                       shift_term(t.arg(), by_v, cut_v, by_a, cut_a));
    case Term::Kind::TApp: {
      AtomRef r = t.atom_ref();
      if (r.is_bound() && r.index() >= cut_a)
        r = AtomRef::bound(r.index() + by_a);
      return Term::tapp(shift_term(t.fun(), by_v, cut_v, by_a, cut_a), r);
    }
  }
  return t;
}

// (\ . body) s  — replace var index `dv` by s, shifting s's dangling indices
// past the binders crossed inside body.
inline Term inst_var(const Term& t, const Term& s, int dv, int da) {
  switch (t.kind()) {
    case Term::Kind::FreeVar:
    case Term::Kind::Const:
      return t;
    case Term::Kind::BoundVar: {
      int k = t.bound_index();
      if (k == dv) return shift_term(s, dv, 0, da, 0);
      if (k > dv) return Term::bound_var(k - 1);
      return t;
    }
    case Term::Kind::Lam:
      return Term::lam_raw(t.binder_hint(), t.annotation(),
                           inst_var(t.body(), s, dv + 1, da));
    case Term::Kind::TLam:
      return Term::tlam_raw(t.binder_hint(),
                            inst_var(t.body(), s, dv, da + 1));
    case Term::Kind::App:
      return Term::app(inst_var(t.fun(), s, dv, da),
                       inst_var(t.arg(), s, dv, da));
    case Term::Kind::TApp:
      return Term::tapp(inst_var(t.fun(), s, dv, da), t.atom_ref());
  }
  return t;
}

// (/\ . body) @r — replace atom index `da` by r in terms and embedded formulas.
inline Term inst_atom_term(const Term& t, const AtomRef& r, int da) {
  switch (t.kind()) {
    case Term::Kind::FreeVar:
    case Term::Kind::BoundVar:
      return t;
    case Term::Kind::Const:
      return Term::constant(inst_atom(t.const_formula(), r, da), t.tag());
    case Term::Kind::Lam: {
      std::optional<Formula> ann;
      if (t.annotation()) ann = inst_atom(*t.annotation(), r, da);
      return Term::lam_raw(t.binder_hint(), std::move(ann),
                           inst_atom_term(t.body(), r, da));
    }
    case Term::Kind::TLam:
      return Term::tlam_raw(t.binder_hint(),
                            inst_atom_term(t.body(), r, da + 1));
    case Term::Kind::App:
      return Term::app(inst_atom_term(t.fun(), r, da),
                       inst_atom_term(t.arg(), r, da));
    case Term::Kind::TApp: {
      AtomRef a = t.atom_ref();
      if (a.is_bound()) {
        int k = a.index();
        if (k == da)
          a = r.is_bound() ? AtomRef::bound(r.index() + da) : r;
        else if (k > da)
          a = AtomRef::bound(k - 1);
      }
      return Term::tapp(inst_atom_term(t.fun(), r, da), a);
    }
  }
  return t;
}

inline Term close_var_at(const Term& t, const std::string& name, int depth) {
  switch (t.kind()) {
    case Term::Kind::FreeVar:
      return t.var_name() == name ? Term::bound_var(depth) : t;
    case Term::Kind::BoundVar:
    case Term::Kind::Const:
      return t;
    case Term::Kind::Lam:
      return Term::lam_raw(t.binder_hint(), t.annotation(),
                           close_var_at(t.body(), name, depth + 1));
    case Term::Kind::TLam:
      return Term::tlam_raw(t.binder_hint(),
                            close_var_at(t.body(), name, depth));
    case Term::Kind::App:
      return Term::app(close_var_at(t.fun(), name, depth),
                       close_var_at(t.arg(), name, depth));
    case Term::Kind::TApp:
      return Term::tapp(close_var_at(t.fun(), name, depth), t.atom_ref());
  }
  return t;
}

inline Term close_atom_term_at(const Term& t, const std::string& name,
                               int depth) {
  switch (t.kind()) {
    case Term::Kind::FreeVar:
    case Term::Kind::BoundVar:
      return t;
    case Term::Kind::Const:
      return Term::constant(close_atom_at(t.const_formula(), name, depth),
                            t.tag());
    case Term::Kind::Lam: {
      std::optional<Formula> ann;
      if (t.annotation()) ann = close_atom_at(*t.annotation(), name, depth);
      return Term::lam_raw(t.binder_hint(), std::move(ann),
                           close_atom_term_at(t.body(), name, depth));
    }
    case Term::Kind::TLam:
      return Term::tlam_raw(t.binder_hint(),
                            close_atom_term_at(t.body(), name, depth + 1));
    case Term::Kind::App:
      return Term::app(close_atom_term_at(t.fun(), name, depth),
                       close_atom_term_at(t.arg(), name, depth));
    case Term::Kind::TApp: {
      AtomRef r = t.atom_ref();
      if (!r.is_bound() && r.name() == name) r = AtomRef::bound(depth);
      return Term::tapp(close_atom_term_at(t.fun(), name, depth), r);
    }
  }
  return t;
}

}  // namespace detail

// tFV(t): free term variables.
inline std::set<std::string> term_fv(const Term& t) {
  std::set<std::string> out;
  detail::term_fv_into(t, out);
  return out;
}

inline std::set<std::string> term_free_atoms(const Term& t) {
  std::set<std::string> out;
  detail::term_free_atoms_into(t, out);
  return out;
}

struct FreeNames {
  std::set<std::string> vars;
  std::set<std::string> atoms;
};

// FV(t): free term variables together with free atoms.
inline FreeNames fv(const Term& t) {
  return FreeNames{term_fv(t), term_free_atoms(t)};
}

inline bool closed(const Term& t) { return term_fv(t).empty(); }

inline bool locally_closed(const Term& t, int dv = 0, int da = 0) {
  switch (t.kind()) {
    case Term::Kind::FreeVar:
      return true;
    case Term::Kind::BoundVar:
      return t.bound_index() < dv;
    case Term::Kind::Const:
      return locally_closed(t.const_formula(), da);
    case Term::Kind::Lam:
      if (t.annotation() && !locally_closed(*t.annotation(), da)) return false;
      return locally_closed(t.body(), dv + 1, da);
    case Term::Kind::TLam:
      return locally_closed(t.body(), dv, da + 1);
    case Term::Kind::App:
      return locally_closed(t.fun(), dv, da) && locally_closed(t.arg(), dv, da);
    case Term::Kind::TApp:
      if (t.atom_ref().is_bound() && t.atom_ref().index() >= da) return false;
      return locally_closed(t.fun(), dv, da);
  }
  return false;
}

// Contract (\ . body) s.
inline Term instantiate_var(const Term& body, const Term& s) {
  return detail::inst_var(body, s, 0, 0);
}

// Contract (/\ . body) @r.
inline Term instantiate_atom(const Term& body, const AtomRef& r) {
  return detail::inst_atom_term(body, r, 0);
}

inline Term open_var(const Term& body, const std::string& name) {
  return instantiate_var(body, Term::free_var(name));
}
inline Term open_atom_in_term(const Term& body, const std::string& name) {
  return instantiate_atom(body, AtomRef::free(name));
}

inline Term close_var(const Term& t, const std::string& name) {
  return detail::close_var_at(t, name, 0);
}
inline Term close_atom_in_term(const Term& t, const std::string& name) {
  return detail::close_atom_term_at(t, name, 0);
}

// \binder[:ann]. body — binds free occurrences of `binder` in body.
inline Term lam(const std::string& binder, std::optional<Formula> ann,
                Term body) {
  return Term::lam_raw(binder, std::move(ann), close_var(body, binder));
}

// /\binder. body — binds free occurrences of atom `binder` in body.
inline Term tlam(const std::string& binder, Term body) {
  return Term::tlam_raw(binder, close_atom_in_term(body, binder));
}

// t[x := s] for locally closed s; capture-free by construction.
inline Term subst_term(const Term& t, const std::string& x, const Term& s) {
  switch (t.kind()) {
    case Term::Kind::FreeVar:
      return t.var_name() == x ? s : t;
    case Term::Kind::BoundVar:
    case Term::Kind::Const:
      return t;
    case Term::Kind::Lam:
      return Term::lam_raw(t.binder_hint(), t.annotation(),
                           subst_term(t.body(), x, s));
    case Term::Kind::TLam:
      return Term::tlam_raw(t.binder_hint(), subst_term(t.body(), x, s));
    case Term::Kind::App:
      return Term::app(subst_term(t.fun(), x, s), subst_term(t.arg(), x, s));
    case Term::Kind::TApp:
      return Term::tapp(subst_term(t.fun(), x, s), t.atom_ref());
  }
  return t;
}

// t[X := Y], atom for atom, including embedded formulas and @-arguments.
inline Term subst_atom_in_term(const Term& t, const std::string& x,
                               const std::string& y) {
  switch (t.kind()) {
    case Term::Kind::FreeVar:
    case Term::Kind::BoundVar:
      return t;
    case Term::Kind::Const:
      return Term::constant(subst_atom(t.const_formula(), x, y), t.tag());
    case Term::Kind::Lam: {
      std::optional<Formula> ann;
      if (t.annotation()) ann = subst_atom(*t.annotation(), x, y);
      return Term::lam_raw(t.binder_hint(), std::move(ann),
                           subst_atom_in_term(t.body(), x, y));
    }
    case Term::Kind::TLam:
      return Term::tlam_raw(t.binder_hint(),
                            subst_atom_in_term(t.body(), x, y));
    case Term::Kind::App:
      return Term::app(subst_atom_in_term(t.fun(), x, y),
                       subst_atom_in_term(t.arg(), x, y));
    case Term::Kind::TApp: {
      AtomRef r = t.atom_ref();
      if (!r.is_bound() && r.name() == x) r = AtomRef::free(y);
      return Term::tapp(subst_atom_in_term(t.fun(), x, y), r);
    }
  }
  return t;
}

// ---------------------------------------------------------------------------
// Printing (canonical form: minimal parentheses, ASCII)
// ---------------------------------------------------------------------------

namespace detail {

// Names of enclosing binders that `f` actually references, given the env of
// binder names outside this node (innermost first).
inline void formula_env_refs(const Formula& f, int depth,
                             const std::vector<std::string>& env,
                             std::set<std::string>& out) {
  switch (f.kind()) {
    case Formula::Kind::Atom:
      out.insert(f.atom_name());
      break;
    case Formula::Kind::BoundAtom: {
      int k = f.bound_index();
      if (k >= depth && k - depth < static_cast<int>(env.size()))
        out.insert(env[env.size() - 1 - (k - depth)]);
      break;
    }
    case Formula::Kind::Arrow:
      formula_env_refs(f.left(), depth, env, out);
      formula_env_refs(f.right(), depth, env, out);
      break;
    case Formula::Kind::Forall:
      formula_env_refs(f.body(), depth + 1, env, out);
      break;
  }
}

inline void term_var_refs(const Term& t, int depth,
                          const std::vector<std::string>& env,
                          std::set<std::string>& out) {
  switch (t.kind()) {
    case Term::Kind::FreeVar:
      out.insert(t.var_name());
      break;
    case Term::Kind::BoundVar: {
      int k = t.bound_index();
      if (k >= depth && k - depth < static_cast<int>(env.size()))
        out.insert(env[env.size() - 1 - (k - depth)]);
      break;
    }
    case Term::Kind::Const:
      break;
    case Term::Kind::Lam:
      term_var_refs(t.body(), depth + 1, env, out);
      break;
    case Term::Kind::TLam:
      term_var_refs(t.body(), depth, env, out);
      break;
    case Term::Kind::App:
      term_var_refs(t.fun(), depth, env, out);
      term_var_refs(t.arg(), depth, env, out);
      break;
    case Term::Kind::TApp:
      term_var_refs(t.fun(), depth, env, out);
      break;
  }
}

inline void term_atom_refs(const Term& t, int depth,
                           const std::vector<std::string>& env,
                           std::set<std::string>& out) {
  switch (t.kind()) {
    case Term::Kind::FreeVar:
    case Term::Kind::BoundVar:
      break;
    case Term::Kind::Const:
      formula_env_refs(t.const_formula(), depth, env, out);
      break;
    case Term::Kind::Lam:
      if (t.annotation()) formula_env_refs(*t.annotation(), depth, env, out);
      term_atom_refs(t.body(), depth, env, out);
      break;
    case Term::Kind::TLam:
      term_atom_refs(t.body(), depth + 1, env, out);
      break;
    case Term::Kind::App:
      term_atom_refs(t.fun(), depth, env, out);
      term_atom_refs(t.arg(), depth, env, out);
      break;
    case Term::Kind::TApp: {
      term_atom_refs(t.fun(), depth, env, out);
      const AtomRef& r = t.atom_ref();
      if (r.is_bound()) {
        int k = r.index();
        if (k >= depth && k - depth < static_cast<int>(env.size()))
          out.insert(env[env.size() - 1 - (k - depth)]);
      } else {
        out.insert(r.name());
      }
      break;
    }
  }
}

enum class FPos { Top, ArrowLeft };

inline std::string print_formula(const Formula& f,
                                 std::vector<std::string>& env_atoms,
                                 FPos pos) {
  switch (f.kind()) {
    case Formula::Kind::Atom:
      return f.atom_name();
    case Formula::Kind::BoundAtom: {
      int k = f.bound_index();
      if (k < static_cast<int>(env_atoms.size()))
        return env_atoms[env_atoms.size() - 1 - k];
      return "?A" + std::to_string(k);  // dangling; internal use only
    }
    case Formula::Kind::Arrow: {
      std::string l = print_formula(f.left(), env_atoms, FPos::ArrowLeft);
      std::string r = print_formula(f.right(), env_atoms, FPos::Top);
      std::string s = l + " -> " + r;
      return pos == FPos::ArrowLeft ? "(" + s + ")" : s;
    }
    case Formula::Kind::Forall: {
      std::set<std::string> avoid;
      // depth 1: the body hangs under this node's own binder
      formula_env_refs(f.body(), 1, env_atoms, avoid);
      std::string h =
          freshen(f.binder_hint().empty() ? "X" : f.binder_hint(), avoid);
      env_atoms.push_back(h);
      std::string b = print_formula(f.body(), env_atoms, FPos::Top);
      env_atoms.pop_back();
      std::string s = "forall " + h + ". " + b;
      return pos == FPos::ArrowLeft ? "(" + s + ")" : s;
    }
  }
  return "";
}

enum class TPos { Top, AppHead, Arg };

inline std::string print_term(const Term& t, std::vector<std::string>& env_v,
                              std::vector<std::string>& env_a, TPos pos) {
  switch (t.kind()) {
    case Term::Kind::FreeVar:
      return t.var_name();
    case Term::Kind::BoundVar: {
      int k = t.bound_index();
      if (k < static_cast<int>(env_v.size()))
        return env_v[env_v.size() - 1 - k];
      return "?v" + std::to_string(k);
    }
    case Term::Kind::Const:
      return "c{" + print_formula(t.const_formula(), env_a, FPos::Top) + "}";
    case Term::Kind::Lam: {
      std::set<std::string> avoid;
      term_var_refs(t.body(), 1, env_v, avoid);
      std::string h =
          freshen(t.binder_hint().empty() ? "x" : t.binder_hint(), avoid);
      std::string ann;
      if (t.annotation())
        ann = ":" + print_formula(*t.annotation(), env_a, FPos::Top);
      env_v.push_back(h);
      std::string b = print_term(t.body(), env_v, env_a, TPos::Top);
      env_v.pop_back();
      std::string s = "\\" + h + ann + ". " + b;
      return pos == TPos::Top ? s : "(" + s + ")";
    }
    case Term::Kind::TLam: {
      std::set<std::string> avoid;
      term_atom_refs(t.body(), 1, env_a, avoid);
      std::string h =
          freshen(t.binder_hint().empty() ? "X" : t.binder_hint(), avoid);
      env_a.push_back(h);
      std::string b = print_term(t.body(), env_v, env_a, TPos::Top);
      env_a.pop_back();
      std::string s = "/\\" + h + ". " + b;
      return pos == TPos::Top ? s : "(" + s + ")";
    }
    case Term::Kind::App: {
      std::string f = print_term(t.fun(), env_v, env_a, TPos::AppHead);
      std::string a = print_term(t.arg(), env_v, env_a, TPos::Arg);
      std::string s = f + " " + a;
      return pos == TPos::Arg ? "(" + s + ")" : s;
    }
    case Term::Kind::TApp: {
      std::string f = print_term(t.fun(), env_v, env_a, TPos::AppHead);
      const AtomRef& r = t.atom_ref();
      std::string a;
      if (r.is_bound()) {
        int k = r.index();
        a = k < static_cast<int>(env_a.size())
                ? env_a[env_a.size() - 1 - k]
                : "?A" + std::to_string(k);
      } else {
        a = r.name();
      }
      std::string s = f + " @" + a;
      return pos == TPos::Arg ? "(" + s + ")" : s;
    }
  }
  return "";
}

}  // namespace detail

inline std::string to_string(const Formula& f) {
  std::vector<std::string> env;
  return detail::print_formula(f, env, detail::FPos::Top);
}

inline std::string to_string(const Term& t) {
  std::vector<std::string> env_v, env_a;
  return detail::print_term(t, env_v, env_a, detail::TPos::Top);
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

struct ParseError : std::runtime_error {
  ParseError(int line, int col, const std::string& msg)
      : std::runtime_error(std::to_string(line) + ":" + std::to_string(col) +
                           ": " + msg),
        line(line),
        col(col) {}
  int line;
  int col;
};

// Hook points so the parser can accept the sugared connectives without the
// syntax layer owning the macro bodies (those live in the encodings layer).
struct SugarExpander {
  std::function<Formula()> bot;
  std::function<Formula(Formula)> neg;
  std::function<Formula(Formula, Formula)> conj;
  std::function<Formula(Formula, Formula)> disj;
  // hint + body where index 0 refers to the exists binder.
  std::function<Formula(std::string, Formula)> exists;
};

namespace detail {

enum class Tok {
  Ident,
  Arrow,
  Lam,
  TLam,
  Dot,
  Colon,
  At,
  LParen,
  RParen,
  ConstOpen,
  RBrace,
  Comma,
  Turnstile,
  Amp,
  Bar,
  Tilde,
  End,
};

struct Token {
  Tok kind;
  std::string text;
  int line = 1;
  int col = 1;
};

inline bool ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}
inline bool ident_char(char c) {
  return ident_start(c) || (c >= '0' && c <= '9') || c == '_';
}

inline std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  size_t i = 0;
  auto push = [&](Tok k, std::string text, int l, int c) {
    out.push_back(Token{k, std::move(text), l, c});
  };
  while (i < src.size()) {
    char c = src[i];
    int l = line, co = col;
    auto advance = [&](size_t n) {
      for (size_t j = 0; j < n; ++j) {
        if (src[i] == '\n') {
          ++line;
          col = 1;
        } else {
          ++col;
        }
        ++i;
      }
    };
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance(1);
      continue;
    }
    if (c == '-') {
      if (i + 1 < src.size() && src[i + 1] == '>') {
        push(Tok::Arrow, "->", l, co);
        advance(2);
        continue;
      }
      if (i + 1 < src.size() && src[i + 1] == '-') {
        while (i < src.size() && src[i] != '\n') advance(1);
        continue;
      }
      throw ParseError(l, co, "stray '-' (expected '->' or '--' comment)");
    }
    if (c == '/') {
      if (i + 1 < src.size() && src[i + 1] == '\\') {
        push(Tok::TLam, "/\\", l, co);
        advance(2);
        continue;
      }
      throw ParseError(l, co, "stray '/' (expected '/\\')");
    }
    if (c == '\\') {
      push(Tok::Lam, "\\", l, co);
      advance(1);
      continue;
    }
    if (c == '|') {
      if (i + 1 < src.size() && src[i + 1] == '-') {
        push(Tok::Turnstile, "|-", l, co);
        advance(2);
        continue;
      }
      push(Tok::Bar, "|", l, co);
      advance(1);
      continue;
    }
    if (c == '.') { push(Tok::Dot, ".", l, co); advance(1); continue; }
    if (c == ':') { push(Tok::Colon, ":", l, co); advance(1); continue; }
    if (c == '@') { push(Tok::At, "@", l, co); advance(1); continue; }
    if (c == '(') { push(Tok::LParen, "(", l, co); advance(1); continue; }
    if (c == ')') { push(Tok::RParen, ")", l, co); advance(1); continue; }
    if (c == '}') { push(Tok::RBrace, "}", l, co); advance(1); continue; }
    if (c == ',') { push(Tok::Comma, ",", l, co); advance(1); continue; }
    if (c == '&') { push(Tok::Amp, "&", l, co); advance(1); continue; }
    if (c == '~') { push(Tok::Tilde, "~", l, co); advance(1); continue; }
    if (ident_start(c)) {
      size_t j = i;
      while (j < src.size() && ident_char(src[j])) ++j;
      std::string text(src.substr(i, j - i));
      advance(j - i);
      if (text == "c" && i < src.size() && src[i] == '{') {
        push(Tok::ConstOpen, "c{", l, co);
        advance(1);
      } else {
        push(Tok::Ident, std::move(text), l, co);
      }
      continue;
    }
    throw ParseError(l, co, std::string("unexpected character '") + c + "'");
  }
  push(Tok::End, "", line, col);
  return out;
}

class Parser {
 public:
  Parser(std::string_view src, const SugarExpander* sugar)
      : toks_(lex(src)), sugar_(sugar) {}

  Formula formula_all() {
    Formula f = formula();
    expect(Tok::End, "end of input");
    return f;
  }

  Term term_all() {
    Term t = term();
    expect(Tok::End, "end of input");
    return t;
  }

  // context? |- term (":" formula)?
  struct SequentParts {
    std::vector<std::pair<std::string, Formula>> context;
    std::optional<Term> term;
    std::optional<Formula> formula;
  };

  SequentParts sequent(bool formula_required) {
    SequentParts parts;
    if (peek().kind != Tok::Turnstile) {
      for (;;) {
        const Token& name = expect(Tok::Ident, "variable name");
        if (!is_lower(name.text))
          throw ParseError(name.line, name.col,
                           "variable (lowercase) expected in context");
        expect(Tok::Colon, "':'");
        Formula a = formula();
        parts.context.emplace_back(name.text, std::move(a));
        if (peek().kind == Tok::Comma) {
          get();
          continue;
        }
        break;
      }
    }
    expect(Tok::Turnstile, "'|-'");
    parts.term = term();
    if (peek().kind == Tok::Colon) {
      get();
      parts.formula = formula();
    } else if (formula_required) {
      const Token& tk = peek();
      throw ParseError(tk.line, tk.col, "expected ': FORMULA'");
    }
    expect(Tok::End, "end of input");
    return parts;
  }

  // term ":" formula  (witness file line)
  std::pair<Term, Formula> witness_line() {
    Term t = term();
    expect(Tok::Colon, "':'");
    Formula f = formula();
    expect(Tok::End, "end of input");
    return {std::move(t), std::move(f)};
  }

 private:
  static bool is_lower(const std::string& s) {
    return !s.empty() && s[0] >= 'a' && s[0] <= 'z';
  }
  static bool is_upper(const std::string& s) {
    return !s.empty() && s[0] >= 'A' && s[0] <= 'Z';
  }

  const Token& peek(size_t k = 0) const {
    size_t i = pos_ + k;
    return i < toks_.size() ? toks_[i] : toks_.back();
  }
  const Token& get() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  const Token& expect(Tok k, const std::string& what) {
    const Token& t = peek();
    if (t.kind != k)
      throw ParseError(t.line, t.col,
                       "expected " + what + ", got '" +
                           (t.kind == Tok::End ? "end of input" : t.text) + "'");
    return get();
  }

  [[noreturn]] void fail(const std::string& msg) {
    const Token& t = peek();
    throw ParseError(t.line, t.col, msg);
  }

  // --- formulas ---

  Formula formula() {
    const Token& t = peek();
    if (t.kind == Tok::Ident && t.text == "forall") {
      get();
      return quantified(/*exists=*/false);
    }
    if (sugar_ && t.kind == Tok::Ident && t.text == "exists") {
      get();
      return quantified(/*exists=*/true);
    }
    Formula l = or_level();
    if (peek().kind == Tok::Arrow) {
      get();
      Formula r = formula();  // right associative
      return Formula::arrow(std::move(l), std::move(r));
    }
    return l;
  }

  Formula quantified(bool exists) {
    const Token& name = expect(Tok::Ident, "atom name");
    if (!is_upper(name.text))
      throw ParseError(name.line, name.col,
                       "lowercase identifier where atom expected");
    expect(Tok::Dot, "'.'");
    atom_scope_.push_back(name.text);
    Formula body = formula();
    atom_scope_.pop_back();
    if (exists) return sugar_->exists(name.text, std::move(body));
    return Formula::forall_raw(name.text, std::move(body));
  }

  Formula or_level() {
    Formula l = and_level();
    while (sugar_ && peek().kind == Tok::Bar) {
      get();
      Formula r = and_level();
      l = sugar_->disj(std::move(l), std::move(r));
    }
    return l;
  }

  Formula and_level() {
    Formula l = not_level();
    while (sugar_ && peek().kind == Tok::Amp) {
      get();
      Formula r = not_level();
      l = sugar_->conj(std::move(l), std::move(r));
    }
    return l;
  }

  Formula not_level() {
    if (sugar_ && peek().kind == Tok::Tilde) {
      get();
      return sugar_->neg(not_level());
    }
    return formula_primary();
  }

  Formula formula_primary() {
    const Token& t = peek();
    if (t.kind == Tok::LParen) {
      get();
      Formula f = formula();
      expect(Tok::RParen, "')'");
      return f;
    }
    if (t.kind == Tok::Ident) {
      if (t.text == "forall" || t.text == "exists")
        fail("quantified formula must be parenthesized here");
      if (!is_upper(t.text))
        throw ParseError(t.line, t.col,
                         "lowercase identifier where atom expected");
      get();
      if (sugar_ && t.text == "Bot") return sugar_->bot();
      return atom_ref_formula(t.text);
    }
    fail("expected a formula");
  }

  Formula atom_ref_formula(const std::string& name) {
    for (size_t k = 0; k < atom_scope_.size(); ++k) {
      if (atom_scope_[atom_scope_.size() - 1 - k] == name)
        return Formula::bound_atom(static_cast<int>(k));
    }
    return Formula::atom(name);
  }

  AtomRef atom_ref(const std::string& name) {
    for (size_t k = 0; k < atom_scope_.size(); ++k) {
      if (atom_scope_[atom_scope_.size() - 1 - k] == name)
        return AtomRef::bound(static_cast<int>(k));
    }
    return AtomRef::free(name);
  }

  // --- terms ---

  Term term() {
    const Token& t = peek();
    if (t.kind == Tok::Lam) {
      get();
      const Token& name = expect(Tok::Ident, "variable name");
      if (!is_lower(name.text))
        throw ParseError(name.line, name.col,
                         "variable (lowercase) expected after '\\'");
      std::optional<Formula> ann;
      if (peek().kind == Tok::Colon) {
        get();
        ann = formula();
      }
      expect(Tok::Dot, "'.'");
      var_scope_.push_back(name.text);
      Term body = term();
      var_scope_.pop_back();
      return Term::lam_raw(name.text, std::move(ann), std::move(body));
    }
    if (t.kind == Tok::TLam) {
      get();
      const Token& name = expect(Tok::Ident, "atom name");
      if (!is_upper(name.text))
        throw ParseError(name.line, name.col,
                         "lowercase identifier where atom expected");
      expect(Tok::Dot, "'.'");
      atom_scope_.push_back(name.text);
      Term body = term();
      atom_scope_.pop_back();
      return Term::tlam_raw(name.text, std::move(body));
    }
    Term cur = term_atomic();
    for (;;) {
      const Token& n = peek();
      if (n.kind == Tok::At) {
        get();
        const Token& a = peek();
        if (a.kind == Tok::LParen)
          throw ParseError(a.line, a.col,
                           "atom application requires an atom, not a formula");
        const Token& name = expect(Tok::Ident, "atom name");
        if (!is_upper(name.text))
          throw ParseError(name.line, name.col,
                           "lowercase identifier where atom expected");
        cur = Term::tapp(std::move(cur), atom_ref(name.text));
        continue;
      }
      if (n.kind == Tok::Ident && is_upper(n.text))
        throw ParseError(n.line, n.col,
                         "atom in term position; atom application is written "
                         "'t @" + n.text + "'");
      if ((n.kind == Tok::Ident && is_lower(n.text)) ||
          n.kind == Tok::ConstOpen || n.kind == Tok::LParen) {
        Term arg = term_atomic();
        cur = Term::app(std::move(cur), std::move(arg));
        continue;
      }
      break;
    }
    return cur;
  }

  Term term_atomic() {
    const Token& t = peek();
    if (t.kind == Tok::Ident && is_lower(t.text)) {
      get();
      for (size_t k = 0; k < var_scope_.size(); ++k) {
        if (var_scope_[var_scope_.size() - 1 - k] == t.text)
          return Term::bound_var(static_cast<int>(k));
      }
      return Term::free_var(t.text);
    }
    if (t.kind == Tok::ConstOpen) {
      get();
      Formula f = formula();
      expect(Tok::RBrace, "'}'");
      return Term::constant(std::move(f));
    }
    if (t.kind == Tok::LParen) {
      get();
      Term inner = term();
      expect(Tok::RParen, "')'");
      return inner;
    }
    fail("expected a term");
  }

  std::vector<Token> toks_;
  size_t pos_ = 0;
  const SugarExpander* sugar_;
  std::vector<std::string> var_scope_;
  std::vector<std::string> atom_scope_;
};

}  // namespace detail

inline Formula parse_formula(std::string_view src,
                             const SugarExpander* sugar = nullptr) {
  return detail::Parser(src, sugar).formula_all();
}

inline Term parse_term(std::string_view src,
                       const SugarExpander* sugar = nullptr) {
  return detail::Parser(src, sugar).term_all();
}

struct Sequent {
  std::vector<std::pair<std::string, Formula>> context;
  Term term;
  std::optional<Formula> formula;
};

// "x:A, y:B |- t : C"; the formula part is optional unless required.
inline Sequent parse_sequent(std::string_view src,
                             const SugarExpander* sugar = nullptr,
                             bool formula_required = true) {
  auto parts = detail::Parser(src, sugar).sequent(formula_required);
  return Sequent{std::move(parts.context), std::move(*parts.term),
                 std::move(parts.formula)};
}

// "t : A" (witness files).
inline std::pair<Term, Formula> parse_witness_line(
    std::string_view src, const SugarExpander* sugar = nullptr) {
  return detail::Parser(src, sugar).witness_line();
}

}  // namespace fatk
