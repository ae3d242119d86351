#include <doctest.h>

#include "fatk/reduction.hpp"
#include "fatk/semantics.hpp"
#include "fatk/typing.hpp"
#include "generators.hpp"

using namespace fatk;

TEST_CASE("single steps") {
  auto s1 = step(parse_term("(\\x. x) c{X}"));
  REQUIRE(s1.has_value());
  CHECK(s1->rule == StepRule::BetaTerm);
  CHECK(s1->path.empty());
  CHECK(s1->result == parse_term("c{X}"));

  auto s2 = step(parse_term("(/\\X. \\x:X. x) @Y"));
  REQUIRE(s2.has_value());
  CHECK(s2->rule == StepRule::BetaAtom);
  CHECK(s2->result == parse_term("\\x:Y. x"));

  CHECK_FALSE(step(parse_term("c{X}")).has_value());
  CHECK_FALSE(step(parse_term("\\x. x")).has_value());
}

TEST_CASE("normal order picks the leftmost-outermost redex") {
  Term t = parse_term("(\\x. x) ((\\y. y) c{X})");
  auto s = step(t);
  REQUIRE(s.has_value());
  CHECK(s->path.empty());  // the outer redex fires first
  CHECK(s->result == parse_term("(\\y. y) c{X}"));
}

TEST_CASE("normalize: trace shape and statuses") {
  ReductionTrace tr = normalize(parse_term("(\\x. x) ((\\y. y) c{X})"), Fuel{100});
  CHECK(tr.status == TraceStatus::Normalized);
  CHECK(tr.steps.size() == 2);
  CHECK(tr.final() == parse_term("c{X}"));
  CHECK(replay_trace(tr));

  ReductionTrace omega =
      normalize(parse_term("(\\x. x x) (\\x. x x)"), Fuel{50});
  CHECK(omega.status == TraceStatus::FuelExhausted);
  CHECK(omega.steps.size() == 50);
  CHECK(replay_trace(omega));

  ReductionTrace spine = normalize(parse_term("c{X -> Y} c{X}"), Fuel{10});
  CHECK(spine.status == TraceStatus::Normalized);
  CHECK(spine.steps.empty());
  CHECK(spine.final() == parse_term("c{X -> Y} c{X}"));

  CHECK_THROWS_AS(normalize(parse_term("c{X}"), Fuel{0}), BudgetError);
}

TEST_CASE("is_normal") {
  CHECK(is_normal(parse_term("\\x. x")));
  CHECK_FALSE(is_normal(parse_term("(\\x. x) y")));
  CHECK(is_normal(parse_term("c{forall X. X} @Y")));
  CHECK_FALSE(is_normal(parse_term("\\z. (/\\X. z) @Y")));
}

TEST_CASE("eta expansion") {
  Term c = parse_term("c{X -> Y}");
  CHECK(alpha_eq(eta_expand(c, EtaMode::TermMode), parse_term("\\x. c{X -> Y} x")));

  Term d = parse_term("c{forall X. X}");
  CHECK(alpha_eq(eta_expand(d, EtaMode::AtomMode),
                 parse_term("/\\Z. c{forall X. X} @Z")));

  CHECK(alpha_eq(eta_expand(parse_term("\\y. y"), EtaMode::TermMode),
                 parse_term("\\x. (\\y. y) x")));

  // the binder is fresh for the expanded term
  Term open_term = parse_term("x");
  Term e = eta_expand(open_term, EtaMode::TermMode);
  CHECK(alpha_eq(e, parse_term("\\y. x y")));
  CHECK(term_fv(e) == std::set<std::string>{"x"});
}

TEST_CASE("eta expansion preserves checkability") {
  Context ctx = Context::empty().extended("f", parse_formula("X -> Y")).value();
  Term f = var("f");
  CHECK(check(ctx, eta_expand(f, EtaMode::TermMode), parse_formula("X -> Y")).ok());

  Context ctx2 =
      Context::empty().extended("g", parse_formula("forall X. X")).value();
  CHECK(check(ctx2, eta_expand(var("g"), EtaMode::AtomMode),
              parse_formula("forall X. X"))
            .ok());
}

TEST_CASE("trace replay rejects corrupted traces") {
  ReductionTrace tr = normalize(parse_term("(\\x. x) ((\\y. y) c{X})"), Fuel{10});
  REQUIRE(tr.steps.size() == 2);
  ReductionTrace bad = tr;
  bad.steps[1].result = parse_term("c{Y}");
  CHECK_FALSE(replay_trace(bad));
  ReductionTrace bad2 = tr;
  bad2.steps[0].path = {0};
  CHECK_FALSE(replay_trace(bad2));
}

namespace {

// Auxiliary strategy for the confluence spot check: contract the rightmost
// innermost redex instead.
std::optional<Term> rightmost_innermost_step(const Term& t) {
  switch (t.kind()) {
    case Term::Kind::FreeVar:
    case Term::Kind::BoundVar:
    case Term::Kind::Const:
      return std::nullopt;
    case Term::Kind::Lam:
    case Term::Kind::TLam: {
      auto b = rightmost_innermost_step(t.body());
      if (!b) return std::nullopt;
      return t.kind() == Term::Kind::Lam
                 ? Term::lam_raw(t.binder_hint(), t.annotation(), *b)
                 : Term::tlam_raw(t.binder_hint(), *b);
    }
    case Term::Kind::App: {
      if (auto a = rightmost_innermost_step(t.arg()))
        return app(t.fun(), *a);
      if (auto f = rightmost_innermost_step(t.fun()))
        return app(*f, t.arg());
      if (t.fun().kind() == Term::Kind::Lam)
        return instantiate_var(t.fun().body(), t.arg());
      return std::nullopt;
    }
    case Term::Kind::TApp: {
      if (auto f = rightmost_innermost_step(t.fun()))
        return tapp(*f, t.atom_ref());
      if (t.fun().kind() == Term::Kind::TLam)
        return instantiate_atom(t.fun().body(), t.atom_ref());
      return std::nullopt;
    }
  }
  return std::nullopt;
}

std::optional<Term> innermost_normalize(Term t, int fuel) {
  for (int i = 0; i < fuel; ++i) {
    auto n = rightmost_innermost_step(t);
    if (!n) return t;
    t = *n;
  }
  return std::nullopt;
}

}  // namespace

TEST_CASE("property: confluence spot check against an innermost strategy") {
  gen::Rng rng(271828);
  gen::RawTermCfg cfg;
  int compared = 0;
  for (int i = 0; i < 500; ++i) {
    Term t = gen::random_term(rng, cfg);
    ReductionTrace tr = normalize(t, Fuel{400});
    auto inner = innermost_normalize(t, 400);
    if (tr.status != TraceStatus::Normalized || !inner) continue;
    CAPTURE(to_string(t));
    CHECK(alpha_eq(tr.final(), *inner));
    ++compared;
  }
  CHECK(compared > 300);
}

TEST_CASE("property: reduction does not grow free variables") {
  gen::Rng rng(3141);
  gen::RawTermCfg cfg;
  for (int i = 0; i < 400; ++i) {
    Term t = gen::random_term(rng, cfg);
    auto s = step(t);
    if (!s) continue;
    auto before = fv(t);
    auto after = fv(s->result);
    for (const auto& v : after.vars) CHECK(before.vars.count(v) == 1);
    for (const auto& a : after.atoms) CHECK(before.atoms.count(a) == 1);
  }
}

namespace {

void collect_const_tags(const Term& t,
                        std::multiset<std::pair<std::string, int>>& out) {
  switch (t.kind()) {
    case Term::Kind::Const:
      out.insert({fatk::detail::formula_key(t.const_formula()),
                  t.tag() ? *t.tag() : -1});
      return;
    case Term::Kind::Lam:
    case Term::Kind::TLam:
      collect_const_tags(t.body(), out);
      return;
    case Term::Kind::App:
      collect_const_tags(t.fun(), out);
      collect_const_tags(t.arg(), out);
      return;
    case Term::Kind::TApp:
      collect_const_tags(t.fun(), out);
      return;
    default:
      return;
  }
}

}  // namespace

TEST_CASE("property: reduction never invents constants or tags") {
  gen::Rng rng(505);
  gen::RawTermCfg cfg;
  for (int i = 0; i < 400; ++i) {
    Term t = gen::random_term(rng, cfg);
    auto s = step(t);
    if (!s) continue;
    std::multiset<std::pair<std::string, int>> before, after;
    collect_const_tags(t, before);
    collect_const_tags(s->result, after);
    // the set of tags never grows
    std::set<int> tags_before, tags_after;
    for (const auto& [_, tag] : before) tags_before.insert(tag);
    for (const auto& [_, tag] : after) tags_after.insert(tag);
    for (int tag : tags_after) CHECK(tags_before.count(tag) == 1);
    // constants with locally closed formulas keep their identity under a
    // term-level step (an atom step may rewrite c{X} to c{Y})
    if (s->rule == StepRule::BetaTerm) {
      for (const auto& c : after) {
        if (c.first.find('B') == std::string::npos)
          CHECK(before.count(c) >= 1);
      }
    }
  }
}

TEST_CASE("property: reduction preserves proof-term-hood") {
  gen::Rng rng(606);
  AtomicBase base{{"X", "Y"}};
  gen::RawTermCfg cfg;
  for (int i = 0; i < 400; ++i) {
    Term t = gen::random_term(rng, cfg);
    if (!is_proof_term(t, base)) continue;
    ReductionTrace tr = normalize(t, Fuel{200});
    for (const auto& s : tr.steps) CHECK(is_proof_term(s.result, base));
  }
}
