#pragma once

// JSON views of traces, derivations and verdicts. Terms and formulas are
// embedded as their canonical printed forms, which re-parse to alpha-equal
// ASTs.

#include <string>

#include <json.hpp>

#include "fatk/reduction.hpp"
#include "fatk/semantics.hpp"
#include "fatk/syntax.hpp"
#include "fatk/typing.hpp"

namespace fatk {

using Json = nlohmann::json;

inline Json trace_json(const ReductionTrace& tr) {
  Json steps = Json::array();
  for (const auto& s : tr.steps) {
    Json step;
    step["path"] = s.path;
    step["rule"] = step_rule_name(s.rule);
    step["result"] = to_string(s.result);
    steps.push_back(std::move(step));
  }
  return Json{{"start", to_string(tr.start)},
              {"steps", std::move(steps)},
              {"status", tr.status == TraceStatus::Normalized
                             ? "normalized"
                             : "fuel-exhausted"}};
}

inline Json judgment_json(const Judgment& j) {
  Json ctx = Json::array();
  for (const auto& [name, f] : j.ctx.entries())
    ctx.push_back(Json{{"var", name}, {"formula", to_string(f)}});
  return Json{{"ctx", std::move(ctx)},
              {"term", to_string(j.term)},
              {"formula", to_string(j.formula)}};
}

inline Json derivation_json(const Derivation& d) {
  Json premises = Json::array();
  for (const auto& p : d.premises) premises.push_back(derivation_json(p));
  return Json{{"rule", rule_name(d.rule)},
              {"conclusion", judgment_json(d.conclusion)},
              {"premises", std::move(premises)}};
}

inline Json verdict_json(const Verdict& v, const Term& term,
                         const Formula& formula, const char* flavor) {
  Json evidence;
  if (v.trace) evidence["trace"] = trace_json(*v.trace);
  if (v.derivation) evidence["derivation"] = derivation_json(*v.derivation);
  if (v.counterexample) {
    const Counterexample& ce = *v.counterexample;
    Json cj{{"applied", ce.applied},
            {"instance", to_string(ce.instance)},
            {"at", to_string(ce.at)},
            {"reason", ce.reason}};
    if (ce.trace) cj["trace"] = trace_json(*ce.trace);
    evidence["counterexample"] = std::move(cj);
  }
  evidence["witnesses_tried"] = v.witnesses_tried;
  evidence["fuel_used"] = v.fuel_used;
  Json out{{"status", status_name(v.status)},
           {"formula", to_string(formula)},
           {"term", to_string(term)},
           {"evidence", std::move(evidence)}};
  if (v.note.size()) out["note"] = v.note;
  if (flavor) out["flavor"] = flavor;
  return out;
}

}  // namespace fatk
