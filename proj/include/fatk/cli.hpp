#pragma once

// Command-line front end. Subcommands: check, infer, normalize, valid,
// extract, enumerate, encode. Sequent lines are written `Γ |- t : A` with a
// comma-separated context (empty context: `|-`). Formulas accept the sugared
// connectives (&, |, ~, Bot, exists) and are expanded before any core
// processing.
//
// Exit codes: 0 ok, 1 refuted / not derivable, 2 input error, 3 resource
// exhausted.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fatk/encodings.hpp"
#include "fatk/reduction.hpp"
#include "fatk/semantics.hpp"
#include "fatk/serialize.hpp"
#include "fatk/syntax.hpp"
#include "fatk/typing.hpp"

namespace fatk {
namespace cli {

constexpr int kExitOk = 0;
constexpr int kExitRefuted = 1;
constexpr int kExitInput = 2;
constexpr int kExitExhausted = 3;

struct RunConfig {
  std::string file;
  std::string arg;
  std::string base_spec;
  std::string flavor = "E";
  std::string witness_file;
  int fuel = 0;  // 0 = resolve from FATK_FUEL or the default
  int size = 7;
  int depth = 8;
  bool json = false;
  bool trace = false;
  bool as_term = false;
  unsigned long long seed = 0;  // reserved: reproduces seeded generator runs
};

namespace detail_cli {

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline int resolve_fuel(const RunConfig& cfg) {
  if (cfg.fuel > 0) return cfg.fuel;
  if (const char* env = std::getenv("FATK_FUEL")) {
    try {
      int v = std::stoi(env);
      if (v >= 1) return v;
    } catch (...) {
    }
    throw InputError(std::string("invalid FATK_FUEL value '") + env + "'");
  }
  return 10000;
}

inline AtomicBase parse_base(const std::string& spec) {
  AtomicBase base;
  std::string cur;
  auto flush = [&]() {
    if (cur.empty()) return;
    if (cur[0] < 'A' || cur[0] > 'Z')
      throw InputError("base atoms must be uppercase identifiers: '" + cur + "'");
    base.atoms.insert(cur);
    cur.clear();
  };
  for (char c : spec) {
    if (c == ',' || c == ' ') {
      flush();
    } else {
      cur += c;
    }
  }
  flush();
  return base;
}

inline std::vector<std::pair<int, std::string>> read_lines(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::vector<std::pair<int, std::string>> lines;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    size_t i = line.find_first_not_of(" \t\r");
    if (i == std::string::npos) continue;
    if (line.compare(i, 2, "--") == 0) continue;
    lines.emplace_back(n, line);
  }
  return lines;
}

inline Context make_context(
    const std::vector<std::pair<std::string, Formula>>& entries) {
  Context ctx = Context::empty();
  for (const auto& [name, f] : entries) {
    auto ext = ctx.extended(name, f);
    if (!ext.ok()) throw InputError(ext.error().message);
    ctx = std::move(ext).value();
  }
  return ctx;
}

inline WitnessBudget make_budget(const RunConfig& cfg) {
  WitnessBudget b;
  b.term_size_bound = cfg.size;
  b.unfold_depth = cfg.depth;
  b.fuel = Fuel{resolve_fuel(cfg)};
  if (!cfg.witness_file.empty()) {
    for (const auto& [n, line] : read_lines(cfg.witness_file)) {
      try {
        b.user_witnesses.push_back(parse_witness_line(line, &enc::sugar()));
      } catch (const ParseError& e) {
        throw InputError(cfg.witness_file + ":" + std::to_string(n) + ": " +
                         e.what());
      }
    }
  }
  return b;
}

inline std::string describe(const Verdict& v) {
  std::string out = status_name(v.status);
  if (!v.note.empty()) out += ": " + v.note;
  if (v.status == Status::Refuted && v.counterexample) {
    const auto& ce = *v.counterexample;
    for (const auto& a : ce.applied) out += "; " + a;
    out += "; " + ce.reason;
  }
  return out;
}

}  // namespace detail_cli

inline int run(const std::vector<std::string>& args, std::ostream& out,
               std::ostream& err) {
  using detail_cli::InputError;

  CLI::App app{"workbench for atomic second-order intuitionistic logic"};
  app.require_subcommand(1);
  RunConfig cfg;
  app.add_option("--seed", cfg.seed,
                 "seed recorded for reproducing generator-driven runs");

  auto add_common = [&](CLI::App* sub) {
    sub->add_flag("--json", cfg.json, "emit JSON, one object per input line");
  };

  auto* c_check = app.add_subcommand("check", "decide sequents 'G |- t : A'");
  c_check->add_option("file", cfg.file)->required();
  add_common(c_check);

  auto* c_infer = app.add_subcommand("infer", "synthesize formulas for 'G |- t'");
  c_infer->add_option("file", cfg.file)->required();
  add_common(c_infer);

  auto* c_norm = app.add_subcommand("normalize", "normalize terms, one per line");
  c_norm->add_option("file", cfg.file)->required();
  c_norm->add_option("--fuel", cfg.fuel, "max reduction steps");
  c_norm->add_flag("--trace", cfg.trace, "emit the full JSON trace");
  add_common(c_norm);

  auto* c_valid = app.add_subcommand(
      "valid", "proof-theoretic validity of sequents 'G |- t : A'");
  c_valid->add_option("file", cfg.file)->required();
  c_valid->add_option("--flavor", cfg.flavor, "E or I")
      ->check(CLI::IsMember({"E", "I"}));
  c_valid->add_option("--base", cfg.base_spec, "atomic base, e.g. \"X,Y\"");
  c_valid->add_option("--fuel", cfg.fuel, "max reduction steps");
  c_valid->add_option("--size", cfg.size, "witness term size bound");
  c_valid->add_option("--depth", cfg.depth, "membership unfold depth");
  c_valid->add_option("--witnesses", cfg.witness_file,
                      "file of extra witnesses, 'term : Formula' per line");
  add_common(c_valid);

  auto* c_extract = app.add_subcommand(
      "extract", "extract normal proof-terms from sequents 'G |- t : A'");
  c_extract->add_option("file", cfg.file)->required();
  c_extract->add_option("--fuel", cfg.fuel, "max reduction steps");
  add_common(c_extract);

  auto* c_enum = app.add_subcommand("enumerate",
                                    "enumerate normal proof-terms of a formula");
  c_enum->add_option("formula", cfg.arg)->required();
  c_enum->add_option("--size", cfg.size, "term size bound");
  c_enum->add_option("--base", cfg.base_spec, "atomic base, e.g. \"X,Y\"");
  add_common(c_enum);

  auto* c_encode = app.add_subcommand(
      "encode", "expand sugared connectives to the core grammar");
  c_encode->add_option("input", cfg.arg)->required();
  c_encode->add_flag("--term", cfg.as_term, "parse the input as a term");
  add_common(c_encode);

  std::vector<const char*> argv;
  argv.push_back("fatk");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }

  const SugarExpander& sugar = enc::sugar();

  try {
    if (c_check->parsed() || c_infer->parsed()) {
      bool infer_mode = c_infer->parsed();
      bool any_fail = false;
      for (const auto& [n, line] : detail_cli::read_lines(cfg.file)) {
        std::optional<Sequent> seq;
        try {
          seq = parse_sequent(line, &sugar, /*formula_required=*/!infer_mode);
        } catch (const ParseError& e) {
          err << cfg.file << ":" << n << ": " << e.what() << "\n";
          return kExitInput;
        }
        Context ctx = detail_cli::make_context(seq->context);
        if (infer_mode) {
          auto d = synthesize(ctx, seq->term);
          if (cfg.json) {
            Json j{{"line", n}};
            if (d.ok())
              j["formula"] = to_string(d.value().conclusion.formula);
            else
              j["error"] = d.error().message;
            out << j.dump() << "\n";
          } else {
            if (d.ok())
              out << to_string(d.value().conclusion.formula) << "\n";
            else
              out << "error: " << d.error().message << "\n";
          }
          if (!d.ok()) any_fail = true;
        } else {
          auto d = check(ctx, seq->term, *seq->formula);
          if (cfg.json) {
            Json j{{"line", n},
                   {"status", d.ok() ? "derivable" : "not-derivable"}};
            if (!d.ok()) j["error"] = d.error().message;
            out << j.dump() << "\n";
          } else {
            out << (d.ok() ? "derivable"
                           : "not derivable: " + d.error().message)
                << "\n";
          }
          if (!d.ok()) any_fail = true;
        }
      }
      return any_fail ? kExitRefuted : kExitOk;
    }

    if (c_norm->parsed()) {
      Fuel fuel{detail_cli::resolve_fuel(cfg)};
      bool any_exhausted = false;
      for (const auto& [n, line] : detail_cli::read_lines(cfg.file)) {
        Term t = [&] {
          try {
            return parse_term(line, &sugar);
          } catch (const ParseError& e) {
            throw InputError(cfg.file + ":" + std::to_string(n) + ": " +
                             e.what());
          }
        }();
        ReductionTrace tr = normalize(t, fuel);
        bool exhausted = tr.status == TraceStatus::FuelExhausted;
        any_exhausted |= exhausted;
        if (cfg.json) {
          Json j{{"line", n},
                 {"status", exhausted ? "fuel-exhausted" : "normalized"}};
          if (!exhausted) j["term"] = to_string(tr.final());
          if (cfg.trace) j["trace"] = trace_json(tr);
          out << j.dump() << "\n";
        } else if (cfg.trace) {
          out << trace_json(tr).dump() << "\n";
        } else {
          out << (exhausted ? "FUEL-EXHAUSTED" : to_string(tr.final())) << "\n";
        }
      }
      return any_exhausted ? kExitExhausted : kExitOk;
    }

    if (c_valid->parsed()) {
      AtomicBase base = detail_cli::parse_base(cfg.base_spec);
      WitnessBudget budget = detail_cli::make_budget(cfg);
      Flavor flavor = cfg.flavor == "I" ? Flavor::I : Flavor::E;
      bool any_refuted = false, any_unknown = false;
      for (const auto& [n, line] : detail_cli::read_lines(cfg.file)) {
        std::optional<Sequent> seq;
        try {
          seq = parse_sequent(line, &sugar);
        } catch (const ParseError& e) {
          err << cfg.file << ":" << n << ": " << e.what() << "\n";
          return kExitInput;
        }
        Context ctx = detail_cli::make_context(seq->context);
        Verdict v = is_valid(seq->term, ctx, *seq->formula, flavor, base, budget);
        any_refuted |= v.status == Status::Refuted;
        any_unknown |= v.status == Status::Unknown;
        if (cfg.json) {
          Json j = verdict_json(v, seq->term, *seq->formula, cfg.flavor.c_str());
          j["line"] = n;
          out << j.dump() << "\n";
        } else {
          out << detail_cli::describe(v) << "\n";
        }
      }
      if (any_refuted) return kExitRefuted;
      if (any_unknown) return kExitExhausted;
      return kExitOk;
    }

    if (c_extract->parsed()) {
      Fuel fuel{detail_cli::resolve_fuel(cfg)};
      bool any_exhausted = false, any_failed = false;
      for (const auto& [n, line] : detail_cli::read_lines(cfg.file)) {
        std::optional<Sequent> seq;
        try {
          seq = parse_sequent(line, &sugar);
        } catch (const ParseError& e) {
          err << cfg.file << ":" << n << ": " << e.what() << "\n";
          return kExitInput;
        }
        Context ctx = detail_cli::make_context(seq->context);
        ExtractOutcome r = extract(seq->term, ctx, *seq->formula, fuel);
        switch (r.status) {
          case ExtractOutcome::Status::Ok:
            if (cfg.json) {
              Json j{{"line", n},
                     {"status", "ok"},
                     {"term", to_string(r.result_term)},
                     {"derivation", derivation_json(*r.derivation)},
                     {"trace", trace_json(r.trace)}};
              out << j.dump() << "\n";
            } else {
              out << to_string(r.result_term) << "\n";
              out << to_string(*r.derivation, 1);
            }
            break;
          case ExtractOutcome::Status::FuelExhausted:
            any_exhausted = true;
            if (cfg.json)
              out << Json{{"line", n}, {"status", "fuel-exhausted"}}.dump()
                  << "\n";
            else
              out << "FUEL-EXHAUSTED\n";
            break;
          case ExtractOutcome::Status::CheckFailed:
            any_failed = true;
            if (cfg.json)
              out << Json{{"line", n},
                          {"status", "check-failed"},
                          {"term", to_string(r.result_term)},
                          {"error", r.diagnostics}}
                         .dump()
                  << "\n";
            else
              out << "CHECK-FAILED: " << r.diagnostics << "\n";
            break;
        }
      }
      if (any_exhausted) return kExitExhausted;
      if (any_failed) return kExitRefuted;
      return kExitOk;
    }

    if (c_enum->parsed()) {
      AtomicBase base = detail_cli::parse_base(cfg.base_spec);
      Formula goal = [&] {
        try {
          return parse_formula(cfg.arg, &sugar);
        } catch (const ParseError& e) {
          throw InputError(std::string("formula: ") + e.what());
        }
      }();
      auto terms = enumerate_normal(Context::empty(), goal, base, cfg.size);
      if (cfg.json) {
        Json arr = Json::array();
        for (const auto& t : terms) arr.push_back(to_string(t));
        out << Json{{"formula", to_string(goal)}, {"terms", arr}}.dump() << "\n";
      } else {
        for (const auto& t : terms) out << to_string(t) << "\n";
      }
      return kExitOk;
    }

    if (c_encode->parsed()) {
      if (!cfg.as_term) {
        try {
          Formula f = parse_formula(cfg.arg, &sugar);
          if (cfg.json)
            out << Json{{"formula", to_string(f)}}.dump() << "\n";
          else
            out << to_string(f) << "\n";
          return kExitOk;
        } catch (const ParseError&) {
          // fall through to term parsing
        }
      }
      try {
        Term t = parse_term(cfg.arg, &sugar);
        if (cfg.json)
          out << Json{{"term", to_string(t)}}.dump() << "\n";
        else
          out << to_string(t) << "\n";
        return kExitOk;
      } catch (const ParseError& e) {
        throw InputError(std::string("input: ") + e.what());
      }
    }
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }

  err << "error: no command\n";
  return kExitInput;
}

}  // namespace cli
}  // namespace fatk
