// Command-line front end: parse, check, infer, measure, reduce, verify,
// remark and fuzz subcommands over the derivation engine.
//
// Exit codes: 0 success / all verdicts pass; 1 verdict failure; 2 usage or
// parse error; 3 fuel or bounds exhausted.

#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "sti/harness.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitVerdictFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitExhausted = 3;

struct CommonOpts {
  std::string inline_input;
  std::string file_input;
  std::string format = "text";
  std::int64_t fuel = sti::kDefaultFuel;
  std::string strategy = "lo";
};

void add_input_flags(CLI::App* cmd, CommonOpts& o) {
  auto* e = cmd->add_option("-e,--expr", o.inline_input, "inline input");
  auto* f = cmd->add_option("-f,--file", o.file_input, "input file");
  e->excludes(f);
  cmd->add_option("--format", o.format, "output format: text or json")
      ->check(CLI::IsMember({"text", "json"}));
}

void add_bounds_flags(CLI::App* cmd, sti::SearchBounds& b) {
  cmd->add_option("--max-type-elements", b.max_type_elements, "cap on l(s) per binding");
  cmd->add_option("--max-degree", b.max_degree, "cap on intersection nesting");
  cmd->add_option("--max-proof-size", b.max_proof_size, "cap on derivation size");
  cmd->add_option("--time-fuel", b.time_fuel, "search node budget");
}

std::string read_input(const CommonOpts& o) {
  if (!o.inline_input.empty()) return o.inline_input;
  if (o.file_input.empty()) throw CLI::ValidationError("provide -e or -f");
  std::ifstream in(o.file_input);
  if (!in) throw CLI::ValidationError("cannot open " + o.file_input);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

sti::Strategy strategy_of(const std::string& s) {
  return s == "ri" ? sti::Strategy::RightmostInnermost : sti::Strategy::LeftmostOutermost;
}

std::vector<std::int64_t> default_rs(const sti::DerivPtr& d) {
  std::vector<std::int64_t> rs;
  for (std::int64_t r = 1; r <= std::max<std::int64_t>(2, sti::rank(d) + 1); ++r)
    rs.push_back(r);
  return rs;
}

int cmd_parse(const CommonOpts& o) {
  sti::TermPtr t = sti::parse_term(read_input(o));
  if (o.format == "json")
    std::cout << json{{"term", sti::to_string(t)}, {"size", sti::term_size(t)}}.dump(2)
              << "\n";
  else
    std::cout << sti::to_string(t) << "\n";
  return kExitOk;
}

int cmd_check(const CommonOpts& o) {
  json doc = json::parse(read_input(o));  // syntax errors exit 2 via main
  try {
    sti::DerivPtr d = sti::derivation_from_json(doc);
    if (o.format == "json")
      std::cout << json{{"ok", true}}.dump(2) << "\n";
    else
      std::cout << "ok\n";
    return kExitOk;
  } catch (const sti::SchemaError& e) {
    if (o.format == "json")
      std::cout << json{{"ok", false}, {"error", e.what()}}.dump(2) << "\n";
    else
      std::cout << "invalid: " << e.what() << "\n";
    return kExitVerdictFailure;
  }
}

int cmd_infer(const CommonOpts& o, const sti::SearchBounds& b) {
  sti::TermPtr t = sti::parse_term(read_input(o));
  auto res = sti::infer(t, b);
  if (!res) {
    std::cerr << "bounds exhausted (no conclusion about typability)\n";
    return kExitExhausted;
  }
  auto rs = default_rs(res->derivation);
  sti::MeasureReport m = sti::measure_report(res->derivation, rs);
  if (o.format == "json") {
    std::cout << json{{"derivation", sti::derivation_to_json(res->derivation)},
                      {"measures", sti::measure_report_to_json(m)},
                      {"stats",
                       {{"nodes_expanded", res->stats.nodes_expanded},
                        {"attempts", res->stats.attempts},
                        {"memo_hits", res->stats.memo_hits}}}}
                     .dump(2)
              << "\n";
  } else {
    std::cout << sti::pretty_print(res->derivation);
    std::cout << "degree " << m.degree << ", rank " << m.rank << ", proof size "
              << m.proof_size << ", |M| " << m.subject_size << "\n";
  }
  return kExitOk;
}

int cmd_measure(const CommonOpts& o) {
  sti::DerivPtr d = sti::derivation_from_json(json::parse(read_input(o)));
  sti::MeasureReport m = sti::measure_report(d, default_rs(d));
  if (o.format == "json") {
    std::cout << sti::measure_report_to_json(m).dump(2) << "\n";
  } else {
    std::cout << "proof size " << m.proof_size << "\n|M| " << m.subject_size << "\nrank "
              << m.rank << "\ndegree " << m.degree << "\n";
    for (const auto& [r, w] : m.weights)
      std::cout << "W(P," << r << ") = " << w << "\n";
  }
  return kExitOk;
}

int cmd_reduce(const CommonOpts& o, const sti::SearchBounds& b, bool with_derivation) {
  sti::TermPtr t = sti::parse_term(read_input(o));
  sti::Strategy s = strategy_of(o.strategy);
  if (!with_derivation) {
    auto seq = sti::normalize(t, s, o.fuel);
    if (o.format == "json") {
      json steps = json::array();
      for (const auto& m : seq) steps.push_back(sti::to_string(m));
      std::cout << json{{"steps", std::move(steps)}}.dump(2) << "\n";
    } else {
      for (const auto& m : seq) std::cout << sti::to_string(m) << "\n";
    }
    return kExitOk;
  }
  auto res = sti::infer(t, b);
  if (!res) {
    std::cerr << "bounds exhausted: cannot type the term to transport a derivation\n";
    return kExitExhausted;
  }
  sti::ReductionTrace trace = sti::normalize_with_derivation(res->derivation, s, o.fuel);
  if (o.format == "json") {
    std::cout << sti::trace_to_json(trace).dump(2) << "\n";
  } else {
    for (const auto& e : trace.entries) {
      std::cout << sti::to_string(e.term);
      if (e.redex)
        std::cout << "   [redex " << sti::to_string(*e.redex) << ", copies "
                  << e.virtual_copies << "]";
      std::cout << "  W:";
      for (const auto& [r, w] : e.measures.weights) std::cout << " r" << r << "=" << w;
      std::cout << "\n";
    }
  }
  return kExitOk;
}

int cmd_verify(const CommonOpts& o, const sti::SearchBounds& b) {
  sti::TermPtr t = sti::parse_term(read_input(o));
  auto res = sti::infer_minimal_depth(t, b);
  if (!res) {
    std::cerr << "bounds exhausted: cannot type the term\n";
    return kExitExhausted;
  }
  sti::BoundReport r = sti::verify_bounds(t, res->derivation, o.fuel);
  if (o.format == "json") {
    std::cout << sti::bound_report_to_json(r).dump(2) << "\n";
  } else {
    std::cout << "|M| " << r.subject_size << ", degree " << r.degree << ", rank " << r.rank
              << "\nbound |M|^(d+1) = " << r.theorem_bound << "\nlongest reduction "
              << r.longest_reduction << "\nmax normal form size " << r.max_normal_form_size
              << "\nweight ceiling W(P,R(P)) = " << r.weight_ceiling << "\n";
    for (const auto& v : r.verdicts)
      std::cout << (v.pass ? "pass  " : "FAIL  ") << v.name << " (" << v.detail << ")\n";
  }
  return all_pass(r.verdicts) ? kExitOk : kExitVerdictFailure;
}

int cmd_remark(const CommonOpts& o, const sti::SearchBounds& b, std::int64_t n_max) {
  auto rows = sti::remark_family_report(n_max, b, o.fuel);
  if (o.format == "json")
    std::cout << sti::remark_rows_to_json(rows).dump(2) << "\n";
  else
    std::cout << sti::remark_rows_to_text(rows);
  for (const auto& r : rows)
    if (!r.theorem_pass) return kExitVerdictFailure;
  return kExitOk;
}

int cmd_fuzz(const CommonOpts& o, const sti::SearchBounds& b, std::uint64_t seed,
             std::int64_t count, std::int64_t max_size) {
  auto terms = sti::gen_sn_terms(seed, count, max_size);
  std::int64_t inferred = 0, edges = 0;
  std::vector<sti::Verdict> failures;
  for (const auto& t : terms) {
    auto res = sti::infer(t, b);
    if (!res) {
      failures.push_back({"inference", false, sti::to_string(t)});
      continue;
    }
    ++inferred;
    const sti::DerivPtr& d = res->derivation;
    auto check = sti::check_derivation(d);
    if (!check.ok) failures.push_back({"checker", false, sti::to_string(t)});
    for (const auto& v : sti::check_measure_relations(d, 1, 8))
      if (!v.pass) failures.push_back({"measures/" + v.name, false, sti::to_string(t)});
    sti::MonotonicityReport mono = sti::check_weight_monotonicity(d, o.fuel);
    edges += mono.edges;
    for (const auto& v : mono.verdicts)
      if (!v.pass && v.name.find("informational") == std::string::npos)
        failures.push_back({"monotonicity/" + v.name, false, v.detail});
    sti::BoundReport bounds = sti::verify_bounds(t, d, o.fuel);
    for (const auto& v : bounds.verdicts)
      if (!v.pass) failures.push_back({"bound/" + v.name, false, sti::to_string(t)});
    // every intersection-typed subderivation decomposes into a non-empty tree
    std::function<void(const sti::DerivPtr&)> walk = [&](const sti::DerivPtr& sub) {
      if (sub->conclusion().type->kind() == sti::Type::Kind::Inter) {
        sti::IntersectionTreeView view = sti::decompose_intersection_tree(sub);
        if (view.is_empty || view.leaves.size() < 2)
          failures.push_back({"intersection-tree", false, sti::to_string(t)});
      }
      for (const auto& p : sub->premises()) walk(p);
    };
    walk(d);
  }
  if (o.format == "json") {
    json fj = json::array();
    for (const auto& f : failures) fj.push_back({{"name", f.name}, {"detail", f.detail}});
    std::cout << json{{"terms", terms.size()},
                      {"inferred", inferred},
                      {"edges", edges},
                      {"failures", std::move(fj)}}
                     .dump(2)
              << "\n";
  } else {
    std::cout << "terms " << terms.size() << ", inferred " << inferred << ", edges " << edges
              << ", failures " << failures.size() << "\n";
    for (const auto& f : failures)
      std::cout << "FAIL " << f.name << ": " << f.detail << "\n";
  }
  return failures.empty() ? kExitOk : kExitVerdictFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"derivation engine for a non-idempotent, non-associative intersection "
               "type system"};
  app.require_subcommand(1);

  CommonOpts o;
  sti::SearchBounds bounds;
  bool with_derivation = false;
  std::int64_t n_max = 4;
  std::uint64_t seed = 42;
  std::int64_t count = 500;
  std::int64_t max_size = 12;

  auto* parse = app.add_subcommand("parse", "parse a term and echo its canonical form");
  add_input_flags(parse, o);

  auto* check = app.add_subcommand("check", "validate a derivation JSON document");
  add_input_flags(check, o);

  auto* infer = app.add_subcommand("infer", "search for a minimal-depth derivation");
  add_input_flags(infer, o);
  add_bounds_flags(infer, bounds);

  auto* measure = app.add_subcommand("measure", "measures of a derivation JSON document");
  add_input_flags(measure, o);

  auto* reduce = app.add_subcommand("reduce", "normalize a term, optionally with the "
                                              "derivation transported");
  add_input_flags(reduce, o);
  add_bounds_flags(reduce, bounds);
  reduce->add_option("--strategy", o.strategy, "lo or ri")
      ->check(CLI::IsMember({"lo", "ri"}));
  reduce->add_option("--fuel", o.fuel, "step budget");
  reduce->add_flag("--with-derivation", with_derivation, "transport the inferred derivation");

  auto* verify = app.add_subcommand("verify", "check the normalization bound on a term");
  add_input_flags(verify, o);
  add_bounds_flags(verify, bounds);
  verify->add_option("--fuel", o.fuel, "reduction graph state budget");

  auto* remark = app.add_subcommand("remark", "bound report for the family "
                                              "(\\x y. y x...x)(I I)");
  remark->add_option("--n-max", n_max, "largest n");
  remark->add_option("--format", o.format, "output format: text or json")
      ->check(CLI::IsMember({"text", "json"}));
  add_bounds_flags(remark, bounds);
  remark->add_option("--fuel", o.fuel, "reduction graph state budget");

  auto* fuzz = app.add_subcommand("fuzz", "run the corpus suites");
  fuzz->add_option("--seed", seed, "generator seed");
  fuzz->add_option("--count", count, "number of terms");
  fuzz->add_option("--max-size", max_size, "size cap per term");
  fuzz->add_option("--format", o.format, "output format: text or json")
      ->check(CLI::IsMember({"text", "json"}));
  add_bounds_flags(fuzz, bounds);
  fuzz->add_option("--fuel", o.fuel, "reduction graph state budget");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) ? kExitUsage : kExitOk;
  }

  try {
    if (parse->parsed()) return cmd_parse(o);
    if (check->parsed()) return cmd_check(o);
    if (infer->parsed()) return cmd_infer(o, bounds);
    if (measure->parsed()) return cmd_measure(o);
    if (reduce->parsed()) return cmd_reduce(o, bounds, with_derivation);
    if (verify->parsed()) return cmd_verify(o, bounds);
    if (remark->parsed()) return cmd_remark(o, bounds, n_max);
    if (fuzz->parsed()) return cmd_fuzz(o, bounds, seed, count, max_size);
  } catch (const sti::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const sti::SchemaError& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const sti::TypeError& e) {
    std::cerr << "type syntax error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const sti::FuelExhausted& e) {
    std::cerr << e.what() << "\n";
    return kExitExhausted;
  } catch (const json::parse_error& e) {
    std::cerr << "json parse error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const CLI::Error& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitVerdictFailure;
  }
  return kExitUsage;
}
