#include "sti/harness.hpp"

#include <algorithm>
#include <random>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

namespace sti {

bool all_pass(const std::vector<Verdict>& vs) {
  for (const auto& v : vs)
    if (!v.pass) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Bound verification

BoundReport verify_bounds(const TermPtr& m, const DerivPtr& pi, std::int64_t fuel) {
  BoundReport r;
  r.term = m;
  r.subject_size = term_size(m);
  r.degree = degree(pi);
  r.rank = rank(pi);
  r.theorem_bound = checked_pow(r.subject_size, r.degree + 1);
  ReductionGraphInfo info = explore_reduction_graph(m, fuel);
  r.longest_reduction = info.longest_path;
  r.max_normal_form_size = info.max_normal_form_size;
  r.weight_ceiling = weight(pi, r.rank);

  auto verdict = [&r](const std::string& name, bool pass, const std::string& detail) {
    r.verdicts.push_back({name, pass, detail});
  };
  verdict("steps-below-theorem-bound", r.longest_reduction < r.theorem_bound,
          std::to_string(r.longest_reduction) + " < " + std::to_string(r.theorem_bound));
  // The strict size bound is a claim about reducts reached in n >= 1 steps;
  // a term that already is its own normal form meets it non-strictly.
  bool already_normal = r.longest_reduction == 0;
  bool nf_ok = already_normal ? r.max_normal_form_size <= r.theorem_bound
                              : r.max_normal_form_size < r.theorem_bound;
  verdict("normal-form-below-theorem-bound", nf_ok,
          std::to_string(r.max_normal_form_size) + (already_normal ? " <= " : " < ") +
              std::to_string(r.theorem_bound));
  verdict("steps-below-weight-ceiling", r.longest_reduction < r.weight_ceiling,
          std::to_string(r.longest_reduction) + " < " + std::to_string(r.weight_ceiling));
  return r;
}

nlohmann::json bound_report_to_json(const BoundReport& r) {
  nlohmann::json verdicts = nlohmann::json::array();
  for (const auto& v : r.verdicts)
    verdicts.push_back({{"name", v.name}, {"pass", v.pass}, {"detail", v.detail}});
  return nlohmann::json{{"term", to_string(r.term)},
                        {"subject_size", r.subject_size},
                        {"degree", r.degree},
                        {"rank", r.rank},
                        {"theorem_bound", r.theorem_bound},
                        {"longest_reduction", r.longest_reduction},
                        {"max_normal_form_size", r.max_normal_form_size},
                        {"weight_ceiling", r.weight_ceiling},
                        {"verdicts", std::move(verdicts)},
                        {"pass", all_pass(r.verdicts)}};
}

std::vector<Verdict> check_measure_relations(const DerivPtr& pi, std::int64_t r_min, std::int64_t r_max) {
  std::vector<Verdict> out;
  std::int64_t rk = rank(pi);
  std::int64_t msize = term_size(pi->conclusion().subject);
  std::int64_t psize = proof_size(pi);
  std::int64_t deg = degree(pi);
  out.push_back({"rank<=|M|<=|P|", rk <= msize && msize <= psize,
                 std::to_string(rk) + " <= " + std::to_string(msize) + " <= " +
                     std::to_string(psize)});
  std::int64_t w1 = weight(pi, 1);
  out.push_back({"W(P,1)=|M|", w1 == msize,
                 std::to_string(w1) + " vs " + std::to_string(msize)});
  bool bounded = true;
  std::string detail;
  for (std::int64_t r = r_min; r <= r_max; ++r) {
    std::int64_t wr = weight(pi, r);
    std::int64_t cap = checked_pow(r, deg) * w1;
    if (wr > cap) {
      bounded = false;
      detail = "r=" + std::to_string(r) + ": " + std::to_string(wr) + " > " +
               std::to_string(cap);
      break;
    }
  }
  out.push_back({"W(P,r)<=r^D*W(P,1)", bounded, detail});
  return out;
}

// ---------------------------------------------------------------------------
// Full reduction-graph transport

namespace {

// Canonical fingerprint of a derivation, invariant under renaming of term
// variables. Names are indexed by first occurrence in a fixed traversal
// (subjects in preorder, then rule data, then premises), then everything is
// serialized against those indices.
struct Fingerprinter {
  std::map<std::string, int> index;

  void touch(const std::string& name) { index.emplace(name, static_cast<int>(index.size())); }

  void touch_term(const TermPtr& t, std::vector<std::string>& bound) {
    switch (t->kind()) {
      case Term::Kind::Var:
        if (std::find(bound.rbegin(), bound.rend(), t->name()) == bound.rend())
          touch(t->name());
        return;
      case Term::Kind::Abs:
        bound.push_back(t->binder());
        touch_term(t->body(), bound);
        bound.pop_back();
        return;
      case Term::Kind::App:
        touch_term(t->fn(), bound);
        touch_term(t->arg(), bound);
        return;
    }
  }

  void touch_deriv(const DerivPtr& d) {
    std::vector<std::string> bound;
    touch_term(d->conclusion().subject, bound);
    switch (d->rule()) {
      case Rule::Weaken:
        touch(d->weaken_data().var);
        break;
      case Rule::ArrowIntro:
        touch(d->intro_data().binder);
        break;
      case Rule::Mux:
        for (const auto& x : d->mux_data().merged) touch(x);
        touch(d->mux_data().fresh);
        break;
      default:
        break;
    }
    for (const auto& p : d->premises()) touch_deriv(p);
  }

  std::string term_key(const TermPtr& t, std::vector<std::string>& bound) {
    switch (t->kind()) {
      case Term::Kind::Var: {
        for (std::size_t i = bound.size(); i-- > 0;)
          if (bound[i] == t->name()) return "b" + std::to_string(bound.size() - 1 - i);
        return "f" + std::to_string(index.at(t->name()));
      }
      case Term::Kind::Abs: {
        bound.push_back(t->binder());
        std::string s = "(\\" + term_key(t->body(), bound) + ")";
        bound.pop_back();
        return s;
      }
      case Term::Kind::App: {
        std::string f = term_key(t->fn(), bound);
        return "(" + f + " " + term_key(t->arg(), bound) + ")";
      }
    }
    return "?";
  }

  std::string deriv_key(const DerivPtr& d) {
    std::string s = "(";
    s += std::to_string(static_cast<int>(d->rule()));
    std::vector<std::string> bound;
    s += "|" + term_key(d->conclusion().subject, bound);
    s += "|" + type_key(canonicalize(d->conclusion().type));
    std::vector<std::pair<int, std::string>> ctx;
    for (const auto& [var, ty] : d->conclusion().ctx)
      ctx.emplace_back(index.at(var), type_key(canonicalize(ty)));
    std::sort(ctx.begin(), ctx.end());
    s += "|";
    for (const auto& [i, ty] : ctx) s += std::to_string(i) + ":" + ty + ";";
    switch (d->rule()) {
      case Rule::Weaken:
        s += "|w" + std::to_string(index.at(d->weaken_data().var));
        break;
      case Rule::ArrowIntro:
        s += "|i" + std::to_string(index.at(d->intro_data().binder));
        break;
      case Rule::Mux: {
        s += "|m";
        for (const auto& x : d->mux_data().merged) s += std::to_string(index.at(x)) + ",";
        s += "->" + std::to_string(index.at(d->mux_data().fresh));
        break;
      }
      default:
        break;
    }
    for (const auto& p : d->premises()) s += deriv_key(p);
    return s + ")";
  }
};

std::string derivation_fingerprint(const DerivPtr& d) {
  Fingerprinter fp;
  fp.touch_deriv(d);
  return fp.deriv_key(d);
}

}  // namespace

MonotonicityReport check_weight_monotonicity(const DerivPtr& pi, std::int64_t fuel) {
  MonotonicityReport report;
  bool weight_ok = true, rank_ok = true, degree_ok = true;
  std::string weight_detail, rank_detail, degree_detail;

  std::unordered_set<std::string> seen;
  std::vector<DerivPtr> queue{pi};
  seen.insert(derivation_fingerprint(pi));
  while (!queue.empty()) {
    DerivPtr cur = queue.back();
    queue.pop_back();
    ++report.states;
    if (report.states > fuel)
      throw FuelExhausted("weight monotonicity: fuel exhausted at " + std::to_string(fuel) +
                          " states");
    std::int64_t cur_rank = rank(cur);
    std::int64_t cur_degree = degree(cur);
    for (const auto& p : redexes(cur->conclusion().subject)) {
      DerivedStep step = reduce_subject(cur, p);
      ++report.edges;
      for (std::int64_t r = cur_rank; r <= cur_rank + 3; ++r) {
        std::int64_t before = weight(cur, r);
        std::int64_t after = weight(step.after, r);
        if (after >= before && weight_ok) {
          weight_ok = false;
          weight_detail = "term " + to_string(cur->conclusion().subject) + " redex " +
                          to_string(p) + " r=" + std::to_string(r) + ": " +
                          std::to_string(before) + " -> " + std::to_string(after);
        }
      }
      if (rank(step.after) > cur_rank && rank_ok) {
        rank_ok = false;
        rank_detail = "term " + to_string(cur->conclusion().subject) + " redex " + to_string(p);
      }
      if (degree(step.after) > cur_degree && degree_ok) {
        degree_ok = false;
        degree_detail = "term " + to_string(cur->conclusion().subject) + " redex " + to_string(p);
      }
      std::string key = derivation_fingerprint(step.after);
      if (seen.insert(std::move(key)).second) queue.push_back(step.after);
    }
  }
  report.verdicts.push_back({"weight-strictly-decreases", weight_ok, weight_detail});
  report.verdicts.push_back({"rank-non-increasing", rank_ok, rank_detail});
  report.verdicts.push_back({"degree-non-increasing (informational)", degree_ok, degree_detail});
  return report;
}

// ---------------------------------------------------------------------------
// Corpus generation: closed simply-typed terms by type-directed synthesis

namespace {

struct STy;
using STyPtr = std::shared_ptr<const STy>;

struct STy {
  int base = -1;  // >= 0: base type id; -1: arrow
  STyPtr dom, cod;

  static STyPtr mk_base(int id) {
    auto t = std::make_shared<STy>();
    t->base = id;
    return t;
  }
  static STyPtr mk_arrow(STyPtr d, STyPtr c) {
    auto t = std::make_shared<STy>();
    t->base = -1;
    t->dom = std::move(d);
    t->cod = std::move(c);
    return t;
  }
};

bool sty_equal(const STyPtr& a, const STyPtr& b) {
  if (a->base >= 0 || b->base >= 0) return a->base == b->base;
  return sty_equal(a->dom, b->dom) && sty_equal(a->cod, b->cod);
}

struct Generator {
  std::mt19937_64 rng;
  int num_bases = 2;

  std::uint64_t pick(std::uint64_t n) { return rng() % n; }

  STyPtr random_type(int depth) {
    if (depth <= 0 || pick(100) < 45)
      return STy::mk_base(static_cast<int>(pick(static_cast<std::uint64_t>(num_bases))));
    return STy::mk_arrow(random_type(depth - 1), random_type(depth - 1));
  }

  static const char* binder_supply(std::size_t depth) {
    static const char* names[] = {"x", "y", "z", "u", "v", "w", "p", "q", "r", "s"};
    return names[depth % 10];
  }

  using Env = std::vector<std::pair<std::string, STyPtr>>;

  static std::int64_t occurrences(const TermPtr& t, const std::string& var) {
    switch (t->kind()) {
      case Term::Kind::Var:
        return t->name() == var ? 1 : 0;
      case Term::Kind::Abs:
        return t->binder() == var ? 0 : occurrences(t->body(), var);
      case Term::Kind::App:
        return occurrences(t->fn(), var) + occurrences(t->arg(), var);
    }
    return 0;
  }

  // A redex whose function uses its argument at least twice: the derivation
  // must type the argument under an intersection. Shape (\x. body) a with
  // x occurring >= 2 times in the synthesized body.
  TermPtr duplicating_app(const Env& env, const STyPtr& target, std::int64_t budget,
                          int effort) {
    if (budget < 9) return nullptr;
    STyPtr sigma;
    std::uint64_t roll = pick(100);
    if (!env.empty() && roll < 40) {
      sigma = env[pick(env.size())].second;
    } else if (roll < 80) {
      STyPtr base = STy::mk_base(static_cast<int>(pick(static_cast<std::uint64_t>(num_bases))));
      sigma = STy::mk_arrow(base, base);
    } else {
      sigma = target;
    }
    TermPtr arg = synth(env, sigma, 1 + static_cast<std::int64_t>(pick(3)), effort - 1);
    if (!arg) return nullptr;
    std::set<std::string> avoid = all_names(arg);
    for (const auto& [name, ty] : env) avoid.insert(name);
    std::string x = fresh_name("d", avoid);
    Env inner = env;
    inner.emplace_back(x, sigma);
    std::int64_t body_budget = budget - 2 - term_size(arg);
    for (int tries = 0; tries < 12; ++tries) {
      TermPtr body = synth(inner, target, body_budget, effort - 1);
      if (body && occurrences(body, x) >= 2)
        return Term::app(Term::abs(x, body), arg);
    }
    return nullptr;
  }

  // Synthesize a term of the given type within the size budget; nullptr on a
  // dead end (caller retries with fresh randomness).
  TermPtr synth(const Env& env, const STyPtr& target, std::int64_t budget, int effort) {
    if (budget <= 0 || effort <= 0) return nullptr;
    // Candidate variables of the target type.
    std::vector<std::size_t> vars;
    for (std::size_t i = 0; i < env.size(); ++i)
      if (sty_equal(env[i].second, target)) vars.push_back(i);

    for (int attempt = 0; attempt < 3; ++attempt) {
      std::uint64_t move = pick(100);
      if (budget >= 9 && move < 40) {
        if (TermPtr t = duplicating_app(env, target, budget, effort)) return t;
        continue;
      }
      if (target->base < 0 && (move < 55 || budget < 3)) {
        // Lambda.
        if (budget < 2) continue;
        std::string binder = binder_supply(env.size());
        Env inner = env;
        inner.emplace_back(binder, target->dom);
        if (TermPtr body = synth(inner, target->cod, budget - 1, effort - 1))
          return Term::abs(binder, body);
        continue;
      }
      if (!vars.empty() && (move < 75 || budget < 4)) {
        return Term::var(env[vars[pick(vars.size())]].first);
      }
      if (budget >= 4) {
        // Application: pick an argument type, preferring types already in
        // scope so redexes and variable reuse actually occur.
        STyPtr arg_ty = env.empty() || pick(100) < 50
                            ? random_type(1)
                            : env[pick(env.size())].second;
        std::int64_t fn_budget = 2 + static_cast<std::int64_t>(
						  pick(static_cast<std::uint64_t>(budget - 3)));
        TermPtr fn = synth(env, STy::mk_arrow(arg_ty, target), fn_budget, effort - 1);
        if (!fn) continue;
        TermPtr arg = synth(env, arg_ty, budget - 1 - term_size(fn), effort - 1);
        if (!arg) continue;
        return Term::app(fn, arg);
      }
    }
    return nullptr;
  }
};

}  // namespace

std::vector<TermPtr> gen_sn_terms(std::uint64_t seed, std::int64_t count,
                                  std::int64_t max_size) {
  Generator gen;
  gen.rng.seed(seed);
  std::vector<TermPtr> out;
  std::unordered_set<std::string> seen;
  std::int64_t stale = 0;
  while (static_cast<std::int64_t>(out.size()) < count) {
    if (++stale > 200000)
      throw FuelExhausted("gen_sn_terms: could not reach the requested count");
    gen.num_bases = 1 + static_cast<int>(gen.pick(3));
    STyPtr target = STy::mk_arrow(gen.random_type(2), gen.random_type(2));
    TermPtr t = gen.synth({}, target, max_size, 64);
    if (!t || term_size(t) > max_size) continue;
    if (!free_vars(t).empty()) continue;
    if (!seen.insert(alpha_key(t)).second) continue;
    out.push_back(std::move(t));
    stale = 0;
  }
  return out;
}

// ---------------------------------------------------------------------------
// The remark family

TermPtr remark_term(std::int64_t n) {
  if (n < 1) throw TermError("remark_term: n must be >= 1");
  TermPtr body = Term::var("y");
  for (std::int64_t i = 0; i < n; ++i) body = Term::app(body, Term::var("x"));
  TermPtr fn = Term::abs("x", Term::abs("y", body));
  TermPtr id = Term::abs("w", Term::var("w"));
  return Term::app(fn, Term::app(id, id));
}

std::vector<RemarkRow> remark_family_report(std::int64_t n_max, const SearchBounds& b,
                                            std::int64_t fuel) {
  std::vector<RemarkRow> rows;
  for (std::int64_t n = 1; n <= n_max; ++n) {
    RemarkRow row;
    row.n = n;
    TermPtr m = remark_term(n);
    row.computed_size = term_size(m);
    row.claimed_size = 2 * n + 6;
    row.claimed_reductions = 2 * n + 1;
    row.claimed_bound = 2 * n + 6;
    auto inferred = infer_minimal_depth(m, b);
    if (!inferred)
      throw FuelExhausted("remark_family_report: inference bounds exhausted at n = " +
                          std::to_string(n));
    BoundReport bounds = verify_bounds(m, inferred->derivation, fuel);
    row.oracle_longest = bounds.longest_reduction;
    row.degree = inferred->degree;
    row.rank = rank(inferred->derivation);
    row.theorem_bound = bounds.theorem_bound;
    row.theorem_pass = all_pass(bounds.verdicts);
    rows.push_back(row);
  }
  return rows;
}

nlohmann::json remark_rows_to_json(const std::vector<RemarkRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    out.push_back({{"n", r.n},
                   {"computed_size", r.computed_size},
                   {"claimed_size", r.claimed_size},
                   {"oracle_longest_reduction", r.oracle_longest},
                   {"claimed_reductions", r.claimed_reductions},
                   {"degree", r.degree},
                   {"rank", r.rank},
                   {"theorem_bound", r.theorem_bound},
                   {"claimed_bound", r.claimed_bound},
                   {"theorem_pass", r.theorem_pass}});
  }
  return out;
}

std::string remark_rows_to_text(const std::vector<RemarkRow>& rows) {
  std::ostringstream os;
  os << "  n |  |M| | claimed |M| | longest | claimed steps | degree | rank | bound |M|^(d+1) "
        "| claimed bound | verdict\n";
  for (const auto& r : rows) {
    char line[256];
    std::snprintf(line, sizeof(line),
                  "%3lld | %4lld | %11lld | %7lld | %13lld | %6lld | %4lld | %15lld | %13lld | %s\n",
                  static_cast<long long>(r.n), static_cast<long long>(r.computed_size),
                  static_cast<long long>(r.claimed_size), static_cast<long long>(r.oracle_longest),
                  static_cast<long long>(r.claimed_reductions), static_cast<long long>(r.degree),
                  static_cast<long long>(r.rank), static_cast<long long>(r.theorem_bound),
                  static_cast<long long>(r.claimed_bound), r.theorem_pass ? "pass" : "FAIL");
    os << line;
  }
  os << "(claimed columns are informational and not asserted)\n";
  return os.str();
}

}  // namespace sti
