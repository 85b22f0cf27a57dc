#include "sti/transform.hpp"

#include <algorithm>

#include "json.hpp"

namespace sti {

namespace {

bool mentions_free(const DerivPtr& d, const std::string& name) {
  if (d->conclusion().ctx.count(name)) return true;
  return free_vars(d->conclusion().subject).count(name) > 0;
}

}  // namespace

DerivPtr rename_free_var(const DerivPtr& d, const std::string& from, const std::string& to) {
  if (from == to || !mentions_free(d, from)) return d;
  switch (d->rule()) {
    case Rule::Ax: {
      const auto& [var, ty] = *d->conclusion().ctx.begin();
      return var == from ? ax(to, ty) : d;
    }
    case Rule::Weaken: {
      const auto& w = d->weaken_data();
      if (w.var == from) return weaken(d->premise(), to, w.type);
      return weaken(rename_free_var(d->premise(), from, to), w.var, w.type);
    }
    case Rule::ArrowIntro: {
      std::string binder = d->intro_data().binder;
      DerivPtr p = d->premise();
      if (binder == to) {
        // Alpha-rename the clashing binder out of the way first.
        auto avoid = all_names(p);
        avoid.insert(from);
        avoid.insert(to);
        std::string nb = fresh_name(binder, avoid);
        p = rename_free_var(p, binder, nb);
        binder = nb;
      }
      return arrow_intro(rename_free_var(p, from, to), binder);
    }
    case Rule::ArrowElim:
      return arrow_elim(rename_free_var(d->premises()[0], from, to),
                        rename_free_var(d->premises()[1], from, to));
    case Rule::AndN: {
      std::vector<DerivPtr> ps;
      ps.reserve(d->premises().size());
      for (const auto& p : d->premises()) ps.push_back(rename_free_var(p, from, to));
      return and_n(std::move(ps));
    }
    case Rule::Mux: {
      const auto& m = d->mux_data();
      if (m.fresh == from) return mux(d->premise(), m.merged, to);
      return mux(rename_free_var(d->premise(), from, to), m.merged, m.fresh);
    }
  }
  throw RuleError("unreachable rule");
}

DerivPtr freshen_mux_transients(const DerivPtr& d, std::set<std::string>& avoid) {
  std::vector<DerivPtr> ps;
  ps.reserve(d->premises().size());
  for (const auto& p : d->premises()) ps.push_back(freshen_mux_transients(p, avoid));
  switch (d->rule()) {
    case Rule::Ax:
      return d;
    case Rule::Weaken:
      return weaken(ps[0], d->weaken_data().var, d->weaken_data().type);
    case Rule::ArrowIntro:
      return arrow_intro(ps[0], d->intro_data().binder);
    case Rule::ArrowElim:
      return arrow_elim(ps[0], ps[1]);
    case Rule::AndN:
      return and_n(std::move(ps));
    case Rule::Mux: {
      const auto& m = d->mux_data();
      DerivPtr p = ps[0];
      std::vector<std::string> merged;
      merged.reserve(m.merged.size());
      for (const auto& x : m.merged) {
        auto local = all_names(p);
        local.insert(avoid.begin(), avoid.end());
        std::string y = fresh_name(x, local);
        avoid.insert(y);
        p = rename_free_var(p, x, y);
        merged.push_back(y);
      }
      return mux(std::move(p), std::move(merged), m.fresh);
    }
  }
  throw RuleError("unreachable rule");
}

DerivPtr weaken_in_type(DerivPtr d, const std::string& var, const TypePtr& type,
                        std::set<std::string>& avoid) {
  if (is_linear(type)) return weaken(std::move(d), var, type);
  std::vector<std::string> parts;
  parts.reserve(type->children().size());
  for (const auto& child : type->children()) {
    auto local = all_names(d);
    local.insert(avoid.begin(), avoid.end());
    local.insert(var);
    std::string tmp = fresh_name(var, local);
    avoid.insert(tmp);
    d = weaken_in_type(std::move(d), tmp, child, avoid);
    parts.push_back(tmp);
  }
  return mux(std::move(d), std::move(parts), var);
}

// ---------------------------------------------------------------------------
// Substitution

namespace {

struct Substituter {
  std::set<std::string> avoid;

  // Introduce every binding of ctx into d, in name order (DD-8 reconstruction
  // for intersection types).
  DerivPtr introduce_ctx(DerivPtr d, const Context& ctx) {
    for (const auto& [var, ty] : ctx) d = weaken_in_type(std::move(d), var, ty, avoid);
    return d;
  }

  // Matches premise types of sigma's root (\n) node against the wanted
  // components; first unused premise with an equal type, in order.
  static std::vector<std::size_t> match_components(const std::vector<DerivPtr>& premises,
                                                   const std::vector<TypePtr>& wanted) {
    std::vector<std::size_t> out;
    std::vector<bool> used(premises.size(), false);
    for (const auto& w : wanted) {
      bool found = false;
      for (std::size_t i = 0; i < premises.size(); ++i) {
        if (used[i]) continue;
        if (type_equal(premises[i]->conclusion().type, w)) {
          used[i] = true;
          out.push_back(i);
          found = true;
          break;
        }
      }
      if (!found)
        throw RuleError("substitution: intersection components of the argument do not match");
    }
    return out;
  }

  DerivPtr run(DerivPtr sigma, DerivPtr pi, const std::string& x) {
    const Sequent& pc = pi->conclusion();
    switch (pi->rule()) {
      case Rule::Ax: {
        if (pc.ctx.begin()->first != x)
          throw RuleError("substitution: axiom variable differs from the substituted one");
        return sigma;
      }
      case Rule::Weaken: {
        const auto& w = pi->weaken_data();
        if (w.var == x) {
          // x was weakened in: the subject ignores N; rebuild Delta on top of
          // the premise via (w) and (m) steps.
          return introduce_ctx(pi->premise(), sigma->conclusion().ctx);
        }
        return weaken(run(std::move(sigma), pi->premise(), x), w.var, w.type);
      }
      case Rule::ArrowIntro: {
        std::string binder = pi->intro_data().binder;
        DerivPtr p = pi->premise();
        if (sigma->conclusion().ctx.count(binder)) {
          auto local = all_names(p);
          local.insert(avoid.begin(), avoid.end());
          std::string nb = fresh_name(binder, local);
          avoid.insert(nb);
          p = rename_free_var(p, binder, nb);
          binder = nb;
        }
        return arrow_intro(run(std::move(sigma), std::move(p), x), binder);
      }
      case Rule::ArrowElim: {
        const auto& f = pi->premises()[0];
        const auto& a = pi->premises()[1];
        if (f->conclusion().ctx.count(x))
          return arrow_elim(run(std::move(sigma), f, x), a);
        if (a->conclusion().ctx.count(x))
          return arrow_elim(f, run(std::move(sigma), a, x));
        throw RuleError("substitution: variable lost at an (->E) node");
      }
      case Rule::AndN: {
        std::vector<std::size_t> holders;
        for (std::size_t i = 0; i < pi->premises().size(); ++i)
          if (pi->premises()[i]->conclusion().ctx.count(x)) holders.push_back(i);
        if (holders.empty())
          throw RuleError("substitution: variable lost at a (\\n) node");
        std::vector<DerivPtr> ps(pi->premises().begin(), pi->premises().end());
        if (holders.size() == 1) {
          ps[holders[0]] = run(std::move(sigma), ps[holders[0]], x);
          return and_n(std::move(ps));
        }
        // x's type is the intersection of the holders' bindings; split sigma
        // along its root intersection tree and substitute componentwise.
        auto [steps, core] = peel_delta(sigma);
        if (core->rule() != Rule::AndN)
          throw RuleError("substitution: argument derivation lacks an intersection tree");
        std::vector<TypePtr> wanted;
        for (std::size_t i : holders)
          wanted.push_back(ps[i]->conclusion().ctx.at(x));
        if (core->premises().size() != wanted.size())
          throw RuleError("substitution: intersection arity mismatch");
        auto picks = match_components(core->premises(), wanted);
        for (std::size_t j = 0; j < holders.size(); ++j)
          ps[holders[j]] = run(core->premises()[picks[j]], ps[holders[j]], x);
        return replay_delta(steps, and_n(std::move(ps)));
      }
      case Rule::Mux: {
        const auto& m = pi->mux_data();
        if (m.fresh != x)
          return mux(run(std::move(sigma), pi->premise(), x), m.merged, m.fresh);
        // Substituting for the merged variable: split sigma into components,
        // rename their contexts apart, fold the substitutions, then re-merge
        // the shared context variables with a rho sequence of (m) steps and
        // replay sigma's own delta.
        auto [steps, core] = peel_delta(sigma);
        if (core->rule() != Rule::AndN)
          throw RuleError("substitution: argument derivation lacks an intersection tree");
        std::vector<TypePtr> wanted;
        const Context& premise_ctx = pi->premise()->conclusion().ctx;
        for (const auto& xi : m.merged) wanted.push_back(premise_ctx.at(xi));
        if (core->premises().size() != wanted.size())
          throw RuleError("substitution: intersection arity mismatch");
        auto picks = match_components(core->premises(), wanted);

        // copies[v] = the fresh names standing for shared variable v, in
        // component order.
        std::map<std::string, std::vector<std::string>> copies;
        std::vector<DerivPtr> components;
        for (std::size_t i = 0; i < picks.size(); ++i) {
          DerivPtr comp = core->premises()[picks[i]];
          Context dom = comp->conclusion().ctx;
          for (const auto& [v, ty] : dom) {
            auto local = all_names(comp);
            local.insert(avoid.begin(), avoid.end());
            std::string copy = fresh_name(v, local);
            avoid.insert(copy);
            comp = rename_free_var(comp, v, copy);
            copies[v].push_back(copy);
          }
          components.push_back(std::move(comp));
        }

        DerivPtr cur = pi->premise();
        for (std::size_t i = 0; i < components.size(); ++i)
          cur = run(components[i], cur, m.merged[i]);

        // Rho: recover the component context in the premise's variable order.
        for (const auto& [v, names] : copies) {
          if (names.size() >= 2)
            cur = mux(std::move(cur), names, v);
          else
            cur = rename_free_var(cur, names[0], v);
        }
        return replay_delta(steps, cur);
      }
    }
    throw RuleError("unreachable rule");
  }
};

}  // namespace

DerivPtr subst_derivation(DerivPtr sigma, DerivPtr pi, const std::string& x) {
  const Sequent& pc = pi->conclusion();
  const Sequent& sc = sigma->conclusion();
  auto it = pc.ctx.find(x);
  if (it == pc.ctx.end())
    throw RuleError("substitution: " + x + " is not bound in the target context");
  if (!type_equal(it->second, sc.type))
    throw RuleError("substitution: type of " + x + " (" + to_string(it->second) +
                    ") differs from the argument type " + to_string(sc.type));
  for (const auto& [var, ty] : sc.ctx) {
    if (var == x) throw RuleError("substitution: " + x + " occurs in the argument context");
    if (pc.ctx.count(var))
      throw RuleError("substitution: contexts share the variable " + var);
  }
  Substituter st;
  st.avoid = all_names(pi);
  auto sn = all_names(sigma);
  st.avoid.insert(sn.begin(), sn.end());
  DerivPtr pi2 = freshen_mux_transients(pi, st.avoid);
  DerivPtr sigma2 = freshen_mux_transients(sigma, st.avoid);
  DerivPtr out = st.run(std::move(sigma2), std::move(pi2), x);

  // Conclusion sanity: Gamma, Delta |- M[N/x] : t.
  Context expected = pc.ctx;
  expected.erase(x);
  for (const auto& [var, ty] : sc.ctx) expected[var] = ty;
  const Sequent& oc = out->conclusion();
  if (!ctx_equal(oc.ctx, expected) || !type_equal(oc.type, pc.type) ||
      !alpha_equal(oc.subject, substitute(pc.subject, x, sc.subject)))
    throw RuleError("substitution: internal invariant failure (conclusion mismatch)");
  return out;
}

// ---------------------------------------------------------------------------
// Delta commutation and subject reduction

DerivPtr commute_delta(const DerivPtr& leaf) {
  if (leaf->rule() != Rule::ArrowElim)
    throw RuleError("commute_delta: node does not end with (->E)");
  DerivPtr fun = leaf->premises()[0];
  DerivPtr arg = leaf->premises()[1];
  std::set<std::string> avoid = all_names(leaf);
  fun = freshen_mux_transients(fun, avoid);
  auto [steps, core] = peel_delta(fun);
  if (core->rule() != Rule::ArrowIntro)
    throw RuleError("commute_delta: function premise does not end with (->I) under delta");
  DerivPtr out = replay_delta(steps, arrow_elim(core, arg));
  const Sequent& a = leaf->conclusion();
  const Sequent& b = out->conclusion();
  if (!ctx_equal(a.ctx, b.ctx) || !type_equal(a.type, b.type) ||
      !alpha_equal(a.subject, b.subject))
    throw RuleError("commute_delta: internal invariant failure (conclusion changed)");
  return out;
}

namespace {

struct SubjectReducer {
  std::int64_t copies = 0;

  DerivPtr rewrite(const DerivPtr& d, const RedexPath& p, std::size_t i) {
    switch (d->rule()) {
      case Rule::Weaken:
        return weaken(rewrite(d->premise(), p, i), d->weaken_data().var,
                      d->weaken_data().type);
      case Rule::Mux:
        return mux(rewrite(d->premise(), p, i), d->mux_data().merged, d->mux_data().fresh);
      case Rule::AndN: {
        std::vector<DerivPtr> ps;
        ps.reserve(d->premises().size());
        for (const auto& prem : d->premises()) ps.push_back(rewrite(prem, p, i));
        return and_n(std::move(ps));
      }
      case Rule::ArrowIntro:
        if (i >= p.size() || p[i] != Step::Body)
          throw RuleError("reduce_subject: path does not enter the abstraction body");
        return arrow_intro(rewrite(d->premise(), p, i + 1), d->intro_data().binder);
      case Rule::ArrowElim: {
        if (i == p.size()) return contract(d);
        if (p[i] == Step::Fun)
          return arrow_elim(rewrite(d->premises()[0], p, i + 1), d->premises()[1]);
        if (p[i] == Step::Arg)
          return arrow_elim(d->premises()[0], rewrite(d->premises()[1], p, i + 1));
        throw RuleError("reduce_subject: path mismatch at (->E)");
      }
      case Rule::Ax:
        throw RuleError("reduce_subject: path runs into an axiom");
    }
    throw RuleError("unreachable rule");
  }

  // d ends with (->E) and its subject is the redex: move the delta below,
  // then replace (->E)((->I)(body), arg) by the substitution.
  DerivPtr contract(const DerivPtr& d) {
    DerivPtr fun = d->premises()[0];
    DerivPtr arg = d->premises()[1];
    std::set<std::string> avoid = all_names(d);
    fun = freshen_mux_transients(fun, avoid);
    auto [steps, core] = peel_delta(fun);
    if (core->rule() != Rule::ArrowIntro)
      throw RuleError("reduce_subject: function premise does not end with (->I) under delta");
    std::string binder = core->intro_data().binder;
    DerivPtr body = core->premise();
    if (arg->conclusion().ctx.count(binder)) {
      auto local = all_names(body);
      local.insert(avoid.begin(), avoid.end());
      std::string nb = fresh_name(binder, local);
      body = rename_free_var(body, binder, nb);
      binder = nb;
    }
    ++copies;
    return replay_delta(steps, subst_derivation(arg, body, binder));
  }
};

}  // namespace

DerivedStep reduce_subject(const DerivPtr& pi, const RedexPath& p) {
  SubjectReducer sr;
  DerivPtr after = sr.rewrite(pi, p, 0);
  const Sequent& a = pi->conclusion();
  const Sequent& b = after->conclusion();
  if (!ctx_equal(a.ctx, b.ctx) || !type_equal(a.type, b.type) ||
      !alpha_equal(b.subject, reduce_at(a.subject, p)))
    throw RuleError("reduce_subject: internal invariant failure (conclusion mismatch)");
  return DerivedStep{pi, p, std::move(after), sr.copies};
}

ReductionTrace normalize_with_derivation(const DerivPtr& pi, Strategy s, std::int64_t fuel) {
  ReductionTrace trace;
  trace.initial_rank = rank(pi);
  std::vector<std::int64_t> rs;
  for (std::int64_t r = 1; r <= std::max<std::int64_t>(2, trace.initial_rank); ++r)
    rs.push_back(r);

  DerivPtr cur = pi;
  std::int64_t steps = 0;
  RedexPath p;
  while (pick_redex(cur->conclusion().subject, s, p)) {
    if (steps >= fuel)
      throw FuelExhausted("normalize_with_derivation: fuel exhausted after " +
                          std::to_string(fuel) + " steps");
    DerivedStep step = reduce_subject(cur, p);
    std::int64_t before = weight(cur, trace.initial_rank);
    std::int64_t after = weight(step.after, trace.initial_rank);
    if (after >= before)
      throw RuleError("normalize_with_derivation: weight failed to decrease (" +
                      std::to_string(before) + " -> " + std::to_string(after) + ")");
    trace.entries.push_back({cur->conclusion().subject, p, cur, step.virtual_copies,
                             measure_report(cur, rs)});
    cur = step.after;
    ++steps;
  }
  trace.entries.push_back(
      {cur->conclusion().subject, std::nullopt, cur, 0, measure_report(cur, rs)});
  trace.final_derivation = cur;
  return trace;
}

nlohmann::json trace_to_json(const ReductionTrace& t) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& e : t.entries) {
    nlohmann::json entry;
    entry["term"] = to_string(e.term);
    if (e.redex) {
      nlohmann::json path = nlohmann::json::array();
      for (Step st : *e.redex)
        path.push_back(st == Step::Body ? "body" : st == Step::Fun ? "fun" : "arg");
      entry["redex"] = std::move(path);
    } else {
      entry["redex"] = nullptr;
    }
    entry["virtual_copies"] = e.virtual_copies;
    entry["measures"] = measure_report_to_json(e.measures);
    out.push_back(std::move(entry));
  }
  return out;
}

}  // namespace sti
