#include "sti/inference.hpp"

#include <algorithm>
#include <unordered_map>

#include "sti/measures.hpp"
#include "sti/transform.hpp"

namespace sti {

namespace {

struct SearchAbort {};  // time fuel exhausted
struct AttemptFail {};  // local dead end; the enumerator advances

// ---------------------------------------------------------------------------
// Occurrence naming. Binders and free variables with k >= 2 occurrences have
// them renamed apart (deterministically, avoiding every name in the term);
// single occurrences keep their name. Computed once per query.

struct Skel {
  Term::Kind kind;
  std::string occ_name;                // Var
  std::string binder;                  // Abs
  std::vector<std::string> occ_names;  // Abs: split names when k >= 2
  bool binder_used_once = false;       // Abs: k == 1
  std::unique_ptr<Skel> left, right;   // Abs body in left; App fn/arg
  bool closed = false;
};

struct Naming {
  std::unique_ptr<Skel> root;
  std::map<std::string, std::vector<std::string>> free_groups;  // orig -> split names
  std::set<std::string> used;
};

std::int64_t count_occurrences(const TermPtr& t, const std::string& var) {
  switch (t->kind()) {
    case Term::Kind::Var:
      return t->name() == var ? 1 : 0;
    case Term::Kind::Abs:
      return t->binder() == var ? 0 : count_occurrences(t->body(), var);
    case Term::Kind::App:
      return count_occurrences(t->fn(), var) + count_occurrences(t->arg(), var);
  }
  return 0;
}

struct Namer {
  Naming naming;

  struct ScopeEntry {
    std::string var;
    std::vector<std::string> names;
    std::size_t next = 0;
  };
  std::vector<ScopeEntry> scope;

  std::unique_ptr<Skel> visit(const TermPtr& t) {
    auto node = std::make_unique<Skel>();
    node->kind = t->kind();
    node->closed = free_vars(t).empty();
    switch (t->kind()) {
      case Term::Kind::Var: {
        for (auto it = scope.rbegin(); it != scope.rend(); ++it) {
          if (it->var == t->name()) {
            node->occ_name = it->names[it->next++];
            return node;
          }
        }
        node->occ_name = t->name();  // free; multi-occurrence names patched below
        return node;
      }
      case Term::Kind::Abs: {
        std::int64_t k = count_occurrences(t->body(), t->binder());
        ScopeEntry entry{t->binder(), {}, 0};
        if (k == 1) {
          entry.names = {t->binder()};
          node->binder_used_once = true;
        } else if (k >= 2) {
          for (std::int64_t i = 0; i < k; ++i) {
            std::string n = fresh_name(t->binder(), naming.used);
            naming.used.insert(n);
            entry.names.push_back(n);
          }
          node->occ_names = entry.names;
        }
        node->binder = t->binder();
        scope.push_back(std::move(entry));
        node->left = visit(t->body());
        scope.pop_back();
        return node;
      }
      case Term::Kind::App:
        node->left = visit(t->fn());
        node->right = visit(t->arg());
        return node;
    }
    return node;
  }
};

struct FreeOccPatcher {
  std::map<std::string, std::vector<std::string>> groups;
  std::map<std::string, std::size_t> next;

  void patch(Skel* node, std::vector<std::string>& bound) {
    switch (node->kind) {
      case Term::Kind::Var: {
        const std::string& n = node->occ_name;
        if (std::find(bound.rbegin(), bound.rend(), n) != bound.rend()) return;
        if (auto it = groups.find(n); it != groups.end())
          node->occ_name = it->second[next[n]++];
        return;
      }
      case Term::Kind::Abs:
        bound.push_back(node->binder);
        patch(node->left.get(), bound);
        bound.pop_back();
        return;
      case Term::Kind::App:
        patch(node->left.get(), bound);
        patch(node->right.get(), bound);
        return;
    }
  }
};

Naming make_naming(const TermPtr& t) {
  Namer namer;
  namer.naming.used = all_names(t);
  namer.naming.root = namer.visit(t);
  Naming& naming = namer.naming;

  FreeOccPatcher patcher;
  for (const auto& v : free_vars(t)) {
    std::int64_t k = count_occurrences(t, v);
    if (k < 2) continue;
    std::vector<std::string> names;
    for (std::int64_t i = 0; i < k; ++i) {
      std::string n = fresh_name(v, naming.used);
      naming.used.insert(n);
      names.push_back(n);
    }
    naming.free_groups[v] = names;
    patcher.groups[v] = std::move(names);
  }
  std::vector<std::string> bound;
  patcher.patch(naming.root.get(), bound);
  return std::move(namer.naming);
}

// ---------------------------------------------------------------------------
// Inference-time types with unification

struct TNode {
  enum class K { Meta, Rigid, Arrow, Inter } k;
  bool linear_only = false;  // Meta: may never become an intersection node
  int link = -1;             // Meta
  std::string name;          // Rigid
  int dom = -1, cod = -1;    // Arrow
  std::vector<int> kids;     // Inter
};

struct TypeStore {
  std::vector<TNode> nodes;

  int meta(bool linear_only) {
    nodes.push_back({TNode::K::Meta, linear_only, -1, "", -1, -1, {}});
    return static_cast<int>(nodes.size()) - 1;
  }
  int rigid(std::string name) {
    nodes.push_back({TNode::K::Rigid, false, -1, std::move(name), -1, -1, {}});
    return static_cast<int>(nodes.size()) - 1;
  }
  int arrow(int dom, int cod) {
    nodes.push_back({TNode::K::Arrow, false, -1, "", dom, cod, {}});
    return static_cast<int>(nodes.size()) - 1;
  }
  int inter(std::vector<int> kids) {
    nodes.push_back({TNode::K::Inter, false, -1, "", -1, -1, std::move(kids)});
    return static_cast<int>(nodes.size()) - 1;
  }

  int find(int i) {
    while (nodes[i].k == TNode::K::Meta && nodes[i].link >= 0) i = nodes[i].link;
    return i;
  }

  bool occurs(int m, int t) {
    t = find(t);
    if (t == m) return true;
    if (nodes[t].k == TNode::K::Arrow)
      return occurs(m, nodes[t].dom) || occurs(m, nodes[t].cod);
    if (nodes[t].k == TNode::K::Inter) {
      auto kids = nodes[t].kids;
      for (int kid : kids)
        if (occurs(m, kid)) return true;
    }
    return false;
  }

  bool unify(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return true;
    if (nodes[a].k == TNode::K::Meta) {
      if (occurs(a, b)) return false;
      if (nodes[a].linear_only) {
        if (nodes[b].k == TNode::K::Inter) return false;
        if (nodes[b].k == TNode::K::Meta) nodes[b].linear_only = true;
      }
      nodes[a].link = b;
      return true;
    }
    if (nodes[b].k == TNode::K::Meta) return unify(b, a);
    if (nodes[a].k != nodes[b].k) return false;
    switch (nodes[a].k) {
      case TNode::K::Rigid:
        return nodes[a].name == nodes[b].name;
      case TNode::K::Arrow: {
        int ad = nodes[a].dom, ac = nodes[a].cod;
        int bd = nodes[b].dom, bc = nodes[b].cod;
        return unify(ad, bd) && unify(ac, bc);
      }
      case TNode::K::Inter: {
        if (nodes[a].kids.size() != nodes[b].kids.size()) return false;
        auto ka = nodes[a].kids;
        auto kb = nodes[b].kids;
        for (std::size_t i = 0; i < ka.size(); ++i)
          if (!unify(ka[i], kb[i])) return false;
        return true;
      }
      default:
        return false;
    }
  }

  std::int64_t element_count(int i) {
    i = find(i);
    if (nodes[i].k != TNode::K::Inter) return 1;
    auto kids = nodes[i].kids;
    std::int64_t total = 0;
    for (int kid : kids) total += element_count(kid);
    return total;
  }

  int import(const TypePtr& t) {
    switch (t->kind()) {
      case Type::Kind::Var:
        return rigid(t->name());
      case Type::Kind::Arrow: {
        int d = import(t->domain());
        int c = import(t->codomain());
        return arrow(d, c);
      }
      case Type::Kind::Inter: {
        std::vector<int> kids;
        for (const auto& c : t->children()) kids.push_back(import(c));
        return inter(std::move(kids));
      }
    }
    throw TypeError("unreachable type kind");
  }

  // Unbound metavariables ground to the single type variable "a": every
  // collected constraint is an equality, so any instantiation remains a
  // solution, and this one is canonically minimal.
  TypePtr ground(int i) {
    i = find(i);
    switch (nodes[i].k) {
      case TNode::K::Meta:
        return Type::tvar("a");
      case TNode::K::Rigid:
        return Type::tvar(nodes[i].name);
      case TNode::K::Arrow: {
        TypePtr d = ground(nodes[i].dom);
        return Type::arrow(std::move(d), ground(nodes[i].cod));
      }
      case TNode::K::Inter: {
        auto refs = nodes[i].kids;
        std::vector<TypePtr> kids;
        for (int kid : refs) kids.push_back(ground(kid));
        return Type::inter(std::move(kids));
      }
    }
    throw TypeError("unreachable node kind");
  }

  // Structural key of a fully ground demand; empty when a metavariable is
  // reachable (only ground demands feed the failure memo).
  std::string ground_key(int i) {
    i = find(i);
    switch (nodes[i].k) {
      case TNode::K::Meta:
        return "";
      case TNode::K::Rigid:
        return "v(" + nodes[i].name + ")";
      case TNode::K::Arrow: {
        std::string d = ground_key(nodes[i].dom);
        if (d.empty()) return "";
        std::string c = ground_key(nodes[i].cod);
        return c.empty() ? "" : "a(" + d + "," + c + ")";
      }
      case TNode::K::Inter: {
        auto refs = nodes[i].kids;
        std::string s = "i(";
        for (std::size_t j = 0; j < refs.size(); ++j) {
          std::string k = ground_key(refs[j]);
          if (k.empty()) return "";
          if (j) s += ",";
          s += k;
        }
        return s + ")";
      }
    }
    return "";
  }
};

// ---------------------------------------------------------------------------
// Plans: the rule skeleton of one candidate derivation

struct Plan {
  Term::Kind kind;
  // Var
  std::string occ_name;
  int ty = -1;
  // Abs
  std::string binder;
  std::vector<std::string> occ_names;
  bool binder_used_once = false;
  int domain = -1;
  std::unique_ptr<Plan> body;
  // App
  std::unique_ptr<Plan> fun;
  struct Arg {
    bool split = false;
    std::vector<Arg> copies;
    std::unique_ptr<Plan> leaf;
  };
  Arg arg;
};

using PlanPtr = std::unique_ptr<Plan>;

// Lexicographic enumeration of choice vectors with failure-point truncation:
// each attempt replays the recorded prefix; advancing increments the last
// consumed choice.
struct ChoiceSeq {
  std::vector<int> choices;
  std::vector<int> bases;
  std::size_t cursor = 0;

  int choose(int base) {
    if (cursor < choices.size()) {
      bases[cursor] = base;
      return choices[cursor++];
    }
    choices.push_back(0);
    bases.push_back(base);
    ++cursor;
    return 0;
  }

  void start() { cursor = 0; }

  bool advance() {
    choices.resize(cursor);
    bases.resize(cursor);
    while (!choices.empty()) {
      if (++choices.back() < bases.back()) return true;
      choices.pop_back();
      bases.pop_back();
    }
    return false;
  }
};

struct Engine {
  const SearchBounds& bounds;
  const Naming& naming;
  const std::optional<Context>& fixed_ctx;
  SearchStats stats;

  // Failure memo for closed subterms under fully ground demands, valid only
  // for choice-free failures: key -> largest remaining nesting budget that
  // failed.
  std::unordered_map<std::string, std::int64_t> fail_memo;
  std::unordered_map<const Skel*, std::string> subterm_keys;

  TypeStore store;
  ChoiceSeq seq;
  std::int64_t degree_budget = 0;
  bool budget_limited = false;  // some failure this sweep hit the nesting cap

  using Ctx = std::map<std::string, int>;

  struct Res {
    Ctx ctx;
    int ty;
  };

  void tick() {
    if (++stats.nodes_expanded > bounds.time_fuel) throw SearchAbort{};
  }

  const std::string& subterm_key(const Skel* node, const TermPtr& t) {
    auto it = subterm_keys.find(node);
    if (it != subterm_keys.end()) return it->second;
    return subterm_keys.emplace(node, alpha_key(t)).first->second;
  }

  Res term(const TermPtr& t, const Skel* sk, PlanPtr& plan, int depth) {
    tick();
    plan = std::make_unique<Plan>();
    plan->kind = t->kind();
    switch (t->kind()) {
      case Term::Kind::Var: {
        plan->occ_name = sk->occ_name;
        plan->ty = store.meta(/*linear_only=*/true);
        Ctx ctx;
        ctx.emplace(sk->occ_name, plan->ty);
        return {std::move(ctx), plan->ty};
      }
      case Term::Kind::Abs: {
        plan->binder = sk->binder;
        plan->occ_names = sk->occ_names;
        plan->binder_used_once = sk->binder_used_once;
        Res body = term(t->body(), sk->left.get(), plan->body, depth);
        int domain;
        if (!sk->occ_names.empty()) {
          std::vector<int> parts;
          for (const auto& n : sk->occ_names) {
            parts.push_back(body.ctx.at(n));
            body.ctx.erase(n);
          }
          domain = store.inter(std::move(parts));
          if (store.element_count(domain) > bounds.max_type_elements) throw AttemptFail{};
        } else if (sk->binder_used_once) {
          domain = body.ctx.at(sk->binder);
          body.ctx.erase(sk->binder);
        } else {
          domain = store.meta(/*linear_only=*/false);
        }
        plan->domain = domain;
        int cod = body.ty;
        return {std::move(body.ctx), store.arrow(domain, cod)};
      }
      case Term::Kind::App: {
        Res fun = term(t->fn(), sk->left.get(), plan->fun, depth);
        int dom = store.meta(false);
        int cod = store.meta(true);
        int shape = store.arrow(dom, cod);
        if (!store.unify(fun.ty, shape)) throw AttemptFail{};
        Res arg_res = argument(t->arg(), sk->right.get(), plan->arg, dom, depth);
        Ctx ctx = std::move(fun.ctx);
        for (const auto& [name, ty] : arg_res.ctx)
          if (!ctx.emplace(name, ty).second)
            throw RuleError("inference: duplicate occurrence name " + name);
        return {std::move(ctx), cod};
      }
    }
    throw RuleError("unreachable term kind");
  }

  Res argument(const TermPtr& t, const Skel* sk, Plan::Arg& plan, int demanded, int depth) {
    tick();
    int d = store.find(demanded);
    TNode::K kind = store.nodes[d].k;
    bool linear_only = store.nodes[d].linear_only;

    if (kind == TNode::K::Inter) {
      if (depth + 1 > degree_budget) {
        budget_limited = true;
        throw AttemptFail{};
      }
      std::string memo_key;
      if (sk->closed) {
        std::string dk = store.ground_key(d);
        if (!dk.empty()) {
          memo_key = subterm_key(sk, t) + "@" + dk;
          if (auto it = fail_memo.find(memo_key);
              it != fail_memo.end() && degree_budget - depth <= it->second) {
            ++stats.memo_hits;
            budget_limited = true;  // conservatively: the entry may hide one
            throw AttemptFail{};
          }
        }
      }
      std::size_t cursor_at_entry = seq.cursor;
      try {
        plan.split = true;
        plan.leaf.reset();
        plan.copies.clear();
        auto kids = store.nodes[d].kids;
        std::vector<Ctx> copy_ctxs;
        for (int kid : kids) {
          plan.copies.emplace_back();
          Res r = argument(t, sk, plan.copies.back(), kid, depth + 1);
          copy_ctxs.push_back(std::move(r.ctx));
        }
        // Copies type the same subterm and bind the same occurrence names;
        // each name gets the intersection of its per-copy types.
        Ctx merged;
        for (const auto& [name, ty0] : copy_ctxs[0]) {
          std::vector<int> parts;
          for (const auto& c : copy_ctxs) parts.push_back(c.at(name));
          int merged_ty = store.inter(std::move(parts));
          if (store.element_count(merged_ty) > bounds.max_type_elements) throw AttemptFail{};
          merged.emplace(name, merged_ty);
        }
        return {std::move(merged), d};
      } catch (AttemptFail&) {
        // Only a choice-free failure is intrinsic to (subterm, demand).
        if (!memo_key.empty() && seq.cursor == cursor_at_entry) {
          auto [it, inserted] = fail_memo.emplace(memo_key, degree_budget - depth);
          if (!inserted) it->second = std::max(it->second, degree_budget - depth);
        }
        throw;
      }
    }

    if (kind == TNode::K::Meta && !linear_only) {
      // Flexible domain: argument arity is a backtracking choice (1 first).
      int max_arity = static_cast<int>(std::min<std::int64_t>(bounds.max_type_elements, 8));
      int arity = seq.choose(max_arity) + 1;
      if (arity >= 2) {
        if (depth + 1 > degree_budget) {
          budget_limited = true;
          throw AttemptFail{};
        }
        std::vector<int> kids;
        for (int i = 0; i < arity; ++i) kids.push_back(store.meta(false));
        int shape = store.inter(std::move(kids));
        if (!store.unify(d, shape)) throw AttemptFail{};
        return argument(t, sk, plan, d, depth);
      }
    }

    plan.split = false;
    plan.copies.clear();
    Res r = term(t, sk, plan.leaf, depth);
    if (!store.unify(r.ty, d)) throw AttemptFail{};
    return r;
  }

  // ---- building a checked derivation from a successful plan

  DerivPtr build(const Plan* plan, std::set<std::string>& avoid) {
    switch (plan->kind) {
      case Term::Kind::Var:
        return ax(plan->occ_name, store.ground(plan->ty));
      case Term::Kind::Abs: {
        DerivPtr body = build(plan->body.get(), avoid);
        if (!plan->occ_names.empty())
          return arrow_intro(mux(std::move(body), plan->occ_names, plan->binder), plan->binder);
        if (plan->binder_used_once) return arrow_intro(std::move(body), plan->binder);
        body = weaken_in_type(std::move(body), plan->binder, store.ground(plan->domain), avoid);
        return arrow_intro(std::move(body), plan->binder);
      }
      case Term::Kind::App: {
        DerivPtr fun = build(plan->fun.get(), avoid);
        DerivPtr arg = build_arg(plan->arg, avoid);
        return arrow_elim(std::move(fun), std::move(arg));
      }
    }
    throw RuleError("unreachable plan kind");
  }

  DerivPtr build_arg(const Plan::Arg& arg, std::set<std::string>& avoid) {
    if (!arg.split) return build(arg.leaf.get(), avoid);
    std::vector<DerivPtr> premises;
    premises.reserve(arg.copies.size());
    for (const auto& c : arg.copies) premises.push_back(build_arg(c, avoid));
    return and_n(std::move(premises));
  }

  static bool bindings_within(const DerivPtr& d, std::int64_t cap) {
    for (const auto& [var, ty] : d->conclusion().ctx)
      if (element_count(ty) > cap) return false;
    for (const auto& p : d->premises())
      if (!bindings_within(p, cap)) return false;
    return true;
  }

  std::optional<DerivPtr> attempt(const TermPtr& t) {
    ++stats.attempts;
    store.nodes.clear();
    seq.start();
    PlanPtr plan;
    try {
      Res res = term(t, naming.root.get(), plan, 0);

      std::map<std::string, int> group_tys;
      for (const auto& [orig, names] : naming.free_groups) {
        std::vector<int> parts;
        for (const auto& n : names) parts.push_back(res.ctx.at(n));
        int merged = store.inter(std::move(parts));
        if (store.element_count(merged) > bounds.max_type_elements) throw AttemptFail{};
        group_tys[orig] = merged;
      }
      if (fixed_ctx) {
        std::set<std::string> split_names;
        for (const auto& [orig, names] : naming.free_groups)
          split_names.insert(names.begin(), names.end());
        for (const auto& [name, ty] : res.ctx) {
          if (split_names.count(name)) continue;
          auto it = fixed_ctx->find(name);
          if (it == fixed_ctx->end()) throw AttemptFail{};
          if (!store.unify(ty, store.import(it->second))) throw AttemptFail{};
        }
        for (const auto& [orig, merged] : group_tys) {
          auto it = fixed_ctx->find(orig);
          if (it == fixed_ctx->end()) throw AttemptFail{};
          if (!store.unify(merged, store.import(it->second))) throw AttemptFail{};
        }
      }

      std::set<std::string> avoid = naming.used;
      DerivPtr d = build(plan.get(), avoid);
      for (const auto& [orig, names] : naming.free_groups) d = mux(d, names, orig);
      if (fixed_ctx)
        for (const auto& [var, ty] : *fixed_ctx)
          if (!d->conclusion().ctx.count(var)) d = weaken_in_type(d, var, ty, avoid);
      if (!bindings_within(d, bounds.max_type_elements)) return std::nullopt;
      if (proof_size(d) > bounds.max_proof_size) return std::nullopt;
      return d;
    } catch (AttemptFail&) {
      return std::nullopt;
    }
  }

  std::optional<InferResult> run(const TermPtr& t) {
    for (std::int64_t budget = 0; budget <= bounds.max_degree; ++budget) {
      degree_budget = budget;
      budget_limited = false;
      seq = ChoiceSeq{};
      std::optional<DerivPtr> best;
      std::int64_t best_size = 0;
      std::string best_type_key;
      bool aborted = false;
      try {
        bool more = true;
        while (more) {
          auto d = attempt(t);
          if (d) {
            std::int64_t size = proof_size(*d);
            std::string tk = type_key(canonicalize((*d)->conclusion().type));
            if (!best || size < best_size || (size == best_size && tk < best_type_key)) {
              best = *d;
              best_size = size;
              best_type_key = tk;
            }
          }
          more = seq.advance();
        }
      } catch (SearchAbort&) {
        aborted = true;
      }
      if (best) {
        InferResult result;
        result.derivation = *best;
        result.degree = degree(*best);
        result.stats = stats;
        return result;
      }
      if (aborted) return std::nullopt;
      // A sweep that never hit the nesting cap exhausted the whole search
      // space; deeper budgets only relax that cap.
      if (!budget_limited) return std::nullopt;
    }
    return std::nullopt;
  }
};

std::optional<InferResult> infer_impl(const TermPtr& m, const std::optional<Context>& fixed,
                                      const SearchBounds& b) {
  Naming naming = make_naming(m);
  Engine engine{.bounds = b, .naming = naming, .fixed_ctx = fixed};
  return engine.run(m);
}

}  // namespace

std::optional<InferResult> infer(const TermPtr& m, const SearchBounds& b) {
  return infer_impl(m, std::nullopt, b);
}

std::optional<InferResult> infer_with_context(const TermPtr& m, const Context& fixed,
                                              const SearchBounds& b) {
  return infer_impl(m, fixed, b);
}

std::optional<InferResult> infer_minimal_depth(const TermPtr& m, const SearchBounds& b) {
  return infer(m, b);
}

}  // namespace sti
