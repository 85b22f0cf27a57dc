#include "sti/derivation.hpp"

#include <algorithm>
#include <sstream>

#include "json.hpp"

namespace sti {

const char* rule_name(Rule r) {
  switch (r) {
    case Rule::Ax: return "Ax";
    case Rule::Weaken: return "w";
    case Rule::ArrowIntro: return "\xe2\x86\x92" "I";  // →I
    case Rule::ArrowElim: return "\xe2\x86\x92" "E";   // →E
    case Rule::AndN: return "\xe2\x88\xa7";          // ∧ (arity appended)
    case Rule::Mux: return "m";
  }
  return "?";
}

bool is_constructive(Rule r) {
  return r == Rule::Ax || r == Rule::ArrowIntro || r == Rule::ArrowElim;
}

namespace {

std::size_t expected_premises(Rule r) {
  switch (r) {
    case Rule::Ax: return 0;
    case Rule::Weaken:
    case Rule::ArrowIntro:
    case Rule::Mux: return 1;
    case Rule::ArrowElim: return 2;
    case Rule::AndN: return 2;  // minimum
  }
  return 0;
}

void validate_shape(Rule rule, const std::vector<DerivPtr>& premises,
                    const Derivation::Data& data) {
  for (const auto& p : premises)
    if (!p) throw RuleError("null premise");
  std::size_t need = expected_premises(rule);
  if (rule == Rule::AndN) {
    if (premises.size() < 2)
      throw RuleError("(\\n) rule requires at least 2 premises");
  } else if (premises.size() != need) {
    throw RuleError(std::string(rule_name(rule)) + " rule requires " +
                    std::to_string(need) + " premise(s), got " +
                    std::to_string(premises.size()));
  }
  switch (rule) {
    case Rule::Weaken:
      if (!std::holds_alternative<WeakenData>(data)) throw RuleError("(w) requires weaken data");
      break;
    case Rule::ArrowIntro:
      if (!std::holds_alternative<ArrowIntroData>(data))
        throw RuleError("(->I) requires binder data");
      break;
    case Rule::Mux: {
      if (!std::holds_alternative<MuxData>(data)) throw RuleError("(m) requires mux data");
      const auto& m = std::get<MuxData>(data);
      if (m.merged.size() < 2) throw RuleError("(m) requires at least 2 merged variables");
      std::set<std::string> seen(m.merged.begin(), m.merged.end());
      if (seen.size() != m.merged.size()) throw RuleError("(m) merged variables must be distinct");
      if (m.fresh.empty()) throw RuleError("(m) fresh variable must be named");
      break;
    }
    default:
      if (!std::holds_alternative<std::monostate>(data))
        throw RuleError(std::string(rule_name(rule)) + " carries no rule data");
      break;
  }
}

}  // namespace

DerivPtr Derivation::make_raw(Rule rule, Sequent conclusion, std::vector<DerivPtr> premises,
                              Data data) {
  validate_shape(rule, premises, data);
  return DerivPtr(new Derivation(rule, std::move(conclusion), std::move(premises),
                                 std::move(data)));
}

DerivPtr ax(const std::string& var, const TypePtr& linear_type) {
  if (!is_linear(linear_type)) throw RuleError("(Ax) requires a linear type");
  Sequent c{{{var, linear_type}}, Term::var(var), linear_type};
  return Derivation::make_raw(Rule::Ax, std::move(c), {}, std::monostate{});
}

DerivPtr weaken(DerivPtr premise, const std::string& var, const TypePtr& linear_type) {
  if (!is_linear(linear_type)) throw RuleError("(w) requires a linear type");
  const Sequent& p = premise->conclusion();
  if (p.ctx.count(var)) throw RuleError("(w): variable " + var + " already in the context");
  Sequent c{p.ctx, p.subject, p.type};
  c.ctx.emplace(var, linear_type);
  return Derivation::make_raw(Rule::Weaken, std::move(c), {std::move(premise)},
                              WeakenData{var, linear_type});
}

DerivPtr arrow_intro(DerivPtr premise, const std::string& binder) {
  const Sequent& p = premise->conclusion();
  auto it = p.ctx.find(binder);
  if (it == p.ctx.end())
    throw RuleError("(->I): binder " + binder + " not bound in the premise context");
  if (!is_linear(p.type)) throw RuleError("(->I): premise type must be linear");
  Sequent c;
  c.ctx = p.ctx;
  c.ctx.erase(binder);
  c.subject = Term::abs(binder, p.subject);
  c.type = Type::arrow(it->second, p.type);
  return Derivation::make_raw(Rule::ArrowIntro, std::move(c), {std::move(premise)},
                              ArrowIntroData{binder});
}

DerivPtr arrow_elim(DerivPtr fun, DerivPtr arg) {
  const Sequent& f = fun->conclusion();
  const Sequent& a = arg->conclusion();
  if (f.type->kind() != Type::Kind::Arrow)
    throw RuleError("(->E): function premise must have an arrow type, got " +
                    to_string(f.type));
  if (!type_equal(a.type, f.type->domain()))
    throw RuleError("(->E): argument type " + to_string(a.type) +
                    " does not match the domain " + to_string(f.type->domain()));
  Sequent c;
  try {
    c.ctx = ctx_disjoint_union(f.ctx, a.ctx);
  } catch (const TypeError& e) {
    throw RuleError(std::string("(->E): ") + e.what());
  }
  c.subject = Term::app(f.subject, a.subject);
  c.type = f.type->codomain();
  return Derivation::make_raw(Rule::ArrowElim, std::move(c), {std::move(fun), std::move(arg)},
                              std::monostate{});
}

DerivPtr and_n(std::vector<DerivPtr> premises) {
  if (premises.size() < 2) throw RuleError("(\\n) requires n >= 2 premises");
  std::vector<Context> ctxs;
  std::vector<TypePtr> types;
  for (const auto& p : premises) {
    if (!alpha_equal(p->conclusion().subject, premises[0]->conclusion().subject))
      throw RuleError("(\\n): premise subjects must coincide up to alpha");
    ctxs.push_back(p->conclusion().ctx);
    types.push_back(p->conclusion().type);
  }
  Sequent c{ctx_intersect(ctxs), premises[0]->conclusion().subject,
            Type::inter(std::move(types))};
  return Derivation::make_raw(Rule::AndN, std::move(c), std::move(premises), std::monostate{});
}

DerivPtr mux(DerivPtr premise, std::vector<std::string> merged, const std::string& fresh) {
  const Sequent& p = premise->conclusion();
  std::vector<TypePtr> parts;
  for (const auto& x : merged) {
    auto it = p.ctx.find(x);
    if (it == p.ctx.end())
      throw RuleError("(m): merged variable " + x + " not bound in the premise context");
    parts.push_back(it->second);
  }
  if (parts.size() < 2) throw RuleError("(m) requires at least 2 merged variables");
  std::set<std::string> merged_set(merged.begin(), merged.end());
  if (merged_set.count(fresh))
    throw RuleError("(m): fresh variable " + fresh + " collides with a merged one");
  Sequent c;
  c.ctx = p.ctx;
  for (const auto& x : merged) c.ctx.erase(x);
  if (c.ctx.count(fresh))
    throw RuleError("(m): fresh variable " + fresh + " already in the context");
  c.ctx.emplace(fresh, Type::inter(std::move(parts)));
  c.subject = rename_frees(p.subject, merged_set, fresh);
  c.type = p.type;
  return Derivation::make_raw(Rule::Mux, std::move(c), {std::move(premise)},
                              MuxData{std::move(merged), fresh});
}

// ---------------------------------------------------------------------------
// Checker

namespace {

struct Checker {
  std::vector<Violation> violations;
  std::vector<int> path;

  void report(const std::string& msg) { violations.push_back({path, msg}); }

  void require(bool cond, const std::string& msg) {
    if (!cond) report(msg);
  }

  void check(const DerivPtr& d) {
    const Sequent& c = d->conclusion();
    for (const auto& v : free_vars(c.subject))
      if (!c.ctx.count(v)) report("free variable " + v + " missing from the context");

    switch (d->rule()) {
      case Rule::Ax: {
        require(c.ctx.size() == 1, "axiom requires a singleton context");
        require(is_linear(c.type), "axiom requires a linear type");
        require(c.subject->kind() == Term::Kind::Var, "axiom subject must be a variable");
        if (c.ctx.size() == 1 && c.subject->kind() == Term::Kind::Var) {
          const auto& [var, ty] = *c.ctx.begin();
          require(var == c.subject->name(), "axiom subject differs from the context variable");
          require(type_equal(ty, c.type), "axiom type differs from the context binding");
        }
        break;
      }
      case Rule::Weaken: {
        const auto& data = d->weaken_data();
        const Sequent& p = d->premise()->conclusion();
        require(is_linear(data.type), "(w) added type must be linear");
        require(!p.ctx.count(data.var), "(w): " + data.var + " already in the premise context");
        Context expected = p.ctx;
        expected[data.var] = data.type;
        require(ctx_equal(c.ctx, expected), "(w) conclusion context mismatch");
        require(alpha_equal(c.subject, p.subject), "(w) must not change the subject");
        require(type_equal(c.type, p.type), "(w) must not change the type");
        break;
      }
      case Rule::ArrowIntro: {
        const auto& data = d->intro_data();
        const Sequent& p = d->premise()->conclusion();
        auto it = p.ctx.find(data.binder);
        if (it == p.ctx.end()) {
          report("(->I): binder " + data.binder + " not in the premise context");
          break;
        }
        require(is_linear(p.type), "(->I): premise type must be linear");
        Context expected = p.ctx;
        expected.erase(data.binder);
        require(ctx_equal(c.ctx, expected), "(->I) conclusion context mismatch");
        require(alpha_equal(c.subject, Term::abs(data.binder, p.subject)),
                "(->I) subject is not the abstraction of the premise subject");
        require(c.type->kind() == Type::Kind::Arrow &&
                    type_equal(c.type->domain(), it->second) &&
                    type_equal(c.type->codomain(), p.type),
                "(->I) conclusion type mismatch");
        break;
      }
      case Rule::ArrowElim: {
        const Sequent& f = d->premises()[0]->conclusion();
        const Sequent& a = d->premises()[1]->conclusion();
        if (f.type->kind() != Type::Kind::Arrow) {
          report("(->E): function premise type is not an arrow");
          break;
        }
        require(type_equal(a.type, f.type->domain()),
                "(->E): argument type does not match the domain");
        bool disjoint = true;
        for (const auto& [var, ty] : a.ctx)
          if (f.ctx.count(var)) {
            disjoint = false;
            report("(->E): contexts share the variable " + var);
          }
        if (disjoint) {
          Context expected = f.ctx;
          expected.insert(a.ctx.begin(), a.ctx.end());
          require(ctx_equal(c.ctx, expected), "(->E) conclusion context mismatch");
        }
        require(alpha_equal(c.subject, Term::app(f.subject, a.subject)),
                "(->E) subject is not the application of the premise subjects");
        require(type_equal(c.type, f.type->codomain()), "(->E) conclusion type mismatch");
        break;
      }
      case Rule::AndN: {
        const auto& ps = d->premises();
        std::vector<Context> ctxs;
        std::vector<TypePtr> types;
        bool subjects_ok = true;
        for (const auto& p : ps) {
          if (!alpha_equal(p->conclusion().subject, ps[0]->conclusion().subject))
            subjects_ok = false;
          ctxs.push_back(p->conclusion().ctx);
          types.push_back(p->conclusion().type);
        }
        require(subjects_ok, "(\\n): premise subjects differ");
        require(alpha_equal(c.subject, ps[0]->conclusion().subject),
                "(\\n): conclusion subject differs from the premises");
        require(ctx_equal(c.ctx, ctx_intersect(ctxs)), "(\\n) conclusion context mismatch");
        require(type_equal(c.type, Type::inter(std::move(types))),
                "(\\n) conclusion type is not the intersection of the premise types");
        break;
      }
      case Rule::Mux: {
        const auto& data = d->mux_data();
        const Sequent& p = d->premise()->conclusion();
        std::vector<TypePtr> parts;
        bool all_bound = true;
        for (const auto& x : data.merged) {
          auto it = p.ctx.find(x);
          if (it == p.ctx.end()) {
            all_bound = false;
            report("(m): merged variable " + x + " not in the premise context");
          } else {
            parts.push_back(it->second);
          }
        }
        std::set<std::string> merged_set(data.merged.begin(), data.merged.end());
        require(!merged_set.count(data.fresh), "(m): fresh variable collides with a merged one");
        if (all_bound) {
          Context expected = p.ctx;
          for (const auto& x : data.merged) expected.erase(x);
          require(!expected.count(data.fresh),
                  "(m): fresh variable " + data.fresh + " already in the context");
          expected[data.fresh] = Type::inter(std::move(parts));
          require(ctx_equal(c.ctx, expected), "(m) conclusion context mismatch");
          require(alpha_equal(c.subject, rename_frees(p.subject, merged_set, data.fresh)),
                  "(m) conclusion subject is not the renamed premise subject");
        }
        require(type_equal(c.type, p.type), "(m) must not change the type");
        break;
      }
    }

    for (std::size_t i = 0; i < d->premises().size(); ++i) {
      path.push_back(static_cast<int>(i));
      check(d->premises()[i]);
      path.pop_back();
    }
  }
};

}  // namespace

CheckReport check_derivation(const DerivPtr& d) {
  Checker ck;
  ck.check(d);
  CheckReport r;
  r.violations = std::move(ck.violations);
  r.ok = r.violations.empty();
  return r;
}

std::string CheckReport::to_string() const {
  if (ok) return "ok";
  std::string s;
  for (const auto& v : violations) {
    std::string p;
    for (int i : v.path) {
      if (!p.empty()) p += ".";
      p += std::to_string(i);
    }
    if (p.empty()) p = "root";
    s += "[" + p + "] " + v.message + "\n";
  }
  return s;
}

// ---------------------------------------------------------------------------
// Intersection trees and delta sequences

std::pair<std::vector<DeltaStep>, DerivPtr> peel_delta(const DerivPtr& d) {
  std::vector<DeltaStep> steps;
  DerivPtr cur = d;
  while (cur->rule() == Rule::Weaken || cur->rule() == Rule::Mux) {
    if (cur->rule() == Rule::Weaken)
      steps.push_back({Rule::Weaken, cur->weaken_data()});
    else
      steps.push_back({Rule::Mux, cur->mux_data()});
    cur = cur->premise();
  }
  return {std::move(steps), cur};
}

DerivPtr replay_delta(const std::vector<DeltaStep>& steps, DerivPtr core) {
  for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
    if (it->rule == Rule::Weaken) {
      const auto& w = std::get<WeakenData>(it->data);
      core = weaken(std::move(core), w.var, w.type);
    } else {
      const auto& m = std::get<MuxData>(it->data);
      core = mux(std::move(core), m.merged, m.fresh);
    }
  }
  return core;
}

IntersectionTreeView decompose_intersection_tree(const DerivPtr& d) {
  auto [steps, core] = peel_delta(d);
  IntersectionTreeView view;
  view.spine.delta = std::move(steps);
  if (is_constructive(core->rule())) {
    view.is_empty = true;
    view.leaves = {core};
    return view;
  }
  // core ends with (\n)
  view.is_empty = false;
  for (const auto& p : core->premises()) {
    auto sub = decompose_intersection_tree(p);
    view.spine.branches.push_back(std::move(sub.spine));
    view.leaves.insert(view.leaves.end(), sub.leaves.begin(), sub.leaves.end());
  }
  return view;
}

std::set<std::string> all_names(const DerivPtr& d) {
  std::set<std::string> out;
  for (const auto& [var, ty] : d->conclusion().ctx) out.insert(var);
  auto subj = all_names(d->conclusion().subject);
  out.insert(subj.begin(), subj.end());
  switch (d->rule()) {
    case Rule::Weaken:
      out.insert(d->weaken_data().var);
      break;
    case Rule::ArrowIntro:
      out.insert(d->intro_data().binder);
      break;
    case Rule::Mux:
      out.insert(d->mux_data().fresh);
      for (const auto& x : d->mux_data().merged) out.insert(x);
      break;
    default:
      break;
  }
  for (const auto& p : d->premises()) {
    auto sub = all_names(p);
    out.insert(sub.begin(), sub.end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Equality up to alpha and canonical types

namespace {

using NameMap = std::map<std::string, std::string>;

bool term_equal_mod(const TermPtr& a, const TermPtr& b, const NameMap& frees,
                    std::vector<std::pair<std::string, std::string>>& stack) {
  if (a->kind() != b->kind()) return false;
  switch (a->kind()) {
    case Term::Kind::Var: {
      for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
        bool la = it->first == a->name();
        bool lb = it->second == b->name();
        if (la || lb) return la && lb;
      }
      auto it = frees.find(a->name());
      if (it != frees.end()) return it->second == b->name();
      return a->name() == b->name();
    }
    case Term::Kind::Abs: {
      stack.emplace_back(a->binder(), b->binder());
      bool ok = term_equal_mod(a->body(), b->body(), frees, stack);
      stack.pop_back();
      return ok;
    }
    case Term::Kind::App:
      return term_equal_mod(a->fn(), b->fn(), frees, stack) &&
             term_equal_mod(a->arg(), b->arg(), frees, stack);
  }
  return false;
}

// Insert a->b, keeping the map injective by evicting stale pairs.
void map_bind(NameMap& fwd, NameMap& rev, const std::string& a, const std::string& b) {
  if (auto it = fwd.find(a); it != fwd.end()) rev.erase(it->second);
  if (auto it = rev.find(b); it != rev.end()) fwd.erase(it->second);
  fwd[a] = b;
  rev[b] = a;
}

bool deriv_equal_rec(const DerivPtr& a, const DerivPtr& b, NameMap fwd, NameMap rev) {
  if (a->rule() != b->rule()) return false;
  const Sequent& ca = a->conclusion();
  const Sequent& cb = b->conclusion();
  if (ca.ctx.size() != cb.ctx.size()) return false;
  for (const auto& [var, ty] : ca.ctx) {
    auto it = fwd.find(var);
    std::string target = it != fwd.end() ? it->second : var;
    auto jt = cb.ctx.find(target);
    if (jt == cb.ctx.end() || !type_equal(ty, jt->second)) return false;
  }
  {
    std::vector<std::pair<std::string, std::string>> stack;
    if (!term_equal_mod(ca.subject, cb.subject, fwd, stack)) return false;
  }
  if (!type_equal(ca.type, cb.type)) return false;

  NameMap nfwd = std::move(fwd), nrev = std::move(rev);
  switch (a->rule()) {
    case Rule::Weaken: {
      const auto& wa = a->weaken_data();
      const auto& wb = b->weaken_data();
      auto it = nfwd.find(wa.var);
      std::string target = it != nfwd.end() ? it->second : wa.var;
      if (target != wb.var || !type_equal(wa.type, wb.type)) return false;
      break;
    }
    case Rule::ArrowIntro: {
      map_bind(nfwd, nrev, a->intro_data().binder, b->intro_data().binder);
      break;
    }
    case Rule::Mux: {
      const auto& ma = a->mux_data();
      const auto& mb = b->mux_data();
      if (ma.merged.size() != mb.merged.size()) return false;
      auto it = nfwd.find(ma.fresh);
      std::string target = it != nfwd.end() ? it->second : ma.fresh;
      if (target != mb.fresh) return false;
      for (std::size_t i = 0; i < ma.merged.size(); ++i)
        map_bind(nfwd, nrev, ma.merged[i], mb.merged[i]);
      break;
    }
    default:
      break;
  }
  if (a->premises().size() != b->premises().size()) return false;
  for (std::size_t i = 0; i < a->premises().size(); ++i)
    if (!deriv_equal_rec(a->premises()[i], b->premises()[i], nfwd, nrev)) return false;
  return true;
}

}  // namespace

bool derivation_equal(const DerivPtr& a, const DerivPtr& b) {
  NameMap fwd, rev;
  // Root conclusion contexts must agree literally by name.
  for (const auto& [var, ty] : a->conclusion().ctx) map_bind(fwd, rev, var, var);
  return deriv_equal_rec(a, b, std::move(fwd), std::move(rev));
}

// ---------------------------------------------------------------------------
// JSON serialization

using nlohmann::json;

json type_to_json(const TypePtr& t) {
  switch (t->kind()) {
    case Type::Kind::Var:
      return json{{"var", t->name()}};
    case Type::Kind::Arrow:
      return json{{"arrow", json::array({type_to_json(t->domain()), type_to_json(t->codomain())})}};
    case Type::Kind::Inter: {
      json kids = json::array();
      for (const auto& c : t->children()) kids.push_back(type_to_json(c));
      return json{{"inter", std::move(kids)}};
    }
  }
  throw TypeError("unreachable type kind");
}

TypePtr type_from_json(const json& j) {
  if (!j.is_object() || j.size() != 1) throw SchemaError("type node must be a 1-key object");
  if (j.contains("var")) {
    if (!j["var"].is_string()) throw SchemaError("type var must be a string");
    return Type::tvar(j["var"].get<std::string>());
  }
  if (j.contains("arrow")) {
    const auto& a = j["arrow"];
    if (!a.is_array() || a.size() != 2) throw SchemaError("arrow must be a 2-element array");
    TypePtr cod = type_from_json(a[1]);
    if (!is_linear(cod)) throw SchemaError("arrow codomain must be linear");
    return Type::arrow(type_from_json(a[0]), cod);
  }
  if (j.contains("inter")) {
    const auto& a = j["inter"];
    if (!a.is_array() || a.size() < 2) throw SchemaError("inter requires >= 2 children");
    std::vector<TypePtr> kids;
    for (const auto& c : a) kids.push_back(type_from_json(c));
    return Type::inter(std::move(kids));
  }
  throw SchemaError("unknown type node key");
}

namespace {

const char* rule_tag(Rule r) {
  switch (r) {
    case Rule::Ax: return "ax";
    case Rule::Weaken: return "w";
    case Rule::ArrowIntro: return "arrow_i";
    case Rule::ArrowElim: return "arrow_e";
    case Rule::AndN: return "and";
    case Rule::Mux: return "mux";
  }
  return "?";
}

std::optional<Rule> rule_from_tag(const std::string& tag) {
  if (tag == "ax") return Rule::Ax;
  if (tag == "w") return Rule::Weaken;
  if (tag == "arrow_i") return Rule::ArrowIntro;
  if (tag == "arrow_e") return Rule::ArrowElim;
  if (tag == "and") return Rule::AndN;
  if (tag == "mux") return Rule::Mux;
  return std::nullopt;
}

json node_to_json(const DerivPtr& d) {
  json node;
  node["rule"] = rule_tag(d->rule());
  json ctx = json::array();
  for (const auto& [var, ty] : d->conclusion().ctx)
    ctx.push_back(json{{"var", var}, {"type", type_to_json(ty)}});
  node["ctx"] = std::move(ctx);
  node["term"] = to_string(d->conclusion().subject);
  node["type"] = type_to_json(d->conclusion().type);
  json prems = json::array();
  for (const auto& p : d->premises()) prems.push_back(node_to_json(p));
  node["premises"] = std::move(prems);
  switch (d->rule()) {
    case Rule::Weaken:
      node["data"] = json{{"var", d->weaken_data().var},
                          {"type", type_to_json(d->weaken_data().type)}};
      break;
    case Rule::ArrowIntro:
      node["data"] = json{{"binder", d->intro_data().binder}};
      break;
    case Rule::AndN:
      node["data"] = json{{"n", d->premises().size()}};
      break;
    case Rule::Mux:
      node["data"] = json{{"merged", d->mux_data().merged}, {"fresh", d->mux_data().fresh}};
      break;
    default:
      break;
  }
  return node;
}

DerivPtr node_from_json(const json& j) {
  if (!j.is_object()) throw SchemaError("derivation node must be an object");
  for (const char* key : {"rule", "ctx", "term", "type", "premises"})
    if (!j.contains(key)) throw SchemaError(std::string("missing key: ") + key);
  auto rule = rule_from_tag(j["rule"].get<std::string>());
  if (!rule) throw SchemaError("unknown rule tag: " + j["rule"].get<std::string>());

  Sequent c;
  if (!j["ctx"].is_array()) throw SchemaError("ctx must be an array");
  for (const auto& b : j["ctx"]) {
    if (!b.is_object() || !b.contains("var") || !b.contains("type"))
      throw SchemaError("ctx binding must carry var and type");
    std::string var = b["var"].get<std::string>();
    if (c.ctx.count(var)) throw SchemaError("duplicate context variable " + var);
    c.ctx[var] = type_from_json(b["type"]);
  }
  try {
    c.subject = parse_term(j["term"].get<std::string>());
  } catch (const ParseError& e) {
    throw SchemaError(std::string("bad term: ") + e.what());
  }
  c.type = type_from_json(j["type"]);

  std::vector<DerivPtr> premises;
  for (const auto& p : j["premises"]) premises.push_back(node_from_json(p));

  Derivation::Data data = std::monostate{};
  switch (*rule) {
    case Rule::Weaken: {
      if (!j.contains("data")) throw SchemaError("(w) node missing data");
      data = WeakenData{j["data"]["var"].get<std::string>(), type_from_json(j["data"]["type"])};
      break;
    }
    case Rule::ArrowIntro: {
      if (!j.contains("data")) throw SchemaError("(->I) node missing data");
      data = ArrowIntroData{j["data"]["binder"].get<std::string>()};
      break;
    }
    case Rule::Mux: {
      if (!j.contains("data")) throw SchemaError("(m) node missing data");
      MuxData m;
      for (const auto& s : j["data"]["merged"]) m.merged.push_back(s.get<std::string>());
      m.fresh = j["data"]["fresh"].get<std::string>();
      data = std::move(m);
      break;
    }
    case Rule::AndN:
      if (j.contains("data") && j["data"].contains("n") &&
          j["data"]["n"].get<std::size_t>() != premises.size())
        throw SchemaError("(\\n) arity disagrees with the premise count");
      break;
    default:
      break;
  }
  try {
    return Derivation::make_raw(*rule, std::move(c), std::move(premises), std::move(data));
  } catch (const RuleError& e) {
    throw SchemaError(e.what());
  }
}

}  // namespace

json derivation_to_json(const DerivPtr& d) { return node_to_json(d); }

DerivPtr derivation_from_json(const json& j) {
  DerivPtr d;
  try {
    d = node_from_json(j);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed derivation document: ") + e.what());
  }
  CheckReport report = check_derivation(d);
  if (!report.ok)
    throw SchemaError("derivation fails the rule check:\n" + report.to_string());
  return d;
}

// ---------------------------------------------------------------------------
// Pretty printing and its text round trip

namespace {

constexpr const char* kTurnstile = "\xe2\x8a\xa2";  // ⊢

std::string rule_suffix(const DerivPtr& d) {
  switch (d->rule()) {
    case Rule::Ax: return "(Ax)";
    case Rule::Weaken:
      return "(w " + d->weaken_data().var + ": " + to_string(d->weaken_data().type) + ")";
    case Rule::ArrowIntro: return "(\xe2\x86\x92I " + d->intro_data().binder + ")";
    case Rule::ArrowElim: return "(\xe2\x86\x92" "E)";
    case Rule::AndN: return "(\xe2\x88\xa7" + std::to_string(d->premises().size()) + ")";
    case Rule::Mux: {
      std::string s = "(m ";
      for (std::size_t i = 0; i < d->mux_data().merged.size(); ++i) {
        if (i) s += ",";
        s += d->mux_data().merged[i];
      }
      return s + " -> " + d->mux_data().fresh + ")";
    }
  }
  return "(?)";
}

void pretty_rec(const DerivPtr& d, int depth, std::string& out) {
  out.append(static_cast<std::size_t>(depth) * 2, ' ');
  const Sequent& c = d->conclusion();
  std::string ctx = to_string(c.ctx);
  if (!ctx.empty()) out += ctx + " ";
  out += std::string(kTurnstile) + " " + to_string(c.subject) + ": " + to_string(c.type);
  out += "  " + rule_suffix(d);
  out += "\n";
  for (const auto& p : d->premises()) pretty_rec(p, depth + 1, out);
}

struct TextLine {
  int depth;
  Rule rule;
  Derivation::Data data;
  Sequent sequent;
};

Rule rule_from_text(const std::string& name, std::size_t& arity_out) {
  if (name == "Ax") return Rule::Ax;
  if (name == "w") return Rule::Weaken;
  if (name == "\xe2\x86\x92I" || name == "->I") return Rule::ArrowIntro;
  if (name == "\xe2\x86\x92" "E" || name == "->E") return Rule::ArrowElim;
  if (name == "m") return Rule::Mux;
  std::string and_utf8 = "\xe2\x88\xa7";
  std::string body;
  if (name.rfind(and_utf8, 0) == 0)
    body = name.substr(and_utf8.size());
  else if (name.rfind("/\\", 0) == 0)
    body = name.substr(2);
  else
    throw SchemaError("unknown rule name in text: " + name);
  arity_out = body.empty() ? 0 : std::stoul(body);
  return Rule::AndN;
}

TextLine parse_text_line(const std::string& raw) {
  std::size_t indent = 0;
  while (indent < raw.size() && raw[indent] == ' ') ++indent;
  if (indent % 2 != 0) throw SchemaError("odd indentation in derivation text");
  std::string line = raw.substr(indent);

  std::size_t rule_at = line.rfind("  (");
  if (rule_at == std::string::npos || line.back() != ')')
    throw SchemaError("missing rule annotation in line: " + line);
  std::string rule_part = line.substr(rule_at + 3, line.size() - rule_at - 4);
  std::string sequent_part = line.substr(0, rule_at);

  std::size_t turnstile = sequent_part.find(kTurnstile);
  std::string ctx_part, rest;
  if (turnstile == std::string::npos) {
    turnstile = sequent_part.find("|-");
    if (turnstile == std::string::npos) throw SchemaError("missing turnstile in: " + line);
    ctx_part = sequent_part.substr(0, turnstile);
    rest = sequent_part.substr(turnstile + 2);
  } else {
    ctx_part = sequent_part.substr(0, turnstile);
    rest = sequent_part.substr(turnstile + 3);
  }

  std::size_t colon = rest.rfind(": ");
  if (colon == std::string::npos) throw SchemaError("missing ': ' in: " + line);

  TextLine out;
  out.depth = static_cast<int>(indent / 2);
  out.sequent.subject = parse_term(rest.substr(0, colon));
  out.sequent.type = parse_type(rest.substr(colon + 2));

  // Context: comma-separated "var: type" bindings; types contain no commas.
  std::size_t pos = 0;
  while (pos < ctx_part.size()) {
    std::size_t end = ctx_part.find(", ", pos);
    std::string binding = ctx_part.substr(pos, end == std::string::npos ? end : end - pos);
    pos = end == std::string::npos ? ctx_part.size() : end + 2;
    std::size_t bc = binding.find(": ");
    while (bc == std::string::npos && !binding.empty() &&
           std::isspace(static_cast<unsigned char>(binding.back()))) {
      binding.pop_back();
      bc = binding.find(": ");
    }
    if (binding.empty()) continue;
    if (bc == std::string::npos) throw SchemaError("bad context binding: " + binding);
    out.sequent.ctx[binding.substr(0, bc)] = parse_type(binding.substr(bc + 2));
  }

  std::istringstream rs(rule_part);
  std::string name;
  rs >> name;
  std::size_t arity = 0;
  out.rule = rule_from_text(name, arity);
  switch (out.rule) {
    case Rule::Weaken: {
      std::string rest_data;
      std::getline(rs, rest_data);
      std::size_t bc = rest_data.find(": ");
      if (bc == std::string::npos) throw SchemaError("bad (w) data: " + rule_part);
      std::string var = rest_data.substr(0, bc);
      while (!var.empty() && var.front() == ' ') var.erase(var.begin());
      out.data = WeakenData{var, parse_type(rest_data.substr(bc + 2))};
      break;
    }
    case Rule::ArrowIntro: {
      std::string binder;
      rs >> binder;
      if (binder.empty()) throw SchemaError("bad (->I) data: " + rule_part);
      out.data = ArrowIntroData{binder};
      break;
    }
    case Rule::Mux: {
      std::string merged_csv, arrow, fresh;
      rs >> merged_csv >> arrow >> fresh;
      if (arrow != "->" || fresh.empty()) throw SchemaError("bad (m) data: " + rule_part);
      MuxData m;
      std::size_t p = 0;
      while (p <= merged_csv.size()) {
        std::size_t comma = merged_csv.find(',', p);
        m.merged.push_back(merged_csv.substr(p, comma == std::string::npos ? comma : comma - p));
        if (comma == std::string::npos) break;
        p = comma + 1;
      }
      m.fresh = fresh;
      out.data = std::move(m);
      break;
    }
    default:
      break;
  }
  return out;
}

DerivPtr build_from_lines(const std::vector<TextLine>& lines, std::size_t& i, int depth) {
  if (i >= lines.size() || lines[i].depth != depth)
    throw SchemaError("derivation text: premise indentation mismatch");
  const TextLine& line = lines[i];
  ++i;
  std::vector<DerivPtr> premises;
  while (i < lines.size() && lines[i].depth > depth) {
    if (lines[i].depth != depth + 1)
      throw SchemaError("derivation text: skipped indentation level");
    premises.push_back(build_from_lines(lines, i, depth + 1));
  }
  try {
    return Derivation::make_raw(line.rule, line.sequent, std::move(premises), line.data);
  } catch (const RuleError& e) {
    throw SchemaError(e.what());
  }
}

}  // namespace

std::string pretty_print(const DerivPtr& d) {
  std::string out;
  pretty_rec(d, 0, out);
  return out;
}

DerivPtr parse_derivation_text(std::string_view text) {
  std::vector<TextLine> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string line(text.substr(pos, nl == std::string_view::npos ? nl : nl - pos));
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    bool blank = line.find_first_not_of(" \t\r") == std::string::npos;
    if (!blank) lines.push_back(parse_text_line(line));
  }
  if (lines.empty()) throw SchemaError("empty derivation text");
  std::size_t i = 0;
  DerivPtr d = build_from_lines(lines, i, 0);
  if (i != lines.size()) throw SchemaError("trailing lines in derivation text");
  CheckReport report = check_derivation(d);
  if (!report.ok) throw SchemaError("derivation fails the rule check:\n" + report.to_string());
  return d;
}

}  // namespace sti
