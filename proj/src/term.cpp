#include "sti/term.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <unordered_map>
#include <unordered_set>

namespace sti {

TermPtr Term::var(std::string name) {
  if (name.empty()) throw TermError("variable name must be non-empty");
  return TermPtr(new Term(Kind::Var, std::move(name), nullptr, nullptr));
}

TermPtr Term::abs(std::string binder, TermPtr body) {
  if (binder.empty()) throw TermError("binder name must be non-empty");
  if (!body) throw TermError("abstraction with null body");
  return TermPtr(new Term(Kind::Abs, std::move(binder), std::move(body), nullptr));
}

TermPtr Term::app(TermPtr fn, TermPtr arg) {
  if (!fn || !arg) throw TermError("application with null component");
  return TermPtr(new Term(Kind::App, "", std::move(fn), std::move(arg)));
}

std::string to_string(const RedexPath& p) {
  std::string s;
  for (Step st : p) {
    if (!s.empty()) s += ".";
    s += st == Step::Body ? "body" : st == Step::Fun ? "fun" : "arg";
  }
  return s.empty() ? "root" : s;
}

namespace {

void free_vars_into(const TermPtr& t, std::set<std::string>& bound,
                    std::set<std::string>& out) {
  switch (t->kind()) {
    case Term::Kind::Var:
      if (!bound.count(t->name())) out.insert(t->name());
      return;
    case Term::Kind::Abs: {
      bool fresh = bound.insert(t->binder()).second;
      free_vars_into(t->body(), bound, out);
      if (fresh) bound.erase(t->binder());
      return;
    }
    case Term::Kind::App:
      free_vars_into(t->fn(), bound, out);
      free_vars_into(t->arg(), bound, out);
      return;
  }
}

}  // namespace

std::set<std::string> free_vars(const TermPtr& t) {
  std::set<std::string> bound, out;
  free_vars_into(t, bound, out);
  return out;
}

std::set<std::string> all_names(const TermPtr& t) {
  std::set<std::string> out;
  switch (t->kind()) {
    case Term::Kind::Var:
      out.insert(t->name());
      return out;
    case Term::Kind::Abs: {
      out = all_names(t->body());
      out.insert(t->binder());
      return out;
    }
    case Term::Kind::App: {
      out = all_names(t->fn());
      auto rhs = all_names(t->arg());
      out.insert(rhs.begin(), rhs.end());
      return out;
    }
  }
  return out;
}

namespace {

bool alpha_equal_rec(const TermPtr& a, const TermPtr& b,
                     std::vector<std::pair<std::string, std::string>>& stack) {
  if (a->kind() != b->kind()) return false;
  switch (a->kind()) {
    case Term::Kind::Var: {
      for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
        bool la = it->first == a->name();
        bool lb = it->second == b->name();
        if (la || lb) return la && lb;
      }
      return a->name() == b->name();  // both free
    }
    case Term::Kind::Abs: {
      stack.emplace_back(a->binder(), b->binder());
      bool ok = alpha_equal_rec(a->body(), b->body(), stack);
      stack.pop_back();
      return ok;
    }
    case Term::Kind::App:
      return alpha_equal_rec(a->fn(), b->fn(), stack) &&
             alpha_equal_rec(a->arg(), b->arg(), stack);
  }
  return false;
}

void alpha_key_rec(const TermPtr& t, std::vector<std::string>& binders,
                   std::string& out) {
  switch (t->kind()) {
    case Term::Kind::Var: {
      for (std::size_t i = binders.size(); i-- > 0;) {
        if (binders[i] == t->name()) {
          out += "b" + std::to_string(binders.size() - 1 - i);
          return;
        }
      }
      out += "f" + t->name();
      return;
    }
    case Term::Kind::Abs:
      out += "(\\";
      binders.push_back(t->binder());
      alpha_key_rec(t->body(), binders, out);
      binders.pop_back();
      out += ")";
      return;
    case Term::Kind::App:
      out += "(";
      alpha_key_rec(t->fn(), binders, out);
      out += " ";
      alpha_key_rec(t->arg(), binders, out);
      out += ")";
      return;
  }
}

}  // namespace

bool alpha_equal(const TermPtr& a, const TermPtr& b) {
  if (a.get() == b.get()) return true;
  std::vector<std::pair<std::string, std::string>> stack;
  return alpha_equal_rec(a, b, stack);
}

std::string alpha_key(const TermPtr& t) {
  std::string out;
  std::vector<std::string> binders;
  alpha_key_rec(t, binders, out);
  return out;
}

std::int64_t term_size(const TermPtr& t) {
  switch (t->kind()) {
    case Term::Kind::Var:
      return 1;
    case Term::Kind::Abs:
      return term_size(t->body()) + 1;
    case Term::Kind::App:
      return term_size(t->fn()) + term_size(t->arg()) + 1;
  }
  throw TermError("unreachable term kind");
}

std::string fresh_name(const std::string& base, const std::set<std::string>& avoid) {
  for (std::int64_t i = 1;; ++i) {
    std::string candidate = base + "_" + std::to_string(i);
    if (!avoid.count(candidate)) return candidate;
  }
}

namespace {

// Simultaneous capture-free substitution.
TermPtr subst_map(const TermPtr& m, const std::map<std::string, TermPtr>& subs,
                  const std::set<std::string>& sub_frees) {
  switch (m->kind()) {
    case Term::Kind::Var: {
      auto it = subs.find(m->name());
      return it == subs.end() ? m : it->second;
    }
    case Term::Kind::App:
      return Term::app(subst_map(m->fn(), subs, sub_frees),
                       subst_map(m->arg(), subs, sub_frees));
    case Term::Kind::Abs: {
      std::map<std::string, TermPtr> inner = subs;
      inner.erase(m->binder());
      if (inner.empty()) return m;
      if (sub_frees.count(m->binder())) {
        // The binder would capture a free variable of a substituted term.
        std::set<std::string> avoid = sub_frees;
        auto body_names = all_names(m->body());
        avoid.insert(body_names.begin(), body_names.end());
        for (const auto& [from, to] : inner) avoid.insert(from);
        std::string renamed = fresh_name(m->binder(), avoid);
        inner[m->binder()] = Term::var(renamed);
        return Term::abs(renamed, subst_map(m->body(), inner, sub_frees));
      }
      return Term::abs(m->binder(), subst_map(m->body(), inner, sub_frees));
    }
  }
  throw TermError("unreachable term kind");
}

}  // namespace

TermPtr substitute(const TermPtr& m, const std::string& x, const TermPtr& n) {
  std::map<std::string, TermPtr> subs{{x, n}};
  return subst_map(m, subs, free_vars(n));
}

TermPtr rename_frees(const TermPtr& m, const std::set<std::string>& targets,
                     const std::string& fresh) {
  if (targets.empty()) return m;
  std::map<std::string, TermPtr> subs;
  TermPtr v = Term::var(fresh);
  for (const auto& x : targets) subs[x] = v;
  return subst_map(m, subs, {fresh});
}

TermPtr rename_instance(const TermPtr& m, const std::set<std::string>& targets,
                        const std::string& fresh) {
  auto fv = free_vars(m);
  for (const auto& x : targets)
    if (!fv.count(x)) throw TermError("rename_instance: " + x + " is not free in the term");
  if (!targets.empty() && fv.count(fresh) && !targets.count(fresh))
    throw TermError("rename_instance: fresh name " + fresh + " already free in the term");
  return rename_frees(m, targets, fresh);
}

namespace {

bool renaming_instance_rec(const TermPtr& g, const TermPtr& i,
                           std::vector<std::pair<std::string, std::string>>& stack,
                           std::map<std::string, std::string>& mapping) {
  if (g->kind() != i->kind()) return false;
  switch (g->kind()) {
    case Term::Kind::Var: {
      for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
        bool lg = it->first == g->name();
        bool li = it->second == i->name();
        if (lg || li) return lg && li;
      }
      auto [pos, inserted] = mapping.emplace(g->name(), i->name());
      return inserted || pos->second == i->name();
    }
    case Term::Kind::Abs: {
      stack.emplace_back(g->binder(), i->binder());
      bool ok = renaming_instance_rec(g->body(), i->body(), stack, mapping);
      stack.pop_back();
      return ok;
    }
    case Term::Kind::App:
      return renaming_instance_rec(g->fn(), i->fn(), stack, mapping) &&
             renaming_instance_rec(g->arg(), i->arg(), stack, mapping);
  }
  return false;
}

}  // namespace

bool is_renaming_instance(const TermPtr& general, const TermPtr& instance) {
  std::vector<std::pair<std::string, std::string>> stack;
  std::map<std::string, std::string> mapping;
  return renaming_instance_rec(general, instance, stack, mapping);
}

namespace {

bool is_redex(const TermPtr& t) {
  return t->kind() == Term::Kind::App && t->fn()->kind() == Term::Kind::Abs;
}

void redexes_rec(const TermPtr& t, RedexPath& path, std::vector<RedexPath>& out) {
  switch (t->kind()) {
    case Term::Kind::Var:
      return;
    case Term::Kind::Abs:
      path.push_back(Step::Body);
      redexes_rec(t->body(), path, out);
      path.pop_back();
      return;
    case Term::Kind::App:
      if (is_redex(t)) out.push_back(path);
      path.push_back(Step::Fun);
      redexes_rec(t->fn(), path, out);
      path.back() = Step::Arg;
      redexes_rec(t->arg(), path, out);
      path.pop_back();
      return;
  }
}

}  // namespace

std::vector<RedexPath> redexes(const TermPtr& t) {
  std::vector<RedexPath> out;
  RedexPath path;
  redexes_rec(t, path, out);
  return out;
}

TermPtr subterm_at(const TermPtr& t, const RedexPath& p) {
  TermPtr cur = t;
  for (Step s : p) {
    switch (s) {
      case Step::Body:
        if (cur->kind() != Term::Kind::Abs) throw TermError("path mismatch: expected abstraction");
        cur = cur->body();
        break;
      case Step::Fun:
        if (cur->kind() != Term::Kind::App) throw TermError("path mismatch: expected application");
        cur = cur->fn();
        break;
      case Step::Arg:
        if (cur->kind() != Term::Kind::App) throw TermError("path mismatch: expected application");
        cur = cur->arg();
        break;
    }
  }
  return cur;
}

namespace {

TermPtr reduce_at_rec(const TermPtr& t, const RedexPath& p, std::size_t i) {
  if (i == p.size()) {
    if (!is_redex(t)) throw TermError("position is not a beta-redex");
    return substitute(t->fn()->body(), t->fn()->binder(), t->arg());
  }
  switch (p[i]) {
    case Step::Body:
      if (t->kind() != Term::Kind::Abs) throw TermError("invalid redex position");
      return Term::abs(t->binder(), reduce_at_rec(t->body(), p, i + 1));
    case Step::Fun:
      if (t->kind() != Term::Kind::App) throw TermError("invalid redex position");
      return Term::app(reduce_at_rec(t->fn(), p, i + 1), t->arg());
    case Step::Arg:
      if (t->kind() != Term::Kind::App) throw TermError("invalid redex position");
      return Term::app(t->fn(), reduce_at_rec(t->arg(), p, i + 1));
  }
  throw TermError("unreachable step");
}

}  // namespace

TermPtr reduce_at(const TermPtr& t, const RedexPath& p) {
  return reduce_at_rec(t, p, 0);
}

bool pick_redex(const TermPtr& t, Strategy s, RedexPath& out) {
  auto rs = redexes(t);
  if (rs.empty()) return false;
  // Preorder position order: the first entry is the leftmost-outermost redex,
  // the last is the rightmost-innermost one.
  out = s == Strategy::LeftmostOutermost ? rs.front() : rs.back();
  return true;
}

std::vector<TermPtr> normalize(const TermPtr& t, Strategy s, std::int64_t fuel) {
  std::vector<TermPtr> seq{t};
  TermPtr cur = t;
  RedexPath p;
  while (pick_redex(cur, s, p)) {
    if (static_cast<std::int64_t>(seq.size()) > fuel)
      throw FuelExhausted("normalize: fuel exhausted after " + std::to_string(fuel) +
                          " steps (possible divergence)");
    cur = reduce_at(cur, p);
    seq.push_back(cur);
  }
  return seq;
}

namespace {

struct GraphExplorer {
  std::int64_t fuel;
  std::unordered_map<std::string, std::int64_t> longest;  // by alpha key
  std::unordered_set<std::string> on_stack;
  std::int64_t max_nf_size = 0;

  std::int64_t visit(const TermPtr& t) {
    std::string key = alpha_key(t);
    if (auto it = longest.find(key); it != longest.end()) return it->second;
    if (on_stack.count(key))
      throw FuelExhausted("reduction graph contains a cycle: the term diverges");
    if (static_cast<std::int64_t>(longest.size()) >= fuel)
      throw FuelExhausted("reduction graph exploration: fuel exhausted at " +
                          std::to_string(fuel) + " states");
    auto rs = redexes(t);
    if (rs.empty()) {
      max_nf_size = std::max(max_nf_size, term_size(t));
      longest.emplace(std::move(key), 0);
      return 0;
    }
    on_stack.insert(key);
    std::int64_t best = 0;
    for (const auto& p : rs) best = std::max(best, 1 + visit(reduce_at(t, p)));
    on_stack.erase(key);
    longest.emplace(std::move(key), best);
    return best;
  }
};

}  // namespace

ReductionGraphInfo explore_reduction_graph(const TermPtr& t, std::int64_t fuel) {
  GraphExplorer ex{fuel, {}, {}, 0};
  ReductionGraphInfo info;
  info.longest_path = ex.visit(t);
  info.states = static_cast<std::int64_t>(ex.longest.size());
  info.max_normal_form_size = ex.max_nf_size;
  return info;
}

std::int64_t max_reduction_length(const TermPtr& t, std::int64_t fuel) {
  return explore_reduction_graph(t, fuel).longest_path;
}

namespace {

struct TermParser {
  std::string_view text;
  std::size_t pos = 0;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("syntax error at offset " + std::to_string(pos) + ": " + msg, pos);
  }

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }

  bool eat_lambda() {
    skip_ws();
    if (pos < text.size() && text[pos] == '\\') {
      ++pos;
      return true;
    }
    if (text.substr(pos, 2) == "\xce\xbb") {  // UTF-8 lambda
      pos += 2;
      return true;
    }
    return false;
  }

  bool at_ident() {
    skip_ws();
    return pos < text.size() && std::isalpha(static_cast<unsigned char>(text[pos]));
  }

  std::string ident() {
    skip_ws();
    if (!at_ident()) fail("expected identifier");
    std::size_t start = pos;
    while (pos < text.size()) {
      char c = text[pos];
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'')
        ++pos;
      else
        break;
    }
    return std::string(text.substr(start, pos - start));
  }

  TermPtr term() {
    if (eat_lambda()) {
      std::vector<std::string> binders;
      binders.push_back(ident());
      while (at_ident()) binders.push_back(ident());
      skip_ws();
      if (pos >= text.size() || text[pos] != '.') fail("expected '.' after binders");
      ++pos;
      TermPtr body = term();
      for (auto it = binders.rbegin(); it != binders.rend(); ++it)
        body = Term::abs(*it, std::move(body));
      return body;
    }
    return application();
  }

  TermPtr application() {
    TermPtr acc = atom();
    for (;;) {
      skip_ws();
      if (pos >= text.size()) break;
      char c = text[pos];
      if (c == '(' || std::isalpha(static_cast<unsigned char>(c)) || c == '\\' ||
          text.substr(pos, 2) == "\xce\xbb") {
        // A lambda as the right part of an application extends maximally right,
        // so it must be the final atom.
        if (c == '\\' || text.substr(pos, 2) == "\xce\xbb")
          return Term::app(std::move(acc), term());
        acc = Term::app(std::move(acc), atom());
      } else {
        break;
      }
    }
    return acc;
  }

  TermPtr atom() {
    skip_ws();
    if (pos < text.size() && text[pos] == '(') {
      ++pos;
      TermPtr t = term();
      skip_ws();
      if (pos >= text.size() || text[pos] != ')') fail("expected ')'");
      ++pos;
      return t;
    }
    return Term::var(ident());
  }
};

}  // namespace

TermPtr parse_term(std::string_view text) {
  TermParser p{text};
  TermPtr t = p.term();
  p.skip_ws();
  if (p.pos != text.size()) p.fail("trailing input");
  return t;
}

std::string to_string(const TermPtr& t) {
  switch (t->kind()) {
    case Term::Kind::Var:
      return t->name();
    case Term::Kind::Abs:
      return "\\" + t->binder() + ". " + to_string(t->body());
    case Term::Kind::App: {
      std::string f = to_string(t->fn());
      if (t->fn()->kind() == Term::Kind::Abs) f = "(" + f + ")";
      std::string a = to_string(t->arg());
      if (t->arg()->kind() != Term::Kind::Var) a = "(" + a + ")";
      return f + " " + a;
    }
  }
  throw TermError("unreachable term kind");
}

}  // namespace sti
