#include "sti/types.hpp"

#include <algorithm>
#include <cctype>

namespace sti {

TypePtr Type::tvar(std::string name) {
  if (name.empty()) throw TypeError("type variable name must be non-empty");
  return TypePtr(new Type(Kind::Var, std::move(name), {}));
}

TypePtr Type::arrow(TypePtr domain, TypePtr codomain) {
  if (!domain || !codomain) throw TypeError("arrow with null component");
  if (codomain->kind() == Kind::Inter)
    throw TypeError("arrow codomain must be a linear type");
  return TypePtr(new Type(Kind::Arrow, "", {std::move(domain), std::move(codomain)}));
}

TypePtr Type::inter(std::vector<TypePtr> children) {
  if (children.size() < 2)
    throw TypeError("intersection node requires at least 2 children");
  for (const auto& c : children)
    if (!c) throw TypeError("intersection with null child");
  return TypePtr(new Type(Kind::Inter, "", std::move(children)));
}

bool is_linear(const TypePtr& t) { return t->kind() != Type::Kind::Inter; }

std::int64_t element_count(const TypePtr& t) {
  if (is_linear(t)) return 1;
  std::int64_t n = 0;
  for (const auto& c : t->children()) n += element_count(c);
  return n;
}

std::vector<TypePtr> linear_elements(const TypePtr& t) {
  std::vector<TypePtr> out;
  if (is_linear(t)) {
    out.push_back(t);
    return out;
  }
  for (const auto& c : t->children()) {
    auto sub = linear_elements(c);
    out.insert(out.end(), sub.begin(), sub.end());
  }
  return out;
}

std::string type_key(const TypePtr& t) {
  switch (t->kind()) {
    case Type::Kind::Var:
      return "v(" + t->name() + ")";
    case Type::Kind::Arrow:
      return "a(" + type_key(t->domain()) + "," + type_key(t->codomain()) + ")";
    case Type::Kind::Inter: {
      std::string s = "i(";
      for (std::size_t i = 0; i < t->children().size(); ++i) {
        if (i) s += ",";
        s += type_key(t->children()[i]);
      }
      return s + ")";
    }
  }
  throw TypeError("unreachable type kind");
}

TypePtr canonicalize(const TypePtr& t) {
  switch (t->kind()) {
    case Type::Kind::Var:
      return t;
    case Type::Kind::Arrow:
      return Type::arrow(canonicalize(t->domain()), canonicalize(t->codomain()));
    case Type::Kind::Inter: {
      std::vector<TypePtr> kids;
      kids.reserve(t->arity());
      for (const auto& c : t->children()) kids.push_back(canonicalize(c));
      std::stable_sort(kids.begin(), kids.end(), [](const TypePtr& a, const TypePtr& b) {
        return type_key(a) < type_key(b);
      });
      return Type::inter(std::move(kids));
    }
  }
  throw TypeError("unreachable type kind");
}

bool type_equal(const TypePtr& a, const TypePtr& b) {
  if (a.get() == b.get()) return true;
  return type_key(canonicalize(a)) == type_key(canonicalize(b));
}

std::string to_string(const TypePtr& t) {
  switch (t->kind()) {
    case Type::Kind::Var:
      return t->name();
    case Type::Kind::Arrow: {
      const auto& d = t->domain();
      std::string ds = to_string(d);
      if (d->kind() == Type::Kind::Arrow) ds = "(" + ds + ")";
      return ds + " -> " + to_string(t->codomain());
    }
    case Type::Kind::Inter: {
      std::string s = "(";
      for (std::size_t i = 0; i < t->children().size(); ++i) {
        if (i) s += " /\\ ";
        std::string cs = to_string(t->children()[i]);
        if (t->children()[i]->kind() == Type::Kind::Arrow) cs = "(" + cs + ")";
        s += cs;
      }
      return s + ")";
    }
  }
  throw TypeError("unreachable type kind");
}

namespace {

struct TypeParser {
  std::string_view text;
  std::size_t pos = 0;

  [[noreturn]] void fail(const std::string& msg) const {
    throw TypeError("type syntax error at offset " + std::to_string(pos) + ": " + msg);
  }

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }

  bool eat(std::string_view s) {
    skip_ws();
    if (text.substr(pos, s.size()) == s) {
      pos += s.size();
      return true;
    }
    return false;
  }

  bool peek(std::string_view s) {
    skip_ws();
    return text.substr(pos, s.size()) == s;
  }

  bool eat_and() {
    // "/\" or UTF-8 "∧"
    return eat("/\\") || eat("\xe2\x88\xa7");
  }

  std::string ident() {
    skip_ws();
    if (pos >= text.size() || !std::isalpha(static_cast<unsigned char>(text[pos])))
      fail("expected identifier");
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

  TypePtr type() {
    TypePtr lhs = primary();
    skip_ws();
    if (eat("->")) {
      TypePtr rhs = type();
      if (rhs->kind() == Type::Kind::Inter) fail("arrow codomain must be linear");
      return Type::arrow(lhs, rhs);
    }
    return lhs;
  }

  TypePtr primary() {
    skip_ws();
    if (eat("(")) {
      std::vector<TypePtr> parts;
      parts.push_back(type());
      while (eat_and()) parts.push_back(type());
      if (!eat(")")) fail("expected ')'");
      if (parts.size() == 1) return parts[0];
      return Type::inter(std::move(parts));
    }
    return Type::tvar(ident());
  }
};

}  // namespace

TypePtr parse_type(std::string_view text) {
  TypeParser p{text};
  TypePtr t = p.type();
  p.skip_ws();
  if (p.pos != text.size()) p.fail("trailing input");
  return t;
}

Context ctx_intersect(const std::vector<Context>& contexts) {
  if (contexts.size() < 2)
    throw TypeError("context intersection requires at least 2 contexts");
  // Gather each variable's bound types in argument order.
  std::map<std::string, std::vector<TypePtr>> gathered;
  for (const auto& ctx : contexts)
    for (const auto& [var, ty] : ctx) gathered[var].push_back(ty);
  Context out;
  for (auto& [var, tys] : gathered)
    out[var] = tys.size() == 1 ? tys[0] : Type::inter(std::move(tys));
  return out;
}

Context ctx_disjoint_union(const Context& g, const Context& d) {
  std::vector<std::string> overlap;
  for (const auto& [var, ty] : d)
    if (g.count(var)) overlap.push_back(var);
  if (!overlap.empty()) {
    std::string msg = "contexts not disjoint on:";
    for (const auto& v : overlap) msg += " " + v;
    throw TypeError(msg);
  }
  Context out = g;
  out.insert(d.begin(), d.end());
  return out;
}

bool ctx_equal(const Context& a, const Context& b) {
  if (a.size() != b.size()) return false;
  auto it = b.begin();
  for (const auto& [var, ty] : a) {
    if (it->first != var || !type_equal(it->second, ty)) return false;
    ++it;
  }
  return true;
}

std::string to_string(const Context& ctx) {
  std::string s;
  bool first = true;
  for (const auto& [var, ty] : ctx) {
    if (!first) s += ", ";
    first = false;
    s += var + ": " + to_string(ty);
  }
  return s;
}

}  // namespace sti
