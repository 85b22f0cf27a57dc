#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

// Intersection type algebra: commutative, non-idempotent, non-associative.
// Linear types A ::= a | s -> A; intersection types s ::= A | s1 /\ ... /\ sn (n >= 2).
// All values are immutable; every function here is pure and thread-safe.

namespace sti {

class Type;
using TypePtr = std::shared_ptr<const Type>;

class TypeError : public std::runtime_error {
public:
  explicit TypeError(const std::string& what) : std::runtime_error(what) {}
};

class Type {
public:
  enum class Kind { Var, Arrow, Inter };

  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }            // Var
  const TypePtr& domain() const { return children_[0]; }       // Arrow
  const TypePtr& codomain() const { return children_[1]; }     // Arrow
  const std::vector<TypePtr>& children() const { return children_; }  // Inter
  std::size_t arity() const { return children_.size(); }       // Inter

  static TypePtr tvar(std::string name);
  // Codomain must be linear ("s -> A").
  static TypePtr arrow(TypePtr domain, TypePtr codomain);
  // Intersection nodes carry n >= 2 children; children may themselves be
  // intersections (non-associativity is a property of the tree shape).
  static TypePtr inter(std::vector<TypePtr> children);

private:
  Type(Kind k, std::string name, std::vector<TypePtr> children)
      : kind_(k), name_(std::move(name)), children_(std::move(children)) {}

  Kind kind_;
  std::string name_;
  std::vector<TypePtr> children_;
};

bool is_linear(const TypePtr& t);

// l(A) = 1, l(s1 /\ ... /\ sn) = sum of l(si).
std::int64_t element_count(const TypePtr& t);

// The linear leaves of a type, left to right through nested intersections.
std::vector<TypePtr> linear_elements(const TypePtr& t);

// Children of every intersection node sorted by a fixed total order on
// canonical forms. Idempotent; the decision procedure for type_equal.
TypePtr canonicalize(const TypePtr& t);

// Structural equality up to permutation of intersection children, nothing else.
bool type_equal(const TypePtr& a, const TypePtr& b);

// Deterministic structural encoding; equal strings iff structurally equal.
// Keys of canonical forms decide type_equal.
std::string type_key(const TypePtr& t);

std::string to_string(const TypePtr& t);

// Grammar: ty ::= prim ("->" ty)?; prim ::= ident | "(" ty (("/\" | "∧") ty)* ")".
// A parenthesized list of n >= 2 components is an n-ary intersection node.
TypePtr parse_type(std::string_view text);

// A context is a finite map from variables to intersection types.
using Context = std::map<std::string, TypePtr>;

// Intersection of n >= 2 contexts. A variable bound in exactly one context
// keeps its type; one bound in k >= 2 of them gets a single flat k-ary
// intersection of those types in argument order.
Context ctx_intersect(const std::vector<Context>& contexts);

// Union of contexts with disjoint domains; throws naming the offenders.
Context ctx_disjoint_union(const Context& g, const Context& d);

bool ctx_equal(const Context& a, const Context& b);
std::string to_string(const Context& ctx);

}  // namespace sti
