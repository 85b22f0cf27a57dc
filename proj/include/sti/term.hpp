#pragma once

#include <cstdint>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

// Pure lambda calculus: syntax, parsing, alpha-equivalence, capture-free
// substitution, beta-reduction, redex enumeration, reduction strategies and
// an exhaustive reduction-graph oracle.
//
// Terms are immutable and shared; every function is pure and thread-safe.

namespace sti {

class Term;
using TermPtr = std::shared_ptr<const Term>;

class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& what, std::size_t position)
      : std::runtime_error(what), position_(position) {}
  std::size_t position() const { return position_; }

private:
  std::size_t position_;
};

class TermError : public std::runtime_error {
public:
  explicit TermError(const std::string& what) : std::runtime_error(what) {}
};

class FuelExhausted : public std::runtime_error {
public:
  explicit FuelExhausted(const std::string& what) : std::runtime_error(what) {}
};

class Term {
public:
  enum class Kind { Var, Abs, App };

  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }    // Var
  const std::string& binder() const { return name_; }  // Abs
  const TermPtr& body() const { return sub_[0]; }      // Abs
  const TermPtr& fn() const { return sub_[0]; }        // App
  const TermPtr& arg() const { return sub_[1]; }       // App

  static TermPtr var(std::string name);
  static TermPtr abs(std::string binder, TermPtr body);
  static TermPtr app(TermPtr fn, TermPtr arg);

private:
  Term(Kind k, std::string name, TermPtr a, TermPtr b)
      : kind_(k), name_(std::move(name)), sub_{std::move(a), std::move(b)} {}

  Kind kind_;
  std::string name_;
  TermPtr sub_[2];
};

// Path from the root to a subterm; each step descends into an abstraction
// body, an application function or an application argument.
enum class Step { Body, Fun, Arg };
using RedexPath = std::vector<Step>;

std::string to_string(const RedexPath& p);

std::set<std::string> free_vars(const TermPtr& t);
// Every identifier occurring in the term, free or bound. Fresh-name supplies
// should avoid all of them.
std::set<std::string> all_names(const TermPtr& t);

bool alpha_equal(const TermPtr& a, const TermPtr& b);
// Canonical de-Bruijn-style rendering; equal strings iff alpha-equivalent.
std::string alpha_key(const TermPtr& t);

// |x| = 1, |\x.M| = |M| + 1, |M N| = |M| + |N| + 1.
std::int64_t term_size(const TermPtr& t);

// Deterministic counter-suffixed fresh names derived from the original.
std::string fresh_name(const std::string& base, const std::set<std::string>& avoid);

// Capture-free substitution of n for the free occurrences of x in m.
TermPtr substitute(const TermPtr& m, const std::string& x, const TermPtr& n);

// Replace every free occurrence of each target by `fresh` (capture-free).
// No precondition; absent targets are a no-op.
TermPtr rename_frees(const TermPtr& m, const std::set<std::string>& targets,
                     const std::string& fresh);

// As rename_frees, but with the instance-relation preconditions: targets must
// all be free in m and `fresh` must not already be free in m.
TermPtr rename_instance(const TermPtr& m, const std::set<std::string>& targets,
                        const std::string& fresh);

// True iff `instance` can be obtained from `general` by applying a function
// from free variables to variable names (bound structure ignored, alpha-wise).
bool is_renaming_instance(const TermPtr& general, const TermPtr& instance);

// All beta-redex positions in leftmost-outermost (preorder) order.
std::vector<RedexPath> redexes(const TermPtr& t);

TermPtr subterm_at(const TermPtr& t, const RedexPath& p);

// Contract the redex at p; throws TermError if p is not a redex position.
TermPtr reduce_at(const TermPtr& t, const RedexPath& p);

enum class Strategy { LeftmostOutermost, RightmostInnermost };

// The redex chosen by a strategy, or nullopt-style empty vector handling is
// avoided: returns false when t is in normal form.
bool pick_redex(const TermPtr& t, Strategy s, RedexPath& out);

// The full reduction sequence from t to normal form (t first, normal form
// last). Throws FuelExhausted after `fuel` steps.
std::vector<TermPtr> normalize(const TermPtr& t, Strategy s, std::int64_t fuel);

// Exhaustive statistics of the reduction graph over alpha-canonical terms.
struct ReductionGraphInfo {
  std::int64_t longest_path = 0;         // maximum number of beta steps
  std::int64_t states = 0;               // distinct terms up to alpha
  std::int64_t max_normal_form_size = 0; // largest reachable normal form
};

// Longest-path DP over the memoized reduction DAG. Throws FuelExhausted if
// more than `fuel` distinct states are visited or a cycle is detected
// (a cycle means the term diverges).
ReductionGraphInfo explore_reduction_graph(const TermPtr& t, std::int64_t fuel);

std::int64_t max_reduction_length(const TermPtr& t, std::int64_t fuel);

// Grammar: term ::= lam | app; lam ::= ("\" | "λ") ident+ "." term;
// app ::= atom+ (left-associative); atom ::= ident | "(" term ")";
// identifiers [a-zA-Z][a-zA-Z0-9_']*.
TermPtr parse_term(std::string_view text);

std::string to_string(const TermPtr& t);

inline constexpr std::int64_t kDefaultFuel = 10000;

}  // namespace sti
