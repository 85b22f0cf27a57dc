#pragma once

#include <optional>
#include <variant>

#include "sti/term.hpp"
#include "sti/types.hpp"

#include "json.hpp"

// Derivation trees for the type assignment rules, a local rule checker,
// intersection-tree decomposition and (de)serialization.
//
// Rules: (Ax) x: A |- x: A with A linear; (w) adds a fresh linear binding;
// (->I) abstracts a context variable; (->E) applies under disjoint contexts;
// (/\n) types the same subject n >= 2 times and intersects the contexts;
// (m) merges n >= 2 context variables into one of intersection type while
// renaming the subject accordingly.
//
// Derivations are immutable; conclusions are stored at every node and the
// checker verifies their consistency.

namespace sti {

enum class Rule { Ax, Weaken, ArrowIntro, ArrowElim, AndN, Mux };

const char* rule_name(Rule r);

struct Sequent {
  Context ctx;
  TermPtr subject;
  TypePtr type;
};

struct WeakenData {
  std::string var;
  TypePtr type;  // linear
};

struct ArrowIntroData {
  std::string binder;
};

struct MuxData {
  std::vector<std::string> merged;  // n >= 2, order fixes the intersection order
  std::string fresh;
};

class RuleError : public std::runtime_error {
public:
  explicit RuleError(const std::string& what) : std::runtime_error(what) {}
};

class Derivation;
using DerivPtr = std::shared_ptr<const Derivation>;

class Derivation {
public:
  using Data = std::variant<std::monostate, WeakenData, ArrowIntroData, MuxData>;

  Rule rule() const { return rule_; }
  const Sequent& conclusion() const { return conclusion_; }
  const std::vector<DerivPtr>& premises() const { return premises_; }
  const DerivPtr& premise() const { return premises_[0]; }

  const WeakenData& weaken_data() const { return std::get<WeakenData>(data_); }
  const ArrowIntroData& intro_data() const { return std::get<ArrowIntroData>(data_); }
  const MuxData& mux_data() const { return std::get<MuxData>(data_); }

  // Raw node with a caller-supplied conclusion; check_derivation decides
  // whether it is a real derivation. Structural arity is still enforced.
  static DerivPtr make_raw(Rule rule, Sequent conclusion, std::vector<DerivPtr> premises,
                           Data data);

private:
  Derivation(Rule r, Sequent c, std::vector<DerivPtr> p, Data d)
      : rule_(r), conclusion_(std::move(c)), premises_(std::move(p)), data_(std::move(d)) {}

  Rule rule_;
  Sequent conclusion_;
  std::vector<DerivPtr> premises_;
  Data data_;
};

// Smart constructors: compute the conclusion from the premises and rule data,
// throwing RuleError when a side condition fails. Derivations built this way
// pass check_derivation by construction.
DerivPtr ax(const std::string& var, const TypePtr& linear_type);
DerivPtr weaken(DerivPtr premise, const std::string& var, const TypePtr& linear_type);
DerivPtr arrow_intro(DerivPtr premise, const std::string& binder);
DerivPtr arrow_elim(DerivPtr fun, DerivPtr arg);
DerivPtr and_n(std::vector<DerivPtr> premises);
DerivPtr mux(DerivPtr premise, std::vector<std::string> merged, const std::string& fresh);

struct Violation {
  std::vector<int> path;  // premise indices from the root
  std::string message;
};

struct CheckReport {
  bool ok = true;
  std::vector<Violation> violations;
  std::string to_string() const;
};

// Validates every node locally against its stored conclusion. Collects all
// violations with node paths; never aborts on the first failure.
CheckReport check_derivation(const DerivPtr& d);

bool is_constructive(Rule r);

// One peeled (w)/(m) step of a delta sequence, outermost first.
struct DeltaStep {
  Rule rule;  // Weaken or Mux
  std::variant<WeakenData, MuxData> data;
};

// The nested structure of trailing delta sequences and (/\n) nodes at the
// root: each level carries its delta steps (outermost first) and either
// branches per (/\n) premise or, when empty, marks a leaf slot.
struct IntersectionTreeSpine {
  std::vector<DeltaStep> delta;
  std::vector<IntersectionTreeSpine> branches;
};

// The maximal root structure of (w)/(m) sequences and (/\n) nodes. Leaves are
// the subderivations ending in a constructive rule (Ax, ->I, ->E), in
// left-to-right order of the spine's leaf slots.
struct IntersectionTreeView {
  bool is_empty = true;  // true iff no (/\n) node occurs on the root spine
  IntersectionTreeSpine spine;
  std::vector<DerivPtr> leaves;
};

IntersectionTreeView decompose_intersection_tree(const DerivPtr& d);

// Splits d into its trailing delta sequence (outermost first) and the first
// non-(w)/(m) core underneath.
std::pair<std::vector<DeltaStep>, DerivPtr> peel_delta(const DerivPtr& d);

// Re-applies delta steps (given outermost first) on top of core.
DerivPtr replay_delta(const std::vector<DeltaStep>& steps, DerivPtr core);

// Every identifier mentioned anywhere: contexts, subjects (free and bound)
// and rule data, across all nodes.
std::set<std::string> all_names(const DerivPtr& d);

// Equality up to alpha-renaming of subjects and of internal variables
// introduced below the root (mux transients, binders), with types compared
// in canonical form. Root conclusion contexts must agree by name.
bool derivation_equal(const DerivPtr& a, const DerivPtr& b);

nlohmann::json derivation_to_json(const DerivPtr& d);
nlohmann::json type_to_json(const TypePtr& t);
TypePtr type_from_json(const nlohmann::json& j);

class SchemaError : public std::runtime_error {
public:
  explicit SchemaError(const std::string& what) : std::runtime_error(what) {}
};

// Rejects schema violations and derivations failing check_derivation.
DerivPtr derivation_from_json(const nlohmann::json& j);

// Indented inference-tree rendering, conclusion first, premises below.
std::string pretty_print(const DerivPtr& d);

// Re-parses pretty_print output (text round trip).
DerivPtr parse_derivation_text(std::string_view text);

}  // namespace sti
