#pragma once

#include <optional>

#include "sti/derivation.hpp"
#include "sti/measures.hpp"

// Derivation transformations: substitution S(Sigma, Pi), delta-sequence
// commutation, derivation-level subject reduction and derivation-tracked
// normalization. All operations are pure; derivations are never mutated.

namespace sti {

// Renames the free variable `from` (context binding and subject occurrences)
// to `to` throughout d. `to` must not occur free or in any context of d;
// binders named `to` are alpha-renamed away as needed.
DerivPtr rename_free_var(const DerivPtr& d, const std::string& from, const std::string& to);

// Renames every (m)-merged transient variable in d to a name outside `avoid`.
// The conclusion is unchanged. Allocated names are added to `avoid`.
DerivPtr freshen_mux_transients(const DerivPtr& d, std::set<std::string>& avoid);

// Introduces var: type into d's context. Linear types use one (w); an
// intersection type is introduced as a (w)-sequence of its linear elements
// followed by (m) steps rebuilding the tree shape bottom-up.
DerivPtr weaken_in_type(DerivPtr d, const std::string& var, const TypePtr& type,
                        std::set<std::string>& avoid);

// Derivation-level substitution: given sigma |> Delta |- N : s
// and pi |> Gamma, x: s |- M : t with disjoint Gamma and Delta and x not in
// Delta, builds a derivation of Gamma, Delta |- M[N/x] : t.
DerivPtr subst_derivation(DerivPtr sigma, DerivPtr pi, const std::string& x);

// Moves the delta sequence sitting between an (->E) node and the (->I) that
// feeds its function premise below the (->E). The conclusion is unchanged.
DerivPtr commute_delta(const DerivPtr& leaf);

struct DerivedStep {
  DerivPtr before;
  RedexPath redex;
  DerivPtr after;
  std::int64_t virtual_copies = 0;  // intersection-tree leaves rewritten
};

// Contracts the redex at p in pi's subject and transports the derivation:
// one term-level step rewrites every virtual copy of the redex.
DerivedStep reduce_subject(const DerivPtr& pi, const RedexPath& p);

struct TraceEntry {
  TermPtr term;
  std::optional<RedexPath> redex;  // empty for the final (normal form) entry
  DerivPtr derivation;             // the checked derivation at this step
  std::int64_t virtual_copies = 0;
  MeasureReport measures;
};

struct ReductionTrace {
  std::vector<TraceEntry> entries;
  DerivPtr final_derivation;
  std::int64_t initial_rank = 1;
};

// Iterates reduce_subject until the subject is normal, recording measures and
// asserting the weight strictly decreases at the rank of the initial
// derivation. Throws FuelExhausted after `fuel` steps.
ReductionTrace normalize_with_derivation(const DerivPtr& pi, Strategy s, std::int64_t fuel);

nlohmann::json trace_to_json(const ReductionTrace& t);

}  // namespace sti
