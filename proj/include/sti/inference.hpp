#pragma once

#include <optional>

#include "sti/derivation.hpp"

// Bounded derivation search. Occurrences of a variable are split into
// distinct linear occurrences and re-merged by (m); applications type the
// argument k times under (/\k) when the function demands a k-ary
// intersection domain; otherwise the argument arity is a backtracking
// choice. Iterative deepening on the intersection-nesting budget returns
// depth-minimal derivations first; among those the smallest proof wins.
//
// The search is complete only within its bounds: a failed search never
// claims untypability.

namespace sti {

struct SearchBounds {
  std::int64_t max_type_elements = 8;   // cap on l(s) per context binding
  std::int64_t max_degree = 4;          // cap on (/\n) nesting
  std::int64_t max_proof_size = 300;
  std::int64_t time_fuel = 1'000'000;   // search nodes
};

struct SearchStats {
  std::int64_t nodes_expanded = 0;
  std::int64_t attempts = 0;
  std::int64_t memo_hits = 0;
};

struct InferResult {
  DerivPtr derivation;
  std::int64_t degree = 0;  // verified minimal within the same bounds
  SearchStats stats;
};

// Synthesizes a derivation of (free-variable context) |- m : s, minimal
// first by degree, then by proof size, then by the canonical conclusion
// type. Returns nullopt when the bounds are exhausted.
std::optional<InferResult> infer(const TermPtr& m, const SearchBounds& b);

// As infer, but the free variables of m must receive exactly the types given
// in `fixed`; variables of `fixed` not free in m are weakened in.
std::optional<InferResult> infer_with_context(const TermPtr& m, const Context& fixed,
                                              const SearchBounds& b);

// As infer; the returned degree is the verified minimum: every smaller
// nesting budget was searched exhaustively and failed.
std::optional<InferResult> infer_minimal_depth(const TermPtr& m, const SearchBounds& b);

}  // namespace sti
