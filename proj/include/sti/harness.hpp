#pragma once

#include "sti/inference.hpp"
#include "sti/transform.hpp"

// Corpus generation and end-to-end verification of the quantitative claims:
// the measure relations, strict weight decrease along every reduction edge,
// and the normalization bound n < |M|^(d+1).

namespace sti {

struct Verdict {
  std::string name;
  bool pass = false;
  std::string detail;
};

bool all_pass(const std::vector<Verdict>& vs);

struct BoundReport {
  TermPtr term;
  std::int64_t subject_size = 0;
  std::int64_t degree = 0;
  std::int64_t rank = 0;
  std::int64_t theorem_bound = 0;      // |M|^(d+1)
  std::int64_t longest_reduction = 0;  // oracle longest path
  std::int64_t max_normal_form_size = 0;
  std::int64_t weight_ceiling = 0;     // W(P, R(P))
  std::vector<Verdict> verdicts;
};

nlohmann::json bound_report_to_json(const BoundReport& r);

// Oracle longest reduction and reachable normal-form sizes against the
// theorem bound, plus the tighter weight-ceiling chain from its proof.
BoundReport verify_bounds(const TermPtr& m, const DerivPtr& pi, std::int64_t fuel);

// Measure relations: rank <= |M| <= |P|; W(P,r) <= r^D * W(P,1) over
// r_min..r_max; W(P,1) = |M| exactly.
std::vector<Verdict> check_measure_relations(const DerivPtr& pi, std::int64_t r_min, std::int64_t r_max);

struct MonotonicityReport {
  std::int64_t edges = 0;
  std::int64_t states = 0;
  std::vector<Verdict> verdicts;
};

// Full reduction-graph transport: every redex at every reachable derivation,
// transported via reduce_subject; asserts strict weight decrease on each edge
// for r in {rank(source) .. rank(source)+3} and that rank never increases.
MonotonicityReport check_weight_monotonicity(const DerivPtr& pi, std::int64_t fuel);

// Deterministic pseudo-random closed simply-typed terms (type-directed
// synthesis), each of term_size <= max_size, distinct up to alpha.
std::vector<TermPtr> gen_sn_terms(std::uint64_t seed, std::int64_t count,
                                  std::int64_t max_size);

struct RemarkRow {
  std::int64_t n = 0;
  std::int64_t computed_size = 0;    // term_size of the built term
  std::int64_t claimed_size = 0;       // claimed 2n+6, informational
  std::int64_t oracle_longest = 0;
  std::int64_t claimed_reductions = 0;  // claimed 2n+1, informational
  std::int64_t degree = 0;            // inferred minimal
  std::int64_t rank = 0;
  std::int64_t theorem_bound = 0;     // computed_size^(degree+1)
  std::int64_t claimed_bound = 0;       // claimed 2n+6, informational
  bool theorem_pass = false;
};

// (\x y. y x x ... x)(I I) with n occurrences of x, I = \w. w.
TermPtr remark_term(std::int64_t n);

// Rows for n = 1..n_max; computed values are authoritative, the claimed
// figures are reported side by side without being asserted.
std::vector<RemarkRow> remark_family_report(std::int64_t n_max, const SearchBounds& b,
                                            std::int64_t fuel);

nlohmann::json remark_rows_to_json(const std::vector<RemarkRow>& rows);
std::string remark_rows_to_text(const std::vector<RemarkRow>& rows);

}  // namespace sti
