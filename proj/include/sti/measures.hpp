#pragma once

#include "sti/derivation.hpp"

#include "json.hpp"

// Proof measures: size |P|, subject size |M|, rank R(P), degree D(P) and the
// parametric weight W(P, r). All exact integers.

namespace sti {

// 1 at axioms; 1 + sum of premise sizes elsewhere.
std::int64_t proof_size(const DerivPtr& d);

// Max over (m) nodes of the number of merged variables free in the premise
// subject, floored at 1.
std::int64_t rank(const DerivPtr& d);

// Maximal number of (/\n) nodes on any root-to-axiom path.
std::int64_t degree(const DerivPtr& d);

// Ax -> 1; (->I) -> premise + 1; (->E) -> sum + 1; (/\n) -> r * max of
// premises; (w)/(m) -> premise unchanged.
std::int64_t weight(const DerivPtr& d, std::int64_t r);

// a^b, saturating at the int64 maximum.
std::int64_t checked_pow(std::int64_t base, std::int64_t exp);

struct MeasureReport {
  std::int64_t proof_size = 0;
  std::int64_t subject_size = 0;
  std::int64_t rank = 0;
  std::int64_t degree = 0;
  std::map<std::int64_t, std::int64_t> weights;  // r -> W(P, r)
};

MeasureReport measure_report(const DerivPtr& d, const std::vector<std::int64_t>& rs);

nlohmann::json measure_report_to_json(const MeasureReport& m);

}  // namespace sti
