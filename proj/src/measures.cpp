#include "sti/measures.hpp"

#include <algorithm>
#include <limits>

#include "json.hpp"

namespace sti {

std::int64_t proof_size(const DerivPtr& d) {
  std::int64_t n = 1;
  for (const auto& p : d->premises()) n += proof_size(p);
  return n;
}

std::int64_t rank(const DerivPtr& d) {
  std::int64_t r = 1;
  if (d->rule() == Rule::Mux) {
    auto fv = free_vars(d->premise()->conclusion().subject);
    std::int64_t k = 0;
    for (const auto& x : d->mux_data().merged)
      if (fv.count(x)) ++k;
    r = std::max(r, k);
  }
  for (const auto& p : d->premises()) r = std::max(r, rank(p));
  return r;
}

std::int64_t degree(const DerivPtr& d) {
  std::int64_t best = 0;
  for (const auto& p : d->premises()) best = std::max(best, degree(p));
  return best + (d->rule() == Rule::AndN ? 1 : 0);
}

std::int64_t weight(const DerivPtr& d, std::int64_t r) {
  switch (d->rule()) {
    case Rule::Ax:
      return 1;
    case Rule::ArrowIntro:
      return weight(d->premise(), r) + 1;
    case Rule::ArrowElim:
      return weight(d->premises()[0], r) + weight(d->premises()[1], r) + 1;
    case Rule::AndN: {
      std::int64_t m = 0;
      for (const auto& p : d->premises()) m = std::max(m, weight(p, r));
      return r * m;
    }
    case Rule::Weaken:
    case Rule::Mux:
      return weight(d->premise(), r);
  }
  return 0;
}

std::int64_t checked_pow(std::int64_t base, std::int64_t exp) {
  constexpr std::int64_t kMax = std::numeric_limits<std::int64_t>::max();
  std::int64_t acc = 1;
  for (std::int64_t i = 0; i < exp; ++i) {
    if (base != 0 && acc > kMax / base) return kMax;
    acc *= base;
  }
  return acc;
}

MeasureReport measure_report(const DerivPtr& d, const std::vector<std::int64_t>& rs) {
  MeasureReport m;
  m.proof_size = proof_size(d);
  m.subject_size = term_size(d->conclusion().subject);
  m.rank = rank(d);
  m.degree = degree(d);
  for (std::int64_t r : rs) m.weights[r] = weight(d, r);
  return m;
}

nlohmann::json measure_report_to_json(const MeasureReport& m) {
  nlohmann::json weights = nlohmann::json::object();
  for (const auto& [r, w] : m.weights) weights[std::to_string(r)] = w;
  return nlohmann::json{{"proof_size", m.proof_size},
                        {"subject_size", m.subject_size},
                        {"rank", m.rank},
                        {"degree", m.degree},
                        {"weights", std::move(weights)}};
}

}  // namespace sti
