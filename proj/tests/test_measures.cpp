#include "doctest.h"

#include "example_fixture.hpp"
#include "sti/measures.hpp"

using namespace sti;
using fixture::ty_a;
using fixture::ty_A;

namespace {

// Independent node counter for cross-checking proof_size.
std::int64_t count_nodes(const DerivPtr& d) {
  std::int64_t n = 1;
  for (const auto& p : d->premises()) n += count_nodes(p);
  return n;
}

}  // namespace

TEST_CASE("proof_size") {
  CHECK(proof_size(ax("x", ty_a())) == 1);
  CHECK(proof_size(arrow_intro(ax("x", ty_a()), "x")) == 2);

  // The example derivation, recounted mechanically: the left spine has 5
  // nodes (Ax, Ax, ->E, m, ->I), each Sigma_i has 4, plus (/\2) and the root.
  DerivPtr pi0 = fixture::example_pi0();
  CHECK(count_nodes(pi0) == 15);
  CHECK(proof_size(pi0) == 15);
  CHECK(proof_size(fixture::example_pi1()) == 9);
  CHECK(proof_size(fixture::example_pi2()) == 4);
}

TEST_CASE("rank") {
  CHECK(rank(arrow_intro(ax("x", ty_a()), "x")) == 1);  // no (m), floored at 1
  CHECK(rank(fixture::example_pi0()) == 2);             // merges x1, x2, both free

  // A mux merging three variables of which only two are free contributes 2.
  DerivPtr base = arrow_elim(ax("x1", ty_A()), ax("x2", ty_a()));
  DerivPtr padded = weaken(base, "x3", ty_a());
  DerivPtr m = mux(padded, {"x1", "x2", "x3"}, "x");
  CHECK(rank(m) == 2);
}

TEST_CASE("degree") {
  CHECK(degree(arrow_intro(ax("x", ty_a()), "x")) == 0);
  CHECK(degree(fixture::example_pi0()) == 1);  // one (/\2), no nesting

  // Nesting: an (/\2) whose premises each contain an (/\2).
  auto inner = [] {
    return and_n({ax("z", ty_a()), ax("z", ty_a())});
  };
  DerivPtr nested = and_n({inner(), inner()});
  CHECK(degree(nested) == 2);
}

TEST_CASE("weight on the example") {
  DerivPtr id = arrow_intro(ax("x", ty_a()), "x");
  for (std::int64_t r = 1; r <= 5; ++r) CHECK(weight(id, r) == 2);

  DerivPtr pi0 = fixture::example_pi0();
  CHECK(weight(pi0, 2) == 13);
  CHECK(weight(pi0, 1) == 9);
  CHECK(weight(pi0, 1) == term_size(pi0->conclusion().subject));

  CHECK(weight(fixture::example_pi1(), 2) == 7);
  CHECK(weight(fixture::example_pi1(), 1) == 6);
  CHECK(weight(fixture::example_pi2(), 2) == 3);
  CHECK(weight(fixture::example_pi2(), 1) == 3);
}

TEST_CASE("measure relations on the example derivations") {
  for (const DerivPtr& d :
       {fixture::example_pi0(), fixture::example_pi1(), fixture::example_pi2()}) {
    std::int64_t rk = rank(d);
    std::int64_t msize = term_size(d->conclusion().subject);
    std::int64_t psize = proof_size(d);
    CHECK(rk <= msize);
    CHECK(msize <= psize);
    CHECK(weight(d, 1) == msize);
    for (std::int64_t r = 1; r <= 8; ++r) {
      CHECK(weight(d, r) <= checked_pow(r, degree(d)) * weight(d, 1));
      CHECK(weight(d, r + 1) >= weight(d, r));  // monotone in r
    }
  }
}

TEST_CASE("weaken and mux leave the weight unchanged") {
  DerivPtr base = arrow_elim(ax("x1", ty_A()), ax("x2", ty_a()));
  DerivPtr w = weaken(base, "pad", ty_a());
  DerivPtr m = mux(w, {"x1", "x2"}, "x");
  for (std::int64_t r = 1; r <= 6; ++r) {
    CHECK(weight(w, r) == weight(base, r));
    CHECK(weight(m, r) == weight(base, r));
  }
}

TEST_CASE("and_n at r=1 stays at the max premise weight") {
  DerivPtr a = and_n({fixture::sigma(ty_A()), fixture::sigma(ty_a())});
  std::int64_t m = std::max(weight(fixture::sigma(ty_A()), 1), weight(fixture::sigma(ty_a()), 1));
  CHECK(weight(a, 1) == m);
}

TEST_CASE("checked_pow saturates") {
  CHECK(checked_pow(9, 5) == 59049);
  CHECK(checked_pow(2, 1) == 2);
  CHECK(checked_pow(10, 0) == 1);
  CHECK(checked_pow(1 << 20, 4) == std::numeric_limits<std::int64_t>::max());
}

TEST_CASE("measure_report JSON shape") {
  MeasureReport m = measure_report(fixture::example_pi0(), {1, 2});
  nlohmann::json j = measure_report_to_json(m);
  CHECK(j["proof_size"] == 15);
  CHECK(j["subject_size"] == 9);
  CHECK(j["rank"] == 2);
  CHECK(j["degree"] == 1);
  CHECK(j["weights"]["1"] == 9);
  CHECK(j["weights"]["2"] == 13);
}
