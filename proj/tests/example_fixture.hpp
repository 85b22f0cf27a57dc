#pragma once

// The worked example shared across suites: the reduction
// (\x. x x)((\y. y) z)  ->  (\x. x x) z  ->  z z
// together with its three derivations, built rule by rule.

#include "sti/derivation.hpp"

namespace fixture {

using namespace sti;

inline TypePtr ty_a() { return Type::tvar("a"); }
inline TypePtr ty_A() { return Type::arrow(ty_a(), ty_a()); }  // A = a -> a
inline TypePtr ty_Aa() { return Type::inter({ty_A(), ty_a()}); }

// Sigma_i |> z: T |- (\y. y) z : T for T in {A, a}.
inline DerivPtr sigma(const TypePtr& t) {
  return arrow_elim(arrow_intro(ax("y", t), "y"), ax("z", t));
}

// |- \x. x x : (A /\ a) -> a
inline DerivPtr self_app_fn() {
  DerivPtr body = arrow_elim(ax("x1", ty_A()), ax("x2", ty_a()));
  return arrow_intro(mux(body, {"x1", "x2"}, "x"), "x");
}

// z: A /\ a |- (\x. x x)((\y. y) z) : a
inline DerivPtr example_pi0() {
  return arrow_elim(self_app_fn(), and_n({sigma(ty_A()), sigma(ty_a())}));
}

// z: A /\ a |- (\x. x x) z : a
inline DerivPtr example_pi1() {
  return arrow_elim(self_app_fn(), and_n({ax("z", ty_A()), ax("z", ty_a())}));
}

// z: A /\ a |- z z : a
inline DerivPtr example_pi2() {
  return mux(arrow_elim(ax("z1", ty_A()), ax("z2", ty_a())), {"z1", "z2"}, "z");
}

inline TermPtr example_term() { return parse_term("(\\x. x x) ((\\y. y) z)"); }

}  // namespace fixture
