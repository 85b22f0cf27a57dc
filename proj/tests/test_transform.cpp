#include "doctest.h"

#include <random>

#include "example_fixture.hpp"
#include "sti/transform.hpp"

using namespace sti;
using fixture::ty_a;
using fixture::ty_A;
using fixture::ty_Aa;

namespace {

// z: s |- z : s for an arbitrary s: axioms glued by (/\n) along the type.
DerivPtr deriv_of_var(const std::string& z, const TypePtr& s) {
  if (is_linear(s)) return ax(z, s);
  std::vector<DerivPtr> premises;
  for (const auto& c : s->children()) premises.push_back(deriv_of_var(z, c));
  return and_n(std::move(premises));
}

}  // namespace

TEST_CASE("subst_derivation: axiom base case") {
  DerivPtr sigma = ax("z", ty_a());
  DerivPtr pi = ax("x", ty_a());
  DerivPtr s = subst_derivation(sigma, pi, "x");
  CHECK(check_derivation(s).ok);
  CHECK(derivation_equal(s, ax("z", ty_a())));
}

TEST_CASE("subst_derivation: weakened variable rebuilds the argument context") {
  // pi: y: a, x: A |- y : a with x weakened in; sigma with a non-linear context.
  DerivPtr pi = weaken(ax("y", ty_a()), "x", ty_A());
  DerivPtr sigma = fixture::sigma(ty_A());  // z: A |- (\y. y) z : A
  // rename sigma's context variable to avoid clashing with pi's y
  DerivPtr s = subst_derivation(sigma, pi, "x");
  CHECK(check_derivation(s).ok);
  CHECK(alpha_equal(s->conclusion().subject, Term::var("y")));
  CHECK(ctx_equal(s->conclusion().ctx, Context{{"y", ty_a()}, {"z", ty_A()}}));

  // Intersection-typed binding: rebuilt via (w) elements plus (m).
  DerivPtr pi2 = weaken(ax("y", ty_a()), "x", ty_a());
  DerivPtr sigma2 = and_n({ax("q", ty_A()), ax("q", ty_a())});  // q: A /\ a |- q : A /\ a
  DerivPtr pi3 = weaken(ax("y2", ty_a()), "x", ty_a());
  // need type match: sigma2 : A /\ a, so weaken x at that type via a raw path
  DerivPtr base = ax("y2", ty_a());
  std::set<std::string> avoid = {"y2", "x", "q"};
  DerivPtr pi4 = weaken_in_type(base, "x", ty_Aa(), avoid);
  CHECK(check_derivation(pi4).ok);
  DerivPtr s2 = subst_derivation(sigma2, pi4, "x");
  CHECK(check_derivation(s2).ok);
  CHECK(ctx_equal(s2->conclusion().ctx, Context{{"y2", ty_a()}, {"q", ty_Aa()}}));
  CHECK(alpha_equal(s2->conclusion().subject, Term::var("y2")));
}

TEST_CASE("weaken_in_type reconstructs nested intersections") {
  std::set<std::string> avoid;
  TypePtr nested = parse_type("((a /\\ (a -> a)) /\\ a)");
  DerivPtr d = weaken_in_type(ax("u", ty_a()), "v", nested, avoid);
  CHECK(check_derivation(d).ok);
  CHECK(type_equal(d->conclusion().ctx.at("v"), nested));
  CHECK(alpha_equal(d->conclusion().subject, Term::var("u")));
  // weight untouched by the reconstruction
  for (std::int64_t r = 1; r <= 4; ++r) CHECK(weight(d, r) == 1);
}

TEST_CASE("reduce_subject replays the example") {
  DerivPtr pi0 = fixture::example_pi0();

  DerivedStep step1 = reduce_subject(pi0, {Step::Arg});
  CHECK(step1.virtual_copies == 2);  // both virtual copies of the redex contract
  CHECK(check_derivation(step1.after).ok);
  CHECK(derivation_equal(step1.after, fixture::example_pi1()));

  DerivedStep step2 = reduce_subject(step1.after, {});
  CHECK(step2.virtual_copies == 1);
  CHECK(check_derivation(step2.after).ok);
  CHECK(derivation_equal(step2.after, fixture::example_pi2()));
}

TEST_CASE("reduce_subject at the root of the example") {
  // Contracting the outer redex first also preserves the conclusion.
  DerivPtr pi0 = fixture::example_pi0();
  DerivedStep step = reduce_subject(pi0, {});
  CHECK(check_derivation(step.after).ok);
  CHECK(ctx_equal(step.after->conclusion().ctx, pi0->conclusion().ctx));
  CHECK(type_equal(step.after->conclusion().type, pi0->conclusion().type));
  CHECK(alpha_equal(step.after->conclusion().subject,
                    reduce_at(pi0->conclusion().subject, {})));
}

TEST_CASE("commute_delta") {
  // Empty delta: conclusion and shape preserved.
  DerivPtr leaf = fixture::sigma(ty_a());
  DerivPtr c = commute_delta(leaf);
  CHECK(derivation_equal(leaf, c));

  // One weakening in the delta.
  DerivPtr fn = weaken(arrow_intro(ax("y", ty_a()), "y"), "pad", ty_A());
  DerivPtr el = arrow_elim(fn, ax("z", ty_a()));
  DerivPtr commuted = commute_delta(el);
  CHECK(check_derivation(commuted).ok);
  CHECK(commuted->rule() == Rule::Weaken);  // the (w) now sits below the (->E)
  CHECK(ctx_equal(commuted->conclusion().ctx, el->conclusion().ctx));
  CHECK(alpha_equal(commuted->conclusion().subject, el->conclusion().subject));
  // weight preserved: (w)/(m) carry no weight
  for (std::int64_t r = 1; r <= 4; ++r) CHECK(weight(commuted, r) == weight(el, r));

  // A mux in the delta.
  DerivPtr body = arrow_elim(ax("u1", Type::arrow(ty_a(), ty_a())), ax("u2", ty_a()));
  DerivPtr lam = arrow_intro(weaken(body, "b", ty_a()), "b");
  DerivPtr muxed = mux(lam, {"u1", "u2"}, "u");
  DerivPtr app = arrow_elim(muxed, ax("w", ty_a()));
  DerivPtr c2 = commute_delta(app);
  CHECK(check_derivation(c2).ok);
  CHECK(ctx_equal(c2->conclusion().ctx, app->conclusion().ctx));
  for (std::int64_t r = 1; r <= 4; ++r) CHECK(weight(c2, r) == weight(app, r));

  CHECK_THROWS_AS(commute_delta(ax("x", ty_a())), RuleError);
}

TEST_CASE("delta weakening that reuses the binder name commutes through") {
  // y: A |- \y. y : a -> a, the outer y added by (w) after the binder was
  // abstracted away; contracting (\y. y) z must keep both bindings apart.
  DerivPtr fn = weaken(arrow_intro(ax("y", ty_a()), "y"), "y", ty_A());
  DerivPtr el = arrow_elim(fn, ax("z", ty_a()));
  CHECK(check_derivation(el).ok);
  DerivedStep step = reduce_subject(el, {});
  CHECK(check_derivation(step.after).ok);
  CHECK(ctx_equal(step.after->conclusion().ctx, Context{{"y", ty_A()}, {"z", ty_a()}}));
  CHECK(alpha_equal(step.after->conclusion().subject, Term::var("z")));
}

TEST_CASE("binder clash with the argument context is renamed away") {
  // (\y. y) applied to an argument whose context binds y.
  DerivPtr el = arrow_elim(arrow_intro(ax("y", ty_a()), "y"), ax("y", ty_a()));
  CHECK(check_derivation(el).ok);
  DerivedStep step = reduce_subject(el, {});
  CHECK(check_derivation(step.after).ok);
  CHECK(alpha_equal(step.after->conclusion().subject, Term::var("y")));
}

TEST_CASE("weighted substitution bound on hand-built pairs") {
  // From the example's inner redex: body of \x. x x against Sigma.
  DerivPtr body = mux(arrow_elim(ax("x1", ty_A()), ax("x2", ty_a())), {"x1", "x2"}, "x");
  DerivPtr sigma = and_n({ax("z", ty_A()), ax("z", ty_a())});
  DerivPtr s = subst_derivation(sigma, body, "x");
  CHECK(check_derivation(s).ok);
  std::int64_t r0 = std::max(rank(body), rank(sigma));
  for (std::int64_t r = r0; r <= r0 + 2; ++r)
    CHECK(weight(s, r) <= weight(body, r) + weight(sigma, r));
  CHECK(derivation_equal(s, fixture::example_pi2()));
}

TEST_CASE("normalize_with_derivation on the example") {
  DerivPtr pi0 = fixture::example_pi0();
  ReductionTrace t = normalize_with_derivation(pi0, Strategy::RightmostInnermost, 100);
  REQUIRE(t.entries.size() == 3);  // two steps, then the normal form
  CHECK(t.initial_rank == 2);
  CHECK(t.entries[0].measures.weights.at(2) == 13);
  CHECK(t.entries[1].measures.weights.at(2) == 7);
  CHECK(t.entries[2].measures.weights.at(2) == 3);
  CHECK(t.entries[0].measures.weights.at(1) == 9);
  CHECK(t.entries[1].measures.weights.at(1) == 6);
  CHECK(t.entries[2].measures.weights.at(1) == 3);
  CHECK(alpha_equal(t.entries.back().term, parse_term("z z")));
  CHECK(!t.entries.back().redex.has_value());

  // Axiom: zero steps.
  ReductionTrace ax_trace =
      normalize_with_derivation(ax("x", ty_a()), Strategy::LeftmostOutermost, 10);
  CHECK(ax_trace.entries.size() == 1);

  // Step count strictly below the initial weight at the rank.
  std::int64_t ceiling = weight(pi0, rank(pi0));
  CHECK(static_cast<std::int64_t>(t.entries.size()) - 1 < ceiling);
}

TEST_CASE("both strategies transport the example to the same normal form") {
  DerivPtr pi0 = fixture::example_pi0();
  for (Strategy s : {Strategy::LeftmostOutermost, Strategy::RightmostInnermost}) {
    ReductionTrace t = normalize_with_derivation(pi0, s, 100);
    CHECK(alpha_equal(t.entries.back().term, parse_term("z z")));
    CHECK(check_derivation(t.final_derivation).ok);
    CHECK(ctx_equal(t.final_derivation->conclusion().ctx, pi0->conclusion().ctx));
    CHECK(type_equal(t.final_derivation->conclusion().type, pi0->conclusion().type));
  }
}

TEST_CASE("random delta commutations preserve conclusion and weights") {
  std::mt19937_64 rng(31);
  auto pick = [&rng](std::uint64_t n) { return rng() % n; };
  int done = 0;
  for (int i = 0; i < 400 && done < 100; ++i) {
    // Assemble (->E) whose function premise is (->I) under a random delta of
    // weakenings and merges on the function-side context.
    std::vector<TypePtr> pool = {fixture::ty_a(), fixture::ty_A()};
    DerivPtr body = ax("u1", pool[pick(2)]);
    int pads = 1 + static_cast<int>(pick(3));
    std::vector<std::string> padded;
    for (int k = 0; k < pads; ++k) {
      std::string v = "p" + std::to_string(k);
      body = weaken(body, v, pool[pick(2)]);
      padded.push_back(v);
    }
    DerivPtr fn = arrow_intro(body, "u1");
    // random delta below the eventual (->E): weaken then maybe merge
    fn = weaken(fn, "q0", pool[pick(2)]);
    fn = weaken(fn, "q1", pool[pick(2)]);
    if (pick(2)) {
      std::vector<std::string> merged = {padded[0], "q0"};
      if (pads > 1 && pick(2)) merged.push_back(padded[1]);
      fn = mux(fn, merged, "m0");
    }
    TypePtr dom = fn->conclusion().type->domain();
    DerivPtr el = arrow_elim(fn, deriv_of_var("arg", dom));
    DerivPtr c = commute_delta(el);
    CHECK(check_derivation(c).ok);
    CHECK(ctx_equal(c->conclusion().ctx, el->conclusion().ctx));
    CHECK(alpha_equal(c->conclusion().subject, el->conclusion().subject));
    for (std::int64_t r = 1; r <= 4; ++r) CHECK(weight(c, r) == weight(el, r));
    ++done;
  }
  CHECK(done == 100);
}

TEST_CASE("fuel equal to the weight ceiling always suffices") {
  // The step count is strictly below W(P, R(P)), so that much fuel can
  // never run out on a checked derivation.
  DerivPtr pi0 = fixture::example_pi0();
  std::int64_t ceiling = weight(pi0, rank(pi0));
  for (Strategy s : {Strategy::LeftmostOutermost, Strategy::RightmostInnermost}) {
    ReductionTrace t = normalize_with_derivation(pi0, s, ceiling);
    CHECK(static_cast<std::int64_t>(t.entries.size()) - 1 < ceiling);
  }
}

TEST_CASE("rename_free_var") {
  DerivPtr d = fixture::sigma(ty_a());  // z: a |- (\y. y) z : a
  DerivPtr r = rename_free_var(d, "z", "q");
  CHECK(check_derivation(r).ok);
  CHECK(r->conclusion().ctx.count("q") == 1);
  CHECK(r->conclusion().ctx.count("z") == 0);
  CHECK(alpha_equal(r->conclusion().subject, parse_term("(\\y. y) q")));

  // Renaming to a name used by a binder alpha-renames the binder away.
  DerivPtr r2 = rename_free_var(d, "z", "y");
  CHECK(check_derivation(r2).ok);
  CHECK(alpha_equal(r2->conclusion().subject, parse_term("(\\w. w) y")));
}
