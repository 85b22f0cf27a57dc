#include "doctest.h"

#include "json.hpp"

#include "example_fixture.hpp"

using namespace sti;
using fixture::ty_a;
using fixture::ty_A;
using fixture::ty_Aa;

TEST_CASE("the example derivations pass the checker") {
  for (const DerivPtr& d :
       {fixture::example_pi0(), fixture::example_pi1(), fixture::example_pi2()}) {
    CheckReport r = check_derivation(d);
    CHECK_MESSAGE(r.ok, r.to_string());
  }
  CHECK(alpha_equal(fixture::example_pi0()->conclusion().subject, fixture::example_term()));
  CHECK(type_equal(fixture::example_pi0()->conclusion().type, ty_a()));
  CHECK(ctx_equal(fixture::example_pi0()->conclusion().ctx, {{"z", ty_Aa()}}));
}

TEST_CASE("checker: (->E) context overlap is reported") {
  DerivPtr f = arrow_intro(ax("y", ty_a()), "y");
  DerivPtr a = ax("z", ty_a());
  // Raw node gluing two premises that share z.
  DerivPtr bad = Derivation::make_raw(
      Rule::ArrowElim,
      Sequent{{{"z", ty_a()}}, Term::app(Term::var("z"), Term::var("z")), ty_a()},
      {ax("z", Type::arrow(ty_a(), ty_a())), ax("z", ty_a())}, std::monostate{});
  CheckReport r = check_derivation(bad);
  CHECK(!r.ok);
  bool found = false;
  for (const auto& v : r.violations)
    if (v.message.find("share the variable z") != std::string::npos) found = true;
  CHECK(found);
}

TEST_CASE("checker: axiom requires a linear type") {
  Sequent s{{{"x", ty_Aa()}}, Term::var("x"), ty_Aa()};
  DerivPtr bad = Derivation::make_raw(Rule::Ax, s, {}, std::monostate{});
  CheckReport r = check_derivation(bad);
  CHECK(!r.ok);
  bool found = false;
  for (const auto& v : r.violations)
    if (v.message.find("linear") != std::string::npos) found = true;
  CHECK(found);
}

TEST_CASE("checker: violations carry node paths and do not stop early") {
  DerivPtr bad_ax = Derivation::make_raw(
      Rule::Ax, Sequent{{{"x", ty_Aa()}}, Term::var("x"), ty_Aa()}, {}, std::monostate{});
  DerivPtr bad_ax2 = Derivation::make_raw(
      Rule::Ax, Sequent{{{"y", ty_Aa()}}, Term::var("y"), ty_Aa()}, {}, std::monostate{});
  DerivPtr top = Derivation::make_raw(
      Rule::AndN,
      Sequent{{{"x", ty_Aa()}, {"y", ty_Aa()}}, Term::var("x"), Type::inter({ty_Aa(), ty_Aa()})},
      {bad_ax, bad_ax2}, std::monostate{});
  CheckReport r = check_derivation(top);
  CHECK(!r.ok);
  CHECK(r.violations.size() >= 2);
  bool path0 = false, path1 = false;
  for (const auto& v : r.violations) {
    if (v.path == std::vector<int>{0}) path0 = true;
    if (v.path == std::vector<int>{1}) path1 = true;
  }
  CHECK(path0);
  CHECK(path1);
}

TEST_CASE("checker: stored conclusions are verified, not trusted") {
  // (->I) node whose stored type disagrees with the premise.
  DerivPtr ok_intro = arrow_intro(ax("x", ty_a()), "x");
  DerivPtr bad_intro = Derivation::make_raw(
      Rule::ArrowIntro,
      Sequent{{}, ok_intro->conclusion().subject, parse_type("a -> b")},
      {ax("x", ty_a())}, ArrowIntroData{"x"});
  CHECK(!check_derivation(bad_intro).ok);

  // (m) node whose stored subject was not renamed.
  DerivPtr two = arrow_elim(ax("x1", ty_A()), ax("x2", ty_a()));
  DerivPtr good = mux(two, {"x1", "x2"}, "x");
  DerivPtr bad_mux = Derivation::make_raw(
      Rule::Mux, Sequent{good->conclusion().ctx, two->conclusion().subject, ty_a()}, {two},
      MuxData{{"x1", "x2"}, "x"});
  CheckReport r = check_derivation(bad_mux);
  CHECK(!r.ok);
  bool found = false;
  for (const auto& v : r.violations)
    if (v.message.find("renamed premise subject") != std::string::npos) found = true;
  CHECK(found);
}

TEST_CASE("smart constructors enforce the side conditions") {
  CHECK_THROWS_AS(ax("x", ty_Aa()), RuleError);
  CHECK_THROWS_AS(weaken(ax("x", ty_a()), "x", ty_a()), RuleError);          // already bound
  CHECK_THROWS_AS(weaken(ax("x", ty_a()), "y", ty_Aa()), RuleError);         // not linear
  CHECK_THROWS_AS(arrow_intro(ax("x", ty_a()), "nope"), RuleError);          // binder unbound
  CHECK_THROWS_AS(arrow_elim(ax("x", ty_a()), ax("y", ty_a())), RuleError);  // not an arrow
  CHECK_THROWS_AS(arrow_elim(arrow_intro(ax("y", ty_a()), "y"), ax("z", ty_A())), RuleError);
  CHECK_THROWS_AS(and_n({ax("x", ty_a())}), RuleError);                      // n >= 2
  CHECK_THROWS_AS(and_n({ax("x", ty_a()), ax("y", ty_a())}), RuleError);     // subjects differ
  DerivPtr two = arrow_elim(ax("x1", ty_A()), ax("x2", ty_a()));
  CHECK_THROWS_AS(mux(two, {"x1"}, "x"), RuleError);                         // n >= 2
  CHECK_THROWS_AS(mux(two, {"x1", "nope"}, "x"), RuleError);
  CHECK_THROWS_AS(mux(two, {"x1", "x2"}, "x1"), RuleError);                  // fresh collides
}

TEST_CASE("mux permits merged variables not free in the subject") {
  // x2 enters by weakening and is merged although unused.
  DerivPtr d = weaken(ax("x1", ty_a()), "x2", ty_a());
  DerivPtr m = mux(d, {"x1", "x2"}, "x");
  CHECK(check_derivation(m).ok);
  CHECK(alpha_equal(m->conclusion().subject, Term::var("x")));
  CHECK(type_equal(m->conclusion().ctx.at("x"), parse_type("(a /\\ a)")));
}

TEST_CASE("decompose_intersection_tree") {
  // The example's Sigma: (/\2) over Sigma_1, Sigma_2 -> two leaves.
  DerivPtr s = and_n({fixture::sigma(ty_A()), fixture::sigma(ty_a())});
  IntersectionTreeView v = decompose_intersection_tree(s);
  CHECK(!v.is_empty);
  REQUIRE(v.leaves.size() == 2);
  CHECK(is_constructive(v.leaves[0]->rule()));
  CHECK(is_constructive(v.leaves[1]->rule()));

  // A derivation ending in a constructive rule is the empty tree, one leaf.
  DerivPtr id = arrow_intro(ax("x", ty_a()), "x");
  IntersectionTreeView w = decompose_intersection_tree(id);
  CHECK(w.is_empty);
  REQUIRE(w.leaves.size() == 1);
  CHECK(w.leaves[0].get() == id.get());

  // Leaves under a trailing delta sequence; the spine records the steps.
  DerivPtr muxed = fixture::example_pi2();
  IntersectionTreeView u = decompose_intersection_tree(muxed);
  CHECK(u.is_empty);
  REQUIRE(u.leaves.size() == 1);
  CHECK(u.leaves[0]->rule() == Rule::ArrowElim);
  REQUIRE(u.spine.delta.size() == 1);
  CHECK(u.spine.delta[0].rule == Rule::Mux);
  CHECK(u.spine.branches.empty());

  // The example's Sigma: no delta at the root, two leaf slots.
  CHECK(v.spine.delta.empty());
  REQUIRE(v.spine.branches.size() == 2);
  CHECK(v.spine.branches[0].branches.empty());

  // Leaf subjects have the conclusion subject as a renaming instance.
  DerivPtr pi0 = fixture::example_pi0();
  auto tree = decompose_intersection_tree(pi0->premises()[1]);
  for (const auto& leaf : tree.leaves)
    CHECK(is_renaming_instance(leaf->conclusion().subject,
                               pi0->premises()[1]->conclusion().subject));
}

TEST_CASE("peel and replay delta") {
  DerivPtr d = fixture::example_pi2();  // (m) over (->E)
  auto [steps, core] = peel_delta(d);
  REQUIRE(steps.size() == 1);
  CHECK(steps[0].rule == Rule::Mux);
  CHECK(core->rule() == Rule::ArrowElim);
  DerivPtr re = replay_delta(steps, core);
  CHECK(derivation_equal(d, re));
}

TEST_CASE("json round trip") {
  for (const DerivPtr& d :
       {fixture::example_pi0(), fixture::example_pi1(), fixture::example_pi2(),
        DerivPtr(ax("x", ty_a()))}) {
    nlohmann::json j = derivation_to_json(d);
    DerivPtr back = derivation_from_json(j);
    CHECK(derivation_equal(d, back));
  }
}

TEST_CASE("json schema rejections") {
  // (m) with a single merged variable: schema error before any rule check.
  nlohmann::json bad = {
      {"rule", "mux"},
      {"ctx", {{{"var", "x"}, {"type", {{"var", "a"}}}}}},
      {"term", "x"},
      {"type", {{"var", "a"}}},
      {"premises", {{{"rule", "ax"},
                     {"ctx", {{{"var", "x1"}, {"type", {{"var", "a"}}}}}},
                     {"term", "x1"},
                     {"type", {{"var", "a"}}},
                     {"premises", nlohmann::json::array()}}}},
      {"data", {{"merged", {"x1"}}, {"fresh", "x"}}}};
  CHECK_THROWS_AS(derivation_from_json(bad), SchemaError);

  // inter with fewer than 2 children
  nlohmann::json bad_ty = {{"inter", {{{"var", "a"}}}}};
  CHECK_THROWS_AS(type_from_json(bad_ty), SchemaError);

  // checked semantics: an Ax whose type disagrees with its context
  nlohmann::json bad_ax = {{"rule", "ax"},
                           {"ctx", {{{"var", "x"}, {"type", {{"var", "a"}}}}}},
                           {"term", "x"},
                           {"type", {{"var", "b"}}},
                           {"premises", nlohmann::json::array()}};
  CHECK_THROWS_AS(derivation_from_json(bad_ax), SchemaError);
}

TEST_CASE("pretty print") {
  CHECK(pretty_print(ax("x", ty_a())) == "x: a \xe2\x8a\xa2 x: a  (Ax)\n");

  std::string text = pretty_print(fixture::example_pi0());
  // Re-parses to an equal derivation.
  DerivPtr back = parse_derivation_text(text);
  CHECK(derivation_equal(fixture::example_pi0(), back));

  for (const DerivPtr& d : {fixture::example_pi1(), fixture::example_pi2()})
    CHECK(derivation_equal(d, parse_derivation_text(pretty_print(d))));
}

TEST_CASE("derivation_equal is alpha-aware but name-strict at the root") {
  DerivPtr a = fixture::example_pi2();  // merges z1, z2 -> z
  DerivPtr b = mux(arrow_elim(ax("q1", ty_A()), ax("q2", ty_a())), {"q1", "q2"}, "z");
  CHECK(derivation_equal(a, b));  // transient names differ only

  DerivPtr c = mux(arrow_elim(ax("q1", ty_A()), ax("q2", ty_a())), {"q1", "q2"}, "w");
  CHECK(!derivation_equal(a, c));  // root context variable renamed
}
