#include "doctest.h"

#include <random>

#include "sti/types.hpp"

using namespace sti;

namespace {

TypePtr random_type(std::mt19937_64& rng, int depth) {
  static const char* vars[] = {"a", "b", "c"};
  std::uint64_t roll = rng() % 100;
  if (depth <= 0 || roll < 40) return Type::tvar(vars[rng() % 3]);
  if (roll < 70) {
    TypePtr dom = random_type(rng, depth - 1);
    // codomain must be linear
    TypePtr cod;
    do {
      cod = random_type(rng, depth - 1);
    } while (!is_linear(cod));
    return Type::arrow(dom, cod);
  }
  std::size_t n = 2 + rng() % 3;
  std::vector<TypePtr> kids;
  for (std::size_t i = 0; i < n; ++i) kids.push_back(random_type(rng, depth - 1));
  return Type::inter(std::move(kids));
}

}  // namespace

TEST_CASE("element_count") {
  CHECK(element_count(parse_type("a")) == 1);
  CHECK(element_count(parse_type("((a -> a) /\\ a)")) == 2);
  CHECK(element_count(parse_type("((a /\\ b) /\\ c)")) == 3);
}

TEST_CASE("type grammar") {
  TypePtr arrow = parse_type("a -> b -> c");
  REQUIRE(arrow->kind() == Type::Kind::Arrow);  // right associative
  CHECK(arrow->codomain()->kind() == Type::Kind::Arrow);

  TypePtr inter = parse_type("(a /\\ b /\\ c)");
  REQUIRE(inter->kind() == Type::Kind::Inter);
  CHECK(inter->arity() == 3);

  // UTF-8 wedge accepted
  CHECK(type_equal(parse_type("(a ∧ b)"), parse_type("(a /\\ b)")));

  // arrow codomain must be linear
  CHECK_THROWS(parse_type("a -> (a /\\ b)"));
  CHECK_THROWS_AS(Type::arrow(parse_type("a"), parse_type("(a /\\ b)")), TypeError);
  CHECK_THROWS_AS(Type::inter({parse_type("a")}), TypeError);

  // parenthesized single type is grouping, not intersection
  CHECK(parse_type("(a -> b)")->kind() == Type::Kind::Arrow);
}

TEST_CASE("type_equal: commutative, not idempotent, not associative") {
  TypePtr A = parse_type("a -> a");
  CHECK(type_equal(Type::inter({A, parse_type("a")}), Type::inter({parse_type("a"), A})));
  CHECK(!type_equal(Type::inter({A, A}), A));
  CHECK(!type_equal(parse_type("((a /\\ b) /\\ c)"), parse_type("(a /\\ b /\\ c)")));
}

TEST_CASE("canonicalize is idempotent and decides type_equal") {
  std::mt19937_64 rng(42);
  for (int i = 0; i < 1000; ++i) {
    TypePtr t = random_type(rng, 3);
    TypePtr c1 = canonicalize(t);
    TypePtr c2 = canonicalize(c1);
    CHECK(type_key(c1) == type_key(c2));
    CHECK(type_equal(t, c1));
    CHECK(element_count(t) == element_count(c1));
  }
  CHECK(type_key(canonicalize(parse_type("(a /\\ (a -> a))"))) ==
        type_key(canonicalize(parse_type("((a -> a) /\\ a)"))));
  CHECK(type_key(canonicalize(parse_type("a"))) == type_key(parse_type("a")));
}

TEST_CASE("no absorption") {
  std::mt19937_64 rng(11);
  TypePtr A = parse_type("a -> a");
  for (int i = 0; i < 200; ++i) {
    TypePtr t = random_type(rng, 2);
    CHECK(!type_equal(Type::inter({A, t}), t));
  }
}

TEST_CASE("type_equal is an equivalence relation on samples") {
  std::mt19937_64 rng(5);
  std::vector<TypePtr> ts;
  for (int i = 0; i < 20; ++i) ts.push_back(random_type(rng, 3));
  for (const auto& t : ts) CHECK(type_equal(t, t));
  for (const auto& s : ts)
    for (const auto& t : ts) CHECK(type_equal(s, t) == type_equal(t, s));
}

TEST_CASE("ctx_intersect") {
  Context g1{{"z", parse_type("a -> a")}};
  Context g2{{"z", parse_type("a")}};
  Context merged = ctx_intersect({g1, g2});
  REQUIRE(merged.size() == 1);
  CHECK(type_equal(merged["z"], parse_type("((a -> a) /\\ a)")));

  Context x{{"x", parse_type("a")}};
  Context y{{"y", parse_type("b")}};
  Context both = ctx_intersect({x, y});
  CHECK(both.size() == 2);
  CHECK(type_equal(both["x"], parse_type("a")));
  CHECK(type_equal(both["y"], parse_type("b")));

  Context a{{"z", parse_type("a")}}, b{{"z", parse_type("b")}}, c{{"z", parse_type("c")}};
  Context tern = ctx_intersect({a, b, c});
  TypePtr t = tern["z"];
  REQUIRE(t->kind() == Type::Kind::Inter);
  CHECK(t->arity() == 3);  // one flat ternary node
  CHECK(type_equal(t, parse_type("(a /\\ b /\\ c)")));
}

TEST_CASE("ctx_intersect is stable under permutations, up to type_equal") {
  Context g1{{"z", parse_type("a -> a")}, {"w", parse_type("b")}};
  Context g2{{"z", parse_type("a")}};
  Context m12 = ctx_intersect({g1, g2});
  Context m21 = ctx_intersect({g2, g1});
  REQUIRE(m12.size() == m21.size());
  for (const auto& [var, ty] : m12) CHECK(type_equal(ty, m21.at(var)));
}

TEST_CASE("ctx_disjoint_union") {
  Context g{{"x", parse_type("a")}};
  Context d{{"y", parse_type("b")}};
  Context u = ctx_disjoint_union(g, d);
  CHECK(u.size() == 2);

  Context clash{{"x", parse_type("b")}};
  CHECK_THROWS_WITH_AS(static_cast<void>(ctx_disjoint_union(g, clash)),
                       "contexts not disjoint on: x", TypeError);
  CHECK(ctx_disjoint_union({}, g).size() == 1);
}

TEST_CASE("type printing round trip") {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 100; ++i) {
    TypePtr t = random_type(rng, 3);
    CHECK(type_equal(t, parse_type(to_string(t))));
  }
}
