#include "doctest.h"

#include <functional>
#include <random>

#include "json.hpp"

#include "sti/harness.hpp"

// Randomized derivations built directly from the rules (not by inference),
// with deliberately colliding variable names, deep weakening/merge dressing
// and intersection-typed arguments. Every survivor is transported along all
// of its redexes and round-tripped through the serializers.

using namespace sti;

namespace {

struct Gen {
  std::mt19937_64 rng;

  std::uint64_t pick(std::uint64_t n) { return rng() % n; }

  const char* name() {
    static const char* pool[] = {"x", "y", "z", "w", "x1", "y_1"};
    return pool[pick(6)];
  }

  TypePtr linear(int depth) {
    static const char* vars[] = {"a", "b"};
    if (depth <= 0 || pick(100) < 50) return Type::tvar(vars[pick(2)]);
    return Type::arrow(any_type(depth - 1), linear(depth - 1));
  }

  TypePtr any_type(int depth) {
    if (depth <= 0 || pick(100) < 60) return linear(depth);
    std::vector<TypePtr> kids;
    std::size_t n = 2 + pick(2);
    for (std::size_t i = 0; i < n; ++i) kids.push_back(any_type(depth - 1));
    return Type::inter(std::move(kids));
  }

  // z: s |- z : s by axioms under (/\n), then random (w) dressing.
  DerivPtr var_deriv(const TypePtr& s) {
    std::function<DerivPtr(const std::string&, const TypePtr&)> core =
        [&](const std::string& z, const TypePtr& t) -> DerivPtr {
      if (is_linear(t)) return ax(z, t);
      std::vector<DerivPtr> ps;
      for (const auto& c : t->children()) ps.push_back(core(z, c));
      return and_n(std::move(ps));
    };
    DerivPtr d = core(name(), s);
    for (int i = 0; i < 2 && pick(2); ++i) {
      std::string v = name();
      if (d->conclusion().ctx.count(v)) continue;
      d = weaken(d, v, linear(1));
    }
    return d;
  }

  // \v. body with v's type chosen freely: weaken_in_type gives intersection
  // domains; a real binding gives a used binder.
  DerivPtr lambda_deriv(int depth) {
    DerivPtr body = node(depth - 1);
    std::string v = name();
    if (body->conclusion().ctx.count(v)) return arrow_intro(body, v);
    std::set<std::string> avoid = all_names(body);
    DerivPtr dressed = weaken_in_type(body, v, any_type(1), avoid);
    return arrow_intro(dressed, v);
  }

  DerivPtr node(int depth) {
    for (int tries = 0; tries < 8; ++tries) {
      try {
        switch (depth <= 0 ? 0 : pick(5)) {
          case 0:
            return ax(name(), linear(1));
          case 1: {
            DerivPtr p = node(depth - 1);
            std::string v = name();
            if (p->conclusion().ctx.count(v)) continue;
            return weaken(p, v, linear(1));
          }
          case 2:
            return lambda_deriv(depth);
          case 3: {
            // application: a lambda dressed with a random delta, applied to a
            // matching argument derivation
            DerivPtr fn = lambda_deriv(depth);
            for (int i = 0; i < 2 && pick(2); ++i) {
              std::string v = name();
              if (fn->conclusion().ctx.count(v)) continue;
              fn = weaken(fn, v, linear(1));
            }
            // merge two context bindings above the intro sometimes
            if (pick(2)) {
              std::vector<std::string> bound;
              for (const auto& [v, t] : fn->conclusion().ctx) bound.push_back(v);
              if (bound.size() >= 2) {
                std::string fresh = std::string("m") + std::to_string(pick(1000));
                fn = mux(fn, {bound[0], bound[1]}, fresh);
              }
            }
            DerivPtr arg = var_deriv(fn->conclusion().type->domain());
            return arrow_elim(fn, arg);
          }
          default: {
            // multiplexor over whatever context the premise offers
            DerivPtr p = node(depth - 1);
            std::vector<std::string> bound;
            for (const auto& [v, t] : p->conclusion().ctx) bound.push_back(v);
            if (bound.size() < 2) continue;
            std::string fresh = std::string("m") + std::to_string(pick(1000));
            return mux(p, {bound[0], bound[1]}, fresh);
          }
        }
      } catch (const RuleError&) {
        continue;  // bad roll (name clash, type mismatch); try again
      } catch (const TypeError&) {
        continue;
      }
    }
    return ax("x", Type::tvar("a"));
  }
};

}  // namespace

TEST_CASE("randomized derivations: transport, measures and round trips") {
  Gen gen;
  gen.rng.seed(20240817);
  int transported = 0, with_redexes = 0;
  for (int i = 0; i < 250; ++i) {
    DerivPtr d = gen.node(3);
    CheckReport r = check_derivation(d);
    REQUIRE_MESSAGE(r.ok, r.to_string());

    // serializers agree on every generated shape
    CHECK(derivation_equal(d, derivation_from_json(derivation_to_json(d))));
    CHECK(derivation_equal(d, parse_derivation_text(pretty_print(d))));

    auto rs = redexes(d->conclusion().subject);
    if (!rs.empty()) ++with_redexes;
    std::int64_t rk = rank(d);
    for (const auto& p : rs) {
      DerivedStep step = reduce_subject(d, p);
      CHECK(check_derivation(step.after).ok);
      CHECK(ctx_equal(step.after->conclusion().ctx, d->conclusion().ctx));
      CHECK(type_equal(step.after->conclusion().type, d->conclusion().type));
      CHECK(alpha_equal(step.after->conclusion().subject,
                        reduce_at(d->conclusion().subject, p)));
      for (std::int64_t rr = rk; rr <= rk + 2; ++rr)
        CHECK(weight(step.after, rr) < weight(d, rr));
      CHECK(rank(step.after) <= rk);
      ++transported;
    }

    // full normalization with the derivation for a sample
    if (i % 10 == 0 && !rs.empty()) {
      ReductionTrace t =
          normalize_with_derivation(d, Strategy::LeftmostOutermost, weight(d, rk));
      CHECK(redexes(t.entries.back().term).empty());
      CHECK(check_derivation(t.final_derivation).ok);
    }
  }
  CHECK(with_redexes > 40);
  CHECK(transported > 80);
}
