#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <string>
#include <vector>

#include "hatp/registry.hpp"
#include "support/domain_gen.hpp"

using namespace hatp;

namespace {

WorldState empty_state() {
  return testsupport::load_problem("action A(Agent X) { effects{}; };", "").state;
}

}  // namespace

TEST_CASE("const_<n> names are built-in constants at every site") {
  FunctionRegistry reg;
  WorldState s = empty_state();
  CHECK(reg.call_numeric("const_0", {}, s, FunctionKind::Cost) == Rational(0));
  CHECK(reg.call_numeric("const_17", {}, s, FunctionKind::Duration) == Rational(17));
  CHECK(reg.call_numeric("const_3", {}, s, FunctionKind::Ordering) == Rational(3));
  CHECK(reg.resolves_numeric("const_42", FunctionKind::Cost));
  CHECK(reg.resolves_numeric("const_42", FunctionKind::Ordering));
  CHECK_FALSE(reg.resolves_numeric("const_", FunctionKind::Cost));
  CHECK_FALSE(reg.resolves_numeric("const_x", FunctionKind::Cost));
  CHECK_FALSE(reg.resolves_numeric("constant", FunctionKind::Cost));
  CHECK_THROWS_AS(reg.add_numeric("const_9", FunctionKind::Cost,
                                  [](const WorldState &, const std::vector<Value> &) {
                                    return Rational(1);
                                  }),
                  EvalError);
}

TEST_CASE("kind-specific functions resolve only at their site") {
  FunctionRegistry reg;
  WorldState s = empty_state();
  reg.add_numeric("effort", FunctionKind::Cost,
                  [](const WorldState &, const std::vector<Value> &args) {
                    return Rational(static_cast<int64_t>(args.size()));
                  });

  CHECK(reg.resolves_numeric("effort", FunctionKind::Cost));
  CHECK_FALSE(reg.resolves_numeric("effort", FunctionKind::Duration));
  CHECK_FALSE(reg.resolves_numeric("missing", FunctionKind::Cost));

  CHECK(reg.call_numeric("effort", {Value{true}, Value{true}}, s, FunctionKind::Cost) ==
        Rational(2));
  CHECK_THROWS_WITH_AS(reg.call_numeric("effort", {}, s, FunctionKind::Duration),
                       "function 'effort' is not registered for this use site", EvalError);
  CHECK_THROWS_WITH_AS(reg.call_numeric("missing", {}, s, FunctionKind::Cost),
                       "unknown external function 'missing'", EvalError);

  CHECK_THROWS_AS(reg.add_numeric("effort", FunctionKind::Cost,
                                  [](const WorldState &, const std::vector<Value> &) {
                                    return Rational(1);
                                  }),
                  EvalError);
}

TEST_CASE("cost and duration must be non-negative, orderings may go below zero") {
  FunctionRegistry reg;
  WorldState s = empty_state();
  reg.add_numeric("badCost", FunctionKind::Cost,
                  [](const WorldState &, const std::vector<Value> &) {
                    return Rational(-1);
                  });
  reg.add_numeric("rank", FunctionKind::Ordering,
                  [](const WorldState &, const std::vector<Value> &) {
                    return Rational(-5);
                  });
  CHECK_THROWS_AS(reg.call_numeric("badCost", {}, s, FunctionKind::Cost), EvalError);
  CHECK(reg.call_numeric("rank", {}, s, FunctionKind::Ordering) == Rational(-5));
}

TEST_CASE("tables answer at any numeric site, defaults fill the gaps") {
  FunctionRegistry reg;
  WorldState s = empty_state();
  NumericTable t;
  t.set({Value{int64_t{1}}, Value{int64_t{2}}}, Rational(7, 2));
  t.set_default(Rational(9));
  reg.add_table("dist", std::move(t));

  CHECK(reg.resolves_numeric("dist", FunctionKind::Cost));
  CHECK(reg.resolves_numeric("dist", FunctionKind::Duration));
  CHECK(reg.resolves_numeric("dist", FunctionKind::Ordering));
  CHECK(reg.call_numeric("dist", {Value{int64_t{1}}, Value{int64_t{2}}}, s,
                         FunctionKind::Cost) == Rational(7, 2));
  CHECK(reg.call_numeric("dist", {Value{int64_t{2}}, Value{int64_t{1}}}, s,
                         FunctionKind::Cost) == Rational(9));

  NumericTable bare;
  bare.set({Value{true}}, Rational(1));
  reg.add_table("strict", std::move(bare));
  CHECK_THROWS_WITH_AS(reg.call_numeric("strict", {Value{false}}, s, FunctionKind::Cost),
                       "table 'strict' has no entry for the given key and no default",
                       EvalError);
}

TEST_CASE("problem tables load with entity keys resolved") {
  auto lp = testsupport::load_problem(
      R"(
define entityType Spot;
define entityAttributes Spot { dynamic atom bool on; };
action A(Agent X) { effects{}; };
)",
      R"(
S1, S2 = new Spot;
table jump(Spot, Spot) {
  (S1, S2) = 4;
  (S2, S1) = 6;
};
table mixed(Spot, int, string) {
  (S1, 3, "x") = 1/3;
  default = 2;
};
)");

  WorldState &s = lp.state;
  Value s1{EntityRef{*s.find_entity("S1")}};
  Value s2{EntityRef{*s.find_entity("S2")}};

  CHECK(lp.registry.call_numeric("jump", {s1, s2}, s, FunctionKind::Cost) == Rational(4));
  CHECK(lp.registry.call_numeric("jump", {s2, s1}, s, FunctionKind::Duration) == Rational(6));
  CHECK_THROWS_AS(lp.registry.call_numeric("jump", {s1, s1}, s, FunctionKind::Cost),
                  EvalError);
  CHECK(lp.registry.call_numeric("mixed", {s1, Value{int64_t{3}}, Value{std::string("x")}},
                                 s, FunctionKind::Cost) == Rational(1, 3));
  CHECK(lp.registry.call_numeric("mixed", {s1, Value{int64_t{4}}, Value{std::string("x")}},
                                 s, FunctionKind::Cost) == Rational(2));
}

TEST_CASE("predicates: registration, lookup, call accounting") {
  FunctionRegistry reg;
  WorldState s = empty_state();
  reg.add_predicate("reach",
                    [](const EvalContext &, const std::vector<Value> &args,
                       int index) -> std::optional<Solution> {
                      if (index >= static_cast<int>(args.size())) return std::nullopt;
                      return Solution{"sol" + std::to_string(index)};
                    });

  CHECK(reg.has_predicate("reach"));
  CHECK_FALSE(reg.has_predicate("nope"));
  CHECK_THROWS_AS(reg.add_predicate("reach", nullptr), EvalError);

  EvalContext ctx{s, {}};
  auto r0 = reg.call_predicate("reach", ctx, {Value{true}}, 0);
  REQUIRE(r0.has_value());
  CHECK(r0->payload == "sol0");
  CHECK_FALSE(reg.call_predicate("reach", ctx, {Value{true}}, 1).has_value());
  CHECK_THROWS_AS(reg.call_predicate("nope", ctx, {}, 0), EvalError);

  CHECK(reg.stats().externalCalls == 2);  // the unknown name never reached a solver
  CHECK(reg.stats().externalCallsByName.at("reach") == 2);
  reg.reset_stats();
  CHECK(reg.stats().externalCalls == 0);
  CHECK(reg.stats().externalCallsByName.empty());
}

TEST_CASE("numeric calls are counted") {
  FunctionRegistry reg;
  WorldState s = empty_state();
  reg.call_numeric("const_1", {}, s, FunctionKind::Cost);
  reg.call_numeric("const_1", {}, s, FunctionKind::Cost);
  CHECK(reg.stats().numericCalls == 2);
}

TEST_CASE("rational arithmetic stays exact") {
  CHECK(Rational(1, 3) + Rational(1, 6) == Rational(1, 2));
  CHECK(Rational(7, 2) - Rational(3) == Rational(1, 2));
  CHECK(Rational(2, 3) * Rational(9, 4) == Rational(3, 2));
  CHECK(Rational(1, 2) / Rational(1, 8) == Rational(4));
  CHECK(Rational(-4, 8).str() == "-1/2");
  CHECK(Rational(4).str() == "4");
  CHECK(Rational::parse("7/2") == Rational(7, 2));
  CHECK(Rational::parse("-3") == Rational(-3));
  CHECK_FALSE(Rational::parse("1/0").has_value());
  CHECK_FALSE(Rational::parse("x").has_value());
  CHECK(Rational(1, 3) < Rational(1, 2));
  CHECK(Rational(-1, 2) < Rational(0));
}
