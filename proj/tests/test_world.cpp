#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <string>
#include <vector>

#include "hatp/parser.hpp"
#include "hatp/world.hpp"
#include "support/domain_gen.hpp"

using namespace hatp;
using testsupport::load_problem;

namespace {

const char *kDomain = R"(
define entityType Thing;

define entityAttributes Agent {
  static atom string role;
  dynamic atom Thing hold;
  dynamic atom int score;
};

define entityAttributes Thing {
  static atom bool fragile;
  dynamic atom Thing under;
  dynamic set Thing touches;
  dynamic atom bool lit;
};

action Noop(Agent A) { effects{}; };
)";

const char *kProblem = R"(
Bot = new Agent;
T1, T2, T3 = new Thing;

Bot.role = "porter";
Bot.score = 7;
T1.fragile = true;
T2.fragile = false;
T1.under = T2;
T1.touches <<= T2;
T1.touches <<= T3;
T1.lit = true;
T2.lit = false;
)";

/// Parses a precondition block in isolation (no binding checks happen here).
std::vector<Cond> conds(const std::string &body) {
  DomainParse dp = parse_domain("action X_(Agent A_) { preconditions{" + body +
                                "}; effects{}; };");
  REQUIRE(dp.ok());
  return dp.domain.operators[0].precondition;
}

std::vector<Effect> effects(const std::string &body) {
  DomainParse dp = parse_domain("action X_(Agent A_) { effects{" + body + "}; };");
  REQUIRE(dp.ok());
  return dp.domain.operators[0].effects;
}

EntityId id(const WorldState &s, const std::string &name) {
  auto e = s.find_entity(name);
  REQUIRE(e.has_value());
  return *e;
}

int attr_index(const WorldState &s, const std::string &entity, const std::string &attr) {
  int idx = s.schema().type(s.entity(id(s, entity)).typeIndex).attribute_index(attr);
  REQUIRE(idx >= 0);
  return idx;
}

const Slot &slot_of(const WorldState &s, const std::string &entity,
                    const std::string &attr) {
  return s.slot(id(s, entity), attr_index(s, entity, attr));
}

bool holds(const WorldState &s, const std::string &condSrc) {
  Bindings b;
  return eval_conditions(conds(condSrc), s, b);
}

WorldState after(const WorldState &s, const std::string &effectSrc) {
  WorldState next = s;
  Bindings b;
  apply_effects(effects(effectSrc), next, b);
  return next;
}

}  // namespace

TEST_CASE("initial state: entities, slots, defaults") {
  auto lp = load_problem(kDomain, kProblem);
  const WorldState &s = lp.state;

  CHECK(s.entity_count() == 4);
  CHECK(s.entity(0).name == "Bot");  // instantiation order
  CHECK(s.entity(1).name == "T1");
  CHECK_FALSE(s.find_entity("T9").has_value());
  CHECK(s.entities_of_type("Thing") ==
        std::vector<EntityId>{id(s, "T1"), id(s, "T2"), id(s, "T3")});

  CHECK(slot_of(s, "Bot", "role").atom == Value{std::string("porter")});
  CHECK(slot_of(s, "Bot", "score").atom == Value{int64_t{7}});
  CHECK(slot_of(s, "Bot", "hold").atom == Value{NullT{}});  // unassigned atom
  CHECK(slot_of(s, "T3", "touches").set.empty());           // unassigned set
  CHECK(slot_of(s, "T1", "under").atom == Value{EntityRef{id(s, "T2")}});
  CHECK(slot_of(s, "T1", "touches").set ==
        std::vector<Value>{Value{EntityRef{id(s, "T2")}}, Value{EntityRef{id(s, "T3")}}});
}

TEST_CASE("value_text renders every alternative") {
  auto lp = load_problem(kDomain, kProblem);
  CHECK(value_text(Value{NullT{}}, lp.state) == "NULL");
  CHECK(value_text(Value{true}, lp.state) == "true");
  CHECK(value_text(Value{false}, lp.state) == "false");
  CHECK(value_text(Value{int64_t{-3}}, lp.state) == "-3");
  CHECK(value_text(Value{std::string("hi")}, lp.state) == "hi");
  CHECK(value_text(Value{EntityRef{id(lp.state, "T2")}}, lp.state) == "T2");
}

TEST_CASE("expression evaluation and errors") {
  auto lp = load_problem(kDomain, kProblem);
  const WorldState &s = lp.state;
  Bindings b;
  b.push("Me", Value{EntityRef{id(s, "Bot")}});

  auto expr = [&](const std::string &src) {
    // Reuse the condition parser: "<e> == NULL;" and keep the left side.
    return std::get<CompareCond>(conds(src + " == NULL;")[0]).lhs;
  };

  CHECK(eval_expr(expr("Me"), s, b) == Value{EntityRef{id(s, "Bot")}});
  CHECK(eval_expr(expr("Me.score"), s, b) == Value{int64_t{7}});
  CHECK(eval_expr(expr("T1.under.lit"), s, b) == Value{false});  // T1.under = T2
  CHECK(eval_expr(expr("Me.hold"), s, b) == Value{NullT{}});     // terminal NULL is a value

  CHECK_THROWS_AS(eval_expr(expr("Nobody"), s, b), EvalError);
  CHECK_THROWS_AS(eval_expr(expr("Me.hold.lit"), s, b), EvalError);   // through NULL
  CHECK_THROWS_AS(eval_expr(expr("Me.score.lit"), s, b), EvalError);  // through an int
  CHECK_THROWS_AS(eval_expr(expr("T1.touches"), s, b), EvalError);    // set as value

  CHECK(try_eval_operand(expr("Me.hold.lit"), s, b) == std::nullopt);
  CHECK(try_eval_operand(expr("Me.score"), s, b) == std::optional<Value>{int64_t{7}});
}

TEST_CASE("comparisons") {
  auto lp = load_problem(kDomain, kProblem);
  const WorldState &s = lp.state;

  CHECK(holds(s, "Bot.score == 7;"));
  CHECK(holds(s, "Bot.score != 8;"));
  CHECK(holds(s, "Bot.role == \"porter\";"));
  CHECK(holds(s, "T1.under == T2;"));
  CHECK(holds(s, "Bot.hold == NULL;"));
  CHECK(holds(s, "T3.lit == NULL;"));   // unassigned atom equals NULL
  CHECK(holds(s, "T3.lit != false;"));  // and differs from every scalar
  CHECK_FALSE(holds(s, "T3.lit == false;"));
  CHECK(holds(s, "Bot.score != \"7\";"));  // cross-type never equal

  CHECK(holds(s, "T2 >> T1.touches;"));
  CHECK(holds(s, "T1 !>> T1.touches;"));
  CHECK_FALSE(holds(s, "T1 >> T1.touches;"));
  CHECK_FALSE(holds(s, "T2 >> T3.touches;"));  // empty set

  // Traversal through NULL makes the containing comparison false, not an error.
  CHECK_FALSE(holds(s, "Bot.hold.lit == NULL;"));
  CHECK_FALSE(holds(s, "Bot.hold.lit != true;"));
  CHECK_FALSE(holds(s, "T2 >> Bot.hold.touches;"));

  // A conjunction is the AND of its statements.
  CHECK(holds(s, "Bot.score == 7; T1.lit == true;"));
  CHECK_FALSE(holds(s, "Bot.score == 7; T1.lit == false;"));

  // Structural misuse still throws.
  CHECK_THROWS_AS(holds(s, "T1.touches == T1;"), EvalError);
  CHECK_THROWS_AS(holds(s, "T2 >> T1.under;"), EvalError);  // rhs is not a set
}

TEST_CASE("quantifiers") {
  auto lp = load_problem(kDomain, kProblem);
  const WorldState &s = lp.state;

  CHECK(holds(s, "EXIST(Thing X, {X.fragile == true;}, {X.lit == true;});"));
  CHECK_FALSE(holds(s, "EXIST(Thing X, {X.fragile == true;}, {X.lit == false;});"));
  CHECK(holds(s, "FORALL(Thing X, {X.fragile == true;}, {X.lit == true;});"));
  CHECK_FALSE(holds(s, "FORALL(Thing X, {}, {X.lit == true;});"));
  // Vacuous FORALL holds, vacuous EXIST fails.
  CHECK(holds(s, "FORALL(Thing X, {X.lit == 3;}, {X.under == X;});"));
  CHECK_FALSE(holds(s, "EXIST(Thing X, {X.lit == 3;}, {X.lit != 3;});"));
  // The quantified variable is visible in filter and body.
  CHECK(holds(s, "EXIST(Thing X, {X >> T1.touches;}, {X.lit == false;});"));
}

TEST_CASE("filter_candidates: declaration order, binding scoped to the filter") {
  auto lp = load_problem(kDomain, kProblem);
  const WorldState &s = lp.state;
  Bindings b;

  CHECK(filter_candidates("Thing", "X", {}, s, b) ==
        std::vector<EntityId>{id(s, "T1"), id(s, "T2"), id(s, "T3")});
  CHECK(filter_candidates("Thing", "X", conds("X.lit == true;"), s, b) ==
        std::vector<EntityId>{id(s, "T1")});
  CHECK(b.size() == 0);  // nothing leaks
}

TEST_CASE("effects: writes land in statement order, later writes win") {
  auto lp = load_problem(kDomain, kProblem);
  WorldState s = after(lp.state, "Bot.score = 1; Bot.score = 2;");
  CHECK(slot_of(s, "Bot", "score").atom == Value{int64_t{2}});
}

TEST_CASE("effects: every read sees the pre-state") {
  auto lp = load_problem(kDomain, kProblem);

  // Two assignments swap cleanly because both right sides read the snapshot.
  WorldState s = after(lp.state, "T1.under = T2.under; T2.under = T1.under;");
  CHECK(slot_of(s, "T1", "under").atom == Value{NullT{}});
  CHECK(slot_of(s, "T2", "under").atom == Value{EntityRef{id(s, "T2")}});

  // An IF guard reads the snapshot even when an earlier write flipped the slot.
  s = after(lp.state, "T1.lit = false; IF{T1.lit == true;}{ T2.lit = true; };");
  CHECK(slot_of(s, "T1", "lit").atom == Value{false});
  CHECK(slot_of(s, "T2", "lit").atom == Value{true});

  // A FORALL filter enumerates the snapshot: elements added by the same block
  // are not removed again.
  s = after(lp.state,
            "T1.touches <<= T1; "
            "FORALL(Thing X, {X >> T1.touches;}, {T1.touches =>> X;});");
  CHECK(slot_of(s, "T1", "touches").set == std::vector<Value>{Value{EntityRef{id(s, "T1")}}});
}

TEST_CASE("effects: set updates stay sorted and duplicate-free") {
  auto lp = load_problem(kDomain, kProblem);
  WorldState s = after(lp.state, "T3.touches <<= T2; T3.touches <<= T1; T3.touches <<= T2;");
  CHECK(slot_of(s, "T3", "touches").set ==
        std::vector<Value>{Value{EntityRef{id(s, "T1")}}, Value{EntityRef{id(s, "T2")}}});
  // Removing an absent element is a quiet no-op.
  s = after(s, "T3.touches =>> T3;");
  CHECK(slot_of(s, "T3", "touches").set.size() == 2);
}

TEST_CASE("effects: rejected writes") {
  auto lp = load_problem(kDomain, kProblem);
  CHECK_THROWS_AS(after(lp.state, "T1.fragile = false;"), EvalError);   // static
  CHECK_THROWS_AS(after(lp.state, "Bot.hold.lit = true;"), EvalError);  // through NULL
  CHECK_THROWS_AS(after(lp.state, "T1.lit = Bot.hold.lit;"), EvalError);  // RHS through NULL
  CHECK_THROWS_AS(after(lp.state, "T1.touches = T2;"), EvalError);      // atom op on set
  CHECK_THROWS_AS(after(lp.state, "T1.under <<= T2;"), EvalError);      // set op on atom
}

TEST_CASE("copies are snapshots: writes to one never show in the other") {
  auto lp = load_problem(kDomain, kProblem);
  WorldState a = lp.state;
  WorldState b = a;
  b.write_atom(id(b, "Bot"), attr_index(b, "Bot", "score"), Value{int64_t{99}});

  CHECK(slot_of(a, "Bot", "score").atom == Value{int64_t{7}});
  CHECK(slot_of(b, "Bot", "score").atom == Value{int64_t{99}});
  CHECK(a.fingerprint() != b.fingerprint());
  CHECK(a.static_fingerprint() == b.static_fingerprint());
  CHECK(a.fingerprint() == lp.state.fingerprint());
}

TEST_CASE("direct mutators reject statics; counterfactual copies allow them") {
  auto lp = load_problem(kDomain, kProblem);
  WorldState s = lp.state;
  CHECK_THROWS_AS(s.write_atom(id(s, "T1"), attr_index(s, "T1", "fragile"), Value{false}),
                  EvalError);

  WorldState probe = s.with_atom_value(id(s, "T1"), attr_index(s, "T1", "fragile"),
                                       Value{false});
  CHECK(slot_of(probe, "T1", "fragile").atom == Value{false});
  CHECK(slot_of(s, "T1", "fragile").atom == Value{true});
  CHECK(probe.static_fingerprint() != s.static_fingerprint());

  WorldState gone = s.with_element_present(id(s, "T1"), attr_index(s, "T1", "touches"),
                                           Value{EntityRef{id(s, "T3")}}, false);
  CHECK(slot_of(gone, "T1", "touches").set == std::vector<Value>{Value{EntityRef{id(s, "T2")}}});
  WorldState back = gone.with_element_present(id(s, "T1"), attr_index(s, "T1", "touches"),
                                              Value{EntityRef{id(s, "T3")}}, true);
  CHECK(back.fingerprint() == s.fingerprint());
}

TEST_CASE("classical projection") {
  auto lp = load_problem(kDomain, kProblem);
  CHECK(to_classical_atoms(lp.state) ==
        std::vector<std::string>{
            "fragile(T1)",
            "lit(T1)",
            "role(Bot,porter)",
            "score(Bot,7)",
            "touches(T1,T2)",
            "touches(T1,T3)",
            "under(T1,T2)",
        });

  // False and NULL leave no atom behind; set elements appear one by one.
  WorldState s = after(lp.state, "T1.lit = false; T1.under = NULL; T3.touches <<= T1;");
  CHECK(to_classical_atoms(s) ==
        std::vector<std::string>{
            "fragile(T1)",
            "role(Bot,porter)",
            "score(Bot,7)",
            "touches(T1,T2)",
            "touches(T1,T3)",
            "touches(T3,T1)",
        });
}

TEST_CASE("predicate calls need a hook") {
  auto lp = load_problem(kDomain, kProblem);
  Bindings b;
  auto cs = conds("near(T1);");
  CHECK_THROWS_AS(eval_conditions(cs, lp.state, b), EvalError);

  bool called = false;
  PredicateHook hook = [&](const PredicateCall &call, Bindings &) {
    called = true;
    CHECK(call.name == "near");
    return true;
  };
  CHECK(eval_conditions(cs, lp.state, b, &hook));
  CHECK(called);
}
