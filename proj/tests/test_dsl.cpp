#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <string>
#include <vector>

#include "hatp/lexer.hpp"
#include "hatp/parser.hpp"
#include "hatp/printer.hpp"
#include "support/domain_gen.hpp"

using namespace hatp;

namespace {

bool has_error(const std::vector<Diagnostic> &diags, const std::string &needle) {
  for (const Diagnostic &d : diags)
    if (d.message.find(needle) != std::string::npos) return true;
  return false;
}

std::string diag_dump(const std::vector<Diagnostic> &diags) {
  std::string out;
  for (const Diagnostic &d : diags) out += format_diagnostic(d, "<test>") + "\n";
  return out;
}

}  // namespace

TEST_CASE("lexer: operators, comments, strings") {
  std::vector<Diagnostic> diags;
  auto toks = lex("a <<= b =>> c >> d !>> e == f != g = h // gone\n\"x\\ny\" 42", diags);
  CHECK(diags.empty());
  std::vector<Tok> kinds;
  for (const Token &t : toks) kinds.push_back(t.kind);
  CHECK(kinds == std::vector<Tok>{Tok::Ident, Tok::SetAdd, Tok::Ident, Tok::SetRem,
                                  Tok::Ident, Tok::In, Tok::Ident, Tok::NotIn,
                                  Tok::Ident, Tok::EqEq, Tok::Ident, Tok::NotEq,
                                  Tok::Ident, Tok::Assign, Tok::Ident, Tok::String,
                                  Tok::Int, Tok::End});
  CHECK(toks[15].text == "x\ny");
  CHECK(toks[16].text == "42");
}

TEST_CASE("lexer: smart quotes normalize, errors reported with position") {
  std::vector<Diagnostic> diags;
  auto toks = lex("\xe2\x80\x9crobot\xe2\x80\x9d\n  @", diags);
  REQUIRE(toks.size() == 3);  // string, error, end
  CHECK(toks[0].kind == Tok::String);
  CHECK(toks[0].text == "robot");
  CHECK(toks[1].kind == Tok::Error);
  REQUIRE(diags.size() == 1);
  CHECK(format_diagnostic(diags[0], "f.hatp") == "f.hatp:2:3: error: unexpected character '@'");
}

TEST_CASE("lexer: unterminated string") {
  std::vector<Diagnostic> diags;
  lex("\"oops\n", diags);
  CHECK(has_error(diags, "unterminated string literal"));
}

static const char *kTinyDomain = R"(
define entityType Place;

define entityAttributes Agent {
  static atom string type;
  dynamic atom Place at;
  dynamic set Place seen;
};

define entityAttributes Place {
  static set Place adjacent;
  dynamic atom bool busy;
};

method Visit(Agent R, Place P) {
  empty{R.at == P;};
  {
    preconditions{R.at != P;};
    subtasks{
      N = SELECT(Place, {N >> R.at.adjacent;});
      1: Step(R, N);
      2: Visit(R, P) >1;
    };
  };
};

action Step(Agent R, Place To) {
  preconditions{
    To >> R.at.adjacent;
    To.busy == false;
  };
  effects{
    R.at = To;
    R.seen <<= To;
  };
  cost{const_2()};
};
)";

TEST_CASE("domain parse: structure of a small domain") {
  DomainParse dp = parse_domain(kTinyDomain);
  REQUIRE_MESSAGE(dp.ok(), diag_dump(dp.diagnostics));

  REQUIRE(dp.domain.entityTypes.size() == 2);
  CHECK(dp.domain.entityTypes[0].name == "Agent");  // built in, always present
  const EntityTypeDecl *agent = dp.domain.find_type("Agent");
  REQUIRE(agent != nullptr);
  REQUIRE(agent->attributes.size() == 3);
  CHECK(agent->attributes[0].mutability == Mutability::Static);
  CHECK(agent->attributes[0].type.kind == ScalarKind::String);
  CHECK(agent->attributes[1].type.kind == ScalarKind::Entity);
  CHECK(agent->attributes[1].type.entity == "Place");
  CHECK(agent->attributes[2].arity == SlotArity::Set);

  const MethodDecl *visit = dp.domain.find_method("Visit");
  REQUIRE(visit != nullptr);
  REQUIRE(visit->emptyCondition.has_value());
  CHECK(visit->emptyCondition->size() == 1);
  REQUIRE(visit->cases.size() == 1);
  const MethodCase &c = visit->cases[0];
  CHECK(c.precondition.size() == 1);
  REQUIRE(c.body.selectors.size() == 1);
  CHECK(c.body.selectors[0].var == "N");
  CHECK(c.body.selectors[0].kind == SelectorKind::Select);
  REQUIRE(c.body.subtasks.size() == 2);
  CHECK(c.body.subtasks[0].label == 1);
  CHECK(c.body.subtasks[1].predecessors == std::vector<int>{1});

  const OperatorDecl *step = dp.domain.find_operator("Step");
  REQUIRE(step != nullptr);
  CHECK(step->params.size() == 2);
  CHECK(step->precondition.size() == 2);
  CHECK(step->effects.size() == 2);
  CHECK(step->costFn.name == "const_2");
  CHECK_FALSE(step->durationFn.has_value());
}

TEST_CASE("domain parse: omitted cost defaults to one unit") {
  DomainParse dp = parse_domain(
      "action Nop(Agent A) { preconditions{}; effects{}; };");
  REQUIRE_MESSAGE(dp.ok(), diag_dump(dp.diagnostics));
  CHECK(dp.domain.operators[0].costFn.name == "const_1");
  CHECK(dp.domain.operators[0].costFn.args.empty());
}

TEST_CASE("domain parse: unlabelled subtasks get fresh labels") {
  DomainParse dp = parse_domain(R"(
method M(Agent A) {
  {
    subtasks{
      2: T(A);
      T(A);
      T(A) >2;
    };
  };
};
action T(Agent A) { effects{}; };
)");
  REQUIRE_MESSAGE(dp.ok(), diag_dump(dp.diagnostics));
  const MethodBody &body = dp.domain.methods[0].cases[0].body;
  REQUIRE(body.subtasks.size() == 3);
  CHECK(body.subtasks[0].label == 2);
  CHECK(body.subtasks[1].label == 1);  // smallest unused
  CHECK(body.subtasks[2].label == 3);
}

TEST_CASE("domain parse: rejected inputs") {
  auto expect_error = [](const char *src, const char *needle) {
    DomainParse dp = parse_domain(src);
    CHECK_FALSE(dp.ok());
    CHECK_MESSAGE(has_error(dp.diagnostics, needle), diag_dump(dp.diagnostics),
                  " (wanted: ", needle, ")");
  };

  expect_error("define entityType Agent;", "'Agent' is built in");
  expect_error("define entityType P, P;", "duplicate declaration of entity type 'P'");
  expect_error("define entityAttributes Ghost { dynamic atom int x; };",
               "unknown entity type 'Ghost'");
  expect_error("define entityAttributes Agent { dynamic atom int x; dynamic atom bool x; };",
               "duplicate declaration of attribute 'x'");
  expect_error("action A(Agent R) { effects{}; }; action A(Agent R) { effects{}; };",
               "duplicate declaration of task 'A'");
  expect_error("action A(Agent R) { effects{}; }; method A(Agent R) { { subtasks{}; }; };",
               "duplicate declaration of task 'A'");
  expect_error("action Bare() { effects{}; };", "has no parameters");
  expect_error("method M(Agent A) { { subtasks{ 1: T(A); 1: T(A); }; }; };",
               "duplicate subtask label 1");
  expect_error("method M(Agent A) { { subtasks{ 1: T(A) >9; }; }; };",
               "unknown label 9");
  expect_error("method M(Agent A) { { subtasks{ 1: T(A) >1; }; }; };",
               "cannot precede itself");
  expect_error("method M(Agent A) { { subtasks{ 1: T(A) >2; 2: T(A) >1; }; }; };",
               "form a cycle");
  expect_error("method M(Agent A) { empty{}; empty{}; { subtasks{}; }; };",
               "more than one empty case");
  expect_error("action A(Agent R) { effects{ R = NULL; }; };",
               "effect target must be an attribute access");
  expect_error("action A(Agent R) { effects{ IF{EXIST(Agent B, {}, {})}{}; }; };",
               "EXIST is only allowed in preconditions");
  expect_error("method M(Agent A) { { subtasks{ X = SELECT(Agent, {EXIST(Agent B, {}, {});}); 1: T(A); }; }; };",
               "EXIST is only allowed in preconditions");
  expect_error("action A(Agent R) { preconditions{ IF{R.at == NULL}{}; }; effects{}; };",
               "IF is only allowed in effects");
}

TEST_CASE("domain parse: recovery reports every statement-level error") {
  DomainParse dp = parse_domain(R"(
define entityAttributes Agent {
  dynamic atom int x;
  dynamic blob int y;
  dynamic atom int z;
};

action Go(Agent A) {
  preconditions{ A.x == ; };
  effects{ A.z = 3; };
};
)");
  CHECK_FALSE(dp.ok());
  CHECK(has_error(dp.diagnostics, "expected 'atom' or 'set'"));
  CHECK(has_error(dp.diagnostics, "expected expression"));
  // Recovery kept the surrounding declarations.
  const EntityTypeDecl *agent = dp.domain.find_type("Agent");
  REQUIRE(agent != nullptr);
  CHECK(agent->attributes.size() == 2);  // x and z survive
  CHECK(dp.domain.find_operator("Go") != nullptr);
}

TEST_CASE("domain parse: conditions and quantifiers") {
  DomainParse dp = parse_domain(R"(
define entityType Box;
define entityAttributes Box { dynamic atom bool open; dynamic set Box holds; };
action Check(Agent A, Box B) {
  preconditions{
    EXIST(Box X, {X.open == true;}, {X >> B.holds;});
    FORALL(Box X, {}, {X.open != NULL;});
    B.open == true;
    B !>> B.holds;
  };
  effects{};
};
)");
  REQUIRE_MESSAGE(dp.ok(), diag_dump(dp.diagnostics));
  const auto &pre = dp.domain.operators[0].precondition;
  REQUIRE(pre.size() == 4);
  const auto *ex = std::get_if<Box<QuantCond>>(&pre[0]);
  REQUIRE(ex != nullptr);
  CHECK_FALSE((*ex)->forall);
  CHECK((*ex)->varType == "Box");
  CHECK((*ex)->filter.size() == 1);
  CHECK((*ex)->body.size() == 1);
  const auto *fa = std::get_if<Box<QuantCond>>(&pre[1]);
  REQUIRE(fa != nullptr);
  CHECK((*fa)->forall);
  const auto *cmp = std::get_if<CompareCond>(&pre[3]);
  REQUIRE(cmp != nullptr);
  CHECK(cmp->op == CompareOp::NotIn);
}

TEST_CASE("domain parse: effect forms") {
  DomainParse dp = parse_domain(R"(
define entityType Spot;
define entityAttributes Agent { dynamic atom Spot at; dynamic set Spot seen; };
define entityAttributes Spot { dynamic atom bool hot; };
action Mix(Agent A, Spot S) {
  effects{
    A.at = S;
    A.seen <<= S;
    A.seen =>> S;
    IF{A.at == S;}{
      S.hot = true;
    };
    FORALL(Spot X, {X >> A.seen;}, {X.hot = false;});
  };
};
)");
  REQUIRE_MESSAGE(dp.ok(), diag_dump(dp.diagnostics));
  const auto &eff = dp.domain.operators[0].effects;
  REQUIRE(eff.size() == 5);
  CHECK(std::get<WriteEffect>(eff[0]).op == WriteOp::Assign);
  CHECK(std::get<WriteEffect>(eff[1]).op == WriteOp::SetAdd);
  CHECK(std::get<WriteEffect>(eff[2]).op == WriteOp::SetRemove);
  const auto *iff = std::get_if<Box<IfEffect>>(&eff[3]);
  REQUIRE(iff != nullptr);
  CHECK((*iff)->body.size() == 1);
  const auto *fa = std::get_if<Box<ForallEffect>>(&eff[4]);
  REQUIRE(fa != nullptr);
  CHECK((*fa)->varName == "X");
}

TEST_CASE("domain parse: selector variants") {
  DomainParse dp = parse_domain(R"(
define entityType Spot;
define entityAttributes Spot { dynamic atom bool free; };
method Pick(Agent A) {
  {
    subtasks{
      X = SELECT(Spot, {X.free == true;});
      Y = SELECTORDERED(Spot, {}, rank(Y), <);
      Z = SELECTORDERED(Spot, {}, rank(Z), >);
      W = SELECTONCE(Spot, {});
      1: Use(A, X, Y, Z, W);
    };
  };
};
action Use(Agent A, Spot X, Spot Y, Spot Z, Spot W) { effects{}; };
)");
  REQUIRE_MESSAGE(dp.ok(), diag_dump(dp.diagnostics));
  const auto &sels = dp.domain.methods[0].cases[0].body.selectors;
  REQUIRE(sels.size() == 4);
  CHECK(sels[0].kind == SelectorKind::Select);
  CHECK_FALSE(sels[0].orderingFn.has_value());
  CHECK(sels[1].kind == SelectorKind::SelectOrdered);
  CHECK(sels[1].orderingFn->name == "rank");
  CHECK(sels[1].direction == SortDirection::Descending);  // '<'
  CHECK(sels[2].direction == SortDirection::Ascending);   // '>'
  CHECK(sels[3].kind == SelectorKind::SelectOnce);
}

static const char *kTinyProblem = R"(
Ann = new Agent;
Home, Work = new Place;

Ann.type = "robot";
Ann.at = Home;
Home.adjacent <<= Work;
Work.adjacent <<= Home;
Home.busy = false;
Work.busy = false;

table walk(Place, Place) {
  (Home, Work) = 7/2;
  (Work, Home) = 4;
  default = 9;
};

goal {
  Visit(Ann, Work);
};
)";

TEST_CASE("problem parse: structure") {
  DomainParse dp = parse_domain(kTinyDomain);
  REQUIRE(dp.ok());
  ProblemParse pp = parse_problem(kTinyProblem, dp.domain);
  REQUIRE_MESSAGE(pp.ok(), diag_dump(pp.diagnostics));

  REQUIRE(pp.problem.instantiations.size() == 2);
  CHECK(pp.problem.instantiations[1].names == std::vector<std::string>{"Home", "Work"});
  CHECK(pp.problem.instantiations[1].typeName == "Place");
  CHECK(pp.problem.assignments.size() == 6);
  CHECK(pp.problem.assignments[2].op == WriteOp::SetAdd);

  REQUIRE(pp.problem.tables.size() == 1);
  const TableDeclAst &t = pp.problem.tables[0];
  CHECK(t.name == "walk");
  CHECK(t.columnTypes == std::vector<std::string>{"Place", "Place"});
  REQUIRE(t.entries.size() == 2);
  CHECK(t.entries[0].value == Rational(7, 2));
  CHECK(t.defaultValue == Rational(9));

  REQUIRE(pp.problem.goal.size() == 1);
  CHECK(pp.problem.goal[0].name == "Visit");
  CHECK(pp.problem.goal[0].args.size() == 2);
}

TEST_CASE("problem parse: rejected inputs") {
  DomainParse dp = parse_domain(kTinyDomain);
  REQUIRE(dp.ok());
  auto expect_error = [&](const std::string &src, const char *needle) {
    ProblemParse pp = parse_problem(src, dp.domain);
    CHECK_FALSE(pp.ok());
    CHECK_MESSAGE(has_error(pp.diagnostics, needle), diag_dump(pp.diagnostics),
                  " (wanted: ", needle, ")");
  };

  expect_error("X = new Ghost;", "unknown entity type 'Ghost'");
  expect_error("X = new Place; X = new Place;", "duplicate instantiation of entity 'X'");
  expect_error("Y.busy = true;", "unknown entity 'Y'");
  expect_error("X = new Place; X.size = 3;", "no attribute 'size'");
  expect_error("X = new Place; X.busy <<= true;", "is an atom; use '='");
  expect_error("A = new Agent; A.seen = NULL;", "is a set; use '<<='");
  expect_error("X = new Place; X.busy = 3;", "expected bool, got int");
  expect_error("A = new Agent; B = new Agent; A.at = B;", "expected Place, got Agent");
  expect_error("A = new Agent; A.type = \"x\"; A.type = \"y\";",
               "static attribute 'A.type' is already assigned");
  expect_error("table t(Ghost) { default = 1; };", "unknown entity type");
  expect_error("X = new Place; table t(Place) { (X, X) = 1; };",
               "2 components, expected 1");
  expect_error("table t(Place) { (Oops) = 1; };", "unknown entity");
  expect_error("X = new Place; table t(Place) { (X) = 1/0; };", "zero denominator");
}

TEST_CASE("problem parse: goal args accept literals and entities") {
  DomainParse dp = parse_domain(kTinyDomain);
  REQUIRE(dp.ok());
  ProblemParse pp = parse_problem("A = new Agent; goal { Visit(A, NULL); };", dp.domain);
  REQUIRE_MESSAGE(pp.ok(), diag_dump(pp.diagnostics));
  REQUIRE(pp.problem.goal[0].args.size() == 2);
  CHECK(std::holds_alternative<Literal>(pp.problem.goal[0].args[1]));
}

TEST_CASE("goal override string parses like a goal block") {
  std::vector<Diagnostic> diags;
  auto goal = parse_goal_list("Visit(Ann, Work); Step(Ann, Home)", diags);
  REQUIRE_MESSAGE(diagnostics_clean(diags), diag_dump(diags));
  REQUIRE(goal.size() == 2);
  CHECK(goal[0].name == "Visit");
  CHECK(goal[1].name == "Step");

  diags.clear();
  parse_goal_list("Visit(", diags);
  CHECK_FALSE(diagnostics_clean(diags));
}

TEST_CASE("round trip: printing and reparsing is the identity on the AST") {
  auto round_trip_domain = [](const std::string &src) {
    DomainParse first = parse_domain(src);
    REQUIRE_MESSAGE(first.ok(), diag_dump(first.diagnostics));
    std::string printed = print_domain(first.domain);
    DomainParse second = parse_domain(printed);
    REQUIRE_MESSAGE(second.ok(), std::string("reprint failed to parse:\n")
                                     .append(printed)
                                     .append(diag_dump(second.diagnostics)));
    CHECK_MESSAGE(first.domain == second.domain, printed);
    // Printing is canonical: a second round is byte-identical.
    CHECK(print_domain(second.domain) == printed);
  };

  round_trip_domain(kTinyDomain);
  round_trip_domain(testsupport::read_file(std::string(HATP_DOMAIN_DIR) + "/dwr.hatp"));
  round_trip_domain(testsupport::read_file(std::string(HATP_DOMAIN_DIR) + "/dwr3_select.hatp"));
  round_trip_domain(testsupport::read_file(std::string(HATP_DOMAIN_DIR) + "/dwr3_once.hatp"));
}

TEST_CASE("round trip: problems") {
  DomainParse dp = parse_domain(kTinyDomain);
  REQUIRE(dp.ok());
  ProblemParse first = parse_problem(kTinyProblem, dp.domain);
  REQUIRE(first.ok());
  std::string printed = print_problem(first.problem);
  ProblemParse second = parse_problem(printed, dp.domain);
  REQUIRE_MESSAGE(second.ok(), std::string("reprint failed to parse:\n")
                                   .append(printed)
                                   .append(diag_dump(second.diagnostics)));
  CHECK_MESSAGE(first.problem == second.problem, printed);

  DomainParse dwr = parse_domain(
      testsupport::read_file(std::string(HATP_DOMAIN_DIR) + "/dwr.hatp"));
  REQUIRE(dwr.ok());
  ProblemParse p1 = parse_problem(
      testsupport::read_file(std::string(HATP_DOMAIN_DIR) + "/dwr.hatpp"), dwr.domain);
  REQUIRE_MESSAGE(p1.ok(), diag_dump(p1.diagnostics));
  ProblemParse p2 = parse_problem(print_problem(p1.problem), dwr.domain);
  REQUIRE(p2.ok());
  CHECK(p1.problem == p2.problem);
}

TEST_CASE("round trip: random courier problems") {
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    testsupport::CourierSources src = testsupport::random_courier(seed);
    DomainParse dp = parse_domain(src.domainText);
    REQUIRE_MESSAGE(dp.ok(), diag_dump(dp.diagnostics));
    ProblemParse pp = parse_problem(src.problemText, dp.domain);
    REQUIRE_MESSAGE(pp.ok(), diag_dump(pp.diagnostics));

    DomainParse dp2 = parse_domain(print_domain(dp.domain));
    REQUIRE(dp2.ok());
    CHECK(dp.domain == dp2.domain);
    ProblemParse pp2 = parse_problem(print_problem(pp.problem), dp.domain);
    REQUIRE(pp2.ok());
    CHECK(pp.problem == pp2.problem);
  }
}
