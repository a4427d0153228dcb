#include "hatp/parser.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <string>

#include "hatp/lexer.hpp"

namespace hatp {

const EntityTypeDecl *DomainAst::find_type(const std::string &name) const {
  for (const auto &t : entityTypes)
    if (t.name == name) return &t;
  return nullptr;
}

const MethodDecl *DomainAst::find_method(const std::string &taskName) const {
  for (const auto &m : methods)
    if (m.taskName == taskName) return &m;
  return nullptr;
}

const OperatorDecl *DomainAst::find_operator(const std::string &name) const {
  for (const auto &o : operators)
    if (o.name == name) return &o;
  return nullptr;
}

namespace {

// Thrown to unwind to the nearest statement boundary after a diagnostic has
// been recorded. Never escapes the parser entry points.
struct ParseBail {};

// Condition context controls construct placement: EXIST is legal only inside
// preconditions, IF only inside effects.
enum class CondContext { Precondition, EffectGuard, SelectorFilter };

class ParserBase {
public:
  ParserBase(std::string_view text, std::vector<Diagnostic> &diags)
      : diags_(diags), toks_(lex(text, diags)) {}

protected:
  std::vector<Diagnostic> &diags_;
  std::vector<Token> toks_;
  size_t pos_ = 0;

  const Token &cur() const { return toks_[pos_]; }
  const Token &peek(size_t k = 1) const {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  bool at(Tok k) const { return cur().kind == k; }
  bool at_kw(std::string_view kw) const {
    return cur().kind == Tok::Ident && cur().text == kw;
  }
  void advance() {
    if (cur().kind != Tok::End) ++pos_;
  }
  bool accept(Tok k) {
    if (!at(k)) return false;
    advance();
    return true;
  }
  bool accept_kw(std::string_view kw) {
    if (!at_kw(kw)) return false;
    advance();
    return true;
  }
  [[noreturn]] void fail(const std::string &msg) { fail_at(cur().span, msg); }
  [[noreturn]] void fail_at(SourceSpan span, const std::string &msg) {
    diags_.push_back({Severity::Error, span, msg});
    throw ParseBail{};
  }
  Token expect(Tok k, std::string_view what) {
    if (!at(k)) {
      fail("expected " + std::string(token_name(k)) + " " + std::string(what) +
           ", found " + describe(cur()));
    }
    Token t = cur();
    advance();
    return t;
  }
  Token expect_kw(std::string_view kw) {
    if (!at_kw(kw))
      fail("expected '" + std::string(kw) + "', found " + describe(cur()));
    Token t = cur();
    advance();
    return t;
  }
  static std::string describe(const Token &t) {
    if (t.kind == Tok::Ident) return "'" + t.text + "'";
    if (t.kind == Tok::Int) return "'" + t.text + "'";
    if (t.kind == Tok::String) return "string literal";
    return std::string(token_name(t.kind));
  }

  /// Skips forward past the next ';' at brace depth zero, or stops before an
  /// unmatched '}' / end of input.
  void sync_statement() {
    int depth = 0;
    while (!at(Tok::End)) {
      if (at(Tok::LBrace)) ++depth;
      if (at(Tok::RBrace)) {
        if (depth == 0) return;
        --depth;
      }
      const bool done = at(Tok::Semi) && depth == 0;
      advance();
      if (done) return;
    }
  }

  /// Optional ';' after a '}'-terminated construct.
  void optional_semi() { accept(Tok::Semi); }

  // -- shared grammar ------------------------------------------------------

  Expr parse_expr() {
    const SourceSpan span = cur().span;
    if (at(Tok::Int)) {
      int64_t v = std::stoll(cur().text);
      advance();
      return Literal{int64_t{v}, span};
    }
    if (at(Tok::String)) {
      std::string s = cur().text;
      advance();
      return Literal{std::move(s), span};
    }
    if (at_kw("true")) {
      advance();
      return Literal{true, span};
    }
    if (at_kw("false")) {
      advance();
      return Literal{false, span};
    }
    if (at_kw("NULL")) {
      advance();
      return Literal{NullLit{}, span};
    }
    if (at(Tok::Ident)) {
      NameExpr name;
      name.span = span;
      name.name = cur().text;
      advance();
      while (accept(Tok::Dot))
        name.path.push_back(expect(Tok::Ident, "attribute name").text);
      return name;
    }
    fail("expected expression, found " + describe(cur()));
  }

  std::vector<Expr> parse_arg_list() {
    std::vector<Expr> args;
    expect(Tok::LParen, "to open argument list");
    if (!at(Tok::RParen)) {
      args.push_back(parse_expr());
      while (accept(Tok::Comma)) args.push_back(parse_expr());
    }
    expect(Tok::RParen, "to close argument list");
    return args;
  }

  /// One condition statement. Statement sequences are implicit conjunctions.
  Cond parse_cond_stmt(CondContext ctx) {
    const SourceSpan span = cur().span;
    if (at_kw("EXIST") || at_kw("FORALL")) {
      const bool forall = at_kw("FORALL");
      if (!forall && ctx != CondContext::Precondition)
        fail("EXIST is only allowed in preconditions");
      advance();
      QuantCond q;
      q.span = span;
      q.forall = forall;
      expect(Tok::LParen, "after quantifier");
      q.varType = expect(Tok::Ident, "entity type").text;
      q.varName = expect(Tok::Ident, "variable name").text;
      expect(Tok::Comma, "after quantified variable");
      q.filter = parse_cond_block(ctx);
      expect(Tok::Comma, "between quantifier blocks");
      q.body = parse_cond_block(ctx);
      expect(Tok::RParen, "to close quantifier");
      expect(Tok::Semi, "after quantifier condition");
      return Box<QuantCond>(std::move(q));
    }
    if (at_kw("IF")) fail("IF is only allowed in effects");

    // Predicate call: IDENT '(' ... ')' ';'
    if (at(Tok::Ident) && peek().kind == Tok::LParen) {
      PredicateCall call;
      call.span = span;
      call.name = cur().text;
      advance();
      call.args = parse_arg_list();
      expect(Tok::Semi, "after predicate call");
      return call;
    }

    CompareCond cmp;
    cmp.span = span;
    cmp.lhs = parse_expr();
    if (accept(Tok::EqEq)) {
      cmp.op = CompareOp::Eq;
    } else if (accept(Tok::NotEq)) {
      cmp.op = CompareOp::Ne;
    } else if (accept(Tok::In)) {
      cmp.op = CompareOp::In;
    } else if (accept(Tok::NotIn)) {
      cmp.op = CompareOp::NotIn;
    } else {
      fail("expected '==', '!=', '>>' or '!>>' in condition, found " + describe(cur()));
    }
    cmp.rhs = parse_expr();
    expect(Tok::Semi, "after condition");
    return cmp;
  }

  /// `{ cond* }`
  std::vector<Cond> parse_cond_block(CondContext ctx) {
    std::vector<Cond> conds;
    expect(Tok::LBrace, "to open condition block");
    while (!at(Tok::RBrace) && !at(Tok::End)) {
      try {
        conds.push_back(parse_cond_stmt(ctx));
      } catch (ParseBail &) {
        sync_statement();
      }
    }
    expect(Tok::RBrace, "to close condition block");
    return conds;
  }
};

// ---------------------------------------------------------------------------
// Domain parser
// ---------------------------------------------------------------------------

class DomainParser : public ParserBase {
public:
  using ParserBase::ParserBase;

  DomainAst run() {
    DomainAst ast;
    ast.entityTypes.push_back(EntityTypeDecl{"Agent", {}, SourceSpan{}});
    while (!at(Tok::End)) {
      try {
        parse_decl(ast);
      } catch (ParseBail &) {
        sync_statement();
        // A stray '}' left behind by a malformed block would stall the loop.
        if (at(Tok::RBrace)) advance();
      }
    }
    return ast;
  }

private:
  void parse_decl(DomainAst &ast) {
    if (accept_kw("define")) {
      if (accept_kw("entityType")) {
        parse_entity_type_list(ast);
      } else if (accept_kw("entityAttributes")) {
        parse_entity_attributes(ast);
      } else {
        fail("expected 'entityType' or 'entityAttributes' after 'define'");
      }
      return;
    }
    if (at_kw("method")) {
      parse_method(ast);
      return;
    }
    if (at_kw("action")) {
      parse_action(ast);
      return;
    }
    fail("expected 'define', 'method' or 'action', found " + describe(cur()));
  }

  void parse_entity_type_list(DomainAst &ast) {
    do {
      Token name = expect(Tok::Ident, "entity type name");
      if (ast.find_type(name.text)) {
        diags_.push_back({Severity::Error, name.span,
                          name.text == "Agent"
                              ? "'Agent' is built in and cannot be redeclared"
                              : "duplicate declaration of entity type '" + name.text + "'"});
      } else {
        ast.entityTypes.push_back(EntityTypeDecl{name.text, {}, name.span});
      }
    } while (accept(Tok::Comma));
    expect(Tok::Semi, "after entity type list");
  }

  void parse_entity_attributes(DomainAst &ast) {
    Token name = expect(Tok::Ident, "entity type name");
    EntityTypeDecl *type = nullptr;
    for (auto &t : ast.entityTypes)
      if (t.name == name.text) type = &t;
    if (!type)
      diags_.push_back({Severity::Error, name.span,
                        "unknown entity type '" + name.text + "'"});
    else if (!type->attributes.empty())
      diags_.push_back({Severity::Error, name.span,
                        "duplicate attribute block for entity type '" + name.text + "'"});
    expect(Tok::LBrace, "to open attribute block");
    while (!at(Tok::RBrace) && !at(Tok::End)) {
      try {
        AttributeDecl attr = parse_attribute();
        if (type) {
          const bool dup = std::any_of(
              type->attributes.begin(), type->attributes.end(),
              [&](const AttributeDecl &a) { return a.name == attr.name; });
          if (dup)
            diags_.push_back({Severity::Error, attr.span,
                              "duplicate declaration of attribute '" + attr.name +
                                  "' in entity type '" + name.text + "'"});
          else
            type->attributes.push_back(std::move(attr));
        }
      } catch (ParseBail &) {
        sync_statement();
      }
    }
    expect(Tok::RBrace, "to close attribute block");
    optional_semi();
  }

  AttributeDecl parse_attribute() {
    AttributeDecl attr;
    attr.span = cur().span;
    if (accept_kw("static")) {
      attr.mutability = Mutability::Static;
    } else if (accept_kw("dynamic")) {
      attr.mutability = Mutability::Dynamic;
    } else {
      fail("expected 'static' or 'dynamic', found " + describe(cur()));
    }
    if (accept_kw("atom")) {
      attr.arity = SlotArity::Atom;
    } else if (accept_kw("set")) {
      attr.arity = SlotArity::Set;
    } else {
      fail("expected 'atom' or 'set', found " + describe(cur()));
    }
    Token typeName = expect(Tok::Ident, "attribute value type");
    attr.type = resolve_type_ref(typeName);
    attr.name = expect(Tok::Ident, "attribute name").text;
    expect(Tok::Semi, "after attribute declaration");
    return attr;
  }

  TypeRef resolve_type_ref(const Token &name) {
    if (name.text == "bool") return {ScalarKind::Bool, {}};
    if (name.text == "int") return {ScalarKind::Int, {}};
    if (name.text == "string") return {ScalarKind::String, {}};
    return {ScalarKind::Entity, name.text};  // resolved against declared types later
  }

  std::vector<Param> parse_params() {
    std::vector<Param> params;
    expect(Tok::LParen, "to open parameter list");
    if (!at(Tok::RParen)) {
      do {
        Param p;
        p.span = cur().span;
        p.type = expect(Tok::Ident, "parameter type").text;
        p.name = expect(Tok::Ident, "parameter name").text;
        params.push_back(std::move(p));
      } while (accept(Tok::Comma));
    }
    expect(Tok::RParen, "to close parameter list");
    return params;
  }

  void parse_method(DomainAst &ast) {
    expect_kw("method");
    MethodDecl m;
    Token name = expect(Tok::Ident, "method name");
    m.span = name.span;
    m.name = name.text;
    m.taskName = name.text;
    m.params = parse_params();
    expect(Tok::LBrace, "to open method body");
    while (!at(Tok::RBrace) && !at(Tok::End)) {
      try {
        if (accept_kw("empty")) {
          auto conds = parse_cond_block(CondContext::Precondition);
          expect(Tok::Semi, "after empty case");
          if (m.emptyCondition)
            diags_.push_back({Severity::Error, name.span,
                              "method '" + m.name + "' declares more than one empty case"});
          else
            m.emptyCondition = std::move(conds);
          continue;
        }
        m.cases.push_back(parse_method_case());
      } catch (ParseBail &) {
        sync_statement();
      }
    }
    expect(Tok::RBrace, "to close method body");
    optional_semi();

    check_body_labels(m);
    if (ast.find_method(m.taskName) || ast.find_operator(m.name)) {
      diags_.push_back({Severity::Error, m.span,
                        "duplicate declaration of task '" + m.name + "'"});
    } else {
      ast.methods.push_back(std::move(m));
    }
  }

  MethodCase parse_method_case() {
    MethodCase c;
    c.span = cur().span;
    expect(Tok::LBrace, "to open decomposition case");
    if (accept_kw("preconditions")) {
      c.precondition = parse_cond_block(CondContext::Precondition);
      expect(Tok::Semi, "after preconditions block");
    }
    expect_kw("subtasks");
    c.body = parse_method_body();
    expect(Tok::Semi, "after subtasks block");
    expect(Tok::RBrace, "to close decomposition case");
    optional_semi();
    return c;
  }

  MethodBody parse_method_body() {
    MethodBody body;
    body.span = cur().span;
    expect(Tok::LBrace, "to open subtasks block");
    while (!at(Tok::RBrace) && !at(Tok::End)) {
      try {
        parse_body_stmt(body);
      } catch (ParseBail &) {
        sync_statement();
      }
    }
    expect(Tok::RBrace, "to close subtasks block");
    return body;
  }

  void parse_body_stmt(MethodBody &body) {
    // `N: Task(...)` / `Var = SELECT...` / `Task(...)`
    if (at(Tok::Int)) {
      Token label = cur();
      advance();
      expect(Tok::Colon, "after subtask label");
      body.subtasks.push_back(parse_subtask(std::stoi(label.text), label.span));
      return;
    }
    if (at(Tok::Ident) && peek().kind == Tok::Assign) {
      body.selectors.push_back(parse_selector());
      return;
    }
    body.subtasks.push_back(parse_subtask(0, cur().span));
  }

  Subtask parse_subtask(int label, SourceSpan span) {
    Subtask st;
    st.span = span;
    st.label = label;
    st.task.span = cur().span;
    st.task.name = expect(Tok::Ident, "task name").text;
    st.task.args = parse_arg_list();
    while (accept(Tok::Greater)) {
      Token pred = expect(Tok::Int, "predecessor label");
      st.predecessors.push_back(std::stoi(pred.text));
    }
    expect(Tok::Semi, "after subtask");
    return st;
  }

  SelectorDecl parse_selector() {
    SelectorDecl sel;
    sel.span = cur().span;
    sel.var = expect(Tok::Ident, "selector variable").text;
    expect(Tok::Assign, "in selector");
    if (accept_kw("SELECT")) {
      sel.kind = SelectorKind::Select;
    } else if (accept_kw("SELECTORDERED")) {
      sel.kind = SelectorKind::SelectOrdered;
    } else if (accept_kw("SELECTONCE")) {
      sel.kind = SelectorKind::SelectOnce;
    } else {
      fail("expected SELECT, SELECTORDERED or SELECTONCE, found " + describe(cur()));
    }
    expect(Tok::LParen, "after selector keyword");
    sel.entityType = expect(Tok::Ident, "entity type").text;
    expect(Tok::Comma, "after selector type");
    sel.filter = parse_cond_block(CondContext::SelectorFilter);
    if (sel.kind == SelectorKind::SelectOrdered) {
      expect(Tok::Comma, "before ordering function");
      FnRef fn;
      fn.span = cur().span;
      fn.name = expect(Tok::Ident, "ordering function name").text;
      fn.args = parse_arg_list();
      sel.orderingFn = std::move(fn);
      expect(Tok::Comma, "before ordering direction");
      // `<` sorts the candidates by descending key, `>` by ascending key.
      if (accept(Tok::Less)) {
        sel.direction = SortDirection::Descending;
      } else if (accept(Tok::Greater)) {
        sel.direction = SortDirection::Ascending;
      } else {
        fail("expected '<' or '>' ordering direction, found " + describe(cur()));
      }
    }
    expect(Tok::RParen, "to close selector");
    expect(Tok::Semi, "after selector");
    return sel;
  }

  /// Assigns fresh labels to unlabelled subtasks, then checks uniqueness,
  /// constraint targets and acyclicity for every case body.
  void check_body_labels(MethodDecl &m) {
    for (auto &c : m.cases) {
      std::set<int> used;
      for (auto &st : c.body.subtasks) {
        if (st.label != 0 && !used.insert(st.label).second)
          diags_.push_back({Severity::Error, st.span,
                            "duplicate subtask label " + std::to_string(st.label)});
      }
      int next = 1;
      for (auto &st : c.body.subtasks) {
        if (st.label == 0) {
          while (used.count(next)) ++next;
          st.label = next;
          used.insert(next);
        }
      }
      for (auto &st : c.body.subtasks) {
        for (int pred : st.predecessors) {
          if (!used.count(pred))
            diags_.push_back({Severity::Error, st.span,
                              "ordering constraint references unknown label " +
                                  std::to_string(pred)});
          if (pred == st.label)
            diags_.push_back({Severity::Error, st.span,
                              "subtask " + std::to_string(st.label) +
                                  " cannot precede itself"});
        }
      }
      if (has_cycle(c.body))
        diags_.push_back({Severity::Error, c.body.span,
                          "ordering constraints in method '" + m.name +
                              "' form a cycle"});
    }
  }

  static bool has_cycle(const MethodBody &body) {
    // Colors: 0 unvisited, 1 on stack, 2 done.
    std::map<int, int> color;
    std::map<int, std::vector<int>> succ;
    for (const auto &st : body.subtasks)
      for (int pred : st.predecessors) succ[pred].push_back(st.label);
    std::function<bool(int)> visit = [&](int label) {
      color[label] = 1;
      for (int next : succ[label]) {
        if (color[next] == 1) return true;
        if (color[next] == 0 && visit(next)) return true;
      }
      color[label] = 2;
      return false;
    };
    for (const auto &st : body.subtasks)
      if (color[st.label] == 0 && visit(st.label)) return true;
    return false;
  }

  void parse_action(DomainAst &ast) {
    expect_kw("action");
    OperatorDecl op;
    Token name = expect(Tok::Ident, "action name");
    op.span = name.span;
    op.name = name.text;
    op.params = parse_params();
    if (op.params.empty())
      diags_.push_back({Severity::Error, op.span,
                        "action '" + op.name +
                            "' has no parameters; the first parameter names the executing agent"});
    expect(Tok::LBrace, "to open action body");
    bool sawCost = false;
    while (!at(Tok::RBrace) && !at(Tok::End)) {
      try {
        if (accept_kw("preconditions")) {
          op.precondition = parse_cond_block(CondContext::Precondition);
          optional_semi();
        } else if (accept_kw("effects")) {
          op.effects = parse_effect_block();
          optional_semi();
        } else if (at_kw("cost") || at_kw("duration")) {
          const bool isCost = cur().text == "cost";
          advance();
          expect(Tok::LBrace, "to open function reference");
          FnRef fn;
          fn.span = cur().span;
          fn.name = expect(Tok::Ident, "function name").text;
          fn.args = parse_arg_list();
          accept(Tok::Semi);
          expect(Tok::RBrace, "to close function reference");
          optional_semi();
          if (isCost) {
            op.costFn = std::move(fn);
            sawCost = true;
          } else {
            op.durationFn = std::move(fn);
          }
        } else {
          fail("expected 'preconditions', 'effects', 'cost' or 'duration', found " +
               describe(cur()));
        }
      } catch (ParseBail &) {
        sync_statement();
      }
    }
    expect(Tok::RBrace, "to close action body");
    optional_semi();

    if (!sawCost) {
      // Actions without an explicit cost charge one unit.
      op.costFn = FnRef{"const_1", {}, op.span};
    }
    if (ast.find_operator(op.name) || ast.find_method(op.name)) {
      diags_.push_back({Severity::Error, op.span,
                        "duplicate declaration of task '" + op.name + "'"});
    } else {
      ast.operators.push_back(std::move(op));
    }
  }

  std::vector<Effect> parse_effect_block() {
    std::vector<Effect> effects;
    expect(Tok::LBrace, "to open effects block");
    while (!at(Tok::RBrace) && !at(Tok::End)) {
      try {
        effects.push_back(parse_effect_stmt());
      } catch (ParseBail &) {
        sync_statement();
      }
    }
    expect(Tok::RBrace, "to close effects block");
    return effects;
  }

  Effect parse_effect_stmt() {
    const SourceSpan span = cur().span;
    if (at_kw("EXIST"))
      fail("EXIST is only allowed in preconditions");
    if (accept_kw("IF")) {
      IfEffect e;
      e.span = span;
      e.guard = parse_cond_block(CondContext::EffectGuard);
      e.body = parse_effect_block();
      optional_semi();
      return Box<IfEffect>(std::move(e));
    }
    if (accept_kw("FORALL")) {
      ForallEffect e;
      e.span = span;
      expect(Tok::LParen, "after FORALL");
      e.varType = expect(Tok::Ident, "entity type").text;
      e.varName = expect(Tok::Ident, "variable name").text;
      expect(Tok::Comma, "after quantified variable");
      e.filter = parse_cond_block(CondContext::EffectGuard);
      expect(Tok::Comma, "between FORALL blocks");
      e.body = parse_effect_block();
      expect(Tok::RParen, "to close FORALL");
      expect(Tok::Semi, "after FORALL effect");
      return Box<ForallEffect>(std::move(e));
    }

    WriteEffect w;
    w.span = span;
    w.target.span = span;
    w.target.name = expect(Tok::Ident, "entity or variable").text;
    if (!at(Tok::Dot))
      fail("effect target must be an attribute access such as 'X.attr'");
    while (accept(Tok::Dot))
      w.target.path.push_back(expect(Tok::Ident, "attribute name").text);
    if (accept(Tok::Assign)) {
      w.op = WriteOp::Assign;
    } else if (accept(Tok::SetAdd)) {
      w.op = WriteOp::SetAdd;
    } else if (accept(Tok::SetRem)) {
      w.op = WriteOp::SetRemove;
    } else {
      fail("expected '=', '<<=' or '=>>' in effect, found " + describe(cur()));
    }
    w.value = parse_expr();
    expect(Tok::Semi, "after effect");
    return w;
  }
};

// ---------------------------------------------------------------------------
// Problem parser
// ---------------------------------------------------------------------------

class ProblemParser : public ParserBase {
public:
  ProblemParser(std::string_view text, const DomainAst &schema,
                std::vector<Diagnostic> &diags)
      : ParserBase(text, diags), schema_(schema) {}

  ProblemAst run() {
    ProblemAst ast;
    while (!at(Tok::End)) {
      try {
        parse_stmt(ast);
      } catch (ParseBail &) {
        sync_statement();
        if (at(Tok::RBrace)) advance();
      }
    }
    return ast;
  }

private:
  const DomainAst &schema_;
  // entity name -> type name, in declaration order for duplicate checks
  std::map<std::string, std::string> entities_;
  std::set<std::pair<std::string, std::string>> sealedStatics_;

  void parse_stmt(ProblemAst &ast) {
    if (at_kw("table") && peek().kind == Tok::Ident) {
      parse_table(ast);
      return;
    }
    if (at_kw("goal") && peek().kind == Tok::LBrace) {
      parse_goal(ast);
      return;
    }
    if (at(Tok::Ident) &&
        (peek().kind == Tok::Comma ||
         (peek().kind == Tok::Assign && peek(2).kind == Tok::Ident &&
          peek(2).text == "new"))) {
      parse_instantiation(ast);
      return;
    }
    if (at(Tok::Ident) && peek().kind == Tok::Dot) {
      parse_assignment(ast);
      return;
    }
    fail("expected instantiation, assignment, table or goal, found " + describe(cur()));
  }

  void parse_instantiation(ProblemAst &ast) {
    Instantiation inst;
    inst.span = cur().span;
    do {
      inst.names.push_back(expect(Tok::Ident, "entity name").text);
    } while (accept(Tok::Comma));
    expect(Tok::Assign, "in instantiation");
    expect_kw("new");
    Token type = expect(Tok::Ident, "entity type");
    inst.typeName = type.text;
    expect(Tok::Semi, "after instantiation");

    if (!schema_.find_type(inst.typeName)) {
      diags_.push_back({Severity::Error, type.span,
                        "unknown entity type '" + inst.typeName + "'"});
      return;
    }
    for (const auto &name : inst.names) {
      if (!entities_.emplace(name, inst.typeName).second)
        diags_.push_back({Severity::Error, inst.span,
                          "duplicate instantiation of entity '" + name + "'"});
    }
    ast.instantiations.push_back(std::move(inst));
  }

  void parse_assignment(ProblemAst &ast) {
    InitAssign a;
    a.span = cur().span;
    a.entity = expect(Tok::Ident, "entity name").text;
    expect(Tok::Dot, "in assignment");
    a.attribute = expect(Tok::Ident, "attribute name").text;
    if (at(Tok::Dot))
      fail("initial state assigns direct attributes only ('E.attr = value')");
    if (accept(Tok::Assign)) {
      a.op = WriteOp::Assign;
    } else if (accept(Tok::SetAdd)) {
      a.op = WriteOp::SetAdd;
    } else {
      fail("expected '=' or '<<=' in initial assignment, found " + describe(cur()));
    }
    a.value = parse_expr();
    expect(Tok::Semi, "after assignment");

    check_assignment(a);
    ast.assignments.push_back(std::move(a));
  }

  void check_assignment(const InitAssign &a) {
    auto entityIt = entities_.find(a.entity);
    if (entityIt == entities_.end()) {
      diags_.push_back({Severity::Error, a.span, "unknown entity '" + a.entity + "'"});
      return;
    }
    const EntityTypeDecl *type = schema_.find_type(entityIt->second);
    const AttributeDecl *attr = nullptr;
    for (const auto &ad : type->attributes)
      if (ad.name == a.attribute) attr = &ad;
    if (!attr) {
      diags_.push_back({Severity::Error, a.span,
                        "entity type '" + type->name + "' declares no attribute '" +
                            a.attribute + "'"});
      return;
    }
    if (attr->arity == SlotArity::Set && a.op == WriteOp::Assign) {
      diags_.push_back({Severity::Error, a.span,
                        "attribute '" + a.attribute + "' is a set; use '<<=' to add elements"});
      return;
    }
    if (attr->arity == SlotArity::Atom && a.op == WriteOp::SetAdd) {
      diags_.push_back({Severity::Error, a.span,
                        "attribute '" + a.attribute + "' is an atom; use '='"});
      return;
    }
    if (attr->mutability == Mutability::Static && a.op == WriteOp::Assign) {
      if (!sealedStatics_.insert({a.entity, a.attribute}).second)
        diags_.push_back({Severity::Error, a.span,
                          "static attribute '" + a.entity + "." + a.attribute +
                              "' is already assigned"});
    }
    check_value_type(a.value, attr->type, a.entity + "." + a.attribute, a.span);
  }

  void check_value_type(const Expr &value, const TypeRef &expected,
                        const std::string &target, SourceSpan span) {
    if (const auto *lit = std::get_if<Literal>(&value)) {
      if (std::holds_alternative<NullLit>(lit->value)) return;  // NULL fits any atom
      const char *got = nullptr;
      bool match = false;
      if (std::holds_alternative<bool>(lit->value)) {
        got = "bool";
        match = expected.kind == ScalarKind::Bool;
      } else if (std::holds_alternative<int64_t>(lit->value)) {
        got = "int";
        match = expected.kind == ScalarKind::Int;
      } else {
        got = "string";
        match = expected.kind == ScalarKind::String;
      }
      if (!match)
        diags_.push_back({Severity::Error, span,
                          "type mismatch assigning to '" + target + "': expected " +
                              type_name(expected) + ", got " + got});
      return;
    }
    const auto &name = std::get<NameExpr>(value);
    if (!name.path.empty()) {
      diags_.push_back({Severity::Error, span,
                        "initial values must be literals or entity names"});
      return;
    }
    auto it = entities_.find(name.name);
    if (it == entities_.end()) {
      diags_.push_back({Severity::Error, span, "unknown entity '" + name.name + "'"});
      return;
    }
    if (expected.kind != ScalarKind::Entity || it->second != expected.entity)
      diags_.push_back({Severity::Error, span,
                        "type mismatch assigning to '" + target + "': expected " +
                            type_name(expected) + ", got " + it->second + " '" +
                            name.name + "'"});
  }

  static std::string type_name(const TypeRef &t) {
    switch (t.kind) {
      case ScalarKind::Bool: return "bool";
      case ScalarKind::Int: return "int";
      case ScalarKind::String: return "string";
      case ScalarKind::Entity: return t.entity;
    }
    return "?";
  }

  void parse_table(ProblemAst &ast) {
    expect_kw("table");
    TableDeclAst table;
    Token name = expect(Tok::Ident, "table name");
    table.span = name.span;
    table.name = name.text;
    expect(Tok::LParen, "to open table columns");
    do {
      Token col = expect(Tok::Ident, "column type");
      const bool scalar = col.text == "bool" || col.text == "int" || col.text == "string";
      if (!scalar && !schema_.find_type(col.text))
        diags_.push_back({Severity::Error, col.span,
                          "unknown entity type '" + col.text + "' in table column"});
      table.columnTypes.push_back(col.text);
    } while (accept(Tok::Comma));
    expect(Tok::RParen, "to close table columns");
    expect(Tok::LBrace, "to open table entries");
    while (!at(Tok::RBrace) && !at(Tok::End)) {
      try {
        parse_table_entry(table);
      } catch (ParseBail &) {
        sync_statement();
      }
    }
    expect(Tok::RBrace, "to close table entries");
    optional_semi();
    for (const auto &existing : ast.tables)
      if (existing.name == table.name)
        diags_.push_back({Severity::Error, table.span,
                          "duplicate declaration of table '" + table.name + "'"});
    ast.tables.push_back(std::move(table));
  }

  void parse_table_entry(TableDeclAst &table) {
    if (accept_kw("default")) {
      expect(Tok::Assign, "after 'default'");
      Rational v = parse_rational();
      expect(Tok::Semi, "after table default");
      if (table.defaultValue)
        diags_.push_back({Severity::Error, table.span,
                          "table '" + table.name + "' declares more than one default"});
      table.defaultValue = v;
      return;
    }
    TableEntry entry;
    entry.span = cur().span;
    expect(Tok::LParen, "to open table key");
    do {
      entry.keys.push_back(parse_expr());
    } while (accept(Tok::Comma));
    expect(Tok::RParen, "to close table key");
    expect(Tok::Assign, "in table entry");
    entry.value = parse_rational();
    expect(Tok::Semi, "after table entry");

    if (entry.keys.size() != table.columnTypes.size()) {
      diags_.push_back({Severity::Error, entry.span,
                        "table '" + table.name + "' key has " +
                            std::to_string(entry.keys.size()) + " components, expected " +
                            std::to_string(table.columnTypes.size())});
      return;
    }
    for (size_t i = 0; i < entry.keys.size(); ++i) {
      const std::string &col = table.columnTypes[i];
      TypeRef expected;
      if (col == "bool") expected = {ScalarKind::Bool, {}};
      else if (col == "int") expected = {ScalarKind::Int, {}};
      else if (col == "string") expected = {ScalarKind::String, {}};
      else expected = {ScalarKind::Entity, col};
      check_value_type(entry.keys[i], expected, table.name + " key", entry.span);
    }
    table.entries.push_back(std::move(entry));
  }

  Rational parse_rational() {
    Token num = expect(Tok::Int, "numeric value");
    int64_t n = std::stoll(num.text);
    if (accept(Tok::Slash)) {
      Token den = expect(Tok::Int, "denominator");
      int64_t d = std::stoll(den.text);
      if (d == 0) fail_at(den.span, "zero denominator in table value");
      return Rational(n, d);
    }
    return Rational(n);
  }

  void parse_goal(ProblemAst &ast) {
    expect_kw("goal");
    expect(Tok::LBrace, "to open goal block");
    while (!at(Tok::RBrace) && !at(Tok::End)) {
      try {
        TaskInvocationAst task;
        task.span = cur().span;
        task.name = expect(Tok::Ident, "task name").text;
        task.args = parse_arg_list();
        expect(Tok::Semi, "after goal task");
        for (const auto &arg : task.args) {
          if (const auto *name = std::get_if<NameExpr>(&arg)) {
            if (!name->path.empty())
              diags_.push_back({Severity::Error, name->span,
                                "goal arguments must be literals or entity names"});
            else if (!entities_.count(name->name))
              diags_.push_back({Severity::Error, name->span,
                                "unknown entity '" + name->name + "'"});
          }
        }
        ast.goal.push_back(std::move(task));
      } catch (ParseBail &) {
        sync_statement();
      }
    }
    expect(Tok::RBrace, "to close goal block");
    optional_semi();
  }
};

}  // namespace

DomainParse parse_domain(std::string_view text) {
  DomainParse result;
  DomainParser parser(text, result.diagnostics);
  result.domain = parser.run();

  // Entity-typed attribute values must reference declared types.
  for (const auto &type : result.domain.entityTypes) {
    for (const auto &attr : type.attributes) {
      if (attr.type.kind == ScalarKind::Entity &&
          !result.domain.find_type(attr.type.entity)) {
        result.diagnostics.push_back(
            {Severity::Error, attr.span,
             "unknown type '" + attr.type.entity + "' for attribute '" + type.name +
                 "." + attr.name + "'"});
      }
    }
  }
  return result;
}

ProblemParse parse_problem(std::string_view text, const DomainAst &schema) {
  ProblemParse result;
  ProblemParser parser(text, schema, result.diagnostics);
  result.problem = parser.run();
  return result;
}

std::vector<TaskInvocationAst> parse_goal_list(std::string_view text,
                                               std::vector<Diagnostic> &diags) {
  // Reuse the problem grammar by wrapping the list in a goal block. Entity
  // names cannot be resolved here; the planner grounds them against the state.
  std::string wrapped = "goal { ";
  wrapped += text;
  // A trailing ';' is optional on the last task.
  auto lastNonSpace = wrapped.find_last_not_of(" \t\r\n");
  if (lastNonSpace != std::string::npos && wrapped[lastNonSpace] != ';') wrapped += ";";
  wrapped += " }";

  std::vector<Diagnostic> local;
  DomainAst emptySchema;
  ProblemParser parser(wrapped, emptySchema, local);
  ProblemAst ast = parser.run();
  for (auto &d : local) {
    // Entity lookups are deferred; surface only syntax problems.
    if (d.message.rfind("unknown entity", 0) == 0) continue;
    diags.push_back(std::move(d));
  }
  return std::move(ast.goal);
}

}  // namespace hatp
