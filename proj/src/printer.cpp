#include "hatp/printer.hpp"

#include <sstream>

namespace hatp {

namespace {

std::string escape(const std::string &s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out;
}

class Printer {
public:
  std::string take() { return std::move(out_).str(); }

  void line(const std::string &text) {
    for (int i = 0; i < indent_; ++i) out_ << "  ";
    out_ << text << "\n";
  }
  void open(const std::string &text) {
    line(text + " {");
    ++indent_;
  }
  void close(const std::string &suffix = ";") {
    --indent_;
    line("}" + suffix);
  }

  void cond_block_inline(std::ostringstream &os, const std::vector<Cond> &conds) {
    os << "{";
    for (const auto &c : conds) os << print_cond(c);
    os << "}";
  }

  void conds(const std::string &head, const std::vector<Cond> &cs) {
    std::ostringstream os;
    os << head;
    cond_block_inline(os, cs);
    os << ";";
    line(os.str());
  }

  void effects_block(const std::vector<Effect> &effects) {
    for (const auto &e : effects) effect(e);
  }

  void effect(const Effect &e) {
    if (const auto *w = std::get_if<WriteEffect>(&e)) {
      const char *op = w->op == WriteOp::Assign ? " = "
                       : w->op == WriteOp::SetAdd ? " <<= "
                                                  : " =>> ";
      line(print_expr(Expr{w->target}) + op + print_expr(w->value) + ";");
      return;
    }
    if (const auto *boxed = std::get_if<Box<IfEffect>>(&e)) {
      const IfEffect &ife = **boxed;
      std::ostringstream os;
      os << "IF";
      cond_block_inline(os, ife.guard);
      open(os.str());
      effects_block(ife.body);
      close(";");
      return;
    }
    const ForallEffect &fa = **std::get_if<Box<ForallEffect>>(&e);
    std::ostringstream os;
    os << "FORALL(" << fa.varType << " " << fa.varName << ", ";
    cond_block_inline(os, fa.filter);
    os << ",";
    open(os.str());
    effects_block(fa.body);
    close(");");
  }

private:
  std::ostringstream out_;
  int indent_ = 0;
};

std::string args_list(const std::vector<Expr> &args) {
  std::string out = "(";
  for (size_t i = 0; i < args.size(); ++i) {
    if (i) out += ", ";
    out += print_expr(args[i]);
  }
  return out + ")";
}

std::string fn_ref(const FnRef &fn) { return fn.name + args_list(fn.args); }

const char *type_ref(const TypeRef &t) {
  switch (t.kind) {
    case ScalarKind::Bool: return "bool";
    case ScalarKind::Int: return "int";
    case ScalarKind::String: return "string";
    case ScalarKind::Entity: return t.entity.c_str();
  }
  return "?";
}

}  // namespace

std::string print_expr(const Expr &expr) {
  if (const auto *lit = std::get_if<Literal>(&expr)) {
    if (std::holds_alternative<NullLit>(lit->value)) return "NULL";
    if (const auto *b = std::get_if<bool>(&lit->value)) return *b ? "true" : "false";
    if (const auto *i = std::get_if<int64_t>(&lit->value)) return std::to_string(*i);
    return "\"" + escape(std::get<std::string>(lit->value)) + "\"";
  }
  const auto &name = std::get<NameExpr>(expr);
  std::string out = name.name;
  for (const auto &part : name.path) out += "." + part;
  return out;
}

std::string print_cond(const Cond &cond) {
  if (const auto *cmp = std::get_if<CompareCond>(&cond)) {
    const char *op = nullptr;
    switch (cmp->op) {
      case CompareOp::Eq: op = " == "; break;
      case CompareOp::Ne: op = " != "; break;
      case CompareOp::In: op = " >> "; break;
      case CompareOp::NotIn: op = " !>> "; break;
    }
    return print_expr(cmp->lhs) + op + print_expr(cmp->rhs) + ";";
  }
  if (const auto *call = std::get_if<PredicateCall>(&cond))
    return call->name + args_list(call->args) + ";";
  const QuantCond &q = **std::get_if<Box<QuantCond>>(&cond);
  std::string out = q.forall ? "FORALL(" : "EXIST(";
  out += q.varType + " " + q.varName + ", {";
  for (const auto &c : q.filter) out += print_cond(c);
  out += "}, {";
  for (const auto &c : q.body) out += print_cond(c);
  out += "});";
  return out;
}

std::string print_domain(const DomainAst &domain) {
  Printer p;

  std::string typeList;
  for (const auto &t : domain.entityTypes) {
    if (t.name == "Agent") continue;  // built in, not redeclarable
    if (!typeList.empty()) typeList += ", ";
    typeList += t.name;
  }
  if (!typeList.empty()) p.line("define entityType " + typeList + ";");

  for (const auto &t : domain.entityTypes) {
    if (t.attributes.empty()) continue;
    p.open("define entityAttributes " + t.name);
    for (const auto &a : t.attributes) {
      std::string decl = a.mutability == Mutability::Static ? "static " : "dynamic ";
      decl += a.arity == SlotArity::Atom ? "atom " : "set ";
      decl += std::string(type_ref(a.type)) + " " + a.name + ";";
      p.line(decl);
    }
    p.close(";");
  }

  auto params = [](const std::vector<Param> &ps) {
    std::string out = "(";
    for (size_t i = 0; i < ps.size(); ++i) {
      if (i) out += ", ";
      out += ps[i].type + " " + ps[i].name;
    }
    return out + ")";
  };

  for (const auto &m : domain.methods) {
    p.open("method " + m.name + params(m.params));
    if (m.emptyCondition) p.conds("empty", *m.emptyCondition);
    for (const auto &c : m.cases) {
      p.open("");
      if (!c.precondition.empty()) p.conds("preconditions", c.precondition);
      p.open("subtasks");
      for (const auto &sel : c.body.selectors) {
        std::ostringstream os;
        os << sel.var << " = ";
        switch (sel.kind) {
          case SelectorKind::Select: os << "SELECT"; break;
          case SelectorKind::SelectOrdered: os << "SELECTORDERED"; break;
          case SelectorKind::SelectOnce: os << "SELECTONCE"; break;
        }
        os << "(" << sel.entityType << ", ";
        p.cond_block_inline(os, sel.filter);
        if (sel.orderingFn) {
          os << ", " << fn_ref(*sel.orderingFn) << ", "
             << (sel.direction == SortDirection::Descending ? "<" : ">");
        }
        os << ");";
        p.line(os.str());
      }
      for (const auto &st : c.body.subtasks) {
        std::string stmt = std::to_string(st.label) + ": " + st.task.name +
                           args_list(st.task.args);
        for (int pred : st.predecessors) stmt += " >" + std::to_string(pred);
        p.line(stmt + ";");
      }
      p.close(";");
      p.close(";");
    }
    p.close(";");
  }

  for (const auto &op : domain.operators) {
    p.open("action " + op.name + params(op.params));
    p.conds("preconditions", op.precondition);
    p.open("effects");
    p.effects_block(op.effects);
    p.close(";");
    p.line("cost{" + fn_ref(op.costFn) + "};");
    if (op.durationFn) p.line("duration{" + fn_ref(*op.durationFn) + "};");
    p.close(";");
  }

  return p.take();
}

std::string print_problem(const ProblemAst &problem) {
  Printer p;
  for (const auto &inst : problem.instantiations) {
    std::string names;
    for (size_t i = 0; i < inst.names.size(); ++i) {
      if (i) names += ", ";
      names += inst.names[i];
    }
    p.line(names + " = new " + inst.typeName + ";");
  }
  for (const auto &a : problem.assignments) {
    const char *op = a.op == WriteOp::Assign ? " = " : " <<= ";
    p.line(a.entity + "." + a.attribute + op + print_expr(a.value) + ";");
  }
  for (const auto &t : problem.tables) {
    std::string cols;
    for (size_t i = 0; i < t.columnTypes.size(); ++i) {
      if (i) cols += ", ";
      cols += t.columnTypes[i];
    }
    p.open("table " + t.name + "(" + cols + ")");
    for (const auto &e : t.entries)
      p.line(args_list(e.keys) + " = " + e.value.str() + ";");
    if (t.defaultValue) p.line("default = " + t.defaultValue->str() + ";");
    p.close(";");
  }
  if (!problem.goal.empty()) {
    p.open("goal");
    for (const auto &g : problem.goal)
      p.line(g.name + args_list(g.args) + ";");
    p.close(";");
  }
  return p.take();
}

}  // namespace hatp
