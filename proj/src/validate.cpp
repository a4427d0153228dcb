#include "hatp/validate.hpp"

#include <map>
#include <optional>
#include <string>

namespace hatp {

namespace {

std::string type_text(const TypeRef &t) {
  switch (t.kind) {
    case ScalarKind::Bool: return "bool";
    case ScalarKind::Int: return "int";
    case ScalarKind::String: return "string";
    case ScalarKind::Entity: return t.entity;
  }
  return "?";
}

/// Statically inferred type of an expression. An unset `type` means the
/// problem was already reported and further checks should stay quiet.
struct TypeInfo {
  std::optional<TypeRef> type;
  bool isSet = false;
  bool isNull = false;
};

class Checker {
public:
  Checker(const DomainAst &domain, const FunctionRegistry *registry)
      : domain_(domain), registry_(registry) {}

  std::vector<Diagnostic> run() {
    for (const auto &m : domain_.methods) check_method(m);
    for (const auto &op : domain_.operators) check_operator(op);
    return std::move(diags_);
  }

private:
  const DomainAst &domain_;
  const FunctionRegistry *registry_;
  std::vector<Diagnostic> diags_;
  std::map<std::string, TypeRef> vars_;
  std::string context_;

  void error(SourceSpan span, const std::string &msg) {
    diags_.push_back({Severity::Error, span, "in " + context_ + ": " + msg});
  }

  TypeRef param_type(const Param &p) {
    if (p.type == "bool") return {ScalarKind::Bool, {}};
    if (p.type == "int") return {ScalarKind::Int, {}};
    if (p.type == "string") return {ScalarKind::String, {}};
    if (!domain_.find_type(p.type))
      error(p.span, "unknown type '" + p.type + "' for parameter '" + p.name + "'");
    return {ScalarKind::Entity, p.type};
  }

  void bind_var(SourceSpan span, const std::string &name, TypeRef type) {
    if (vars_.count(name))
      error(span, "'" + name + "' shadows an existing binding");
    vars_[name] = std::move(type);
  }

  void check_entity_type(SourceSpan span, const std::string &name,
                         const std::string &what) {
    if (!domain_.find_type(name))
      error(span, "unknown entity type '" + name + "' in " + what);
  }

  // -- expression typing ---------------------------------------------------

  TypeInfo infer(const Expr &expr) {
    if (const auto *lit = std::get_if<Literal>(&expr)) {
      TypeInfo info;
      if (std::holds_alternative<NullLit>(lit->value)) {
        info.isNull = true;
      } else if (std::holds_alternative<bool>(lit->value)) {
        info.type = TypeRef{ScalarKind::Bool, {}};
      } else if (std::holds_alternative<int64_t>(lit->value)) {
        info.type = TypeRef{ScalarKind::Int, {}};
      } else {
        info.type = TypeRef{ScalarKind::String, {}};
      }
      return info;
    }
    const auto &name = std::get<NameExpr>(expr);
    auto it = vars_.find(name.name);
    if (it == vars_.end()) {
      error(name.span, "unknown variable '" + name.name + "'");
      return {};
    }
    TypeRef cur = it->second;
    for (size_t i = 0; i < name.path.size(); ++i) {
      if (cur.kind != ScalarKind::Entity) {
        const std::string &segment = i ? name.path[i - 1] : name.name;
        error(name.span, "'" + segment + "' is not an entity; cannot access '" +
                             name.path[i] + "'");
        return {};
      }
      const EntityTypeDecl *type = domain_.find_type(cur.entity);
      if (!type) return {};  // unknown type reported at parse time
      const AttributeDecl *attr = nullptr;
      for (const auto &a : type->attributes)
        if (a.name == name.path[i]) attr = &a;
      if (!attr) {
        error(name.span, "entity type '" + cur.entity + "' declares no attribute '" +
                             name.path[i] + "'");
        return {};
      }
      if (attr->arity == SlotArity::Set) {
        if (i + 1 != name.path.size()) {
          error(name.span, "cannot traverse through set attribute '" +
                               name.path[i] + "'");
          return {};
        }
        return {attr->type, true, false};
      }
      cur = attr->type;
    }
    return {cur, false, false};
  }

  static bool compatible(const TypeRef &a, const TypeRef &b) {
    if (a.kind != b.kind) return false;
    return a.kind != ScalarKind::Entity || a.entity == b.entity;
  }

  // -- conditions ----------------------------------------------------------

  void check_conditions(const std::vector<Cond> &conds, bool predicatesAllowed) {
    for (const auto &c : conds) check_condition(c, predicatesAllowed);
  }

  void check_condition(const Cond &cond, bool predicatesAllowed) {
    if (const auto *cmp = std::get_if<CompareCond>(&cond)) {
      check_compare(*cmp);
      return;
    }
    if (const auto *call = std::get_if<PredicateCall>(&cond)) {
      if (!predicatesAllowed) {
        error(call->span, "evaluable predicate '" + call->name +
                              "' is only allowed as a top-level action precondition");
      } else if (registry_ && !registry_->has_predicate(call->name)) {
        error(call->span, "unknown evaluable predicate '" + call->name + "'");
      }
      for (const auto &a : call->args) infer(a);
      return;
    }
    const QuantCond &q = **std::get_if<Box<QuantCond>>(&cond);
    check_entity_type(q.span, q.varType, "quantifier");
    const bool hadVar = vars_.count(q.varName) > 0;
    TypeRef saved = hadVar ? vars_[q.varName] : TypeRef{};
    if (hadVar) {
      error(q.span, "'" + q.varName + "' shadows an existing binding");
      vars_[q.varName] = {ScalarKind::Entity, q.varType};
    } else {
      vars_[q.varName] = {ScalarKind::Entity, q.varType};
    }
    check_conditions(q.filter, false);
    check_conditions(q.body, false);
    if (hadVar)
      vars_[q.varName] = saved;
    else
      vars_.erase(q.varName);
  }

  void check_compare(const CompareCond &cmp) {
    if (cmp.op == CompareOp::In || cmp.op == CompareOp::NotIn) {
      TypeInfo lhs = infer(cmp.lhs);
      const auto *rhsName = std::get_if<NameExpr>(&cmp.rhs);
      if (!rhsName || rhsName->path.empty()) {
        error(cmp.span, "right side of '>>' must be a set attribute");
        return;
      }
      TypeInfo rhs = infer(cmp.rhs);
      if (rhs.type && !rhs.isSet) {
        error(cmp.span, "right side of '>>' must be a set attribute, '" +
                            rhsName->path.back() + "' is an atom");
        return;
      }
      if (lhs.isSet) {
        error(cmp.span, "left side of '>>' must be a single value");
        return;
      }
      if (lhs.type && rhs.type && !lhs.isNull && !compatible(*lhs.type, *rhs.type))
        error(cmp.span, "membership test mixes " + type_text(*lhs.type) + " with a set of " +
                            type_text(*rhs.type));
      return;
    }
    TypeInfo lhs = infer(cmp.lhs);
    TypeInfo rhs = infer(cmp.rhs);
    if (lhs.isSet || rhs.isSet) {
      error(cmp.span, "set attributes cannot be compared with '=='; use '>>'");
      return;
    }
    if (lhs.type && rhs.type && !lhs.isNull && !rhs.isNull &&
        !compatible(*lhs.type, *rhs.type))
      error(cmp.span, "comparison between " + type_text(*lhs.type) + " and " +
                          type_text(*rhs.type) + " can never hold");
  }

  // -- function references -------------------------------------------------

  void check_fn(const FnRef &fn, FunctionKind site, const char *what) {
    for (const auto &a : fn.args) infer(a);
    if (registry_ && !registry_->resolves_numeric(fn.name, site))
      error(fn.span, std::string("unknown ") + what + " function '" + fn.name + "'");
  }

  // -- task invocations ----------------------------------------------------

  void check_invocation(const TaskInvocationAst &inv) {
    const std::vector<Param> *params = nullptr;
    if (const MethodDecl *m = domain_.find_method(inv.name)) {
      params = &m->params;
    } else if (const OperatorDecl *op = domain_.find_operator(inv.name)) {
      params = &op->params;
    } else {
      error(inv.span, "unknown task '" + inv.name + "'");
      for (const auto &a : inv.args) infer(a);
      return;
    }
    if (params->size() != inv.args.size()) {
      error(inv.span, "task '" + inv.name + "' expects " +
                          std::to_string(params->size()) + " arguments, got " +
                          std::to_string(inv.args.size()));
      return;
    }
    for (size_t i = 0; i < inv.args.size(); ++i) {
      TypeInfo arg = infer(inv.args[i]);
      if (!arg.type || arg.isNull) continue;
      if (arg.isSet) {
        error(inv.span, "argument " + std::to_string(i + 1) + " of '" + inv.name +
                            "' is a set attribute");
        continue;
      }
      TypeRef expected{ScalarKind::Entity, (*params)[i].type};
      if ((*params)[i].type == "bool") expected = {ScalarKind::Bool, {}};
      if ((*params)[i].type == "int") expected = {ScalarKind::Int, {}};
      if ((*params)[i].type == "string") expected = {ScalarKind::String, {}};
      if (!compatible(*arg.type, expected))
        error(inv.span, "argument " + std::to_string(i + 1) + " of '" + inv.name +
                            "' has type " + type_text(*arg.type) + ", expected " +
                            type_text(expected));
    }
  }

  // -- effects -------------------------------------------------------------

  void check_effects(const std::vector<Effect> &effects) {
    for (const auto &e : effects) {
      if (const auto *w = std::get_if<WriteEffect>(&e)) {
        check_write(*w);
      } else if (const auto *boxedIf = std::get_if<Box<IfEffect>>(&e)) {
        check_conditions((*boxedIf)->guard, false);
        check_effects((*boxedIf)->body);
      } else {
        const ForallEffect &fa = **std::get_if<Box<ForallEffect>>(&e);
        check_entity_type(fa.span, fa.varType, "FORALL");
        if (vars_.count(fa.varName)) {
          error(fa.span, "'" + fa.varName + "' shadows an existing binding");
          TypeRef saved = vars_[fa.varName];
          vars_[fa.varName] = {ScalarKind::Entity, fa.varType};
          check_conditions(fa.filter, false);
          check_effects(fa.body);
          vars_[fa.varName] = saved;
        } else {
          vars_[fa.varName] = {ScalarKind::Entity, fa.varType};
          check_conditions(fa.filter, false);
          check_effects(fa.body);
          vars_.erase(fa.varName);
        }
      }
    }
  }

  void check_write(const WriteEffect &w) {
    // Resolve the target path; the final attribute must be dynamic and match
    // the write operator's arity.
    const AttributeDecl *attr = target_attribute(w.target);
    TypeInfo value = infer(w.value);
    if (!attr) return;
    if (attr->mutability == Mutability::Static) {
      error(w.span, "effect writes static attribute '" + w.target.path.back() + "'");
      return;
    }
    if (w.op == WriteOp::Assign && attr->arity != SlotArity::Atom) {
      error(w.span, "attribute '" + w.target.path.back() + "' is a set; use '<<=' or '=>>'");
      return;
    }
    if (w.op != WriteOp::Assign && attr->arity != SlotArity::Set) {
      error(w.span, "attribute '" + w.target.path.back() + "' is an atom; use '='");
      return;
    }
    if (value.isNull) {
      if (w.op != WriteOp::Assign)
        error(w.span, "NULL is not a set element");
      return;
    }
    if (value.type && value.isSet)
      error(w.span, "set attribute used as a value");
    else if (value.type && !compatible(*value.type, attr->type))
      error(w.span, "assigning " + type_text(*value.type) + " to attribute '" +
                        w.target.path.back() + "' of type " + type_text(attr->type));
  }

  const AttributeDecl *target_attribute(const NameExpr &target) {
    auto it = vars_.find(target.name);
    if (it == vars_.end()) {
      error(target.span, "unknown variable '" + target.name + "'");
      return nullptr;
    }
    TypeRef cur = it->second;
    const AttributeDecl *attr = nullptr;
    for (size_t i = 0; i < target.path.size(); ++i) {
      if (cur.kind != ScalarKind::Entity) {
        error(target.span, "effect target traverses a non-entity value");
        return nullptr;
      }
      const EntityTypeDecl *type = domain_.find_type(cur.entity);
      if (!type) return nullptr;
      attr = nullptr;
      for (const auto &a : type->attributes)
        if (a.name == target.path[i]) attr = &a;
      if (!attr) {
        error(target.span, "entity type '" + cur.entity + "' declares no attribute '" +
                               target.path[i] + "'");
        return nullptr;
      }
      if (i + 1 < target.path.size()) {
        if (attr->arity == SlotArity::Set) {
          error(target.span, "cannot traverse through set attribute '" +
                                 target.path[i] + "'");
          return nullptr;
        }
        cur = attr->type;
      }
    }
    return attr;
  }

  // -- declarations --------------------------------------------------------

  void check_method(const MethodDecl &m) {
    context_ = "method '" + m.name + "'";
    vars_.clear();
    for (const auto &p : m.params) {
      if (vars_.count(p.name))
        error(p.span, "duplicate parameter '" + p.name + "'");
      vars_[p.name] = param_type(p);
    }
    const auto paramVars = vars_;

    if (m.emptyCondition) check_conditions(*m.emptyCondition, false);

    for (const auto &c : m.cases) {
      vars_ = paramVars;
      check_conditions(c.precondition, false);
      for (const auto &sel : c.body.selectors) {
        check_entity_type(sel.span, sel.entityType, "selector");
        // The selector's own variable is visible inside its filter.
        bind_var(sel.span, sel.var, TypeRef{ScalarKind::Entity, sel.entityType});
        check_conditions(sel.filter, false);
        if (sel.orderingFn) check_fn(*sel.orderingFn, FunctionKind::Ordering, "ordering");
      }
      for (const auto &st : c.body.subtasks) check_invocation(st.task);
    }
    vars_.clear();
  }

  void check_operator(const OperatorDecl &op) {
    context_ = "action '" + op.name + "'";
    vars_.clear();
    for (const auto &p : op.params) {
      if (vars_.count(p.name))
        error(p.span, "duplicate parameter '" + p.name + "'");
      vars_[p.name] = param_type(p);
    }
    if (!op.params.empty() && op.params[0].type != "Agent")
      error(op.span, "first parameter of action '" + op.name +
                         "' must be an Agent, not " + op.params[0].type);

    check_conditions(op.precondition, true);
    check_effects(op.effects);
    check_fn(op.costFn, FunctionKind::Cost, "cost");
    if (op.durationFn) check_fn(*op.durationFn, FunctionKind::Duration, "duration");
    vars_.clear();
  }
};

}  // namespace

std::vector<Diagnostic> validate_domain(const DomainAst &domain,
                                        const FunctionRegistry *registry) {
  return Checker(domain, registry).run();
}

std::vector<Diagnostic> validate_problem(const DomainAst &domain,
                                         const ProblemAst &problem) {
  std::vector<Diagnostic> diags;
  std::map<std::string, std::string> entityTypes;
  for (const auto &inst : problem.instantiations)
    for (const auto &name : inst.names) entityTypes[name] = inst.typeName;

  for (const auto &inv : problem.goal) {
    const std::vector<Param> *params = nullptr;
    if (const MethodDecl *m = domain.find_method(inv.name)) {
      params = &m->params;
    } else if (const OperatorDecl *op = domain.find_operator(inv.name)) {
      params = &op->params;
    } else {
      diags.push_back({Severity::Error, inv.span,
                       "goal names unknown task '" + inv.name + "'"});
      continue;
    }
    if (params->size() != inv.args.size()) {
      diags.push_back({Severity::Error, inv.span,
                       "goal task '" + inv.name + "' expects " +
                           std::to_string(params->size()) + " arguments, got " +
                           std::to_string(inv.args.size())});
      continue;
    }
    for (size_t i = 0; i < inv.args.size(); ++i) {
      const auto *name = std::get_if<NameExpr>(&inv.args[i]);
      if (!name) continue;  // literal arguments are checked at grounding
      auto it = entityTypes.find(name->name);
      if (it == entityTypes.end()) continue;  // reported by the problem parser
      const std::string &expected = (*params)[i].type;
      if (expected != "bool" && expected != "int" && expected != "string" &&
          it->second != expected)
        diags.push_back({Severity::Error, inv.span,
                         "goal argument " + std::to_string(i + 1) + " of '" +
                             inv.name + "' is a " + it->second + ", expected " +
                             expected});
    }
  }
  return diags;
}

}  // namespace hatp
