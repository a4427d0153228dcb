#include "hatp/world.hpp"

#include <algorithm>
#include <sstream>

namespace hatp {

int TypeSchema::attribute_index(const std::string &attr) const {
  for (size_t i = 0; i < attributes.size(); ++i)
    if (attributes[i].name == attr) return static_cast<int>(i);
  return -1;
}

std::shared_ptr<const Schema> Schema::compile(const DomainAst &domain) {
  auto schema = std::make_shared<Schema>();
  for (const auto &t : domain.entityTypes) {
    TypeSchema ts;
    ts.name = t.name;
    for (const auto &a : t.attributes)
      ts.attributes.push_back({a.name, a.mutability, a.arity, a.type});
    schema->types_.push_back(std::move(ts));
  }
  return schema;
}

int Schema::type_index(const std::string &name) const {
  for (size_t i = 0; i < types_.size(); ++i)
    if (types_[i].name == name) return static_cast<int>(i);
  return -1;
}

WorldState WorldState::init_state(const DomainAst &domain, const ProblemAst &problem) {
  WorldState state;
  state.schema_ = Schema::compile(domain);

  auto entities = std::make_shared<std::vector<EntityInfo>>();
  auto byName = std::make_shared<std::map<std::string, EntityId>>();
  for (const auto &inst : problem.instantiations) {
    int typeIndex = state.schema_->type_index(inst.typeName);
    if (typeIndex < 0) throw EvalError("unknown entity type '" + inst.typeName + "'");
    for (const auto &name : inst.names) {
      if (!byName->emplace(name, static_cast<EntityId>(entities->size())).second)
        throw EvalError("duplicate entity '" + name + "'");
      entities->push_back({name, typeIndex});
    }
  }
  state.entities_ = entities;
  state.byName_ = byName;

  for (const auto &info : *entities) {
    auto slots = std::make_shared<EntitySlots>();
    slots->resize(state.schema_->type(info.typeIndex).attributes.size());
    state.slots_.push_back(std::move(slots));
  }

  auto toValue = [&](const Expr &e) -> Value {
    if (const auto *lit = std::get_if<Literal>(&e)) {
      if (std::holds_alternative<NullLit>(lit->value)) return NullT{};
      if (const auto *b = std::get_if<bool>(&lit->value)) return *b;
      if (const auto *i = std::get_if<int64_t>(&lit->value)) return *i;
      return std::get<std::string>(lit->value);
    }
    const auto &name = std::get<NameExpr>(e);
    auto it = byName->find(name.name);
    if (it == byName->end() || !name.path.empty())
      throw EvalError("initial value is not an entity: '" + name.name + "'");
    return EntityRef{it->second};
  };

  for (const auto &a : problem.assignments) {
    auto it = byName->find(a.entity);
    if (it == byName->end()) throw EvalError("unknown entity '" + a.entity + "'");
    EntityId id = it->second;
    int attr = state.schema_->type(state.entity(id).typeIndex).attribute_index(a.attribute);
    if (attr < 0)
      throw EvalError("unknown attribute '" + a.entity + "." + a.attribute + "'");
    state.raw_write(id, attr, toValue(a.value), a.op == WriteOp::SetAdd);
  }
  return state;
}

std::optional<EntityId> WorldState::find_entity(const std::string &name) const {
  if (!byName_) return std::nullopt;
  auto it = byName_->find(name);
  if (it == byName_->end()) return std::nullopt;
  return it->second;
}

std::vector<EntityId> WorldState::entities_of_type(const std::string &typeName) const {
  int typeIndex = schema_->type_index(typeName);
  if (typeIndex < 0) throw EvalError("unknown entity type '" + typeName + "'");
  std::vector<EntityId> ids;
  for (EntityId id = 0; id < entities_->size(); ++id)
    if ((*entities_)[id].typeIndex == typeIndex) ids.push_back(id);
  return ids;
}

EntitySlots &WorldState::mutable_slots(EntityId id) {
  auto &ptr = slots_[id];
  if (ptr.use_count() > 1) ptr = std::make_shared<EntitySlots>(*ptr);
  return *ptr;
}

void WorldState::raw_write(EntityId id, int attr, Value v, bool add) {
  Slot &slot = mutable_slots(id)[attr];
  if (add) {
    auto pos = std::lower_bound(slot.set.begin(), slot.set.end(), v);
    if (pos == slot.set.end() || *pos != v) slot.set.insert(pos, std::move(v));
  } else {
    slot.atom = std::move(v);
  }
}

void WorldState::write_atom(EntityId id, int attr, Value v) {
  const AttributeSchema &as = attribute(id, attr);
  if (as.mutability == Mutability::Static)
    throw EvalError("write to static attribute '" + entity(id).name + "." + as.name + "'");
  raw_write(id, attr, std::move(v), false);
}

void WorldState::add_element(EntityId id, int attr, Value v) {
  const AttributeSchema &as = attribute(id, attr);
  if (as.mutability == Mutability::Static)
    throw EvalError("write to static attribute '" + entity(id).name + "." + as.name + "'");
  raw_write(id, attr, std::move(v), true);
}

void WorldState::remove_element(EntityId id, int attr, const Value &v) {
  const AttributeSchema &as = attribute(id, attr);
  if (as.mutability == Mutability::Static)
    throw EvalError("write to static attribute '" + entity(id).name + "." + as.name + "'");
  Slot &slot = mutable_slots(id)[attr];
  auto pos = std::lower_bound(slot.set.begin(), slot.set.end(), v);
  if (pos != slot.set.end() && *pos == v) slot.set.erase(pos);
}

WorldState WorldState::with_atom_value(EntityId id, int attr, Value v) const {
  WorldState copy = *this;
  copy.raw_write(id, attr, std::move(v), false);
  return copy;
}

WorldState WorldState::with_element_present(EntityId id, int attr, const Value &v,
                                            bool present) const {
  WorldState copy = *this;
  if (present) {
    copy.raw_write(id, attr, v, true);
  } else {
    Slot &slot = copy.mutable_slots(id)[attr];
    auto pos = std::lower_bound(slot.set.begin(), slot.set.end(), v);
    if (pos != slot.set.end() && *pos == v) slot.set.erase(pos);
  }
  return copy;
}

std::string value_text(const Value &v, const WorldState &state) {
  if (std::holds_alternative<NullT>(v)) return "NULL";
  if (const auto *b = std::get_if<bool>(&v)) return *b ? "true" : "false";
  if (const auto *i = std::get_if<int64_t>(&v)) return std::to_string(*i);
  if (const auto *s = std::get_if<std::string>(&v)) return *s;
  return state.entity(std::get<EntityRef>(v).id).name;
}

std::string WorldState::fingerprint_filtered(bool staticsOnly) const {
  std::ostringstream os;
  for (EntityId id = 0; id < entity_count(); ++id) {
    const TypeSchema &ts = schema_->type(entity(id).typeIndex);
    for (size_t a = 0; a < ts.attributes.size(); ++a) {
      const AttributeSchema &as = ts.attributes[a];
      if (staticsOnly && as.mutability != Mutability::Static) continue;
      const Slot &s = slot(id, static_cast<int>(a));
      os << entity(id).name << "." << as.name << "=";
      if (as.arity == SlotArity::Atom) {
        os << value_text(s.atom, *this);
      } else {
        os << "{";
        for (size_t i = 0; i < s.set.size(); ++i) {
          if (i) os << ",";
          os << value_text(s.set[i], *this);
        }
        os << "}";
      }
      os << "\n";
    }
  }
  return os.str();
}

std::string WorldState::fingerprint() const { return fingerprint_filtered(false); }
std::string WorldState::static_fingerprint() const { return fingerprint_filtered(true); }

// ---------------------------------------------------------------------------
// Expression evaluation
// ---------------------------------------------------------------------------

namespace {

Value literal_value(const Literal &lit) {
  if (std::holds_alternative<NullLit>(lit.value)) return NullT{};
  if (const auto *b = std::get_if<bool>(&lit.value)) return *b;
  if (const auto *i = std::get_if<int64_t>(&lit.value)) return *i;
  return std::get<std::string>(lit.value);
}

Value base_value(const NameExpr &name, const WorldState &state, const Bindings &bindings) {
  if (const Value *bound = bindings.find(name.name)) return *bound;
  if (auto id = state.find_entity(name.name)) return EntityRef{*id};
  throw EvalError("unbound name '" + name.name + "'");
}

/// Traverses all but the last path element. Returns the entity holding the
/// final attribute, nullopt when NULL is hit along the way.
std::optional<EntityId> traverse_base(const NameExpr &name, const WorldState &state,
                                      const Bindings &bindings, size_t steps) {
  Value v = base_value(name, state, bindings);
  for (size_t i = 0; i <= steps; ++i) {
    if (std::holds_alternative<NullT>(v)) return std::nullopt;
    const auto *ref = std::get_if<EntityRef>(&v);
    if (!ref)
      throw EvalError("'" + name.name + "' is not an entity; cannot access attribute '" +
                      (i < name.path.size() ? name.path[i] : "") + "'");
    if (i == steps) return ref->id;
    EntityId id = ref->id;
    const TypeSchema &ts = state.schema().type(state.entity(id).typeIndex);
    int attr = ts.attribute_index(name.path[i]);
    if (attr < 0)
      throw EvalError("entity type '" + ts.name + "' declares no attribute '" +
                      name.path[i] + "'");
    if (ts.attributes[attr].arity == SlotArity::Set)
      throw EvalError("cannot traverse through set attribute '" + name.path[i] + "'");
    v = state.slot(id, attr).atom;
  }
  return std::nullopt;  // unreachable
}

}  // namespace

std::optional<SlotRef> resolve_slot(const NameExpr &name, const WorldState &state,
                                    const Bindings &bindings) {
  if (name.path.empty())
    throw EvalError("expected attribute access on '" + name.name + "'");
  auto base = traverse_base(name, state, bindings, name.path.size() - 1);
  if (!base) return std::nullopt;
  const TypeSchema &ts = state.schema().type(state.entity(*base).typeIndex);
  int attr = ts.attribute_index(name.path.back());
  if (attr < 0)
    throw EvalError("entity type '" + ts.name + "' declares no attribute '" +
                    name.path.back() + "'");
  return SlotRef{*base, attr};
}

std::optional<Value> try_eval_operand(const Expr &expr, const WorldState &state,
                                      const Bindings &bindings) {
  if (const auto *lit = std::get_if<Literal>(&expr)) return literal_value(*lit);
  const auto &name = std::get<NameExpr>(expr);
  if (name.path.empty()) return base_value(name, state, bindings);
  auto ref = resolve_slot(name, state, bindings);
  if (!ref) return std::nullopt;
  if (state.attribute(ref->entity, ref->attr).arity == SlotArity::Set)
    throw EvalError("set attribute '" + name.path.back() + "' used as a value");
  return state.slot(ref->entity, ref->attr).atom;
}

Value eval_expr(const Expr &expr, const WorldState &state, const Bindings &bindings) {
  auto v = try_eval_operand(expr, state, bindings);
  if (!v) {
    const auto &name = std::get<NameExpr>(expr);
    throw EvalError("attribute access on NULL value in '" + name.name + "." +
                    name.path.front() + "...'");
  }
  return *v;
}

// ---------------------------------------------------------------------------
// Conditions
// ---------------------------------------------------------------------------

namespace {

bool eval_compare(const CompareCond &cmp, const WorldState &state, Bindings &bindings) {
  if (cmp.op == CompareOp::In || cmp.op == CompareOp::NotIn) {
    auto lhs = try_eval_operand(cmp.lhs, state, bindings);
    if (!lhs) return false;
    const auto *name = std::get_if<NameExpr>(&cmp.rhs);
    if (!name)
      throw EvalError("right side of '>>' must be a set attribute");
    auto ref = resolve_slot(*name, state, bindings);
    if (!ref) return false;
    if (state.attribute(ref->entity, ref->attr).arity != SlotArity::Set)
      throw EvalError("right side of '>>' must be a set attribute, '" +
                      name->path.back() + "' is an atom");
    const auto &set = state.slot(ref->entity, ref->attr).set;
    bool member = std::binary_search(set.begin(), set.end(), *lhs);
    return cmp.op == CompareOp::In ? member : !member;
  }
  auto lhs = try_eval_operand(cmp.lhs, state, bindings);
  auto rhs = try_eval_operand(cmp.rhs, state, bindings);
  if (!lhs || !rhs) return false;
  return cmp.op == CompareOp::Eq ? *lhs == *rhs : *lhs != *rhs;
}

bool eval_one(const Cond &cond, const WorldState &state, Bindings &bindings,
              const PredicateHook *hook) {
  if (const auto *cmp = std::get_if<CompareCond>(&cond))
    return eval_compare(*cmp, state, bindings);
  if (const auto *call = std::get_if<PredicateCall>(&cond)) {
    if (!hook)
      throw EvalError("predicate '" + call->name + "' is not allowed here");
    return (*hook)(*call, bindings);
  }
  const QuantCond &q = **std::get_if<Box<QuantCond>>(&cond);
  for (EntityId id : state.entities_of_type(q.varType)) {
    bindings.push(q.varName, EntityRef{id});
    bool filterOk = eval_conditions(q.filter, state, bindings, hook);
    bool bodyOk = filterOk && eval_conditions(q.body, state, bindings, hook);
    bindings.pop();
    if (q.forall) {
      if (filterOk && !bodyOk) return false;
    } else {
      if (filterOk && bodyOk) return true;
    }
  }
  return q.forall;
}

}  // namespace

bool eval_conditions(const std::vector<Cond> &conds, const WorldState &state,
                     Bindings &bindings, const PredicateHook *hook) {
  for (const auto &c : conds)
    if (!eval_one(c, state, bindings, hook)) return false;
  return true;
}

std::vector<EntityId> filter_candidates(const std::string &typeName,
                                        const std::string &varName,
                                        const std::vector<Cond> &filter,
                                        const WorldState &state, Bindings &bindings,
                                        const PredicateHook *hook) {
  std::vector<EntityId> out;
  for (EntityId id : state.entities_of_type(typeName)) {
    bindings.push(varName, EntityRef{id});
    bool keep = eval_conditions(filter, state, bindings, hook);
    bindings.pop();
    if (keep) out.push_back(id);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Effects
// ---------------------------------------------------------------------------

namespace {

void apply_list(const std::vector<Effect> &effects, const WorldState &pre,
                WorldState &post, Bindings &bindings);

void apply_write(const WriteEffect &w, const WorldState &pre, WorldState &post,
                 Bindings &bindings) {
  auto ref = resolve_slot(w.target, pre, bindings);
  if (!ref)
    throw EvalError("attribute access on NULL value in effect target '" +
                    w.target.name + "." + w.target.path.front() + "...'");
  const AttributeSchema &as = pre.attribute(ref->entity, ref->attr);
  Value v = eval_expr(w.value, pre, bindings);
  switch (w.op) {
    case WriteOp::Assign:
      if (as.arity != SlotArity::Atom)
        throw EvalError("attribute '" + as.name + "' is a set; use '<<=' or '=>>'");
      post.write_atom(ref->entity, ref->attr, std::move(v));
      break;
    case WriteOp::SetAdd:
      if (as.arity != SlotArity::Set)
        throw EvalError("attribute '" + as.name + "' is an atom; use '='");
      post.add_element(ref->entity, ref->attr, std::move(v));
      break;
    case WriteOp::SetRemove:
      if (as.arity != SlotArity::Set)
        throw EvalError("attribute '" + as.name + "' is an atom; use '='");
      post.remove_element(ref->entity, ref->attr, v);
      break;
  }
}

void apply_list(const std::vector<Effect> &effects, const WorldState &pre,
                WorldState &post, Bindings &bindings) {
  for (const auto &e : effects) {
    if (const auto *w = std::get_if<WriteEffect>(&e)) {
      apply_write(*w, pre, post, bindings);
    } else if (const auto *boxedIf = std::get_if<Box<IfEffect>>(&e)) {
      const IfEffect &ife = **boxedIf;
      if (eval_conditions(ife.guard, pre, bindings))
        apply_list(ife.body, pre, post, bindings);
    } else {
      const ForallEffect &fa = **std::get_if<Box<ForallEffect>>(&e);
      for (EntityId id : pre.entities_of_type(fa.varType)) {
        bindings.push(fa.varName, EntityRef{id});
        if (eval_conditions(fa.filter, pre, bindings))
          apply_list(fa.body, pre, post, bindings);
        bindings.pop();
      }
    }
  }
}

}  // namespace

void apply_effects(const std::vector<Effect> &effects, WorldState &state,
                   Bindings &bindings) {
  const WorldState pre = state;  // shallow snapshot; reads see the pre-state
  apply_list(effects, pre, state, bindings);
}

// ---------------------------------------------------------------------------
// Classical projection
// ---------------------------------------------------------------------------

std::vector<std::string> to_classical_atoms(const WorldState &state) {
  std::vector<std::string> atoms;
  for (EntityId id = 0; id < state.entity_count(); ++id) {
    const std::string &entityName = state.entity(id).name;
    const TypeSchema &ts = state.schema().type(state.entity(id).typeIndex);
    for (size_t a = 0; a < ts.attributes.size(); ++a) {
      const AttributeSchema &as = ts.attributes[a];
      const Slot &s = state.slot(id, static_cast<int>(a));
      if (as.arity == SlotArity::Atom) {
        if (std::holds_alternative<NullT>(s.atom)) continue;
        if (const auto *b = std::get_if<bool>(&s.atom)) {
          if (*b) atoms.push_back(as.name + "(" + entityName + ")");
          continue;
        }
        atoms.push_back(as.name + "(" + entityName + "," +
                        value_text(s.atom, state) + ")");
      } else {
        for (const auto &elem : s.set)
          atoms.push_back(as.name + "(" + entityName + "," +
                          value_text(elem, state) + ")");
      }
    }
  }
  std::sort(atoms.begin(), atoms.end());
  atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
  return atoms;
}

}  // namespace hatp
