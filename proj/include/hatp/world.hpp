#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hatp/ast.hpp"
#include "hatp/value.hpp"

namespace hatp {

/// Raised for domain-authoring mistakes that surface at evaluation time:
/// unbound names, attribute access on NULL in an effect, writes to static
/// attributes, unregistered functions, and similar.
struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AttributeSchema {
  std::string name;
  Mutability mutability;
  SlotArity arity;
  TypeRef type;
};

struct TypeSchema {
  std::string name;
  std::vector<AttributeSchema> attributes;

  /// Index of the named attribute, or -1.
  int attribute_index(const std::string &attr) const;
};

class Schema {
public:
  static std::shared_ptr<const Schema> compile(const DomainAst &domain);

  int type_index(const std::string &name) const;  // -1 if unknown
  const TypeSchema &type(int index) const { return types_[index]; }
  int type_count() const { return static_cast<int>(types_.size()); }

private:
  std::vector<TypeSchema> types_;
};

struct EntityInfo {
  std::string name;
  int typeIndex;
};

/// Storage for one attribute of one entity. Atom attributes use `atom`; set
/// attributes keep `set` sorted and duplicate-free.
struct Slot {
  Value atom = NullT{};
  std::vector<Value> set;

  bool operator==(const Slot &) const = default;
};

using EntitySlots = std::vector<Slot>;

/// Immutable-by-sharing world state. Copies are cheap: entity metadata is
/// shared outright and slot blocks are copy-on-write, cloned per entity on
/// first mutation of a snapshot.
class WorldState {
public:
  WorldState() = default;

  /// Builds the initial state from a parsed problem. The problem is assumed to
  /// have passed parse-time checks; inconsistencies raise EvalError.
  static WorldState init_state(const DomainAst &domain, const ProblemAst &problem);

  const Schema &schema() const { return *schema_; }
  size_t entity_count() const { return entities_->size(); }
  const EntityInfo &entity(EntityId id) const { return (*entities_)[id]; }
  std::optional<EntityId> find_entity(const std::string &name) const;
  std::vector<EntityId> entities_of_type(const std::string &typeName) const;

  const Slot &slot(EntityId id, int attr) const { return (*slots_[id])[attr]; }
  const AttributeSchema &attribute(EntityId id, int attr) const {
    return schema_->type(entity(id).typeIndex).attributes[attr];
  }

  /// Mutators enforce dynamic-only writes; the initial state is built through
  /// a separate path that may also set statics.
  void write_atom(EntityId id, int attr, Value v);
  void add_element(EntityId id, int attr, Value v);
  void remove_element(EntityId id, int attr, const Value &v);

  /// Counterfactual copies with one slot changed, statics included. These
  /// exist for analysis probes; the planner itself never calls them.
  WorldState with_atom_value(EntityId id, int attr, Value v) const;
  WorldState with_element_present(EntityId id, int attr, const Value &v,
                                  bool present) const;

  /// Stable textual digest of every slot (entity order, attribute order).
  std::string fingerprint() const;
  /// Digest restricted to static attributes.
  std::string static_fingerprint() const;

private:
  std::shared_ptr<const Schema> schema_;
  std::shared_ptr<const std::vector<EntityInfo>> entities_;
  std::shared_ptr<const std::map<std::string, EntityId>> byName_;
  std::vector<std::shared_ptr<EntitySlots>> slots_;

  EntitySlots &mutable_slots(EntityId id);
  void raw_write(EntityId id, int attr, Value v, bool add);
  std::string fingerprint_filtered(bool staticsOnly) const;
};

/// Printable form of a value: entity name, integer text, string verbatim,
/// "true"/"false", or "NULL".
std::string value_text(const Value &v, const WorldState &state);

/// Evaluates an expression to a value. Throws EvalError on unbound names,
/// attribute traversal through NULL or a non-entity, and set attributes used
/// as values.
Value eval_expr(const Expr &expr, const WorldState &state, const Bindings &bindings);

/// Like eval_expr, but attribute access on a NULL base yields nullopt instead
/// of an error. Comparisons treat nullopt operands as failing the comparison.
std::optional<Value> try_eval_operand(const Expr &expr, const WorldState &state,
                                      const Bindings &bindings);

struct SlotRef {
  EntityId entity;
  int attr;
};

/// Resolves a dotted name to an entity attribute slot; nullopt when the
/// traversal passes through NULL.
std::optional<SlotRef> resolve_slot(const NameExpr &name, const WorldState &state,
                                    const Bindings &bindings);

/// Called for predicate conditions; returns whether the predicate holds.
using PredicateHook = std::function<bool(const PredicateCall &, Bindings &)>;

/// Evaluates a conjunction. Without a hook, predicate calls raise EvalError.
bool eval_conditions(const std::vector<Cond> &conds, const WorldState &state,
                     Bindings &bindings, const PredicateHook *hook = nullptr);

/// Applies an effect block with simultaneous-update semantics: every read
/// (guards, filters, right-hand sides, target traversal) sees the state from
/// before the block; writes land in statement order, later writes winning.
void apply_effects(const std::vector<Effect> &effects, WorldState &state,
                   Bindings &bindings);

/// Entities of the given type whose filter holds, in declaration order. The
/// variable is bound for the filter and removed again.
std::vector<EntityId> filter_candidates(const std::string &typeName,
                                        const std::string &varName,
                                        const std::vector<Cond> &filter,
                                        const WorldState &state, Bindings &bindings,
                                        const PredicateHook *hook = nullptr);

/// Closed-world projection to classical atoms, sorted lexicographically:
/// `attr(E,v)` for atoms and set elements, `attr(E)` for true booleans;
/// NULL and false produce nothing.
std::vector<std::string> to_classical_atoms(const WorldState &state);

}  // namespace hatp
