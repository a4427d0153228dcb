#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "hatp/diagnostics.hpp"
#include "hatp/rational.hpp"

namespace hatp {

/// Wrapper for recursive types inside std::variant. Value semantics, deep copy,
/// deep equality.
template <typename T>
class Box {
public:
  Box() : ptr_(std::make_unique<T>()) {}
  Box(T value) : ptr_(std::make_unique<T>(std::move(value))) {}  // NOLINT
  Box(const Box &other) : ptr_(std::make_unique<T>(*other.ptr_)) {}
  Box(Box &&) noexcept = default;
  Box &operator=(const Box &other) {
    if (this != &other) ptr_ = std::make_unique<T>(*other.ptr_);
    return *this;
  }
  Box &operator=(Box &&) noexcept = default;

  T &operator*() { return *ptr_; }
  const T &operator*() const { return *ptr_; }
  T *operator->() { return ptr_.get(); }
  const T *operator->() const { return ptr_.get(); }

  friend bool operator==(const Box &a, const Box &b) { return *a.ptr_ == *b.ptr_; }

private:
  std::unique_ptr<T> ptr_;
};

// ---------------------------------------------------------------------------
// Entity schema declarations
// ---------------------------------------------------------------------------

enum class Mutability : uint8_t { Static, Dynamic };
enum class SlotArity : uint8_t { Atom, Set };
enum class ScalarKind : uint8_t { Bool, Int, String, Entity };

/// Declared value type of an attribute. `entity` holds the entity type name
/// when kind == Entity.
struct TypeRef {
  ScalarKind kind = ScalarKind::Bool;
  std::string entity;

  bool operator==(const TypeRef &) const = default;
};

struct AttributeDecl {
  std::string name;
  Mutability mutability = Mutability::Dynamic;
  SlotArity arity = SlotArity::Atom;
  TypeRef type;
  SourceSpan span;

  bool operator==(const AttributeDecl &) const = default;
};

struct EntityTypeDecl {
  std::string name;
  std::vector<AttributeDecl> attributes;
  SourceSpan span;

  bool operator==(const EntityTypeDecl &) const = default;
};

// ---------------------------------------------------------------------------
// Expressions
// ---------------------------------------------------------------------------

struct NullLit {
  bool operator==(const NullLit &) const = default;
};

struct Literal {
  std::variant<NullLit, bool, int64_t, std::string> value;
  SourceSpan span;

  bool operator==(const Literal &) const = default;
};

/// A name with an optional attribute access path: `R`, `R.at`, `R.carry.in`.
/// The base name is a bound variable or (in problem files and goals) an entity.
struct NameExpr {
  std::string name;
  std::vector<std::string> path;
  SourceSpan span;

  bool operator==(const NameExpr &) const = default;
};

using Expr = std::variant<Literal, NameExpr>;

// ---------------------------------------------------------------------------
// Conditions
// ---------------------------------------------------------------------------

enum class CompareOp : uint8_t {
  Eq,     // ==
  Ne,     // !=
  In,     // >>   lhs is an element of the rhs set
  NotIn,  // !>>
};

struct CompareCond {
  Expr lhs;
  CompareOp op = CompareOp::Eq;
  Expr rhs;
  SourceSpan span;

  bool operator==(const CompareCond &) const = default;
};

struct QuantCond;

/// Call-form conjunct resolved against the function registry as an evaluable
/// predicate. Permitted only at the top level of operator preconditions.
struct PredicateCall {
  std::string name;
  std::vector<Expr> args;
  SourceSpan span;

  bool operator==(const PredicateCall &) const = default;
};

using Cond = std::variant<CompareCond, Box<QuantCond>, PredicateCall>;

/// EXIST / FORALL over entities of `varType`. EXIST holds when some entity
/// passes the filter and the body; FORALL when the body holds for every entity
/// passing the filter.
struct QuantCond {
  bool forall = false;
  std::string varType;
  std::string varName;
  std::vector<Cond> filter;
  std::vector<Cond> body;
  SourceSpan span;

  bool operator==(const QuantCond &) const = default;
};

// ---------------------------------------------------------------------------
// Effects
// ---------------------------------------------------------------------------

enum class WriteOp : uint8_t {
  Assign,     // =
  SetAdd,     // <<=
  SetRemove,  // =>>
};

struct WriteEffect {
  NameExpr target;  // path non-empty; the last component is the written attribute
  WriteOp op = WriteOp::Assign;
  Expr value;
  SourceSpan span;

  bool operator==(const WriteEffect &) const = default;
};

struct IfEffect;
struct ForallEffect;

using Effect = std::variant<WriteEffect, Box<IfEffect>, Box<ForallEffect>>;

struct IfEffect {
  std::vector<Cond> guard;
  std::vector<Effect> body;
  SourceSpan span;

  bool operator==(const IfEffect &) const = default;
};

struct ForallEffect {
  std::string varType;
  std::string varName;
  std::vector<Cond> filter;
  std::vector<Effect> body;
  SourceSpan span;

  bool operator==(const ForallEffect &) const = default;
};

// ---------------------------------------------------------------------------
// Methods and operators
// ---------------------------------------------------------------------------

struct Param {
  std::string type;
  std::string name;
  SourceSpan span;

  bool operator==(const Param &) const = default;
};

enum class SelectorKind : uint8_t { Select, SelectOrdered, SelectOnce };
enum class SortDirection : uint8_t { Ascending, Descending };

/// Reference to a registered external function with argument expressions, as
/// in `costToMove(From, To)`.
struct FnRef {
  std::string name;
  std::vector<Expr> args;
  SourceSpan span;

  bool operator==(const FnRef &) const = default;
};

struct SelectorDecl {
  std::string var;
  std::string entityType;
  SelectorKind kind = SelectorKind::Select;
  std::vector<Cond> filter;
  std::optional<FnRef> orderingFn;          // present iff kind == SelectOrdered
  std::optional<SortDirection> direction;   // present iff kind == SelectOrdered
  SourceSpan span;

  bool operator==(const SelectorDecl &) const = default;
};

struct TaskInvocationAst {
  std::string name;
  std::vector<Expr> args;
  SourceSpan span;

  bool operator==(const TaskInvocationAst &) const = default;
};

struct Subtask {
  int label = 0;
  TaskInvocationAst task;
  std::vector<int> predecessors;  // labels this subtask must follow
  SourceSpan span;

  bool operator==(const Subtask &) const = default;
};

struct MethodBody {
  std::vector<SelectorDecl> selectors;
  std::vector<Subtask> subtasks;
  SourceSpan span;

  bool operator==(const MethodBody &) const = default;
};

struct MethodCase {
  std::vector<Cond> precondition;  // possibly empty (vacuously true)
  MethodBody body;
  SourceSpan span;

  bool operator==(const MethodCase &) const = default;
};

struct MethodDecl {
  std::string name;      // surface syntax gives one identifier for both
  std::string taskName;  // the abstract task this method decomposes
  std::vector<Param> params;
  std::optional<std::vector<Cond>> emptyCondition;  // `empty{...}` zero-subtask case
  std::vector<MethodCase> cases;
  SourceSpan span;

  bool operator==(const MethodDecl &) const = default;
};

struct OperatorDecl {
  std::string name;
  std::vector<Param> params;  // first parameter is always Agent-typed
  std::vector<Cond> precondition;
  std::vector<Effect> effects;
  FnRef costFn;
  std::optional<FnRef> durationFn;
  SourceSpan span;

  bool operator==(const OperatorDecl &) const = default;
};

/// Parsed domain file. `entityTypes` always contains the built-in Agent type.
struct DomainAst {
  std::vector<EntityTypeDecl> entityTypes;
  std::vector<MethodDecl> methods;
  std::vector<OperatorDecl> operators;

  bool operator==(const DomainAst &) const = default;

  const EntityTypeDecl *find_type(const std::string &name) const;
  const MethodDecl *find_method(const std::string &taskName) const;
  const OperatorDecl *find_operator(const std::string &name) const;
};

// ---------------------------------------------------------------------------
// Problem file
// ---------------------------------------------------------------------------

struct Instantiation {
  std::vector<std::string> names;  // `X, Y = new Type;`
  std::string typeName;
  SourceSpan span;

  bool operator==(const Instantiation &) const = default;
};

struct InitAssign {
  std::string entity;
  std::string attribute;
  WriteOp op = WriteOp::Assign;  // Assign or SetAdd
  Expr value;
  SourceSpan span;

  bool operator==(const InitAssign &) const = default;
};

struct TableEntry {
  std::vector<Expr> keys;  // entity names or literals, no access paths
  Rational value;
  SourceSpan span;

  bool operator==(const TableEntry &) const = default;
};

/// Declarative numeric table usable as a cost, duration or ordering function.
struct TableDeclAst {
  std::string name;
  std::vector<std::string> columnTypes;
  std::vector<TableEntry> entries;
  std::optional<Rational> defaultValue;
  SourceSpan span;

  bool operator==(const TableDeclAst &) const = default;
};

struct ProblemAst {
  std::vector<Instantiation> instantiations;
  std::vector<InitAssign> assignments;
  std::vector<TableDeclAst> tables;
  std::vector<TaskInvocationAst> goal;

  bool operator==(const ProblemAst &) const = default;
};

}  // namespace hatp
