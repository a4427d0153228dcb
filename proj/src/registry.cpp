#include "hatp/registry.hpp"

#include <cctype>

namespace hatp {

Rational NumericTable::lookup(const std::vector<Value> &key,
                              const std::string &tableName) const {
  auto it = entries_.find(key);
  if (it != entries_.end()) return it->second;
  if (default_) return *default_;
  throw EvalError("table '" + tableName + "' has no entry for the given key and no default");
}

std::optional<int64_t> FunctionRegistry::const_value(const std::string &name) {
  if (name.rfind("const_", 0) != 0) return std::nullopt;
  std::string digits = name.substr(6);
  if (digits.empty()) return std::nullopt;
  int64_t v = 0;
  for (char c : digits) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
    v = v * 10 + (c - '0');
  }
  return v;
}

void FunctionRegistry::add_numeric(const std::string &name, FunctionKind kind,
                                   NumericFn fn) {
  if (kind == FunctionKind::Evaluable)
    throw EvalError("use add_predicate for evaluable predicates");
  if (const_value(name))
    throw EvalError("'" + name + "' is reserved for constants");
  if (!numerics_.emplace(name, NumericEntry{kind, std::move(fn)}).second)
    throw EvalError("duplicate registration of function '" + name + "'");
}

void FunctionRegistry::add_table(const std::string &name, NumericTable table) {
  if (const_value(name))
    throw EvalError("'" + name + "' is reserved for constants");
  NumericFn fn = [name, table = std::move(table)](
                     const WorldState &, const std::vector<Value> &args) {
    return table.lookup(args, name);
  };
  if (!numerics_.emplace(name, NumericEntry{std::nullopt, std::move(fn)}).second)
    throw EvalError("duplicate registration of function '" + name + "'");
}

void FunctionRegistry::add_predicate(const std::string &name, PredicateSolver solver) {
  if (!predicates_.emplace(name, std::move(solver)).second)
    throw EvalError("duplicate registration of predicate '" + name + "'");
}

void FunctionRegistry::load_tables(const ProblemAst &problem, const WorldState &state) {
  for (const auto &decl : problem.tables) {
    NumericTable table;
    for (const auto &entry : decl.entries) {
      std::vector<Value> key;
      for (const auto &expr : entry.keys) {
        if (const auto *lit = std::get_if<Literal>(&expr)) {
          if (std::holds_alternative<NullLit>(lit->value)) {
            key.push_back(NullT{});
          } else if (const auto *b = std::get_if<bool>(&lit->value)) {
            key.push_back(*b);
          } else if (const auto *i = std::get_if<int64_t>(&lit->value)) {
            key.push_back(*i);
          } else {
            key.push_back(std::get<std::string>(lit->value));
          }
          continue;
        }
        const auto &name = std::get<NameExpr>(expr);
        auto id = state.find_entity(name.name);
        if (!id || !name.path.empty())
          throw EvalError("table '" + decl.name + "' key is not an entity: '" +
                          name.name + "'");
        key.push_back(EntityRef{*id});
      }
      table.set(std::move(key), entry.value);
    }
    if (decl.defaultValue) table.set_default(*decl.defaultValue);
    add_table(decl.name, std::move(table));
  }
}

bool FunctionRegistry::resolves_numeric(const std::string &name,
                                        FunctionKind site) const {
  if (const_value(name)) return true;
  auto it = numerics_.find(name);
  if (it == numerics_.end()) return false;
  return !it->second.kind || *it->second.kind == site;
}

bool FunctionRegistry::has_predicate(const std::string &name) const {
  return predicates_.count(name) > 0;
}

Rational FunctionRegistry::call_numeric(const std::string &name,
                                        const std::vector<Value> &args,
                                        const WorldState &state, FunctionKind site) {
  ++stats_.numericCalls;
  Rational result;
  if (auto k = const_value(name)) {
    result = Rational(*k);
  } else {
    auto it = numerics_.find(name);
    if (it == numerics_.end())
      throw EvalError("unknown external function '" + name + "'");
    if (it->second.kind && *it->second.kind != site)
      throw EvalError("function '" + name + "' is not registered for this use site");
    result = it->second.fn(state, args);
  }
  if ((site == FunctionKind::Cost || site == FunctionKind::Duration) &&
      result < Rational(0))
    throw EvalError("function '" + name + "' returned a negative value");
  return result;
}

std::optional<Solution> FunctionRegistry::call_predicate(const std::string &name,
                                                         const EvalContext &ctx,
                                                         const std::vector<Value> &args,
                                                         int solutionIndex) {
  auto it = predicates_.find(name);
  if (it == predicates_.end())
    throw EvalError("unknown evaluable predicate '" + name + "'");
  ++stats_.externalCalls;
  ++stats_.externalCallsByName[name];
  return it->second(ctx, args, solutionIndex);
}

}  // namespace hatp
