#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hatp/ast.hpp"
#include "hatp/plan.hpp"
#include "hatp/rational.hpp"
#include "hatp/value.hpp"
#include "hatp/world.hpp"

namespace hatp {

/// Use site of a registered external function.
enum class FunctionKind { Cost, Duration, Ordering, Evaluable };

/// What the planner sees of an evaluable-predicate query: the current state
/// and the steps planned so far, whose attachments earlier queries produced.
struct EvalContext {
  const WorldState &state;
  std::span<const PlanStep> priorSteps;
};

/// One solution of an evaluable predicate. The payload is opaque to the
/// planner; it is recorded on the plan step and surfaced again on replay.
struct Solution {
  std::string payload;
};

/// Solver for an evaluable predicate, queried with increasing solution
/// indices 0, 1, 2, ... Must be deterministic in its inputs, and once it
/// reports no solution for some index it must do so for every larger index.
/// The planner stops querying at the first empty answer.
using PredicateSolver = std::function<std::optional<Solution>(
    const EvalContext &, const std::vector<Value> &, int solutionIndex)>;

using NumericFn =
    std::function<Rational(const WorldState &, const std::vector<Value> &)>;

/// Key-value cost table declared in a problem file. Keys are full argument
/// tuples; a missing key falls back to the default, and a miss without a
/// default is an evaluation error.
class NumericTable {
public:
  void set(std::vector<Value> key, Rational v) { entries_[std::move(key)] = v; }
  void set_default(Rational v) { default_ = v; }
  Rational lookup(const std::vector<Value> &key, const std::string &tableName) const;

private:
  std::map<std::vector<Value>, Rational> entries_;
  std::optional<Rational> default_;
};

struct ExternStats {
  uint64_t numericCalls = 0;
  uint64_t externalCalls = 0;  // evaluable-predicate solver invocations
  std::map<std::string, uint64_t> externalCallsByName;
};

/// Registry of everything the planner calls out to: cost, duration and
/// ordering functions, declarative numeric tables, and evaluable predicates.
///
/// Names of the form `const_<n>` are built in and yield the constant n at any
/// numeric use site. Tables are also accepted at any numeric use site;
/// functions registered with a specific kind are only accepted there.
class FunctionRegistry {
public:
  void add_numeric(const std::string &name, FunctionKind kind, NumericFn fn);
  void add_table(const std::string &name, NumericTable table);
  void add_predicate(const std::string &name, PredicateSolver solver);

  /// Registers every table declared by the problem, using the state to turn
  /// entity names into references.
  void load_tables(const ProblemAst &problem, const WorldState &state);

  bool resolves_numeric(const std::string &name, FunctionKind site) const;
  bool has_predicate(const std::string &name) const;

  /// Evaluates a numeric function with already-evaluated arguments. Cost and
  /// duration results must be non-negative. Counts toward numericCalls.
  Rational call_numeric(const std::string &name, const std::vector<Value> &args,
                        const WorldState &state, FunctionKind site);

  /// Queries an evaluable predicate for the given solution index. Counts
  /// toward externalCalls, total and per name.
  std::optional<Solution> call_predicate(const std::string &name,
                                         const EvalContext &ctx,
                                         const std::vector<Value> &args,
                                         int solutionIndex);

  const ExternStats &stats() const { return stats_; }
  void reset_stats() { stats_ = {}; }

private:
  struct NumericEntry {
    std::optional<FunctionKind> kind;  // nullopt: any numeric site (tables)
    NumericFn fn;
  };
  std::map<std::string, NumericEntry> numerics_;
  std::map<std::string, PredicateSolver> predicates_;
  ExternStats stats_;

  static std::optional<int64_t> const_value(const std::string &name);
};

}  // namespace hatp
