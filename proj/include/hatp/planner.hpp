#pragma once

#include <string>
#include <vector>

#include "hatp/ast.hpp"
#include "hatp/plan.hpp"
#include "hatp/registry.hpp"
#include "hatp/world.hpp"

namespace hatp {

/// A task instance with evaluated arguments.
struct GroundTask {
  std::string name;
  std::vector<Value> args;

  bool operator==(const GroundTask &) const = default;
};

/// All total orders of the body's subtasks compatible with its `>k`
/// constraints. Each element lists indices into body.subtasks; the sequences
/// are produced in lexicographic order of their label sequences.
std::vector<std::vector<int>> linearizations(const MethodBody &body);

/// One candidate decomposition of an abstract task: the ground subtask
/// sequence that replaces it (empty for a satisfied empty-case).
struct Expansion {
  std::vector<GroundTask> tasks;

  bool operator==(const Expansion &) const = default;
};

/// Every one-level decomposition of `task` in `state`, in the order the
/// search explores them: the empty case first when its condition holds, then
/// each case in declaration order, selector bindings in candidate order,
/// linearizations last.
std::vector<Expansion> decompose_step(const DomainAst &domain, const WorldState &state,
                                      const GroundTask &task,
                                      FunctionRegistry &registry);

/// Resolves parsed goal invocations against the state: names stay, entity
/// arguments become references. Throws EvalError for unknown entities.
std::vector<GroundTask> ground_goal(const std::vector<TaskInvocationAst> &goal,
                                    const WorldState &state);

/// Depth-first decomposition of the goal task list. Abstract tasks expand
/// leftmost-first; actions are applied to the state as they are reached, so
/// every precondition is evaluated in the exact state the action will see.
/// In Optimal mode a branch is pruned as soon as the accumulated cost plus
/// the next action's cost reaches the best known plan cost.
PlanResult plan(const DomainAst &domain, const WorldState &s0,
                const std::vector<GroundTask> &goal, FunctionRegistry &registry,
                const SearchOptions &opts = {});

/// Re-executes a plan from the initial state: every precondition must hold,
/// every recorded attachment must be reproduced by its solver, costs and
/// durations must match, and the total must add up. Returns false with a
/// reason instead of throwing.
bool replay_validate(const DomainAst &domain, const WorldState &s0, const Plan &plan,
                     FunctionRegistry &registry, std::string *error = nullptr);

}  // namespace hatp
