#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hatp/rational.hpp"
#include "hatp/value.hpp"

namespace hatp {

/// Outcome of one evaluable-predicate query attached to a plan step: which
/// solution index satisfied the search, plus the solver's opaque payload.
struct Attachment {
  std::string predicate;
  int solutionIndex = 0;
  std::string payload;

  bool operator==(const Attachment &) const = default;
};

/// One action instance in a total-order plan. `args[0]` names the executing
/// agent; `argText` holds the printable form of each argument.
struct PlanStep {
  int index = 0;
  std::string action;
  std::vector<Value> args;
  std::vector<std::string> argText;
  Rational cost;
  std::optional<Rational> duration;
  std::vector<Attachment> attachments;

  bool operator==(const PlanStep &) const = default;
};

struct Plan {
  std::vector<PlanStep> steps;
  Rational totalCost;

  bool operator==(const Plan &) const = default;
};

enum class SearchMode {
  FirstSolution,  // stop at the first plan found
  Optimal,        // branch-and-bound, return a minimum-cost plan
  AllSolutions,   // enumerate every plan (up to a limit)
};

struct SearchOptions {
  SearchMode mode = SearchMode::Optimal;
  uint64_t maxNodes = 1'000'000;
  uint64_t maxDepth = 10'000;
  uint64_t allSolutionsLimit = 0;  // 0 = unlimited
};

struct SearchStatistics {
  uint64_t nodesExpanded = 0;
  uint64_t backtracks = 0;
  uint64_t linearizationsGenerated = 0;
  uint64_t externalCalls = 0;
  std::map<std::string, uint64_t> externalCallsByName;
  double elapsedSeconds = 0;  // informational; never part of artifacts
};

enum class PlanStatus {
  Success,
  NoSolutionExhausted,      // search space fully explored, no plan
  NoSolutionResourceLimit,  // node or depth budget hit before a plan was found
  UndefinedTask,            // goal or subtask names no method or action
};

struct PlanResult {
  PlanStatus status = PlanStatus::NoSolutionExhausted;
  std::optional<Plan> best;
  std::vector<Plan> all;  // AllSolutions mode only, in discovery order
  SearchStatistics stats;
  std::string message;  // detail for UndefinedTask and limit statuses
};

}  // namespace hatp
