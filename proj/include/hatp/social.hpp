#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hatp/ast.hpp"
#include "hatp/plan.hpp"
#include "hatp/rational.hpp"
#include "hatp/streams.hpp"

namespace hatp {

enum class BalanceMode { Difference, Ratio };

/// One template in a forbidden sequence: an action name plus one pattern per
/// argument, where "*" matches anything. An empty pattern list matches the
/// action at any arity.
struct ActionPattern {
  std::string action;
  std::vector<std::string> args;

  bool operator==(const ActionPattern &) const = default;
};

/// Consecutive steps within a single agent's stream that must not occur.
struct ForbiddenSequence {
  std::vector<ActionPattern> steps;

  bool operator==(const ForbiddenSequence &) const = default;
};

/// Acceptability rules for plans that involve people:
///  - wait: no agent may sit idle longer than the bound, counted from plan
///    start to its first step plus the gaps between its steps;
///  - effort balance: per-agent summed effort (weight per action name, the
///    step's cost when unlisted; joint steps count for every participant)
///    must stay within the bound, as max-min difference or max/min ratio;
///  - intricacy: cross-agent dependencies (links whose endpoints have
///    different primary agents, plus joint groups) must not exceed the bound;
///  - forbidden sequences: no agent's stream may contain a listed pattern.
struct FilterConfig {
  std::optional<Rational> maxWaitPerAgent;
  std::optional<Rational> maxEffortImbalance;
  BalanceMode balanceMode = BalanceMode::Difference;
  std::map<std::string, Rational> effortWeights;
  std::optional<int64_t> maxIntricacy;
  std::vector<ForbiddenSequence> forbiddenSequences;
};

/// Reads a FilterConfig from JSON text. Rationals are written as strings
/// ("5", "7/2"). Throws EvalError on malformed input.
FilterConfig parse_filter_config(const std::string &jsonText);

/// Earliest-start schedule of a plan under the stream partial order. A
/// step's duration is its recorded duration, falling back to its cost.
struct Schedule {
  std::vector<Rational> start, end;
  Rational makespan;
};
Schedule schedule_plan(const Plan &plan, const StreamPlan &streams,
                       const DomainAst &domain);

struct FilterViolation {
  std::string criterion;  // "wait", "effort-balance", "intricacy", "forbidden-sequence"
  std::string detail;
  Rational measured;
  Rational threshold;

  bool operator==(const FilterViolation &) const = default;
};

struct FilterMetrics {
  Rational makespan;
  std::map<std::string, Rational> waitByAgent;
  std::map<std::string, Rational> effortByAgent;
  int64_t intricacy = 0;
};

struct FilterReport {
  bool accepted = true;
  std::vector<FilterViolation> violations;
  FilterMetrics metrics;
};

/// Checks every configured criterion; all violations are reported, not just
/// the first.
FilterReport apply_filters(const Plan &plan, const StreamPlan &streams,
                           const DomainAst &domain, const FilterConfig &config);

}  // namespace hatp
