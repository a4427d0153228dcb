#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hatp/ast.hpp"
#include "hatp/plan.hpp"
#include "hatp/registry.hpp"
#include "hatp/world.hpp"

namespace hatp {

enum class LinkKind {
  Support,   // producer establishes a condition the consumer needs
  Ordering,  // consumer must stay before a step that would destroy it
};

/// Dependency between two steps, carried by one classical atom. A leading
/// '!' on the atom marks a required-absent condition.
struct CausalLink {
  int producer = 0;
  int consumer = 0;
  std::string atom;
  LinkKind kind = LinkKind::Support;

  bool operator==(const CausalLink &) const = default;
};

/// A step executed by several agents at once; all of them must reach it
/// before it runs.
struct JointGroup {
  std::vector<int> steps;
  std::vector<std::string> agents;

  bool operator==(const JointGroup &) const = default;
};

/// One agent's share of the plan: the steps it executes as primary agent
/// (first argument), in plan order.
struct Stream {
  std::string agent;
  std::vector<int> steps;

  bool operator==(const Stream &) const = default;
};

struct StreamPlan {
  std::vector<Stream> streams;
  std::vector<CausalLink> links;
  std::vector<JointGroup> joints;

  bool operator==(const StreamPlan &) const = default;
};

/// Splits a validated plan into per-agent streams and derives the
/// dependencies between them.
///
/// Required atoms are found by counterfactual probing in the classical
/// projection: an atom is required-present for a step if removing just that
/// atom falsifies the step's precondition, and required-absent if adding it
/// does. The producer of a required-present atom is the latest earlier step
/// that added it (for required-absent, that deleted it); atoms supported by
/// the initial state alone yield no link. Ordering links keep later steps
/// that would destroy a required atom behind its consumer. Evaluable
/// predicate conditions are opaque to this analysis.
StreamPlan split_streams(const Plan &plan, const DomainAst &domain,
                         const WorldState &s0, FunctionRegistry &registry);

/// Edges of the execution partial order: per-agent chains over every step an
/// agent takes part in (primary or joint), plus all links. Every edge points
/// forward in plan order.
std::vector<std::pair<int, int>> precedence_edges(const StreamPlan &streams,
                                                  const Plan &plan,
                                                  const DomainAst &domain);

struct LinearizationCheckResult {
  uint64_t checked = 0;
  uint64_t failures = 0;
  bool exhaustive = false;
  std::string firstFailure;
};

/// Executes interleavings of the streams that respect the precedence edges,
/// verifying each step's preconditions and attachments as it runs. Plans
/// with at most `exhaustiveLimit` steps are checked against every linear
/// extension; larger plans against `samples` random extensions drawn with
/// the given seed.
LinearizationCheckResult check_stream_linearizations(
    const Plan &plan, const StreamPlan &streams, const DomainAst &domain,
    const WorldState &s0, FunctionRegistry &registry, uint64_t seed,
    uint64_t samples, size_t exhaustiveLimit = 8);

/// Graphviz rendering: one cluster per stream, joint steps double-bordered,
/// support links solid and ordering links dashed, labelled with their atom.
std::string streams_to_dot(const StreamPlan &streams, const Plan &plan);

}  // namespace hatp
