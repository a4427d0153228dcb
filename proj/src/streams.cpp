#include "hatp/streams.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <tuple>

#include "hatp/planner.hpp"

namespace hatp {

namespace {

/// How to add or remove one classical atom on a concrete state.
struct SlotEdit {
  EntityId entity;
  int attr;
  Value value;  // set element, atom value, or true for booleans
  SlotArity arity;
  bool isBool;
};

std::string atom_text(const WorldState &state, EntityId id,
                      const AttributeSchema &as, const Value &v) {
  const std::string &entityName = state.entity(id).name;
  if (as.arity == SlotArity::Atom && std::holds_alternative<bool>(v))
    return as.name + "(" + entityName + ")";
  return as.name + "(" + entityName + "," + value_text(v, state) + ")";
}

/// Atoms present in a state, each with the edit that would remove it.
std::map<std::string, SlotEdit> present_atoms(const WorldState &state) {
  std::map<std::string, SlotEdit> out;
  for (EntityId id = 0; id < state.entity_count(); ++id) {
    const TypeSchema &ts = state.schema().type(state.entity(id).typeIndex);
    for (int a = 0; a < static_cast<int>(ts.attributes.size()); ++a) {
      const AttributeSchema &as = ts.attributes[a];
      const Slot &s = state.slot(id, a);
      if (as.arity == SlotArity::Atom) {
        if (std::holds_alternative<NullT>(s.atom)) continue;
        if (const auto *b = std::get_if<bool>(&s.atom); b && !*b) continue;
        out.emplace(atom_text(state, id, as, s.atom),
                    SlotEdit{id, a, s.atom, SlotArity::Atom,
                             std::holds_alternative<bool>(s.atom)});
      } else {
        for (const auto &elem : s.set)
          out.emplace(atom_text(state, id, as, elem),
                      SlotEdit{id, a, elem, SlotArity::Set, false});
      }
    }
  }
  return out;
}

WorldState remove_atom(const WorldState &state, const SlotEdit &e) {
  if (e.arity == SlotArity::Set)
    return state.with_element_present(e.entity, e.attr, e.value, false);
  return state.with_atom_value(e.entity, e.attr, e.isBool ? Value{false} : Value{NullT{}});
}

/// Adding is only meaningful when nothing else is displaced: set insertions,
/// or atom slots currently NULL (false for booleans).
std::optional<WorldState> add_atom(const WorldState &state, const SlotEdit &e) {
  if (e.arity == SlotArity::Set)
    return state.with_element_present(e.entity, e.attr, e.value, true);
  const Value &current = state.slot(e.entity, e.attr).atom;
  if (e.isBool) {
    if (const auto *b = std::get_if<bool>(&current); b && !*b)
      return state.with_atom_value(e.entity, e.attr, true);
    if (std::holds_alternative<NullT>(current))
      return state.with_atom_value(e.entity, e.attr, true);
    return std::nullopt;
  }
  if (!std::holds_alternative<NullT>(current)) return std::nullopt;
  return state.with_atom_value(e.entity, e.attr, e.value);
}

/// Non-predicate precondition conjuncts of a step, evaluated in a state.
bool plain_preconditions_hold(const OperatorDecl &op, const PlanStep &step,
                              const WorldState &state) {
  Bindings b;
  for (size_t i = 0; i < op.params.size(); ++i) b.push(op.params[i].name, step.args[i]);
  for (const auto &c : op.precondition) {
    if (std::holds_alternative<PredicateCall>(c)) continue;
    if (!eval_conditions({c}, state, b)) return false;
  }
  return true;
}

void replay_effects(const OperatorDecl &op, const PlanStep &step, WorldState &state) {
  Bindings b;
  for (size_t i = 0; i < op.params.size(); ++i) b.push(op.params[i].name, step.args[i]);
  apply_effects(op.effects, state, b);
}

std::string primary_agent(const PlanStep &step, const WorldState &s0) {
  if (step.args.empty()) throw EvalError("plan step without arguments");
  const auto *ref = std::get_if<EntityRef>(&step.args[0]);
  if (!ref) throw EvalError("first argument of '" + step.action + "' is not an entity");
  return s0.entity(ref->id).name;
}

std::vector<std::string> participating_agents(const PlanStep &step,
                                              const OperatorDecl &op,
                                              const WorldState &s0) {
  std::vector<std::string> agents{primary_agent(step, s0)};
  for (size_t i = 1; i < op.params.size(); ++i) {
    if (op.params[i].type != "Agent") continue;
    const auto *ref = std::get_if<EntityRef>(&step.args[i]);
    if (!ref) continue;
    std::string name = s0.entity(ref->id).name;
    if (std::find(agents.begin(), agents.end(), name) == agents.end())
      agents.push_back(name);
  }
  return agents;
}

}  // namespace

StreamPlan split_streams(const Plan &plan, const DomainAst &domain,
                         const WorldState &s0, FunctionRegistry &registry) {
  (void)registry;
  const int n = static_cast<int>(plan.steps.size());

  // Replay once, keeping every intermediate state and its atom set.
  std::vector<WorldState> states{s0};
  std::vector<std::map<std::string, SlotEdit>> atoms{present_atoms(s0)};
  std::vector<const OperatorDecl *> ops;
  for (const auto &step : plan.steps) {
    const OperatorDecl *op = domain.find_operator(step.action);
    if (!op) throw EvalError("unknown action '" + step.action + "' in plan");
    ops.push_back(op);
    WorldState next = states.back();
    replay_effects(*op, step, next);
    states.push_back(next);
    atoms.push_back(present_atoms(states.back()));
  }

  // Add and delete events per atom, and the union of every atom ever seen.
  std::map<std::string, std::vector<int>> addedBy, deletedBy;
  std::map<std::string, SlotEdit> universe = atoms[0];
  for (int i = 0; i < n; ++i) {
    for (const auto &[a, edit] : atoms[i + 1]) {
      universe.emplace(a, edit);
      if (!atoms[i].count(a)) addedBy[a].push_back(i);
    }
    for (const auto &[a, edit] : atoms[i])
      if (!atoms[i + 1].count(a)) deletedBy[a].push_back(i);
  }

  StreamPlan result;

  // Streams and joint groups.
  std::map<std::string, std::vector<int>> byAgent;
  for (int i = 0; i < n; ++i) {
    std::vector<std::string> agents = participating_agents(plan.steps[i], *ops[i], s0);
    byAgent[agents[0]].push_back(i);
    if (agents.size() > 1) result.joints.push_back({{i}, agents});
  }
  for (EntityId id = 0; id < s0.entity_count(); ++id) {
    auto it = byAgent.find(s0.entity(id).name);
    if (it != byAgent.end()) result.streams.push_back({it->first, it->second});
  }

  // Links from counterfactual probes.
  std::set<std::tuple<int, int, std::string, int>> seen;
  auto emit = [&](int producer, int consumer, const std::string &atom, LinkKind kind) {
    if (seen.emplace(producer, consumer, atom, static_cast<int>(kind)).second)
      result.links.push_back({producer, consumer, atom, kind});
  };

  for (int i = 0; i < n; ++i) {
    const WorldState &before = states[i];

    // Required-present: removing the atom falsifies the precondition.
    for (const auto &[a, edit] : atoms[i]) {
      if (plain_preconditions_hold(*ops[i], plan.steps[i], remove_atom(before, edit)))
        continue;
      const auto &adds = addedBy[a];
      const auto &dels = deletedBy[a];
      auto producer = std::find_if(adds.rbegin(), adds.rend(),
                                   [&](int j) { return j < i; });
      if (producer != adds.rend()) {
        emit(*producer, i, a, LinkKind::Support);
        for (int k : dels)
          if (k < *producer) emit(k, *producer, a, LinkKind::Ordering);
      }
      for (int k : dels)
        if (k > i) emit(i, k, a, LinkKind::Ordering);
    }

    // Required-absent: adding the atom falsifies the precondition.
    for (const auto &[a, edit] : universe) {
      if (atoms[i].count(a)) continue;
      auto perturbed = add_atom(before, edit);
      if (!perturbed) continue;
      if (plain_preconditions_hold(*ops[i], plan.steps[i], *perturbed)) continue;
      const std::string repr = "!" + a;
      const auto &adds = addedBy[a];
      const auto &dels = deletedBy[a];
      auto producer = std::find_if(dels.rbegin(), dels.rend(),
                                   [&](int j) { return j < i; });
      if (producer != dels.rend()) {
        emit(*producer, i, repr, LinkKind::Support);
        for (int k : adds)
          if (k < *producer) emit(k, *producer, repr, LinkKind::Ordering);
      }
      for (int k : adds)
        if (k > i) emit(i, k, repr, LinkKind::Ordering);
    }
  }

  std::sort(result.links.begin(), result.links.end(), [](const auto &x, const auto &y) {
    return std::tie(x.consumer, x.producer, x.atom) <
           std::tie(y.consumer, y.producer, y.atom);
  });
  return result;
}

std::vector<std::pair<int, int>> precedence_edges(const StreamPlan &streams,
                                                  const Plan &plan,
                                                  const DomainAst &domain) {
  std::set<std::pair<int, int>> edges;

  // Per-agent chains over primary and joint participation.
  std::map<std::string, std::vector<int>> participation;
  for (const auto &s : streams.streams)
    for (int i : s.steps) participation[s.agent].push_back(i);
  for (const auto &j : streams.joints)
    for (const auto &agent : j.agents)
      for (int i : j.steps) participation[agent].push_back(i);
  for (auto &[agent, stepIdxs] : participation) {
    std::sort(stepIdxs.begin(), stepIdxs.end());
    stepIdxs.erase(std::unique(stepIdxs.begin(), stepIdxs.end()), stepIdxs.end());
    for (size_t k = 1; k < stepIdxs.size(); ++k)
      edges.emplace(stepIdxs[k - 1], stepIdxs[k]);
  }
  for (const auto &link : streams.links) edges.emplace(link.producer, link.consumer);

  (void)plan;
  (void)domain;
  return {edges.begin(), edges.end()};
}

namespace {

/// Executes the plan's steps in the given order, checking preconditions and
/// attachments step by step.
bool execute_order(const std::vector<int> &order, const Plan &plan,
                   const DomainAst &domain, const WorldState &s0,
                   FunctionRegistry &registry, std::string *why) {
  WorldState state = s0;
  std::vector<PlanStep> executed;
  try {
    for (int idx : order) {
      const PlanStep &step = plan.steps[idx];
      const OperatorDecl *op = domain.find_operator(step.action);
      Bindings b;
      for (size_t i = 0; i < op->params.size(); ++i)
        b.push(op->params[i].name, step.args[i]);
      size_t attachment = 0;
      for (const auto &c : op->precondition) {
        if (const auto *call = std::get_if<PredicateCall>(&c)) {
          const Attachment &att = step.attachments.at(attachment++);
          std::vector<Value> args;
          for (const auto &a : call->args) args.push_back(eval_expr(a, state, b));
          EvalContext ctx{state, std::span<const PlanStep>(executed)};
          auto sol = registry.call_predicate(call->name, ctx, args, att.solutionIndex);
          if (!sol || sol->payload != att.payload) {
            if (why)
              *why = "step " + std::to_string(idx) + ": predicate '" + call->name +
                     "' no longer matches its attachment";
            return false;
          }
          continue;
        }
        if (!eval_conditions({c}, state, b)) {
          if (why)
            *why = "step " + std::to_string(idx) + " (" + step.action +
                   "): precondition fails in this order";
          return false;
        }
      }
      apply_effects(op->effects, state, b);
      executed.push_back(step);
    }
  } catch (const EvalError &e) {
    if (why) *why = std::string("evaluation error: ") + e.what();
    return false;
  }
  return true;
}

}  // namespace

LinearizationCheckResult check_stream_linearizations(
    const Plan &plan, const StreamPlan &streams, const DomainAst &domain,
    const WorldState &s0, FunctionRegistry &registry, uint64_t seed,
    uint64_t samples, size_t exhaustiveLimit) {
  const int n = static_cast<int>(plan.steps.size());
  LinearizationCheckResult result;

  std::vector<std::vector<int>> succ(n);
  std::vector<int> indegreeInit(n, 0);
  for (auto [u, v] : precedence_edges(streams, plan, domain)) {
    succ[u].push_back(v);
    ++indegreeInit[v];
  }

  auto check = [&](const std::vector<int> &order) {
    ++result.checked;
    std::string why;
    if (!execute_order(order, plan, domain, s0, registry, &why)) {
      ++result.failures;
      if (result.firstFailure.empty()) result.firstFailure = why;
    }
  };

  if (static_cast<size_t>(n) <= exhaustiveLimit) {
    result.exhaustive = true;
    std::vector<int> indegree = indegreeInit;
    std::vector<int> order;
    std::vector<bool> used(n, false);
    std::function<void()> rec = [&]() {
      if (static_cast<int>(order.size()) == n) {
        check(order);
        return;
      }
      for (int v = 0; v < n; ++v) {
        if (used[v] || indegree[v] != 0) continue;
        used[v] = true;
        order.push_back(v);
        for (int w : succ[v]) --indegree[w];
        rec();
        for (int w : succ[v]) ++indegree[w];
        order.pop_back();
        used[v] = false;
      }
    };
    rec();
    return result;
  }

  std::mt19937_64 rng(seed);
  for (uint64_t s = 0; s < samples; ++s) {
    std::vector<int> indegree = indegreeInit;
    std::vector<int> avail;
    for (int v = 0; v < n; ++v)
      if (indegree[v] == 0) avail.push_back(v);
    std::vector<int> order;
    while (!avail.empty()) {
      size_t pick = std::uniform_int_distribution<size_t>(0, avail.size() - 1)(rng);
      int v = avail[pick];
      avail.erase(avail.begin() + static_cast<long>(pick));
      order.push_back(v);
      for (int w : succ[v])
        if (--indegree[w] == 0) avail.push_back(w);
    }
    check(order);
  }
  return result;
}

std::string streams_to_dot(const StreamPlan &streams, const Plan &plan) {
  auto escape = [](const std::string &s) {
    std::string out;
    for (char c : s) {
      if (c == '"' || c == '\\') out += '\\';
      out += c;
    }
    return out;
  };
  auto nodeId = [&](int i) {
    return "a" + std::to_string(i) + "_" + plan.steps[i].action;
  };

  std::map<int, const JointGroup *> jointOf;
  for (const auto &j : streams.joints)
    for (int i : j.steps) jointOf[i] = &j;

  std::ostringstream os;
  os << "digraph streams {\n  rankdir=LR;\n  node [shape=box];\n";
  int cluster = 0;
  for (const auto &s : streams.streams) {
    os << "  subgraph cluster_" << cluster++ << " {\n";
    os << "    label=\"" << escape(s.agent) << "\";\n";
    for (int i : s.steps) {
      std::string label = plan.steps[i].action + "(";
      for (size_t k = 0; k < plan.steps[i].argText.size(); ++k) {
        if (k) label += ",";
        label += plan.steps[i].argText[k];
      }
      label += ")";
      os << "    " << nodeId(i) << " [label=\"" << escape(label) << "\"";
      if (auto it = jointOf.find(i); it != jointOf.end()) {
        std::string with;
        for (const auto &agent : it->second->agents) {
          if (!with.empty()) with += "+";
          with += agent;
        }
        os << ", peripheries=2, tooltip=\"joint: " << escape(with) << "\"";
      }
      os << "];\n";
    }
    os << "  }\n";
  }
  for (const auto &s : streams.streams)
    for (size_t k = 1; k < s.steps.size(); ++k)
      os << "  " << nodeId(s.steps[k - 1]) << " -> " << nodeId(s.steps[k])
         << " [weight=2];\n";
  for (const auto &link : streams.links) {
    os << "  " << nodeId(link.producer) << " -> " << nodeId(link.consumer)
       << " [label=\"" << escape(link.atom) << "\"";
    if (link.kind == LinkKind::Ordering) os << ", style=dashed";
    os << "];\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace hatp
