#include "hatp/planner.hpp"

#include <algorithm>
#include <chrono>
#include <map>

namespace hatp {

std::vector<std::vector<int>> linearizations(const MethodBody &body) {
  const auto &tasks = body.subtasks;
  const int n = static_cast<int>(tasks.size());

  // Subtask positions in increasing label order; picking candidates in this
  // order makes the enumeration lexicographic by label sequence.
  std::vector<int> byLabel(n);
  for (int i = 0; i < n; ++i) byLabel[i] = i;
  std::sort(byLabel.begin(), byLabel.end(),
            [&](int a, int b) { return tasks[a].label < tasks[b].label; });

  std::map<int, int> posOfLabel;
  for (int i = 0; i < n; ++i) posOfLabel[tasks[i].label] = i;

  std::vector<std::vector<int>> out;
  std::vector<int> current;
  std::vector<bool> placed(n, false);

  auto ready = [&](int p) {
    for (int predLabel : tasks[p].predecessors)
      if (!placed[posOfLabel.at(predLabel)]) return false;
    return true;
  };

  std::function<void()> rec = [&]() {
    if (static_cast<int>(current.size()) == n) {
      out.push_back(current);
      return;
    }
    for (int p : byLabel) {
      if (placed[p] || !ready(p)) continue;
      placed[p] = true;
      current.push_back(p);
      rec();
      current.pop_back();
      placed[p] = false;
    }
  };
  rec();
  return out;
}

std::vector<GroundTask> ground_goal(const std::vector<TaskInvocationAst> &goal,
                                    const WorldState &state) {
  std::vector<GroundTask> tasks;
  Bindings empty;
  for (const auto &inv : goal) {
    GroundTask g;
    g.name = inv.name;
    for (const auto &arg : inv.args) g.args.push_back(eval_expr(arg, state, empty));
    tasks.push_back(std::move(g));
  }
  return tasks;
}

namespace {

std::vector<std::string> arg_texts(const std::vector<Value> &args,
                                   const WorldState &state) {
  std::vector<std::string> out;
  out.reserve(args.size());
  for (const auto &v : args) out.push_back(value_text(v, state));
  return out;
}

void bind_params(Bindings &b, const std::vector<Param> &params,
                 const std::vector<Value> &args, const std::string &taskName) {
  if (params.size() != args.size())
    throw EvalError("task '" + taskName + "' expects " +
                    std::to_string(params.size()) + " arguments, got " +
                    std::to_string(args.size()));
  for (size_t i = 0; i < params.size(); ++i) b.push(params[i].name, args[i]);
}

/// Candidate entities for a selector, filtered, ordered and truncated
/// according to its kind.
std::vector<EntityId> selector_candidates(const SelectorDecl &sel,
                                          const WorldState &state, Bindings &b,
                                          FunctionRegistry &registry) {
  std::vector<EntityId> cands =
      filter_candidates(sel.entityType, sel.var, sel.filter, state, b);
  if (sel.kind == SelectorKind::SelectOrdered) {
    std::vector<std::pair<Rational, EntityId>> keyed;
    keyed.reserve(cands.size());
    for (EntityId id : cands) {
      b.push(sel.var, EntityRef{id});
      std::vector<Value> args;
      for (const auto &a : sel.orderingFn->args)
        args.push_back(eval_expr(a, state, b));
      b.pop();
      keyed.emplace_back(registry.call_numeric(sel.orderingFn->name, args, state,
                                               FunctionKind::Ordering),
                         id);
    }
    const bool descending = sel.direction == SortDirection::Descending;
    std::stable_sort(keyed.begin(), keyed.end(),
                     [&](const auto &x, const auto &y) {
                       return descending ? y.first < x.first : x.first < y.first;
                     });
    cands.clear();
    for (const auto &[key, id] : keyed) cands.push_back(id);
  }
  if (sel.kind == SelectorKind::SelectOnce && cands.size() > 1) cands.resize(1);
  return cands;
}

struct TaskItem {
  GroundTask task;
  uint32_t depth;
};

class Engine {
public:
  Engine(const DomainAst &domain, FunctionRegistry &registry,
         const SearchOptions &opts)
      : domain_(domain), registry_(registry), opts_(opts) {}

  void run(const WorldState &s0, const std::vector<GroundTask> &goal) {
    for (auto it = goal.rbegin(); it != goal.rend(); ++it)
      agenda_.push_back({*it, 0});
    WorldState state = s0;
    solve(state);
  }

  PlanResult finish() {
    PlanResult r;
    r.stats.nodesExpanded = nodes_;
    r.stats.backtracks = backtracks_;
    r.stats.linearizationsGenerated = linCount_;
    if (!undefinedTask_.empty()) {
      r.status = PlanStatus::UndefinedTask;
      r.message = "undefined task '" + undefinedTask_ + "'";
      return r;
    }
    r.best = std::move(best_);
    r.all = std::move(all_);
    if (r.best) {
      r.status = PlanStatus::Success;
      if (nodeLimitHit_ || depthLimitHit_)
        r.message = "search budget exhausted; result may be incomplete";
    } else if (nodeLimitHit_ || depthLimitHit_) {
      r.status = PlanStatus::NoSolutionResourceLimit;
      r.message = nodeLimitHit_ ? "node budget exhausted" : "depth budget exhausted";
    } else {
      r.status = PlanStatus::NoSolutionExhausted;
    }
    return r;
  }

private:
  const DomainAst &domain_;
  FunctionRegistry &registry_;
  SearchOptions opts_;

  std::vector<TaskItem> agenda_;  // back = leftmost pending task
  std::vector<PlanStep> steps_;
  Rational cost_;

  std::optional<Plan> best_;
  std::vector<Plan> all_;
  uint64_t nodes_ = 0, backtracks_ = 0, linCount_ = 0;
  bool nodeLimitHit_ = false, depthLimitHit_ = false;
  bool stop_ = false;  // whole search is over (limit hit, first plan, ...)
  std::string undefinedTask_;

  std::map<const MethodBody *, std::vector<std::vector<int>>> linCache_;

  void solve(WorldState &state) {
    if (stop_) return;
    if (++nodes_ > opts_.maxNodes) {
      nodeLimitHit_ = true;
      stop_ = true;
      return;
    }
    if (agenda_.empty()) {
      record_solution();
      return;
    }
    TaskItem item = std::move(agenda_.back());
    agenda_.pop_back();

    if (const OperatorDecl *op = domain_.find_operator(item.task.name)) {
      apply_operator(*op, item, state);
    } else if (const MethodDecl *m = domain_.find_method(item.task.name)) {
      apply_method(*m, item, state);
    } else {
      undefinedTask_ = item.task.name;
      stop_ = true;
    }
    agenda_.push_back(std::move(item));
  }

  // -- operators -----------------------------------------------------------

  void apply_operator(const OperatorDecl &op, const TaskItem &item,
                      WorldState &state) {
    Bindings b;
    bind_params(b, op.params, item.task.args, op.name);

    std::vector<const Cond *> plain;
    std::vector<const PredicateCall *> preds;
    for (const auto &c : op.precondition) {
      if (const auto *call = std::get_if<PredicateCall>(&c)) {
        if (!registry_.has_predicate(call->name))
          throw EvalError("unknown evaluable predicate '" + call->name + "'");
        preds.push_back(call);
        continue;
      }
      plain.push_back(&c);
    }
    for (const Cond *c : plain) {
      if (!eval_conditions({*c}, state, b)) {
        ++backtracks_;
        return;
      }
    }
    std::vector<Attachment> chosen;
    try_predicates(op, item, preds, 0, b, state, chosen);
  }

  /// Choice point over evaluable-predicate solution indices, nested in
  /// conjunct order. Downstream failure retries the innermost predicate with
  /// the next index; the first empty answer ends that predicate's options.
  void try_predicates(const OperatorDecl &op, const TaskItem &item,
                      const std::vector<const PredicateCall *> &preds, size_t k,
                      Bindings &b, WorldState &state,
                      std::vector<Attachment> &chosen) {
    if (stop_) return;
    if (k == preds.size()) {
      finish_operator(op, item, b, state, chosen);
      return;
    }
    const PredicateCall &call = *preds[k];
    std::vector<Value> args;
    for (const auto &a : call.args) args.push_back(eval_expr(a, state, b));

    bool any = false;
    for (int index = 0; !stop_; ++index) {
      EvalContext ctx{state, std::span<const PlanStep>(steps_)};
      auto sol = registry_.call_predicate(call.name, ctx, args, index);
      if (!sol) break;
      any = true;
      chosen.push_back({call.name, index, std::move(sol->payload)});
      try_predicates(op, item, preds, k + 1, b, state, chosen);
      chosen.pop_back();
    }
    if (!any) ++backtracks_;
  }

  void finish_operator(const OperatorDecl &op, const TaskItem &item, Bindings &b,
                       WorldState &state, const std::vector<Attachment> &chosen) {
    std::vector<Value> costArgs;
    for (const auto &a : op.costFn.args) costArgs.push_back(eval_expr(a, state, b));
    Rational c =
        registry_.call_numeric(op.costFn.name, costArgs, state, FunctionKind::Cost);

    if (opts_.mode == SearchMode::Optimal && best_ &&
        !(cost_ + c < best_->totalCost)) {
      ++backtracks_;
      return;
    }

    std::optional<Rational> duration;
    if (op.durationFn) {
      std::vector<Value> durArgs;
      for (const auto &a : op.durationFn->args)
        durArgs.push_back(eval_expr(a, state, b));
      duration = registry_.call_numeric(op.durationFn->name, durArgs, state,
                                        FunctionKind::Duration);
    }

    WorldState next = state;
    apply_effects(op.effects, next, b);

    PlanStep step;
    step.index = static_cast<int>(steps_.size());
    step.action = op.name;
    step.args = item.task.args;
    step.argText = arg_texts(item.task.args, state);
    step.cost = c;
    step.duration = duration;
    step.attachments = chosen;
    steps_.push_back(std::move(step));
    cost_ += c;

    solve(next);

    cost_ -= c;
    steps_.pop_back();
    if (!stop_) ++backtracks_;
  }

  // -- methods -------------------------------------------------------------

  void apply_method(const MethodDecl &m, const TaskItem &item, WorldState &state) {
    Bindings b;
    bind_params(b, m.params, item.task.args, m.taskName);

    if (m.emptyCondition && eval_conditions(*m.emptyCondition, state, b)) {
      solve(state);  // the task needs nothing; decompose to the empty sequence
      if (stop_) return;
    }
    const uint32_t childDepth = item.depth + 1;
    if (childDepth > opts_.maxDepth) {
      depthLimitHit_ = true;
      ++backtracks_;
      return;
    }
    for (const auto &c : m.cases) {
      if (stop_) return;
      if (!eval_conditions(c.precondition, state, b)) {
        ++backtracks_;
        continue;
      }
      expand_selectors(c, 0, childDepth, b, state);
    }
  }

  void expand_selectors(const MethodCase &c, size_t i, uint32_t childDepth,
                        Bindings &b, WorldState &state) {
    if (stop_) return;
    if (i == c.body.selectors.size()) {
      expand_linearizations(c, childDepth, b, state);
      return;
    }
    const SelectorDecl &sel = c.body.selectors[i];
    std::vector<EntityId> cands = selector_candidates(sel, state, b, registry_);
    if (cands.empty()) {
      ++backtracks_;
      return;
    }
    for (EntityId id : cands) {
      if (stop_) return;
      b.push(sel.var, EntityRef{id});
      expand_selectors(c, i + 1, childDepth, b, state);
      b.pop();
    }
  }

  void expand_linearizations(const MethodCase &c, uint32_t childDepth, Bindings &b,
                             WorldState &state) {
    auto cacheIt = linCache_.find(&c.body);
    if (cacheIt == linCache_.end())
      cacheIt = linCache_.emplace(&c.body, linearizations(c.body)).first;

    for (const auto &lin : cacheIt->second) {
      if (stop_) return;
      ++linCount_;
      std::vector<GroundTask> tasks;
      tasks.reserve(lin.size());
      for (int idx : lin) {
        const Subtask &st = c.body.subtasks[idx];
        GroundTask g;
        g.name = st.task.name;
        for (const auto &a : st.task.args) g.args.push_back(eval_expr(a, state, b));
        tasks.push_back(std::move(g));
      }
      const size_t mark = agenda_.size();
      for (auto it = tasks.rbegin(); it != tasks.rend(); ++it)
        agenda_.push_back({std::move(*it), childDepth});
      solve(state);
      agenda_.resize(mark);
    }
  }

  void record_solution() {
    Plan p{steps_, cost_};
    switch (opts_.mode) {
      case SearchMode::FirstSolution:
        best_ = std::move(p);
        stop_ = true;
        break;
      case SearchMode::Optimal:
        if (!best_ || p.totalCost < best_->totalCost) best_ = std::move(p);
        break;
      case SearchMode::AllSolutions:
        if (!best_ || p.totalCost < best_->totalCost) best_ = p;
        all_.push_back(std::move(p));
        if (opts_.allSolutionsLimit && all_.size() >= opts_.allSolutionsLimit)
          stop_ = true;
        break;
    }
  }
};

}  // namespace

std::vector<Expansion> decompose_step(const DomainAst &domain, const WorldState &state,
                                      const GroundTask &task,
                                      FunctionRegistry &registry) {
  const MethodDecl *m = domain.find_method(task.name);
  if (!m) throw EvalError("no method decomposes task '" + task.name + "'");

  Bindings b;
  bind_params(b, m->params, task.args, m->taskName);

  std::vector<Expansion> out;
  if (m->emptyCondition && eval_conditions(*m->emptyCondition, state, b))
    out.push_back(Expansion{});

  for (const auto &c : m->cases) {
    if (!eval_conditions(c.precondition, state, b)) continue;
    std::function<void(size_t)> overSelectors = [&](size_t i) {
      if (i < c.body.selectors.size()) {
        const SelectorDecl &sel = c.body.selectors[i];
        for (EntityId id : selector_candidates(sel, state, b, registry)) {
          b.push(sel.var, EntityRef{id});
          overSelectors(i + 1);
          b.pop();
        }
        return;
      }
      for (const auto &lin : linearizations(c.body)) {
        Expansion e;
        for (int idx : lin) {
          const Subtask &st = c.body.subtasks[idx];
          GroundTask g;
          g.name = st.task.name;
          for (const auto &a : st.task.args) g.args.push_back(eval_expr(a, state, b));
          e.tasks.push_back(std::move(g));
        }
        out.push_back(std::move(e));
      }
    };
    overSelectors(0);
  }
  return out;
}

PlanResult plan(const DomainAst &domain, const WorldState &s0,
                const std::vector<GroundTask> &goal, FunctionRegistry &registry,
                const SearchOptions &opts) {
  const auto t0 = std::chrono::steady_clock::now();
  const ExternStats before = registry.stats();

  Engine engine(domain, registry, opts);
  engine.run(s0, goal);
  PlanResult result = engine.finish();

  const ExternStats &after = registry.stats();
  result.stats.externalCalls = after.externalCalls - before.externalCalls;
  for (const auto &[name, count] : after.externalCallsByName) {
    auto it = before.externalCallsByName.find(name);
    uint64_t delta = count - (it == before.externalCallsByName.end() ? 0 : it->second);
    if (delta) result.stats.externalCallsByName[name] = delta;
  }
  result.stats.elapsedSeconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

bool replay_validate(const DomainAst &domain, const WorldState &s0, const Plan &plan,
                     FunctionRegistry &registry, std::string *error) {
  auto fail = [&](const std::string &msg) {
    if (error) *error = msg;
    return false;
  };
  WorldState state = s0;
  std::vector<PlanStep> executed;
  Rational total;
  try {
    for (size_t i = 0; i < plan.steps.size(); ++i) {
      const PlanStep &step = plan.steps[i];
      const std::string where = "step " + std::to_string(i) + " (" + step.action + ")";
      if (step.index != static_cast<int>(i))
        return fail(where + ": index " + std::to_string(step.index) +
                    " does not match position");
      const OperatorDecl *op = domain.find_operator(step.action);
      if (!op) return fail(where + ": unknown action");

      Bindings b;
      bind_params(b, op->params, step.args, op->name);

      size_t attachmentIdx = 0;
      for (const auto &c : op->precondition) {
        if (const auto *call = std::get_if<PredicateCall>(&c)) {
          if (attachmentIdx >= step.attachments.size())
            return fail(where + ": missing attachment for predicate '" +
                        call->name + "'");
          const Attachment &att = step.attachments[attachmentIdx++];
          if (att.predicate != call->name)
            return fail(where + ": attachment names predicate '" + att.predicate +
                        "', expected '" + call->name + "'");
          std::vector<Value> args;
          for (const auto &a : call->args) args.push_back(eval_expr(a, state, b));
          EvalContext ctx{state, std::span<const PlanStep>(executed)};
          auto sol =
              registry.call_predicate(call->name, ctx, args, att.solutionIndex);
          if (!sol)
            return fail(where + ": predicate '" + call->name +
                        "' has no solution at index " +
                        std::to_string(att.solutionIndex));
          if (sol->payload != att.payload)
            return fail(where + ": predicate '" + call->name +
                        "' payload differs from the recorded attachment");
          continue;
        }
        if (!eval_conditions({c}, state, b))
          return fail(where + ": precondition does not hold");
      }
      if (attachmentIdx != step.attachments.size())
        return fail(where + ": plan records more attachments than the action has "
                            "predicate conditions");

      std::vector<Value> costArgs;
      for (const auto &a : op->costFn.args) costArgs.push_back(eval_expr(a, state, b));
      Rational c =
          registry.call_numeric(op->costFn.name, costArgs, state, FunctionKind::Cost);
      if (!(c == step.cost))
        return fail(where + ": cost " + c.str() + " differs from recorded " +
                    step.cost.str());
      if (op->durationFn) {
        std::vector<Value> durArgs;
        for (const auto &a : op->durationFn->args)
          durArgs.push_back(eval_expr(a, state, b));
        Rational d = registry.call_numeric(op->durationFn->name, durArgs, state,
                                           FunctionKind::Duration);
        if (!step.duration || !(d == *step.duration))
          return fail(where + ": duration differs from recorded value");
      }

      apply_effects(op->effects, state, b);
      total += c;
      executed.push_back(step);
    }
  } catch (const EvalError &e) {
    return fail(std::string("evaluation error during replay: ") + e.what());
  }
  if (!(total == plan.totalCost))
    return fail("total cost " + total.str() + " differs from recorded " +
                plan.totalCost.str());
  return true;
}

}  // namespace hatp
