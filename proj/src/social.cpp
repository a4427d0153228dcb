#include "hatp/social.hpp"

#include <algorithm>

#include "json.hpp"
#include "hatp/world.hpp"

namespace hatp {

namespace {

Rational rational_field(const nlohmann::json &j, const std::string &where) {
  if (j.is_number_integer()) return Rational(j.get<int64_t>());
  if (j.is_string()) {
    if (auto r = Rational::parse(j.get<std::string>())) return *r;
  }
  throw EvalError("filter config: '" + where + "' is not a rational ('5' or '7/2')");
}

/// Steps each agent takes part in (primary or joint), sorted by plan order.
std::map<std::string, std::vector<int>> participation(const StreamPlan &streams) {
  std::map<std::string, std::vector<int>> out;
  for (const auto &s : streams.streams)
    for (int i : s.steps) out[s.agent].push_back(i);
  for (const auto &j : streams.joints)
    for (const auto &agent : j.agents)
      for (int i : j.steps) out[agent].push_back(i);
  for (auto &[agent, steps] : out) {
    std::sort(steps.begin(), steps.end());
    steps.erase(std::unique(steps.begin(), steps.end()), steps.end());
  }
  return out;
}

Rational step_duration(const PlanStep &step) {
  return step.duration ? *step.duration : step.cost;
}

bool pattern_matches(const ActionPattern &pat, const PlanStep &step) {
  if (pat.action != step.action) return false;
  if (pat.args.empty()) return true;
  if (pat.args.size() != step.argText.size()) return false;
  for (size_t i = 0; i < pat.args.size(); ++i)
    if (pat.args[i] != "*" && pat.args[i] != step.argText[i]) return false;
  return true;
}

}  // namespace

FilterConfig parse_filter_config(const std::string &jsonText) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(jsonText);
  } catch (const nlohmann::json::exception &e) {
    throw EvalError(std::string("filter config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw EvalError("filter config must be a JSON object");

  FilterConfig config;
  if (j.contains("maxWaitPerAgent"))
    config.maxWaitPerAgent = rational_field(j["maxWaitPerAgent"], "maxWaitPerAgent");
  if (j.contains("maxEffortImbalance"))
    config.maxEffortImbalance =
        rational_field(j["maxEffortImbalance"], "maxEffortImbalance");
  if (j.contains("balanceMode")) {
    const std::string mode = j["balanceMode"].get<std::string>();
    if (mode == "difference") {
      config.balanceMode = BalanceMode::Difference;
    } else if (mode == "ratio") {
      config.balanceMode = BalanceMode::Ratio;
    } else {
      throw EvalError("filter config: balanceMode must be 'difference' or 'ratio'");
    }
  }
  if (j.contains("effortWeights")) {
    for (const auto &[action, value] : j["effortWeights"].items())
      config.effortWeights[action] = rational_field(value, "effortWeights." + action);
  }
  if (j.contains("maxIntricacy")) {
    if (!j["maxIntricacy"].is_number_integer())
      throw EvalError("filter config: maxIntricacy must be an integer");
    config.maxIntricacy = j["maxIntricacy"].get<int64_t>();
  }
  if (j.contains("forbiddenSequences")) {
    for (const auto &seq : j["forbiddenSequences"]) {
      ForbiddenSequence fs;
      for (const auto &item : seq) {
        ActionPattern pat;
        if (item.is_string()) {
          pat.action = item.get<std::string>();
        } else {
          pat.action = item.at("action").get<std::string>();
          if (item.contains("args"))
            for (const auto &a : item["args"]) pat.args.push_back(a.get<std::string>());
        }
        fs.steps.push_back(std::move(pat));
      }
      if (fs.steps.empty())
        throw EvalError("filter config: forbidden sequence must list at least one action");
      config.forbiddenSequences.push_back(std::move(fs));
    }
  }
  return config;
}

Schedule schedule_plan(const Plan &plan, const StreamPlan &streams,
                       const DomainAst &domain) {
  const int n = static_cast<int>(plan.steps.size());
  std::vector<std::vector<int>> incoming(n);
  for (auto [u, v] : precedence_edges(streams, plan, domain))
    incoming[v].push_back(u);

  Schedule sched;
  sched.start.resize(n);
  sched.end.resize(n);
  for (int i = 0; i < n; ++i) {
    Rational start;
    for (int pred : incoming[i])
      if (sched.end[pred] > start) start = sched.end[pred];
    sched.start[i] = start;
    sched.end[i] = start + step_duration(plan.steps[i]);
    if (sched.end[i] > sched.makespan) sched.makespan = sched.end[i];
  }
  return sched;
}

FilterReport apply_filters(const Plan &plan, const StreamPlan &streams,
                           const DomainAst &domain, const FilterConfig &config) {
  FilterReport report;
  const Schedule sched = schedule_plan(plan, streams, domain);
  const auto participants = participation(streams);

  report.metrics.makespan = sched.makespan;

  // Per-agent idle time: from plan start to the first step, plus the gaps
  // between consecutive steps.
  for (const auto &[agent, steps] : participants) {
    Rational wait = sched.start[steps.front()];
    for (size_t k = 1; k < steps.size(); ++k) {
      Rational gap = sched.start[steps[k]] - sched.end[steps[k - 1]];
      if (gap > Rational(0)) wait += gap;
    }
    report.metrics.waitByAgent[agent] = wait;
    if (config.maxWaitPerAgent && wait > *config.maxWaitPerAgent) {
      report.violations.push_back({"wait", "agent " + agent + " is idle too long",
                                   wait, *config.maxWaitPerAgent});
    }
  }

  // Effort per agent; joint steps count for every participant.
  for (const auto &[agent, steps] : participants) {
    Rational effort;
    for (int i : steps) {
      auto it = config.effortWeights.find(plan.steps[i].action);
      effort += it != config.effortWeights.end() ? it->second : plan.steps[i].cost;
    }
    report.metrics.effortByAgent[agent] = effort;
  }
  if (config.maxEffortImbalance && !report.metrics.effortByAgent.empty()) {
    Rational lo = report.metrics.effortByAgent.begin()->second;
    Rational hi = lo;
    std::string loAgent = report.metrics.effortByAgent.begin()->first;
    std::string hiAgent = loAgent;
    for (const auto &[agent, effort] : report.metrics.effortByAgent) {
      if (effort < lo) {
        lo = effort;
        loAgent = agent;
      }
      if (effort > hi) {
        hi = effort;
        hiAgent = agent;
      }
    }
    const std::string detail =
        hiAgent + " carries " + hi.str() + ", " + loAgent + " carries " + lo.str();
    if (config.balanceMode == BalanceMode::Difference) {
      Rational imbalance = hi - lo;
      if (imbalance > *config.maxEffortImbalance)
        report.violations.push_back(
            {"effort-balance", detail, imbalance, *config.maxEffortImbalance});
    } else if (lo == Rational(0)) {
      if (hi > Rational(0))
        report.violations.push_back(
            {"effort-balance", detail + " (ratio unbounded: zero minimum)", hi,
             *config.maxEffortImbalance});
    } else {
      Rational ratio = hi / lo;
      if (ratio > *config.maxEffortImbalance)
        report.violations.push_back(
            {"effort-balance", detail, ratio, *config.maxEffortImbalance});
    }
  }

  // Intricacy: dependencies that couple different agents.
  std::map<int, std::string> primaryOf;
  for (const auto &s : streams.streams)
    for (int i : s.steps) primaryOf[i] = s.agent;
  int64_t intricacy = 0;
  for (const auto &link : streams.links)
    if (primaryOf[link.producer] != primaryOf[link.consumer]) ++intricacy;
  intricacy += static_cast<int64_t>(streams.joints.size());
  report.metrics.intricacy = intricacy;
  if (config.maxIntricacy && intricacy > *config.maxIntricacy) {
    report.violations.push_back({"intricacy",
                                 "plan couples agents too tightly",
                                 Rational(intricacy), Rational(*config.maxIntricacy)});
  }

  // Forbidden sequences, per agent stream.
  for (const auto &seq : config.forbiddenSequences) {
    for (const auto &s : streams.streams) {
      if (s.steps.size() < seq.steps.size()) continue;
      for (size_t at = 0; at + seq.steps.size() <= s.steps.size(); ++at) {
        bool match = true;
        for (size_t k = 0; k < seq.steps.size() && match; ++k)
          match = pattern_matches(seq.steps[k], plan.steps[s.steps[at + k]]);
        if (!match) continue;
        std::string detail = "agent " + s.agent + " runs";
        for (size_t k = 0; k < seq.steps.size(); ++k)
          detail += " " + plan.steps[s.steps[at + k]].action;
        report.violations.push_back(
            {"forbidden-sequence", detail, Rational(1), Rational(0)});
      }
    }
  }

  report.accepted = report.violations.empty();
  return report;
}

}  // namespace hatp
