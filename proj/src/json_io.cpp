#include "hatp/json_io.hpp"

namespace hatp {

std::string base64_encode(std::string_view data) {
  static const char alphabet[] =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((data.size() + 2) / 3 * 4);
  size_t i = 0;
  for (; i + 3 <= data.size(); i += 3) {
    uint32_t v = (static_cast<unsigned char>(data[i]) << 16) |
                 (static_cast<unsigned char>(data[i + 1]) << 8) |
                 static_cast<unsigned char>(data[i + 2]);
    out += alphabet[(v >> 18) & 63];
    out += alphabet[(v >> 12) & 63];
    out += alphabet[(v >> 6) & 63];
    out += alphabet[v & 63];
  }
  if (i + 1 == data.size()) {
    uint32_t v = static_cast<unsigned char>(data[i]) << 16;
    out += alphabet[(v >> 18) & 63];
    out += alphabet[(v >> 12) & 63];
    out += "==";
  } else if (i + 2 == data.size()) {
    uint32_t v = (static_cast<unsigned char>(data[i]) << 16) |
                 (static_cast<unsigned char>(data[i + 1]) << 8);
    out += alphabet[(v >> 18) & 63];
    out += alphabet[(v >> 12) & 63];
    out += alphabet[(v >> 6) & 63];
    out += "=";
  }
  return out;
}

const char *status_text(PlanStatus status) {
  switch (status) {
    case PlanStatus::Success: return "success";
    case PlanStatus::NoSolutionExhausted: return "no-solution-exhausted";
    case PlanStatus::NoSolutionResourceLimit: return "no-solution-resource-limit";
    case PlanStatus::UndefinedTask: return "undefined-task";
  }
  return "?";
}

nlohmann::json plan_to_json(const Plan &plan) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto &step : plan.steps) {
    nlohmann::json s{
        {"index", step.index},
        {"action", step.action},
        {"args", step.argText},
        {"cost", step.cost.str()},
    };
    if (step.duration) s["duration"] = step.duration->str();
    if (!step.attachments.empty()) {
      nlohmann::json atts = nlohmann::json::array();
      for (const auto &a : step.attachments)
        atts.push_back({{"predicate", a.predicate},
                        {"solutionIndex", a.solutionIndex},
                        {"payload", base64_encode(a.payload)}});
      s["attachments"] = std::move(atts);
    }
    steps.push_back(std::move(s));
  }
  return {{"totalCost", plan.totalCost.str()}, {"steps", std::move(steps)}};
}

nlohmann::json result_to_json(const PlanResult &result) {
  nlohmann::json j{{"status", status_text(result.status)}};
  if (!result.message.empty()) j["message"] = result.message;
  if (result.best) j["plan"] = plan_to_json(*result.best);
  if (!result.all.empty()) {
    nlohmann::json all = nlohmann::json::array();
    for (const auto &p : result.all) all.push_back(plan_to_json(p));
    j["plans"] = std::move(all);
  }
  nlohmann::json byName = nlohmann::json::object();
  for (const auto &[name, count] : result.stats.externalCallsByName)
    byName[name] = count;
  j["stats"] = {{"nodesExpanded", result.stats.nodesExpanded},
                {"backtracks", result.stats.backtracks},
                {"linearizationsGenerated", result.stats.linearizationsGenerated},
                {"externalCalls", result.stats.externalCalls},
                {"externalCallsByName", std::move(byName)}};
  return j;
}

nlohmann::json streams_to_json(const StreamPlan &streams, const Plan &plan) {
  nlohmann::json js = nlohmann::json::array();
  for (const auto &s : streams.streams) {
    nlohmann::json actions = nlohmann::json::array();
    for (int i : s.steps) actions.push_back(plan.steps[i].action);
    js.push_back({{"agent", s.agent}, {"steps", s.steps}, {"actions", std::move(actions)}});
  }
  nlohmann::json links = nlohmann::json::array();
  for (const auto &link : streams.links)
    links.push_back({{"producer", link.producer},
                     {"consumer", link.consumer},
                     {"atom", link.atom},
                     {"kind", link.kind == LinkKind::Support ? "support" : "ordering"}});
  nlohmann::json joints = nlohmann::json::array();
  for (const auto &joint : streams.joints)
    joints.push_back({{"steps", joint.steps}, {"agents", joint.agents}});
  return {{"streams", std::move(js)},
          {"links", std::move(links)},
          {"joints", std::move(joints)}};
}

nlohmann::json filter_reports_to_json(const std::vector<FilterReport> &reports) {
  nlohmann::json out = nlohmann::json::array();
  for (size_t i = 0; i < reports.size(); ++i) {
    const FilterReport &r = reports[i];
    nlohmann::json violations = nlohmann::json::array();
    for (const auto &v : r.violations)
      violations.push_back({{"criterion", v.criterion},
                            {"detail", v.detail},
                            {"measured", v.measured.str()},
                            {"threshold", v.threshold.str()}});
    nlohmann::json wait = nlohmann::json::object();
    for (const auto &[agent, w] : r.metrics.waitByAgent) wait[agent] = w.str();
    nlohmann::json effort = nlohmann::json::object();
    for (const auto &[agent, e] : r.metrics.effortByAgent) effort[agent] = e.str();
    out.push_back({{"plan", i},
                   {"accepted", r.accepted},
                   {"violations", std::move(violations)},
                   {"metrics",
                    {{"makespan", r.metrics.makespan.str()},
                     {"waitByAgent", std::move(wait)},
                     {"effortByAgent", std::move(effort)},
                     {"intricacy", r.metrics.intricacy}}}});
  }
  return {{"reports", std::move(out)}};
}

std::string dump_json(const nlohmann::json &j) { return j.dump(2) + "\n"; }

}  // namespace hatp
