#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "hatp/plan.hpp"
#include "hatp/social.hpp"
#include "hatp/streams.hpp"

namespace hatp {

std::string base64_encode(std::string_view data);

const char *status_text(PlanStatus status);

/// The plan.json payload: status, best plan, every plan in all-solutions
/// mode, and the deterministic search counters. Wall-clock time is excluded
/// so identical runs serialize identically.
nlohmann::json result_to_json(const PlanResult &result);

nlohmann::json plan_to_json(const Plan &plan);
nlohmann::json streams_to_json(const StreamPlan &streams, const Plan &plan);

/// One verdict per examined plan, with the measured metrics.
nlohmann::json filter_reports_to_json(const std::vector<FilterReport> &reports);

/// Two-space indent, sorted keys, trailing newline.
std::string dump_json(const nlohmann::json &j);

}  // namespace hatp
