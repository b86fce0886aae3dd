#pragma once

#include <json.hpp>
#include <string>

#include "firming/calibration.hpp"
#include "firming/evaluate.hpp"
#include "firming/gp.hpp"
#include "firming/solver.hpp"

namespace firming {

// Versioned JSON persistence. Doubles round-trip exactly (shortest-repr
// serialization), so reloaded models reproduce the original bit for bit.

nlohmann::json to_json(const gp::GPModel& model);
gp::GPModel gp_from_json(const nlohmann::json& j);

nlohmann::json to_json(const CalibratedModel& model);
CalibratedModel calibrated_from_json(const nlohmann::json& j);

nlohmann::json to_json(const BatterySpec& battery);
BatterySpec battery_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Objective& objective);
Objective objective_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Policy& policy);
Policy policy_from_json(const nlohmann::json& j);

nlohmann::json to_json(const MetricsReport& report);

void write_json_file(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json_file(const std::string& path);

// CSV with header date,hour,actual,forecast; ratios validated against [0,1]
// with offending row numbers reported.
ProfileSeries load_profiles(const std::string& path);
void write_profiles(const std::string& path, const ProfileSeries& series);

}  // namespace firming
