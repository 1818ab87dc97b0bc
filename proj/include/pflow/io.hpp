#pragma once

#include <string>
#include <vector>

#include "pflow/linearization.hpp"
#include "pflow/orbit_geometry.hpp"
#include "pflow/period_function.hpp"

#include "json.hpp"

namespace pflow::io {

/// Deterministic shortest-roundtrip rendering of a double.
std::string format_double(double v);

/// CSV rows "coords..., status, minimal_period, return_residual, evidence".
std::string classification_csv(
    const std::vector<std::pair<Point, PeriodResult>>& rows);

/// CSV rows "coords..., per, theta, multiplier, dense_mask, residual"
/// over the active nodes.
std::string field_csv(const PeriodFunctionField& f);

/// CSV rows "orbit, period, length, diameter, sup_speed, slack1, slack2".
std::string geometry_csv(const std::vector<OrbitGeometry>& rows);

nlohmann::json to_json(const ZpActionReport& r);
nlohmann::json to_json(const ConditionReport& r);
nlohmann::json to_json(const LinearPart& lp);
nlohmann::json to_json(const FixedPointClass& c);
nlohmann::json to_json(const BlowupReport& r);

void write_file(const std::string& path, const std::string& content);

}  // namespace pflow::io
