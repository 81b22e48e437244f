#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rider/field/field.hpp"
#include "rider/ingest/normalize.hpp"
#include "rider/warehouse/warehouse.hpp"

// Read-side views shared by the CLI and the service, so both print the same
// JSON for the same parameters.
namespace rider::app {

nlohmann::json sensors_json(const model::ModelIndex& index);

nlohmann::json measures_json(const warehouse::Warehouse& wh, const std::string& sensor_id, Timestamp from,
                             Timestamp to, warehouse::Aggregation agg);

nlohmann::json exceptions_json(const std::vector<ingest::ExceptionRecord>& quarantine,
                               std::optional<ingest::ExceptionClass> only = std::nullopt);

/// "NXxNYxNZ", each at least 1.
std::array<std::uint32_t, 3> parse_resolution(const std::string& text);

/// Interpolates the physical temperature sensors' latest facts in
/// (t - align, t] over the site bounds.
field::ScalarField field_at(const warehouse::Warehouse& wh, Timestamp t, double slice_z, field::Mode mode,
                            std::array<std::uint32_t, 3> res, Seconds align = Seconds{600});

nlohmann::json field_json(const field::ScalarField& f);

/// Strict timestamp parse for user input; throws std::invalid_argument.
Timestamp require_time(const std::string& text);

}  // namespace rider::app

namespace rider::app {

/// Indicator parameters from text pairs: numbers become JSON numbers, the
/// rest stay strings.
nlohmann::json indicator_params(const std::vector<std::pair<std::string, std::string>>& pairs);

}  // namespace rider::app
