#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>

#include "rider/common/time.hpp"
#include "rider/model/index.hpp"
#include "rider/model/measure.hpp"

namespace rider::scenario {

/// The engine's central memory plus facts derived from it each tick.
struct EngineContext {
  std::shared_ptr<const model::ModelIndex> model;
  Timestamp clock;
  Seconds align{120};  // freshness window for virtual sensor inputs

  std::map<std::string, Measure> latest;  // at most one per sensor

  // Recomputed by step2_derive on every tick.
  std::map<std::string, bool> occupied_by_schedule;
  std::map<std::string, double> virtual_values;

  // Last setting sent to each actuator; the engine owns actuator state.
  std::map<std::string, double> actuator_settings;

  friend bool operator==(const EngineContext& a, const EngineContext& b) {
    return a.model == b.model && a.clock == b.clock && a.align == b.align && a.latest == b.latest &&
           a.occupied_by_schedule == b.occupied_by_schedule && a.virtual_values == b.virtual_values &&
           a.actuator_settings == b.actuator_settings;
  }
};

/// Mean of the zone's physical temperature sensors that have a latest value.
std::optional<double> zone_temperature(const EngineContext& ctx, const std::string& zone_id);
/// 1 when any presence sensor in the zone reads true, 0 when all read false,
/// absent when none has reported.
std::optional<double> zone_presence(const EngineContext& ctx, const std::string& zone_id);
/// 1 when any valve actuator in the zone is open.
double zone_heating(const EngineContext& ctx, const std::string& zone_id);

/// Resolves a context path: sensor.<id>, zone.<id>.<attribute>, clock.<field>.
/// Zone attributes: temperature, presence, occupied, setpoint, deadband,
/// frost_guard, heating. Clock fields: hour, minute, weekday.
std::optional<double> resolve_path(const EngineContext& ctx, const std::string& path);

/// Empty when the path names objects that exist in the model.
std::optional<std::string> check_path(const model::ModelIndex& index, const std::string& path);

}  // namespace rider::scenario
