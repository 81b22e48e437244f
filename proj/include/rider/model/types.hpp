#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rider/common/geometry.hpp"
#include "rider/common/time.hpp"
#include "rider/model/expression.hpp"

namespace rider::model {

enum class SensorKind { temperature, pressure, humidity, presence, power, valve };

inline constexpr SensorKind kAllKinds[] = {SensorKind::temperature, SensorKind::pressure,
                                           SensorKind::humidity,    SensorKind::presence,
                                           SensorKind::power,       SensorKind::valve};

std::string_view to_string(SensorKind kind);
std::optional<SensorKind> parse_sensor_kind(std::string_view text);

/// Unit every value of this kind carries once inside the warehouse:
/// degC, Pa, %RH, boolean, W, fraction.
std::string_view canonical_unit(SensorKind kind);

struct SetpointPolicy {
  double comfort_setpoint = 21.0;  // degC
  double deadband = 0.5;           // degC, >= 0
  double frost_guard = 12.0;       // degC, < comfort_setpoint
};

struct Zone {
  std::string zone_id;
  std::string name;
  Box box;
  std::optional<std::string> schedule_ref;
  SetpointPolicy setpoint_policy;
};

struct SensorDef {
  std::string sensor_id;
  std::string raw_address;
  SensorKind kind = SensorKind::temperature;
  std::string unit;
  Vec3 position;
  std::string zone_ref;
  bool is_actuator = false;
};

struct Building {
  std::string building_id;
  std::vector<Zone> zones;
  std::vector<SensorDef> sensors;
};

/// Half-open interval [start, end) on one weekday, in seconds since midnight.
struct WeeklyInterval {
  int weekday = 0;  // 0 = Monday
  int start_s = 0;
  int end_s = 0;
};

struct OccupancySchedule {
  std::string schedule_id;
  std::vector<WeeklyInterval> weekly_intervals;

  bool occupied_at(Timestamp t) const;
  /// First instant at or after `t` where an interval begins, searching one week ahead.
  std::optional<Timestamp> next_start(Timestamp t) const;
};

struct VirtualSensorDef {
  std::string sensor_id;
  SensorKind kind = SensorKind::temperature;
  std::string unit;
  Vec3 position;
  std::string zone_ref;
  Expression expression;
};

struct SiteModel {
  std::string site_id;
  std::vector<Building> buildings;
  std::vector<OccupancySchedule> schedules;
  std::vector<VirtualSensorDef> virtual_sensors;
  std::string integration_rules_ref;
};

}  // namespace rider::model
