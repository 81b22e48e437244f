#include "rider/scenario/context.hpp"

namespace rider::scenario {
namespace {

struct ZonePath {
  std::string zone_id;
  std::string attribute;
};

std::optional<ZonePath> split_zone_path(const std::string& path) {
  if (path.rfind("zone.", 0) != 0) return std::nullopt;
  const auto dot = path.rfind('.');
  if (dot <= 5) return std::nullopt;
  return ZonePath{path.substr(5, dot - 5), path.substr(dot + 1)};
}

constexpr std::string_view kZoneAttributes[] = {"temperature", "presence", "occupied", "setpoint",
                                                "deadband",    "frost_guard", "heating"};

}  // namespace

std::optional<double> zone_temperature(const EngineContext& ctx, const std::string& zone_id) {
  double sum = 0.0;
  int n = 0;
  for (const auto* s : ctx.model->zone_sensors(zone_id, model::SensorKind::temperature)) {
    if (s->is_virtual) continue;
    auto it = ctx.latest.find(s->sensor_id);
    if (it == ctx.latest.end()) continue;
    sum += it->second.value;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

std::optional<double> zone_presence(const EngineContext& ctx, const std::string& zone_id) {
  std::optional<double> out;
  for (const auto* s : ctx.model->zone_sensors(zone_id, model::SensorKind::presence)) {
    auto it = ctx.latest.find(s->sensor_id);
    if (it == ctx.latest.end()) continue;
    if (it->second.value >= 0.5) return 1.0;
    out = 0.0;
  }
  return out;
}

double zone_heating(const EngineContext& ctx, const std::string& zone_id) {
  for (const auto* s : ctx.model->zone_sensors(zone_id, model::SensorKind::valve)) {
    auto it = ctx.actuator_settings.find(s->sensor_id);
    if (it != ctx.actuator_settings.end() && it->second > 0.0) return 1.0;
  }
  return 0.0;
}

std::optional<double> resolve_path(const EngineContext& ctx, const std::string& path) {
  if (path.rfind("sensor.", 0) == 0) {
    const auto id = path.substr(7);
    if (auto it = ctx.virtual_values.find(id); it != ctx.virtual_values.end()) return it->second;
    if (auto it = ctx.latest.find(id); it != ctx.latest.end()) return it->second.value;
    return std::nullopt;
  }
  if (path == "clock.hour") return to_civil(ctx.clock).hour;
  if (path == "clock.minute") return to_civil(ctx.clock).minute;
  if (path == "clock.weekday") return weekday_index(ctx.clock);

  auto zp = split_zone_path(path);
  if (!zp) return std::nullopt;
  const auto* zone = ctx.model->zone(zp->zone_id);
  if (!zone) return std::nullopt;
  const auto& policy = zone->zone->setpoint_policy;
  const auto& a = zp->attribute;
  if (a == "temperature") return zone_temperature(ctx, zp->zone_id);
  if (a == "presence") return zone_presence(ctx, zp->zone_id);
  if (a == "occupied") {
    auto it = ctx.occupied_by_schedule.find(zp->zone_id);
    return it != ctx.occupied_by_schedule.end() && it->second ? 1.0 : 0.0;
  }
  if (a == "setpoint") return policy.comfort_setpoint;
  if (a == "deadband") return policy.deadband;
  if (a == "frost_guard") return policy.frost_guard;
  if (a == "heating") return zone_heating(ctx, zp->zone_id);
  return std::nullopt;
}

std::optional<std::string> check_path(const model::ModelIndex& index, const std::string& path) {
  if (path.rfind("sensor.", 0) == 0) {
    if (!index.sensor(path.substr(7))) return "unknown sensor in path '" + path + "'";
    return std::nullopt;
  }
  if (path == "clock.hour" || path == "clock.minute" || path == "clock.weekday") return std::nullopt;
  auto zp = split_zone_path(path);
  if (!zp) return "unrecognised path '" + path + "'";
  if (!index.zone(zp->zone_id)) return "unknown zone in path '" + path + "'";
  for (auto attr : kZoneAttributes)
    if (attr == zp->attribute) return std::nullopt;
  return "unknown zone attribute in path '" + path + "'";
}

}  // namespace rider::scenario
