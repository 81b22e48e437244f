#include "rider/model/types.hpp"

namespace rider::model {

std::string_view to_string(SensorKind kind) {
  switch (kind) {
    case SensorKind::temperature: return "temperature";
    case SensorKind::pressure: return "pressure";
    case SensorKind::humidity: return "humidity";
    case SensorKind::presence: return "presence";
    case SensorKind::power: return "power";
    case SensorKind::valve: return "valve";
  }
  return "?";
}

std::optional<SensorKind> parse_sensor_kind(std::string_view text) {
  for (auto k : kAllKinds)
    if (to_string(k) == text) return k;
  return std::nullopt;
}

std::string_view canonical_unit(SensorKind kind) {
  switch (kind) {
    case SensorKind::temperature: return "degC";
    case SensorKind::pressure: return "Pa";
    case SensorKind::humidity: return "%RH";
    case SensorKind::presence: return "boolean";
    case SensorKind::power: return "W";
    case SensorKind::valve: return "fraction";
  }
  return "?";
}

bool OccupancySchedule::occupied_at(Timestamp t) const {
  const int wd = weekday_index(t);
  const int sod = seconds_of_day(t);
  for (const auto& iv : weekly_intervals)
    if (iv.weekday == wd && sod >= iv.start_s && sod < iv.end_s) return true;
  return false;
}

std::optional<Timestamp> OccupancySchedule::next_start(Timestamp t) const {
  const auto day0 = std::chrono::floor<std::chrono::days>(t);
  std::optional<Timestamp> best;
  for (int d = 0; d <= 7; ++d) {
    const Timestamp day_start{day0 + std::chrono::days{d}};
    const int wd = weekday_index(day_start);
    for (const auto& iv : weekly_intervals) {
      if (iv.weekday != wd) continue;
      const Timestamp start = day_start + Seconds{iv.start_s};
      if (start >= t && (!best || start < *best)) best = start;
    }
    if (best) return best;
  }
  return best;
}

}  // namespace rider::model
