#include "rider/harness/plant.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>

namespace rider::harness {

using nlohmann::json;

OutdoorTrajectory::OutdoorTrajectory(std::vector<Breakpoint> points) : points_(std::move(points)) {
  std::stable_sort(points_.begin(), points_.end(),
                   [](const Breakpoint& a, const Breakpoint& b) { return a.t < b.t; });
}

OutdoorTrajectory OutdoorTrajectory::constant(double value) {
  return OutdoorTrajectory({Breakpoint{Timestamp{}, value}});
}

double OutdoorTrajectory::at(Timestamp t) const {
  if (points_.empty()) return 0.0;
  if (t <= points_.front().t) return points_.front().value;
  if (t >= points_.back().t) return points_.back().value;
  auto hi = std::upper_bound(points_.begin(), points_.end(), t,
                             [](Timestamp v, const Breakpoint& b) { return v < b.t; });
  auto lo = hi - 1;
  const double span = static_cast<double>((hi->t - lo->t).count());
  const double frac = static_cast<double>((t - lo->t).count()) / span;
  return lo->value + frac * (hi->value - lo->value);
}

const ZonePlant* PlantState::zone(const std::string& zone_id) const {
  for (const auto& z : zones)
    if (z.zone_id == zone_id) return &z;
  return nullptr;
}

ZonePlant* PlantState::zone(const std::string& zone_id) {
  for (auto& z : zones)
    if (z.zone_id == zone_id) return &z;
  return nullptr;
}

PlantState step_plant(PlantState state, std::span<const scenario::Command> commands, Seconds dt) {
  const double dt_s = static_cast<double>(dt.count());
  if (!(dt_s > 0.0)) throw PlantError("dt must be positive");
  for (const auto& z : state.zones)
    if (dt_s > z.tau_s / 10.0)
      throw PlantError("dt " + std::to_string(dt.count()) + " s exceeds tau/10 for zone '" + z.zone_id + "'");

  for (const auto& c : commands) {
    auto it = state.actuator_zone.find(c.actuator);
    if (it == state.actuator_zone.end()) throw PlantError("command for unknown actuator '" + c.actuator + "'");
    auto* zone = state.zone(it->second);
    if (!zone) throw PlantError("command for unknown zone '" + it->second + "'");
    zone->valve = std::clamp(c.setting, 0.0, 1.0);
  }

  const double outdoor = state.outdoor.at(state.clock);
  for (auto& z : state.zones) {
    z.temperature = euler_step(z.temperature, outdoor, z.tau_s, z.gain, z.valve, dt_s);
    z.heater_on_seconds += z.valve * dt_s;
  }
  state.clock += dt;
  return state;
}

std::vector<std::string> FaultProfile::problems() const {
  std::vector<std::string> out;
  auto rate = [&](double r, const char* name) {
    if (!(r >= 0.0 && r <= 1.0)) out.push_back(std::string(name) + " rate must be in [0, 1]");
  };
  rate(unit_corruption, "unit_corruption");
  rate(value_spike, "value_spike");
  rate(dropout, "dropout");
  rate(unknown_address, "unknown_address");
  if (!(noise_sigma >= 0.0)) out.push_back("noise_sigma must be >= 0");
  return out;
}

std::string format_value(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ec == std::errc{} ? ptr : buf);
}

RawEmitter::RawEmitter(std::shared_ptr<const model::ModelIndex> registry, FaultProfile faults)
    : registry_(std::move(registry)), faults_(std::move(faults)), rng_(faults_.seed) {
  if (auto p = faults_.problems(); !p.empty()) throw PlantError("invalid fault profile: " + p.front());
}

double RawEmitter::truth(const model::SensorInfo& sensor, const PlantState& state) const {
  const auto* zone = state.zone(sensor.zone_id);
  switch (sensor.kind) {
    case model::SensorKind::temperature:
      return zone ? zone->temperature : state.outdoor.at(state.clock);
    case model::SensorKind::presence: {
      const Occupancy occ = zone ? zone->occupancy : Occupancy::schedule;
      if (occ == Occupancy::always) return 1.0;
      if (occ == Occupancy::never) return 0.0;
      const auto* info = registry_->zone(sensor.zone_id);
      return info && info->schedule && info->schedule->occupied_at(state.clock) ? 1.0 : 0.0;
    }
    case model::SensorKind::humidity: return 45.0;
    case model::SensorKind::pressure: return 101325.0;
    case model::SensorKind::power: return zone ? zone->heater_power_w * zone->valve : 0.0;
    case model::SensorKind::valve: return zone ? zone->valve : 0.0;
  }
  return 0.0;
}

Emission RawEmitter::emit(const PlantState& state) {
  Emission out;
  const auto timestamp = format_iso8601(state.clock);
  for (const auto& sensor : registry_->sensors()) {
    if (sensor.is_virtual || sensor.is_actuator) continue;

    const double u_drop = uniform_(rng_);
    const double u_unknown = uniform_(rng_);
    const double u_unit = uniform_(rng_);
    const double u_spike = uniform_(rng_);
    const double noise = normal_(rng_);
    if (u_drop < faults_.dropout) {
      ++out.dropped;
      continue;
    }

    double value = truth(sensor, state);
    if (sensor.kind == model::SensorKind::temperature) value += faults_.noise_sigma * noise;
    for (const auto& b : faults_.biases)
      if (b.sensor_id == sensor.sensor_id && state.clock >= b.start) value += b.offset;

    unsigned flags = kFaultNone;
    ingest::RawRecord r{sensor.raw_address, timestamp, "", std::string(model::canonical_unit(sensor.kind))};
    if (u_unknown < faults_.unknown_address) {
      r.source_address = "UNKNOWN_" + sensor.raw_address;
      flags |= kFaultUnknownAddress;
    }
    if (u_unit < faults_.unit_corruption) {
      r.unit_text = "corrupt";
      flags |= kFaultUnitCorruption;
    }
    if (u_spike < faults_.value_spike) {
      value += faults_.spike_offset;
      flags |= kFaultSpike;
    }
    r.value_text = format_value(value);
    out.records.push_back(std::move(r));
    out.faults.push_back(flags);
  }
  return out;
}

namespace {

Occupancy parse_occupancy(const std::string& s) {
  if (s == "schedule") return Occupancy::schedule;
  if (s == "always") return Occupancy::always;
  if (s == "never") return Occupancy::never;
  throw PlantError("occupancy must be schedule, always or never");
}

Timestamp parse_time(const json& j, const char* what) {
  auto t = parse_iso8601(j.get<std::string>());
  if (!t) throw PlantError(std::string("bad timestamp for ") + what);
  return *t;
}

}  // namespace

HarnessConfig harness_from_json(const json& j) {
  try {
    HarnessConfig c;
    c.start = parse_time(j.at("start"), "start");
    for (const auto& z : j.at("zones")) {
      ZoneSpec s;
      s.zone_id = z.at("zone_id").get<std::string>();
      s.tau_s = z.at("tau_s").get<double>();
      s.gain = z.value("gain_c_per_s", 0.0);
      s.heater_power_w = z.value("heater_power_w", 0.0);
      s.initial_c = z.value("initial_c", 20.0);
      s.occupancy = parse_occupancy(z.value("occupancy", std::string("schedule")));
      if (!(s.tau_s > 0.0) || !(s.gain >= 0.0)) throw PlantError("zone " + s.zone_id + " needs tau > 0, gain >= 0");
      c.zones.push_back(std::move(s));
    }
    std::vector<Breakpoint> points;
    if (j.contains("outdoor")) {
      const auto& o = j["outdoor"];
      if (o.is_number()) {
        points.push_back({c.start, o.get<double>()});
      } else {
        for (const auto& p : o) {
          Timestamp t = c.start;
          if (p.contains("t")) t = parse_time(p["t"], "outdoor breakpoint");
          else if (p.contains("hours"))
            t = c.start + Seconds{static_cast<std::int64_t>(p["hours"].get<double>() * 3600.0)};
          points.push_back({t, p.at("c").get<double>()});
        }
      }
    }
    if (points.empty()) points.push_back({c.start, 10.0});
    c.outdoor = OutdoorTrajectory(std::move(points));
    if (j.contains("faults")) {
      const auto& f = j["faults"];
      c.faults.unit_corruption = f.value("unit_corruption", 0.0);
      c.faults.value_spike = f.value("value_spike", 0.0);
      c.faults.dropout = f.value("dropout", 0.0);
      c.faults.unknown_address = f.value("unknown_address", 0.0);
      c.faults.noise_sigma = f.value("noise_sigma", 0.0);
      c.faults.spike_offset = f.value("spike_offset", 1.0e9);
      c.faults.seed = f.value("seed", std::uint64_t{1});
      if (f.contains("biases")) {
        for (const auto& b : f["biases"])
          c.faults.biases.push_back(
              {b.at("sensor_id").get<std::string>(), parse_time(b.at("start"), "bias"), b.at("offset").get<double>()});
      }
    }
    if (j.contains("seed")) c.faults.seed = j["seed"].get<std::uint64_t>();
    if (auto p = c.faults.problems(); !p.empty()) throw PlantError("invalid fault profile: " + p.front());
    return c;
  } catch (const json::exception& e) {
    throw PlantError(std::string("harness config: ") + e.what());
  }
}

HarnessConfig load_harness(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw PlantError("cannot open harness config " + file.string());
  try {
    return harness_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw PlantError("harness config " + file.string() + ": " + e.what());
  }
}

PlantState initial_state(const HarnessConfig& config, const model::ModelIndex& index) {
  PlantState s;
  s.clock = config.start;
  s.outdoor = config.outdoor;
  for (const auto& spec : config.zones) {
    if (!index.zone(spec.zone_id)) throw PlantError("harness zone '" + spec.zone_id + "' not in model");
    ZonePlant z;
    z.zone_id = spec.zone_id;
    z.temperature = spec.initial_c;
    z.tau_s = spec.tau_s;
    z.gain = spec.gain;
    z.heater_power_w = spec.heater_power_w;
    z.occupancy = spec.occupancy;
    s.zones.push_back(std::move(z));
  }
  for (const auto& sensor : index.sensors())
    if (sensor.is_actuator && s.zone(sensor.zone_id)) s.actuator_zone[sensor.sensor_id] = sensor.zone_id;
  return s;
}

}  // namespace rider::harness
