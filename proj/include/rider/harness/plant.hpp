#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rider/common/time.hpp"
#include "rider/ingest/raw_record.hpp"
#include "rider/model/index.hpp"
#include "rider/scenario/engine.hpp"

namespace rider::harness {

class PlantError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Occupancy { schedule, always, never };

struct ZonePlant {
  std::string zone_id;
  double temperature = 20.0;    // degC
  double tau_s = 3600.0;        // thermal time constant
  double gain = 0.0;            // degC/s at full valve (P/C)
  double heater_power_w = 0.0;  // only used for energy accounting
  double valve = 0.0;           // u in [0, 1]
  double heater_on_seconds = 0.0;  // integral of u dt
  Occupancy occupancy = Occupancy::schedule;

  double heater_energy_kwh() const { return heater_on_seconds * heater_power_w / 3.6e6; }
};

struct Breakpoint {
  Timestamp t;
  double value = 0.0;
};

/// Piecewise-linear outdoor temperature, held constant beyond the end points.
class OutdoorTrajectory {
 public:
  OutdoorTrajectory() = default;
  explicit OutdoorTrajectory(std::vector<Breakpoint> points);
  static OutdoorTrajectory constant(double value);

  double at(Timestamp t) const;
  const std::vector<Breakpoint>& points() const { return points_; }

 private:
  std::vector<Breakpoint> points_;
};

struct PlantState {
  std::vector<ZonePlant> zones;
  OutdoorTrajectory outdoor;
  Timestamp clock;
  std::map<std::string, std::string> actuator_zone;  // valve id -> zone id

  const ZonePlant* zone(const std::string& zone_id) const;
  ZonePlant* zone(const std::string& zone_id);
};

/// One explicit Euler step of T' = (T_out - T)/tau + u*G, per zone.
inline double euler_step(double temperature, double outdoor, double tau_s, double gain, double valve,
                         double dt_s) {
  return temperature + dt_s * ((outdoor - temperature) / tau_s + valve * gain);
}

/// Applies `commands` to the valves, then integrates every zone over `dt`
/// with the outdoor value at the current clock, and advances the clock.
/// Throws PlantError when dt exceeds tau/10 for any zone, or when a command
/// names an actuator or zone the plant does not know.
PlantState step_plant(PlantState state, std::span<const scenario::Command> commands, Seconds dt);

struct BiasInjection {
  std::string sensor_id;
  Timestamp start;
  double offset = 0.0;  // canonical units, added from `start` on
};

struct FaultProfile {
  double unit_corruption = 0.0;
  double value_spike = 0.0;
  double dropout = 0.0;
  double unknown_address = 0.0;
  double noise_sigma = 0.0;  // degC, applied to temperature readings only
  double spike_offset = 1.0e9;
  std::uint64_t seed = 1;
  std::vector<BiasInjection> biases;

  std::vector<std::string> problems() const;
};

enum FaultFlag : unsigned {
  kFaultNone = 0,
  kFaultUnknownAddress = 1u << 0,
  kFaultUnitCorruption = 1u << 1,
  kFaultSpike = 1u << 2,
};

struct Emission {
  std::vector<ingest::RawRecord> records;
  std::vector<unsigned> faults;  // FaultFlag bits, parallel to records
  std::size_t dropped = 0;
};

/// Produces one raw record per physical, non-actuator sensor per tick, with
/// Gaussian noise and per-record faults drawn from a generator seeded once
/// from the fault profile. Every record consumes the same number of draws
/// whatever the rates, so streams stay aligned across fault settings.
class RawEmitter {
 public:
  RawEmitter(std::shared_ptr<const model::ModelIndex> registry, FaultProfile faults);

  Emission emit(const PlantState& state);

  /// Plant truth for a sensor at the state's clock, before noise and faults.
  double truth(const model::SensorInfo& sensor, const PlantState& state) const;

  const FaultProfile& faults() const { return faults_; }

 private:
  std::shared_ptr<const model::ModelIndex> registry_;
  FaultProfile faults_;
  std::mt19937_64 rng_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

struct ZoneSpec {
  std::string zone_id;
  double tau_s = 3600.0;
  double gain = 0.0;
  double heater_power_w = 0.0;
  double initial_c = 20.0;
  Occupancy occupancy = Occupancy::schedule;
};

struct HarnessConfig {
  Timestamp start;
  std::vector<ZoneSpec> zones;
  OutdoorTrajectory outdoor;
  FaultProfile faults;
};

HarnessConfig harness_from_json(const nlohmann::json& j);
HarnessConfig load_harness(const std::filesystem::path& file);

/// Builds the initial plant; every configured zone must exist in the model.
PlantState initial_state(const HarnessConfig& config, const model::ModelIndex& index);

/// Formats a value with the shortest representation that round-trips.
std::string format_value(double v);

}  // namespace rider::harness
