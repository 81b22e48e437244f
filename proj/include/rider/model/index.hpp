#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rider/model/types.hpp"

namespace rider::model {

/// Flattened view of one sensor, physical or virtual.
struct SensorInfo {
  std::string sensor_id;
  std::string raw_address;  // empty for virtual sensors
  SensorKind kind = SensorKind::temperature;
  Vec3 position;
  std::string zone_id;
  std::string building_id;
  bool is_actuator = false;
  bool is_virtual = false;
};

struct ZoneInfo {
  const Zone* zone = nullptr;
  std::string building_id;
  const OccupancySchedule* schedule = nullptr;
  std::vector<std::string> sensors;  // sensor ids located in this zone, model order
};

/// Read-only lookup tables over a validated model. Owns a shared reference to
/// the model so the raw pointers it hands out stay valid; safe to share across
/// threads.
class ModelIndex {
 public:
  explicit ModelIndex(std::shared_ptr<const SiteModel> model);
  explicit ModelIndex(SiteModel model);

  const SiteModel& model() const { return *model_; }
  std::shared_ptr<const SiteModel> model_ptr() const { return model_; }

  const SensorInfo* by_address(const std::string& raw_address) const;
  const SensorInfo* sensor(const std::string& sensor_id) const;
  const ZoneInfo* zone(const std::string& zone_id) const;
  const VirtualSensorDef* virtual_sensor(const std::string& sensor_id) const;

  /// Every sensor, physical first in model order, then virtual.
  const std::vector<SensorInfo>& sensors() const { return sensors_; }
  const std::vector<std::string>& zone_ids() const { return zone_ids_; }

  /// Sensors of `kind` located in `zone_id`.
  std::vector<const SensorInfo*> zone_sensors(const std::string& zone_id, SensorKind kind) const;

  /// Virtual sensors in dependency order.
  const std::vector<std::string>& virtual_order() const { return virtual_order_; }

  /// Bounding box of all zones.
  Box site_bounds() const;

 private:
  void build();

  std::shared_ptr<const SiteModel> model_;
  std::vector<SensorInfo> sensors_;
  std::map<std::string, std::size_t> by_id_;
  std::map<std::string, std::size_t> by_address_;
  std::map<std::string, ZoneInfo> zones_;
  std::vector<std::string> zone_ids_;
  std::map<std::string, const VirtualSensorDef*> virtuals_;
  std::vector<std::string> virtual_order_;
};

}  // namespace rider::model
