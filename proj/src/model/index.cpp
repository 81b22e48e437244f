#include "rider/model/index.hpp"

#include <algorithm>
#include <limits>

#include "rider/model/validate.hpp"

namespace rider::model {

ModelIndex::ModelIndex(std::shared_ptr<const SiteModel> model) : model_(std::move(model)) { build(); }

ModelIndex::ModelIndex(SiteModel model)
    : ModelIndex(std::make_shared<const SiteModel>(std::move(model))) {}

void ModelIndex::build() {
  std::map<std::string, const OccupancySchedule*> schedules;
  for (const auto& s : model_->schedules) schedules.emplace(s.schedule_id, &s);

  std::map<std::string, std::string> zone_building;
  for (const auto& b : model_->buildings) {
    for (const auto& z : b.zones) {
      ZoneInfo info;
      info.zone = &z;
      info.building_id = b.building_id;
      if (z.schedule_ref) {
        auto it = schedules.find(*z.schedule_ref);
        if (it != schedules.end()) info.schedule = it->second;
      }
      zones_.emplace(z.zone_id, info);
      zone_ids_.push_back(z.zone_id);
      zone_building.emplace(z.zone_id, b.building_id);
    }
    for (const auto& s : b.sensors) {
      SensorInfo info{s.sensor_id, s.raw_address, s.kind,        s.position,
                      s.zone_ref,  b.building_id, s.is_actuator, false};
      sensors_.push_back(std::move(info));
    }
  }
  for (const auto& v : model_->virtual_sensors) {
    auto bit = zone_building.find(v.zone_ref);
    SensorInfo info{v.sensor_id, "",    v.kind, v.position, v.zone_ref,
                    bit != zone_building.end() ? bit->second : "", false, true};
    sensors_.push_back(std::move(info));
    virtuals_.emplace(v.sensor_id, &v);
  }
  for (std::size_t i = 0; i < sensors_.size(); ++i) {
    by_id_.emplace(sensors_[i].sensor_id, i);
    if (!sensors_[i].raw_address.empty()) by_address_.emplace(sensors_[i].raw_address, i);
    auto zit = zones_.find(sensors_[i].zone_id);
    if (zit != zones_.end()) zit->second.sensors.push_back(sensors_[i].sensor_id);
  }
  virtual_order_ = rider::model::virtual_order(*model_);
}

const SensorInfo* ModelIndex::by_address(const std::string& raw_address) const {
  auto it = by_address_.find(raw_address);
  return it == by_address_.end() ? nullptr : &sensors_[it->second];
}

const SensorInfo* ModelIndex::sensor(const std::string& sensor_id) const {
  auto it = by_id_.find(sensor_id);
  return it == by_id_.end() ? nullptr : &sensors_[it->second];
}

const ZoneInfo* ModelIndex::zone(const std::string& zone_id) const {
  auto it = zones_.find(zone_id);
  return it == zones_.end() ? nullptr : &it->second;
}

const VirtualSensorDef* ModelIndex::virtual_sensor(const std::string& sensor_id) const {
  auto it = virtuals_.find(sensor_id);
  return it == virtuals_.end() ? nullptr : it->second;
}

std::vector<const SensorInfo*> ModelIndex::zone_sensors(const std::string& zone_id,
                                                        SensorKind kind) const {
  std::vector<const SensorInfo*> out;
  auto zit = zones_.find(zone_id);
  if (zit == zones_.end()) return out;
  for (const auto& id : zit->second.sensors) {
    const auto* s = sensor(id);
    if (s && s->kind == kind) out.push_back(s);
  }
  return out;
}

Box ModelIndex::site_bounds() const {
  constexpr double inf = std::numeric_limits<double>::infinity();
  Box b{{inf, inf, inf}, {-inf, -inf, -inf}};
  for (const auto& [id, info] : zones_) {
    const auto& zb = info.zone->box;
    b.min = {std::min(b.min.x, zb.min.x), std::min(b.min.y, zb.min.y), std::min(b.min.z, zb.min.z)};
    b.max = {std::max(b.max.x, zb.max.x), std::max(b.max.y, zb.max.y), std::max(b.max.z, zb.max.z)};
  }
  return b;
}

}  // namespace rider::model
