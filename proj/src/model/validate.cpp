#include "rider/model/validate.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

namespace rider::model {
namespace {

std::string idx(const std::string& base, std::size_t i) {
  return base + "[" + std::to_string(i) + "]";
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += ", ";
    out += s;
  }
  return out;
}

/// Adjacency of virtual sensors onto the virtual sensors they reference.
std::vector<std::vector<std::size_t>> virtual_graph(const SiteModel& model) {
  std::unordered_map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < model.virtual_sensors.size(); ++i)
    position.emplace(model.virtual_sensors[i].sensor_id, i);
  std::vector<std::vector<std::size_t>> deps(model.virtual_sensors.size());
  for (std::size_t i = 0; i < model.virtual_sensors.size(); ++i) {
    for (const auto& ref : referenced_sensors(model.virtual_sensors[i].expression)) {
      auto it = position.find(ref);
      if (it != position.end()) deps[i].push_back(it->second);
    }
  }
  return deps;
}

}  // namespace

std::size_t ValidationReport::count(std::string_view code) const {
  return static_cast<std::size_t>(std::count_if(violations.begin(), violations.end(),
                                                [&](const Violation& v) { return v.code == code; }));
}

std::string ValidationReport::to_text() const {
  std::ostringstream out;
  for (const auto& v : violations) out << v.path << ": " << v.code << ": " << v.message << "\n";
  return out.str();
}

VirtualCycleError::VirtualCycleError(std::vector<std::string> members)
    : std::runtime_error("virtual sensor dependency cycle: {" + join(members) + "}"),
      members_(std::move(members)) {}

std::vector<std::vector<std::string>> virtual_cycles(const SiteModel& model) {
  const auto deps = virtual_graph(model);
  const std::size_t n = deps.size();

  // Tarjan's strongly connected components.
  std::vector<int> index(n, -1), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  int counter = 0;
  std::vector<std::vector<std::string>> cycles;

  std::function<void(std::size_t)> visit = [&](std::size_t v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (auto w : deps[v]) {
      if (index[w] < 0) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<std::size_t> component;
      std::size_t w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        component.push_back(w);
      } while (w != v);
      const bool self_loop = std::find(deps[v].begin(), deps[v].end(), v) != deps[v].end();
      if (component.size() > 1 || self_loop) {
        std::vector<std::string> names;
        for (auto c : component) names.push_back(model.virtual_sensors[c].sensor_id);
        std::sort(names.begin(), names.end());
        cycles.push_back(std::move(names));
      }
    }
  };
  for (std::size_t v = 0; v < n; ++v)
    if (index[v] < 0) visit(v);
  std::sort(cycles.begin(), cycles.end());
  return cycles;
}

std::vector<std::string> virtual_order(const SiteModel& model) {
  if (auto cycles = virtual_cycles(model); !cycles.empty()) throw VirtualCycleError(cycles.front());
  const auto deps = virtual_graph(model);
  std::vector<int> state(deps.size(), 0);  // 0 new, 2 done
  std::vector<std::string> order;
  std::function<void(std::size_t)> visit = [&](std::size_t v) {
    if (state[v] == 2) return;
    state[v] = 2;
    for (auto w : deps[v]) visit(w);
    order.push_back(model.virtual_sensors[v].sensor_id);
  };
  for (std::size_t v = 0; v < deps.size(); ++v) visit(v);
  return order;
}

ValidationReport validate_model(const SiteModel& model) {
  ValidationReport report;
  auto add = [&](std::string path, std::string code, std::string message) {
    report.violations.push_back({std::move(path), std::move(code), std::move(message)});
  };

  if (model.buildings.empty()) add("$.buildings", "no-buildings", "a site needs at least one building");

  // Global identifier uniqueness across every kind of object.
  std::map<std::string, std::string> first_use;
  auto claim = [&](const std::string& id, const std::string& path) {
    if (id.empty()) {
      add(path, "empty-id", "identifier must not be empty");
      return;
    }
    auto [it, inserted] = first_use.emplace(id, path);
    if (!inserted) add(path, "duplicate-id", "'" + id + "' already used at " + it->second);
  };
  claim(model.site_id, "$.site_id");

  std::map<std::string, const Zone*> zones;
  std::set<std::string> schedule_ids;
  std::set<std::string> sensor_ids;
  for (std::size_t i = 0; i < model.schedules.size(); ++i) {
    claim(model.schedules[i].schedule_id, idx("$.schedules", i));
    schedule_ids.insert(model.schedules[i].schedule_id);
  }

  for (std::size_t b = 0; b < model.buildings.size(); ++b) {
    const auto& building = model.buildings[b];
    const auto bp = idx("$.buildings", b);
    claim(building.building_id, bp);
    for (std::size_t z = 0; z < building.zones.size(); ++z) {
      const auto& zone = building.zones[z];
      const auto zp = idx(bp + ".zones", z);
      claim(zone.zone_id, zp);
      zones.emplace(zone.zone_id, &zone);
      if (!zone.box.well_formed())
        add(zp + ".box", "degenerate-box", "box min must be below max on every axis");
      for (std::size_t o = 0; o < z; ++o) {
        if (building.zones[o].box.overlaps(zone.box))
          add(zp + ".box", "zone-overlap", "overlaps zone '" + building.zones[o].zone_id + "'");
      }
      if (zone.schedule_ref && !schedule_ids.count(*zone.schedule_ref))
        add(zp + ".schedule_ref", "unknown-schedule", "no schedule '" + *zone.schedule_ref + "'");
      const auto& sp = zone.setpoint_policy;
      if (!(sp.deadband >= 0.0))
        add(zp + ".setpoint_policy.deadband", "setpoint-policy", "deadband must be >= 0");
      if (!(sp.frost_guard < sp.comfort_setpoint))
        add(zp + ".setpoint_policy", "setpoint-policy", "frost_guard must be below comfort_setpoint");
    }
  }

  auto check_placement = [&](const std::string& path, SensorKind kind, const std::string& unit,
                             const Vec3& position, const std::string& zone_ref) {
    if (unit != canonical_unit(kind))
      add(path + ".unit", "unit-mismatch",
          "kind " + std::string(to_string(kind)) + " requires unit " + std::string(canonical_unit(kind)));
    auto zit = zones.find(zone_ref);
    if (zit == zones.end()) {
      add(path + ".zone_ref", "unknown-zone", "no zone '" + zone_ref + "'");
    } else if (!zit->second->box.contains(position)) {
      add(path + ".position", "position-outside-zone", "outside the box of zone '" + zone_ref + "'");
    }
  };

  for (std::size_t b = 0; b < model.buildings.size(); ++b) {
    const auto& building = model.buildings[b];
    for (std::size_t s = 0; s < building.sensors.size(); ++s) {
      const auto& sensor = building.sensors[s];
      const auto sp = idx(idx("$.buildings", b) + ".sensors", s);
      claim(sensor.sensor_id, sp);
      sensor_ids.insert(sensor.sensor_id);
      check_placement(sp, sensor.kind, sensor.unit, sensor.position, sensor.zone_ref);
      if (sensor.kind == SensorKind::valve && !sensor.is_actuator)
        add(sp + ".is_actuator", "valve-not-actuator", "valve sensors must be actuators");
    }
  }

  for (std::size_t i = 0; i < model.virtual_sensors.size(); ++i) {
    const auto& v = model.virtual_sensors[i];
    claim(v.sensor_id, idx("$.virtual_sensors", i));
    sensor_ids.insert(v.sensor_id);
  }
  for (std::size_t i = 0; i < model.virtual_sensors.size(); ++i) {
    const auto& v = model.virtual_sensors[i];
    const auto vp = idx("$.virtual_sensors", i);
    check_placement(vp, v.kind, v.unit, v.position, v.zone_ref);
    if (auto err = check_arity(v.expression)) add(vp + ".expression", "bad-expression", *err);
    for (const auto& ref : referenced_sensors(v.expression))
      if (!sensor_ids.count(ref))
        add(vp + ".expression", "unknown-sensor-ref", "references unknown sensor '" + ref + "'");
  }
  for (const auto& cycle : virtual_cycles(model))
    add("$.virtual_sensors", "virtual-cycle", "dependency cycle {" + join(cycle) + "}");

  for (std::size_t i = 0; i < model.schedules.size(); ++i) {
    const auto& sched = model.schedules[i];
    const auto sp = idx("$.schedules", i);
    for (std::size_t k = 0; k < sched.weekly_intervals.size(); ++k) {
      const auto& a = sched.weekly_intervals[k];
      const auto ip = idx(sp + ".weekly_intervals", k);
      if (a.weekday < 0 || a.weekday > 6 || !(a.start_s < a.end_s)) {
        add(ip, "schedule-interval", "start must precede end");
        continue;
      }
      for (std::size_t o = 0; o < k; ++o) {
        const auto& b = sched.weekly_intervals[o];
        if (b.weekday == a.weekday && b.start_s < b.end_s && a.start_s < b.end_s && b.start_s < a.end_s)
          add(ip, "schedule-overlap", "overlaps interval " + std::to_string(o));
      }
    }
  }
  return report;
}

}  // namespace rider::model
