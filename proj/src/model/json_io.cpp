#include "rider/model/json_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace rider::model {

using nlohmann::json;

namespace {

const json& require(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) throw ModelParseError(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ModelParseError(path + "." + key, "missing required key");
  return *it;
}

std::string get_string(const json& obj, const char* key, const std::string& path) {
  const auto& v = require(obj, key, path);
  if (!v.is_string()) throw ModelParseError(path + "." + key, "expected a string");
  return v.get<std::string>();
}

double get_number(const json& obj, const char* key, const std::string& path) {
  const auto& v = require(obj, key, path);
  if (!v.is_number()) throw ModelParseError(path + "." + key, "expected a number");
  return v.get<double>();
}

const json& get_array(const json& obj, const char* key, const std::string& path) {
  const auto& v = require(obj, key, path);
  if (!v.is_array()) throw ModelParseError(path + "." + key, "expected an array");
  return v;
}

Vec3 parse_point(const json& j, const std::string& path) {
  if (j.is_array()) {
    if (j.size() != 3 || !j[0].is_number() || !j[1].is_number() || !j[2].is_number())
      throw ModelParseError(path, "expected [x, y, z]");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
  }
  return {get_number(j, "x", path), get_number(j, "y", path), get_number(j, "z", path)};
}

json point_json(const Vec3& p) { return json::array({p.x, p.y, p.z}); }

SensorKind parse_kind(const json& obj, const std::string& path) {
  const auto text = get_string(obj, "kind", path);
  auto kind = parse_sensor_kind(text);
  if (!kind) throw ModelParseError(path + ".kind", "unknown sensor kind '" + text + "'");
  return *kind;
}

Zone parse_zone(const json& j, const std::string& path) {
  Zone z;
  z.zone_id = get_string(j, "zone_id", path);
  z.name = j.contains("name") ? get_string(j, "name", path) : z.zone_id;
  const auto& box = require(j, "box", path);
  z.box.min = parse_point(require(box, "min", path + ".box"), path + ".box.min");
  z.box.max = parse_point(require(box, "max", path + ".box"), path + ".box.max");
  if (j.contains("schedule_ref") && !j["schedule_ref"].is_null())
    z.schedule_ref = get_string(j, "schedule_ref", path);
  if (j.contains("setpoint_policy")) {
    const auto& sp = j["setpoint_policy"];
    const auto sp_path = path + ".setpoint_policy";
    z.setpoint_policy.comfort_setpoint = get_number(sp, "comfort_setpoint", sp_path);
    z.setpoint_policy.deadband = get_number(sp, "deadband", sp_path);
    z.setpoint_policy.frost_guard = get_number(sp, "frost_guard", sp_path);
  }
  return z;
}

SensorDef parse_sensor(const json& j, const std::string& path) {
  SensorDef s;
  s.sensor_id = get_string(j, "sensor_id", path);
  s.raw_address = get_string(j, "raw_address", path);
  s.kind = parse_kind(j, path);
  s.unit = j.contains("unit") ? get_string(j, "unit", path) : std::string(canonical_unit(s.kind));
  s.position = parse_point(require(j, "position", path), path + ".position");
  s.zone_ref = get_string(j, "zone_ref", path);
  if (j.contains("is_actuator")) {
    if (!j["is_actuator"].is_boolean()) throw ModelParseError(path + ".is_actuator", "expected a boolean");
    s.is_actuator = j["is_actuator"].get<bool>();
  }
  return s;
}

OccupancySchedule parse_schedule(const json& j, const std::string& path) {
  OccupancySchedule s;
  s.schedule_id = get_string(j, "schedule_id", path);
  const auto& ivs = get_array(j, "weekly_intervals", path);
  for (std::size_t i = 0; i < ivs.size(); ++i) {
    const auto p = path + ".weekly_intervals[" + std::to_string(i) + "]";
    const auto& iv = ivs[i];
    WeeklyInterval w;
    const auto& wd = require(iv, "weekday", p);
    std::optional<int> day;
    if (wd.is_string()) day = parse_weekday(wd.get<std::string>());
    else if (wd.is_number_integer()) {
      const int v = wd.get<int>();
      if (v >= 0 && v < 7) day = v;
    }
    if (!day) throw ModelParseError(p + ".weekday", "expected Mon..Sun or 0..6");
    w.weekday = *day;
    w.start_s = parse_time_of_day(get_string(iv, "start", p), p + ".start");
    w.end_s = parse_time_of_day(get_string(iv, "end", p), p + ".end");
    s.weekly_intervals.push_back(w);
  }
  return s;
}

VirtualSensorDef parse_virtual(const json& j, const std::string& path) {
  VirtualSensorDef v;
  v.sensor_id = get_string(j, "sensor_id", path);
  v.kind = parse_kind(j, path);
  v.unit = j.contains("unit") ? get_string(j, "unit", path) : std::string(canonical_unit(v.kind));
  v.position = parse_point(require(j, "position", path), path + ".position");
  v.zone_ref = get_string(j, "zone_ref", path);
  v.expression = expression_from_json(require(j, "expression", path), path + ".expression");
  return v;
}

}  // namespace

int parse_time_of_day(std::string_view text, const std::string& path) {
  int h = 0, m = 0, s = 0;
  char tail = 0;
  const std::string str(text);
  const int n = std::sscanf(str.c_str(), "%d:%d:%d%c", &h, &m, &s, &tail);
  if (n < 2 || n > 3 || h < 0 || h > 24 || m < 0 || m > 59 || s < 0 || s > 59 ||
      (h == 24 && (m != 0 || s != 0))) {
    throw ModelParseError(path, "expected HH:MM[:SS], got '" + str + "'");
  }
  return h * 3600 + m * 60 + s;
}

std::string format_time_of_day(int seconds) {
  char buf[16];
  if (seconds % 60 == 0)
    std::snprintf(buf, sizeof buf, "%02d:%02d", seconds / 3600, (seconds % 3600) / 60);
  else
    std::snprintf(buf, sizeof buf, "%02d:%02d:%02d", seconds / 3600, (seconds % 3600) / 60,
                  seconds % 60);
  return buf;
}

Expression expression_from_json(const json& j, const std::string& path) {
  if (j.is_number()) return Expression::constant(j.get<double>());
  if (j.is_string()) return Expression::sensor(j.get<std::string>());
  if (!j.is_object()) throw ModelParseError(path, "expected number, sensor id or {op, args}");
  if (j.contains("ref")) return Expression::sensor(get_string(j, "ref", path));
  if (j.contains("const")) return Expression::constant(get_number(j, "const", path));
  const auto op_text = get_string(j, "op", path);
  auto op = parse_op(op_text);
  if (!op || *op == Expression::Op::sensor_ref || *op == Expression::Op::constant)
    throw ModelParseError(path + ".op", "unknown operator '" + op_text + "'");
  const auto& args = get_array(j, "args", path);
  std::vector<Expression> parsed;
  for (std::size_t i = 0; i < args.size(); ++i)
    parsed.push_back(expression_from_json(args[i], path + ".args[" + std::to_string(i) + "]"));
  return Expression::apply(*op, std::move(parsed));
}

json expression_to_json(const Expression& e) {
  switch (e.op) {
    case Expression::Op::sensor_ref: return json{{"ref", e.ref}};
    case Expression::Op::constant: return json{{"const", e.value}};
    default: {
      json args = json::array();
      for (const auto& a : e.args) args.push_back(expression_to_json(a));
      return json{{"op", std::string(to_string(e.op))}, {"args", args}};
    }
  }
}

SiteModel model_from_json(const json& doc) {
  const std::string root = "$";
  if (!doc.is_object()) throw ModelParseError(root, "model document must be a JSON object");
  SiteModel m;
  m.site_id = get_string(doc, "site_id", root);
  const auto& buildings = get_array(doc, "buildings", root);
  for (std::size_t b = 0; b < buildings.size(); ++b) {
    const auto bp = "$.buildings[" + std::to_string(b) + "]";
    Building building;
    building.building_id = get_string(buildings[b], "building_id", bp);
    const auto& zones = get_array(buildings[b], "zones", bp);
    for (std::size_t z = 0; z < zones.size(); ++z)
      building.zones.push_back(parse_zone(zones[z], bp + ".zones[" + std::to_string(z) + "]"));
    if (buildings[b].contains("sensors")) {
      const auto& sensors = get_array(buildings[b], "sensors", bp);
      for (std::size_t s = 0; s < sensors.size(); ++s)
        building.sensors.push_back(
            parse_sensor(sensors[s], bp + ".sensors[" + std::to_string(s) + "]"));
    }
    m.buildings.push_back(std::move(building));
  }
  if (doc.contains("schedules")) {
    const auto& schedules = get_array(doc, "schedules", root);
    for (std::size_t i = 0; i < schedules.size(); ++i)
      m.schedules.push_back(parse_schedule(schedules[i], "$.schedules[" + std::to_string(i) + "]"));
  }
  if (doc.contains("virtual_sensors")) {
    const auto& vs = get_array(doc, "virtual_sensors", root);
    for (std::size_t i = 0; i < vs.size(); ++i)
      m.virtual_sensors.push_back(parse_virtual(vs[i], "$.virtual_sensors[" + std::to_string(i) + "]"));
  }
  if (doc.contains("integration_rules")) m.integration_rules_ref = get_string(doc, "integration_rules", root);
  return m;
}

SiteModel parse_model(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ModelParseError("$", std::string("invalid JSON: ") + e.what());
  }
  return model_from_json(doc);
}

SiteModel load_model(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ModelParseError(file.string(), "cannot open model document");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

json to_json(const SiteModel& m) {
  json doc;
  doc["site_id"] = m.site_id;
  doc["integration_rules"] = m.integration_rules_ref;
  json buildings = json::array();
  for (const auto& b : m.buildings) {
    json zones = json::array();
    for (const auto& z : b.zones) {
      json zj{{"zone_id", z.zone_id},
              {"name", z.name},
              {"box", {{"min", point_json(z.box.min)}, {"max", point_json(z.box.max)}}},
              {"setpoint_policy",
               {{"comfort_setpoint", z.setpoint_policy.comfort_setpoint},
                {"deadband", z.setpoint_policy.deadband},
                {"frost_guard", z.setpoint_policy.frost_guard}}}};
      if (z.schedule_ref) zj["schedule_ref"] = *z.schedule_ref;
      zones.push_back(std::move(zj));
    }
    json sensors = json::array();
    for (const auto& s : b.sensors) {
      sensors.push_back({{"sensor_id", s.sensor_id},
                         {"raw_address", s.raw_address},
                         {"kind", std::string(to_string(s.kind))},
                         {"unit", s.unit},
                         {"position", point_json(s.position)},
                         {"zone_ref", s.zone_ref},
                         {"is_actuator", s.is_actuator}});
    }
    buildings.push_back({{"building_id", b.building_id}, {"zones", zones}, {"sensors", sensors}});
  }
  doc["buildings"] = buildings;
  json schedules = json::array();
  for (const auto& s : m.schedules) {
    json ivs = json::array();
    for (const auto& iv : s.weekly_intervals)
      ivs.push_back({{"weekday", std::string(weekday_name(iv.weekday))},
                     {"start", format_time_of_day(iv.start_s)},
                     {"end", format_time_of_day(iv.end_s)}});
    schedules.push_back({{"schedule_id", s.schedule_id}, {"weekly_intervals", ivs}});
  }
  doc["schedules"] = schedules;
  json virtuals = json::array();
  for (const auto& v : m.virtual_sensors) {
    virtuals.push_back({{"sensor_id", v.sensor_id},
                        {"kind", std::string(to_string(v.kind))},
                        {"unit", v.unit},
                        {"position", point_json(v.position)},
                        {"zone_ref", v.zone_ref},
                        {"expression", expression_to_json(v.expression)}});
  }
  doc["virtual_sensors"] = virtuals;
  return doc;
}

}  // namespace rider::model
