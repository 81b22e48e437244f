#include "rider/ingest/rules.hpp"

#include <fstream>
#include <limits>
#include <sstream>

namespace rider::ingest {

using model::SensorKind;
using nlohmann::json;

Bounds IntegrationRuleSet::bounds_for(const std::string& sensor_id, SensorKind kind) const {
  if (auto it = sensor_overrides.find(sensor_id); it != sensor_overrides.end()) return it->second;
  if (auto it = kind_bounds.find(kind); it != kind_bounds.end()) return it->second;
  return {-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
}

std::optional<UnitConversion> IntegrationRuleSet::conversion(SensorKind kind,
                                                             const std::string& unit_text) const {
  if (unit_text == model::canonical_unit(kind)) return UnitConversion{};
  auto kit = unit_aliases.find(kind);
  if (kit == unit_aliases.end()) return std::nullopt;
  auto it = kit->second.find(unit_text);
  if (it == kit->second.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> IntegrationRuleSet::problems() const {
  std::vector<std::string> out;
  for (const auto& [kind, b] : kind_bounds)
    if (!(b.lo < b.hi)) out.push_back("bounds for " + std::string(model::to_string(kind)) + " need lo < hi");
  for (const auto& [sensor, b] : sensor_overrides)
    if (!(b.lo < b.hi)) out.push_back("override for " + sensor + " needs lo < hi");
  if (max_staleness.count() <= 0) out.push_back("max_staleness must be positive");
  for (const auto& [kind, aliases] : unit_aliases)
    for (const auto& [alias, c] : aliases)
      if (c.divide == 0.0) out.push_back("unit alias " + alias + " divides by zero");
  return out;
}

bool IntegrationRuleSet::revert_last_update() {
  if (update_log.empty()) return false;
  const auto& last = update_log.back();
  if (last.previous_override) sensor_overrides[last.sensor_id] = *last.previous_override;
  else sensor_overrides.erase(last.sensor_id);
  update_log.pop_back();
  ++version;
  return true;
}

IntegrationRuleSet IntegrationRuleSet::defaults() {
  IntegrationRuleSet r;
  r.kind_bounds = {
      {SensorKind::temperature, {-40.0, 60.0}},  {SensorKind::pressure, {80000.0, 120000.0}},
      {SensorKind::humidity, {0.0, 100.0}},      {SensorKind::presence, {0.0, 1.0}},
      {SensorKind::power, {0.0, 1.0e6}},         {SensorKind::valve, {0.0, 1.0}},
  };
  r.unit_aliases[SensorKind::temperature] = {
      {"C", {}},
      {"\xC2\xB0" "C", {}},
      {"celsius", {}},
      {"F", {32.0, 5.0, 9.0, 0.0}},
      {"degF", {32.0, 5.0, 9.0, 0.0}},
      {"K", {273.15, 1.0, 1.0, 0.0}},
  };
  r.unit_aliases[SensorKind::pressure] = {{"kPa", {0.0, 1000.0, 1.0, 0.0}},
                                          {"hPa", {0.0, 100.0, 1.0, 0.0}},
                                          {"mbar", {0.0, 100.0, 1.0, 0.0}}};
  r.unit_aliases[SensorKind::humidity] = {{"%", {}}, {"RH", {}}};
  r.unit_aliases[SensorKind::presence] = {{"bool", {}}, {"", {}}};
  r.unit_aliases[SensorKind::power] = {{"kW", {0.0, 1000.0, 1.0, 0.0}}};
  r.unit_aliases[SensorKind::valve] = {{"%", {0.0, 1.0, 100.0, 0.0}}};
  return r;
}

namespace {

SensorKind kind_key(const std::string& text) {
  auto k = model::parse_sensor_kind(text);
  if (!k) throw RuleError("unknown sensor kind '" + text + "' in integration rules");
  return *k;
}

json bounds_json(const Bounds& b) { return json::array({b.lo, b.hi}); }

Bounds bounds_from(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw RuleError("bounds must be [lo, hi]");
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

json to_json(const DriftVerdict& v) {
  return json{{"sensor_id", v.sensor_id},
              {"kind", std::string(model::to_string(v.kind))},
              {"window_mean", v.window_mean},
              {"profile_mean", v.profile_mean},
              {"profile_sigma", v.profile_sigma},
              {"consecutive_windows", v.consecutive_windows},
              {"verdict", v.verdict == DriftState::drift ? "drift" : "none"}};
}

IntegrationRuleSet rules_from_json(const json& j) {
  if (!j.is_object()) throw RuleError("integration rules must be a JSON object");
  IntegrationRuleSet r = IntegrationRuleSet::defaults();
  r.id = j.value("id", r.id);
  if (j.contains("max_staleness_s")) r.max_staleness = Seconds{j["max_staleness_s"].get<std::int64_t>()};
  if (j.contains("bounds")) {
    for (const auto& [kind, b] : j["bounds"].items()) r.kind_bounds[kind_key(kind)] = bounds_from(b);
  }
  if (j.contains("unit_aliases")) {
    for (const auto& [kind, aliases] : j["unit_aliases"].items()) {
      auto& table = r.unit_aliases[kind_key(kind)];
      for (const auto& a : aliases) {
        UnitConversion c;
        c.subtract = a.value("subtract", 0.0);
        c.multiply = a.value("multiply", 1.0);
        c.divide = a.value("divide", 1.0);
        c.add = a.value("add", 0.0);
        table[a.at("alias").get<std::string>()] = c;
      }
    }
  }
  if (j.contains("sensor_overrides")) {
    for (const auto& [sensor, b] : j["sensor_overrides"].items()) r.sensor_overrides[sensor] = bounds_from(b);
  }
  if (auto p = r.problems(); !p.empty()) throw RuleError("invalid integration rules: " + p.front());
  return r;
}

json to_json(const IntegrationRuleSet& r) {
  json j;
  j["id"] = r.id;
  j["version"] = r.version;
  j["max_staleness_s"] = r.max_staleness.count();
  json bounds = json::object();
  for (const auto& [kind, b] : r.kind_bounds) bounds[std::string(model::to_string(kind))] = bounds_json(b);
  j["bounds"] = bounds;
  json aliases = json::object();
  for (const auto& [kind, table] : r.unit_aliases) {
    json list = json::array();
    for (const auto& [alias, c] : table)
      list.push_back({{"alias", alias}, {"subtract", c.subtract}, {"multiply", c.multiply},
                      {"divide", c.divide}, {"add", c.add}});
    aliases[std::string(model::to_string(kind))] = list;
  }
  j["unit_aliases"] = aliases;
  json overrides = json::object();
  for (const auto& [sensor, b] : r.sensor_overrides) overrides[sensor] = bounds_json(b);
  j["sensor_overrides"] = overrides;
  json log = json::array();
  for (const auto& u : r.update_log) {
    json entry{{"version", u.version}, {"sensor_id", u.sensor_id}, {"updated", bounds_json(u.updated)},
               {"verdict", to_json(u.verdict)}};
    entry["previous_override"] = u.previous_override ? bounds_json(*u.previous_override) : json(nullptr);
    log.push_back(std::move(entry));
  }
  j["update_log"] = log;
  return j;
}

IntegrationRuleSet load_rules(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw RuleError("cannot open integration rules " + file.string());
  try {
    return rules_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw RuleError("integration rules " + file.string() + ": " + e.what());
  }
}

IntegrationRuleSet propose_rule_update(const DriftVerdict& verdict, const IntegrationRuleSet& rules) {
  if (verdict.verdict != DriftState::drift)
    throw RuleError("rule update requested for sensor '" + verdict.sensor_id + "' without a drift verdict");

  IntegrationRuleSet next = rules;
  const Bounds current = rules.bounds_for(verdict.sensor_id, verdict.kind);
  const double w = current.half_width();
  RuleUpdate update;
  update.version = rules.version + 1;
  update.sensor_id = verdict.sensor_id;
  if (auto it = rules.sensor_overrides.find(verdict.sensor_id); it != rules.sensor_overrides.end())
    update.previous_override = it->second;
  update.updated = {verdict.window_mean - w, verdict.window_mean + w};
  update.verdict = verdict;

  next.sensor_overrides[verdict.sensor_id] = update.updated;
  next.version = update.version;
  next.update_log.push_back(std::move(update));
  return next;
}

}  // namespace rider::ingest
