#include "rider/scenario/engine.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <tuple>

#include "rider/model/expression.hpp"

namespace rider::scenario {

using nlohmann::json;

std::string_view to_string(Action a) { return a == Action::heat ? "heat" : "chill"; }

json TraceEvent::to_json() const {
  json j{{"tick", format_iso8601(tick)}, {"event", event}};
  if (detail.is_object())
    for (const auto& [k, v] : detail.items()) j[k] = v;
  return j;
}

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : "; ") + s;
  return out;
}

void log(std::vector<TraceEvent>* trace, Timestamp tick, std::string event, json detail) {
  if (trace) trace->push_back({tick, std::move(event), std::move(detail)});
}

RuleDef make_heat_rule(std::string id, const std::string& zone, int priority, const std::string& guard) {
  RuleDef r;
  r.rule_id = std::move(id);
  r.step = 3;
  r.guard = Guard::parse(guard);
  r.effect = AssertionTemplate{"heating", zone, Action::heat, priority};
  return r;
}

}  // namespace

RuleValidationError::RuleValidationError(std::vector<std::string> problems)
    : std::runtime_error("scenario rules rejected: " + join(problems)), problems_(std::move(problems)) {}

std::vector<RuleDef> heating_rules(const model::ModelIndex& index) {
  std::vector<RuleDef> rules;
  for (const auto& zone : index.zone_ids()) {
    const std::string z = "zone." + zone + ".";
    const std::string cold = z + "temperature < " + z + "setpoint - " + z + "deadband / 2";
    const std::string below_upper = z + "temperature < " + z + "setpoint + " + z + "deadband / 2";
    rules.push_back(make_heat_rule("heat-frost/" + zone, zone, 2, z + "temperature < " + z + "frost_guard"));
    rules.push_back(make_heat_rule("heat-presence/" + zone, zone, 1, z + "presence == 1 && " + cold));
    rules.push_back(make_heat_rule("heat-schedule/" + zone, zone, 1, z + "occupied == 1 && " + cold));
    rules.push_back(make_heat_rule("heat-presence-hold/" + zone, zone, 1,
                                   z + "heating == 1 && " + z + "presence == 1 && " + below_upper));
    rules.push_back(make_heat_rule("heat-schedule-hold/" + zone, zone, 1,
                                   z + "heating == 1 && " + z + "occupied == 1 && " + below_upper));
  }
  return rules;
}

std::vector<RuleDef> rules_from_json(const json& j) {
  if (!j.is_array()) throw RuleValidationError({"rules file must be a JSON list"});
  std::vector<RuleDef> out;
  std::vector<std::string> problems;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& r = j[i];
    const std::string where = "rule[" + std::to_string(i) + "]";
    try {
      RuleDef def;
      def.rule_id = r.at("rule_id").get<std::string>();
      def.step = r.at("step").get<int>();
      def.guard = Guard::parse(r.value("guard", std::string("true")));
      if (r.contains("assert")) {
        const auto& a = r["assert"];
        AssertionTemplate t;
        t.scenario_id = a.value("scenario_id", std::string("custom"));
        t.zone_ref = a.at("zone").get<std::string>();
        const auto action = a.at("action").get<std::string>();
        if (action != "heat" && action != "chill") throw std::runtime_error("action must be heat or chill");
        t.action = action == "heat" ? Action::heat : Action::chill;
        t.priority = a.value("priority", 0);
        def.effect = t;
      } else if (r.contains("command")) {
        const auto& c = r["command"];
        def.effect = CommandTemplate{c.at("actuator").get<std::string>(), c.at("setting").get<double>()};
      } else {
        throw std::runtime_error("rule needs an 'assert' or 'command' effect");
      }
      out.push_back(std::move(def));
    } catch (const std::exception& e) {
      problems.push_back(where + ": " + e.what());
    }
  }
  if (!problems.empty()) throw RuleValidationError(problems);
  return out;
}

std::vector<RuleDef> load_rules_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw RuleValidationError({"cannot open rules file " + file.string()});
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw RuleValidationError({file.string() + ": " + e.what()});
  }
  return rules_from_json(j);
}

std::vector<std::string> validate_rules(const std::vector<RuleDef>& rules, const model::ModelIndex& index) {
  std::vector<std::string> problems;
  std::set<std::string> ids;
  for (const auto& r : rules) {
    const std::string where = "rule '" + r.rule_id + "'";
    if (r.rule_id.empty()) problems.push_back("rule with empty id");
    if (!ids.insert(r.rule_id).second) problems.push_back(where + ": duplicate rule id");
    if (r.step < 1 || r.step > 4) problems.push_back(where + ": step must be 1..4");
    for (const auto& p : r.guard.paths())
      if (auto err = check_path(index, p)) problems.push_back(where + ": " + *err);
    if (const auto* a = std::get_if<AssertionTemplate>(&r.effect)) {
      if (r.step != 3) problems.push_back(where + ": only step-3 rules may emit assertions");
      if (!index.zone(a->zone_ref)) problems.push_back(where + ": unknown zone '" + a->zone_ref + "'");
      if (a->priority < 0) problems.push_back(where + ": priority must be >= 0");
    } else {
      const auto& c = std::get<CommandTemplate>(r.effect);
      if (r.step != 4) problems.push_back(where + ": only step-4 rules may emit commands");
      const auto* s = index.sensor(c.actuator);
      if (!s) problems.push_back(where + ": unknown actuator '" + c.actuator + "'");
      else if (!s->is_actuator) problems.push_back(where + ": '" + c.actuator + "' is not an actuator");
      if (!(c.setting >= 0.0 && c.setting <= 1.0)) problems.push_back(where + ": setting must be in [0, 1]");
    }
  }
  return problems;
}

EngineContext step1_load(EngineContext ctx, std::span<const Measure> batch, std::vector<TraceEvent>* trace) {
  for (const auto& m : batch) {
    if (!ctx.model->sensor(m.sensor_id)) {
      log(trace, ctx.clock, "rejected-measure", {{"sensor", m.sensor_id}, {"reason", "unknown sensor"}});
      continue;
    }
    if (m.timestamp > ctx.clock) {
      log(trace, ctx.clock, "rejected-measure", {{"sensor", m.sensor_id}, {"reason", "newer than clock"}});
      continue;
    }
    auto it = ctx.latest.find(m.sensor_id);
    if (it == ctx.latest.end()) ctx.latest.emplace(m.sensor_id, m);
    else if (m.timestamp >= it->second.timestamp) it->second = m;
  }
  return ctx;
}

EngineContext step2_derive(EngineContext ctx) {
  const auto& index = *ctx.model;
  ctx.occupied_by_schedule.clear();
  for (const auto& zone : index.zone_ids()) {
    const auto* info = index.zone(zone);
    ctx.occupied_by_schedule[zone] = info->schedule && info->schedule->occupied_at(ctx.clock);
  }

  ctx.virtual_values.clear();
  const auto lookup = [&](const std::string& id) -> std::optional<double> {
    if (auto it = ctx.virtual_values.find(id); it != ctx.virtual_values.end()) return it->second;
    auto it = ctx.latest.find(id);
    if (it == ctx.latest.end()) return std::nullopt;
    if (it->second.timestamp <= ctx.clock - ctx.align) return std::nullopt;
    return it->second.value;
  };
  for (const auto& id : index.virtual_order()) {
    const auto* def = index.virtual_sensor(id);
    auto result = model::evaluate(def->expression, lookup);
    if (const auto* v = std::get_if<double>(&result)) ctx.virtual_values[id] = *v;
  }
  return ctx;
}

std::vector<Assertion> step3_evaluate(const EngineContext& ctx, std::span<const RuleDef> rules,
                                      std::vector<TraceEvent>* trace) {
  std::set<std::string> temperature_zones;
  for (const auto& r : rules) {
    if (r.step != 3) continue;
    for (const auto& p : r.guard.paths())
      if (p.rfind("zone.", 0) == 0 && p.size() > 17 && p.compare(p.size() - 12, 12, ".temperature") == 0)
        temperature_zones.insert(p.substr(5, p.size() - 17));
  }
  for (const auto& zone : temperature_zones) {
    if (!zone_temperature(ctx, zone))
      log(trace, ctx.clock, "diagnostic", {{"zone", zone}, {"message", "missing temperature measure"}});
  }

  std::vector<Assertion> out;
  std::set<std::tuple<std::string, std::string, Action, std::string>> seen;
  for (const auto& r : rules) {
    if (r.step != 3) continue;
    const auto* t = std::get_if<AssertionTemplate>(&r.effect);
    if (!t || !r.guard.holds(ctx)) continue;
    if (!seen.emplace(t->scenario_id, t->zone_ref, t->action, r.rule_id).second) continue;
    log(trace, ctx.clock, "rule-fired", {{"rule", r.rule_id}, {"step", 3}});
    Assertion a{t->scenario_id, t->zone_ref, t->action, t->priority, r.rule_id, ctx.clock};
    log(trace, ctx.clock, "assertion",
        {{"rule", a.reason}, {"zone", a.zone_ref}, {"action", std::string(to_string(a.action))},
         {"priority", a.priority}, {"scenario", a.scenario_id}});
    out.push_back(std::move(a));
  }
  return out;
}

ResolvePolicy ResolvePolicy::from(const EngineContext& ctx) {
  ResolvePolicy p;
  for (const auto& zone : ctx.model->zone_ids()) {
    for (const auto* s : ctx.model->zone_sensors(zone, model::SensorKind::valve))
      if (s->is_actuator) p.zone_valves[zone].push_back(s->sensor_id);
  }
  p.previous_settings = ctx.actuator_settings;
  return p;
}

Resolution step4_resolve(std::span<const Assertion> assertions, const ResolvePolicy& policy, Timestamp tick,
                         std::vector<TraceEvent>* trace) {
  struct ZoneClaims {
    int heat = -1;
    int chill = -1;
    std::vector<std::string> heat_reasons;
  };
  std::map<std::string, ZoneClaims> claims;
  for (const auto& a : assertions) {
    auto& c = claims[a.zone_ref];
    if (a.action == Action::heat) {
      c.heat = std::max(c.heat, a.priority);
      c.heat_reasons.push_back(a.reason);
    } else {
      c.chill = std::max(c.chill, a.priority);
    }
  }

  Resolution out;
  std::set<std::string> decided_zones;
  for (auto& [zone, c] : claims) {
    if (c.heat >= 0 && c.chill >= 0 && c.heat == c.chill) {
      out.conflicts.push_back(zone);
      decided_zones.insert(zone);
      log(trace, tick, "conflict", {{"zone", zone}, {"priority", c.heat}});
      continue;
    }
    if (c.heat > c.chill) {
      decided_zones.insert(zone);
      auto vit = policy.zone_valves.find(zone);
      if (vit == policy.zone_valves.end() || vit->second.empty()) {
        log(trace, tick, "diagnostic", {{"zone", zone}, {"message", "heat asserted but zone has no actuator"}});
        continue;
      }
      std::sort(c.heat_reasons.begin(), c.heat_reasons.end());
      for (const auto& valve : vit->second) out.commands.push_back({valve, 1.0, zone, tick, c.heat_reasons});
    }
  }

  // Heat-off: any valve left open whose zone got no decision this tick closes.
  for (const auto& [zone, valves] : policy.zone_valves) {
    if (decided_zones.count(zone) && claims[zone].heat > claims[zone].chill) continue;
    if (decided_zones.count(zone) && claims[zone].heat == claims[zone].chill) continue;
    for (const auto& valve : valves) {
      auto it = policy.previous_settings.find(valve);
      if (it != policy.previous_settings.end() && it->second > 0.0)
        out.commands.push_back({valve, 0.0, zone, tick, {"heat-off"}});
    }
  }

  std::sort(out.commands.begin(), out.commands.end(),
            [](const Command& a, const Command& b) { return a.actuator < b.actuator; });
  for (const auto& c : out.commands)
    log(trace, tick, "command",
        {{"actuator", c.actuator}, {"setting", c.setting}, {"zone", c.zone_ref}, {"provenance", c.provenance}});
  return out;
}

ScenarioFlow::ScenarioFlow(std::shared_ptr<const model::ModelIndex> index, std::vector<RuleDef> rules)
    : index_(std::move(index)), rules_(std::move(rules)) {
  if (auto problems = validate_rules(rules_, *index_); !problems.empty()) throw RuleValidationError(problems);
}

ScenarioFlow ScenarioFlow::with_heating(std::shared_ptr<const model::ModelIndex> index,
                                        std::vector<RuleDef> custom) {
  auto rules = heating_rules(*index);
  for (auto& r : custom) rules.push_back(std::move(r));
  return ScenarioFlow(std::move(index), std::move(rules));
}

EngineContext ScenarioFlow::initial_context(Timestamp clock) const {
  EngineContext ctx;
  ctx.model = index_;
  ctx.clock = clock;
  return ctx;
}

FlowResult ScenarioFlow::run(EngineContext ctx, std::span<const Measure> batch, Timestamp clock) const {
  FlowResult out;
  ctx.model = index_;
  ctx.clock = clock;
  ctx = step1_load(std::move(ctx), batch, &out.trace);
  ctx = step2_derive(std::move(ctx));
  const auto assertions = step3_evaluate(ctx, rules_, &out.trace);
  auto resolution = step4_resolve(assertions, ResolvePolicy::from(ctx), clock, &out.trace);

  std::set<std::string> commanded;
  for (const auto& c : resolution.commands) commanded.insert(c.actuator);
  for (const auto& r : rules_) {
    if (r.step != 4) continue;
    const auto* t = std::get_if<CommandTemplate>(&r.effect);
    if (!t || !r.guard.holds(ctx)) continue;
    out.trace.push_back({clock, "rule-fired", {{"rule", r.rule_id}, {"step", 4}}});
    if (!commanded.insert(t->actuator).second) {
      out.trace.push_back({clock, "diagnostic",
                           {{"rule", r.rule_id}, {"message", "actuator already commanded this tick"}}});
      continue;
    }
    const auto* s = index_->sensor(t->actuator);
    Command c{t->actuator, t->setting, s ? s->zone_id : "", clock, {r.rule_id}};
    out.trace.push_back({clock, "command",
                         {{"actuator", c.actuator}, {"setting", c.setting}, {"zone", c.zone_ref},
                          {"provenance", c.provenance}}});
    resolution.commands.push_back(std::move(c));
  }

  for (const auto& c : resolution.commands) ctx.actuator_settings[c.actuator] = c.setting;
  out.commands = std::move(resolution.commands);
  out.context = std::move(ctx);
  return out;
}

}  // namespace rider::scenario
