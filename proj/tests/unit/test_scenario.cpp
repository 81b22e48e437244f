#include <doctest.h>

#include <algorithm>
#include <set>

#include "rider/scenario/context.hpp"
#include "rider/scenario/engine.hpp"
#include "rider/scenario/guard.hpp"
#include "support.hpp"

using namespace rider;
using namespace rider::scenario;

namespace {

const Timestamp kMonday10 = test::ts("2024-01-08T10:00:00Z");
const Timestamp kSunday10 = test::ts("2024-01-07T10:00:00Z");

EngineContext context_at(Timestamp clock) {
  EngineContext ctx;
  ctx.model = test::site_index();
  ctx.clock = clock;
  return ctx;
}

std::vector<Measure> office(Timestamp t, double temperature, bool presence) {
  return {{"t-101", t, temperature}, {"t-102", t, temperature}, {"t-103", t, temperature}, {"p-101", t, presence ? 1.0 : 0.0}};
}

std::vector<Assertion> assert_at(Timestamp clock, double temperature, bool presence) {
  auto ctx = step2_derive(step1_load(context_at(clock), office(clock, temperature, presence)));
  const auto rules = heating_rules(*ctx.model);
  std::vector<Assertion> out;
  for (auto& a : step3_evaluate(ctx, rules))
    if (a.zone_ref == "office") out.push_back(a);
  return out;
}

std::size_t count_events(const std::vector<TraceEvent>& trace, const std::string& kind) {
  return static_cast<std::size_t>(std::count_if(trace.begin(), trace.end(), [&](const auto& e) { return e.event == kind; }));
}

}  // namespace

TEST_CASE("step1 keeps the latest measure per sensor") {
  const auto ctx = context_at(kMonday10);
  CHECK(step1_load(ctx, {}) == ctx);
  auto loaded = step1_load(ctx, std::vector<Measure>{{"t-101", kMonday10 - Seconds{120}, 19.0}});
  loaded = step1_load(loaded, std::vector<Measure>{{"t-101", kMonday10 - Seconds{60}, 20.0}});
  CHECK(loaded.latest.at("t-101").value == 20.0);
  loaded = step1_load(loaded, std::vector<Measure>{{"t-101", kMonday10 - Seconds{600}, 5.0}});
  CHECK(loaded.latest.at("t-101").value == 20.0);
  std::vector<TraceEvent> trace;
  const auto rejected = step1_load(loaded, std::vector<Measure>{{"nope", kMonday10, 1.0}}, &trace);
  CHECK(rejected == loaded);
  CHECK(count_events(trace, "rejected-measure") == 1);
}

TEST_CASE("step2 derives schedule occupancy and virtual values") {
  CHECK(step2_derive(context_at(kMonday10)).occupied_by_schedule.at("office"));
  CHECK_FALSE(step2_derive(context_at(kSunday10)).occupied_by_schedule.at("office"));

  auto m = test::site();
  m.buildings[0].zones[1].schedule_ref.reset();
  EngineContext ctx;
  ctx.model = std::make_shared<model::ModelIndex>(m);
  ctx.clock = kMonday10;
  CHECK_FALSE(step2_derive(ctx).occupied_by_schedule.at("lab"));

  auto with_values = step2_derive(step1_load(context_at(kMonday10), office(kMonday10, 20.0, true)));
  CHECK(with_values.virtual_values.at("office-mean") == 20.0);
  CHECK_FALSE(with_values.virtual_values.count("office-lab-delta"));  // lab inputs absent
}

TEST_CASE("step3 heating rules") {
  // Someone in the room: presence rule.
  auto a = assert_at(kSunday10, 18.0, true);
  REQUIRE(a.size() == 1);
  CHECK(a[0].reason == "heat-presence/office");
  CHECK(a[0].action == Action::heat);

  // Nobody there but the planning says occupied: schedule rule.
  a = assert_at(kMonday10, 19.0, false);
  REQUIRE(a.size() == 1);
  CHECK(a[0].reason == "heat-schedule/office");

  // Empty schedule, cold room: frost rule with the higher priority.
  a = assert_at(kSunday10, 10.0, false);
  REQUIRE(a.size() == 1);
  CHECK(a[0].reason == "heat-frost/office");
  CHECK(a[0].priority == 2);

  CHECK(assert_at(kSunday10, 22.0, true).empty());
}

TEST_CASE("missing temperature gives a diagnostic and no assertion") {
  auto ctx = step2_derive(context_at(kMonday10));
  std::vector<TraceEvent> trace;
  CHECK(step3_evaluate(ctx, heating_rules(*ctx.model), &trace).empty());
  CHECK(count_events(trace, "diagnostic") == 2);
}

TEST_CASE("step4 resolves heat, conflicts and priorities") {
  ResolvePolicy policy;
  policy.zone_valves["A"] = {"valve-a"};
  const auto heat = [](int p) { return Assertion{"s", "A", Action::heat, p, "h", kMonday10}; };
  const auto chill = [](int p) { return Assertion{"s", "A", Action::chill, p, "c", kMonday10}; };

  auto r = step4_resolve(std::vector<Assertion>{heat(1)}, policy, kMonday10);
  REQUIRE(r.commands.size() == 1);
  CHECK(r.commands[0].actuator == "valve-a");
  CHECK(r.commands[0].setting == 1.0);
  CHECK(r.commands[0].provenance == std::vector<std::string>{"h"});

  std::vector<TraceEvent> trace;
  r = step4_resolve(std::vector<Assertion>{heat(1), chill(1)}, policy, kMonday10, &trace);
  CHECK(r.commands.empty());
  CHECK(r.conflicts == std::vector<std::string>{"A"});
  CHECK(count_events(trace, "conflict") == 1);

  r = step4_resolve(std::vector<Assertion>{heat(2), chill(1)}, policy, kMonday10);
  REQUIRE(r.commands.size() == 1);
  CHECK(r.commands[0].setting == 1.0);

  trace.clear();
  r = step4_resolve(std::vector<Assertion>{{"s", "B", Action::heat, 1, "h", kMonday10}}, policy, kMonday10, &trace);
  CHECK(r.commands.empty());
  CHECK(count_events(trace, "diagnostic") == 1);

  policy.previous_settings["valve-a"] = 1.0;
  r = step4_resolve({}, policy, kMonday10);
  REQUIRE(r.commands.size() == 1);
  CHECK(r.commands[0].setting == 0.0);
}

TEST_CASE("run_flow end to end") {
  const auto flow = ScenarioFlow::with_heating(test::site_index());
  const auto batch = office(kSunday10, 18.0, true);
  const auto out = flow.run(flow.initial_context(kSunday10), batch, kSunday10);
  REQUIRE(out.commands.size() == 1);
  CHECK(out.commands[0].actuator == "v-101");
  CHECK(out.commands[0].setting == 1.0);
  CHECK(count_events(out.trace, "rule-fired") == 1);
  CHECK(out.context.actuator_settings.at("v-101") == 1.0);

  const auto cold = flow.run(flow.initial_context(kSunday10), {}, kSunday10);
  CHECK(cold.commands.empty());

  const auto again = flow.run(flow.initial_context(kSunday10), batch, kSunday10);
  CHECK(again.commands == out.commands);
  CHECK(again.context == out.context);
  REQUIRE(again.trace.size() == out.trace.size());
  for (std::size_t i = 0; i < out.trace.size(); ++i) CHECK(again.trace[i].to_json() == out.trace[i].to_json());
}

TEST_CASE("rules referencing missing model objects are refused") {
  const auto index = test::site_index();
  RuleDef bad{"r", 3, Guard::parse("zone.attic.temperature < 10"), AssertionTemplate{"s", "attic", Action::heat, 1}};
  CHECK_THROWS_AS(ScenarioFlow(index, {bad}), RuleValidationError);
  RuleDef wrong_step{"w", 4, Guard::parse("true"), AssertionTemplate{"s", "office", Action::heat, 1}};
  CHECK_THROWS_AS(ScenarioFlow(index, {wrong_step}), RuleValidationError);
  RuleDef not_actuator{"n", 4, Guard::parse("true"), CommandTemplate{"t-101", 1.0}};
  CHECK_THROWS_AS(ScenarioFlow(index, {not_actuator}), RuleValidationError);
  RuleDef ok{"ok", 4, Guard::parse("clock.hour >= 22"), CommandTemplate{"v-201", 0.0}};
  CHECK_NOTHROW(ScenarioFlow(index, {ok}));

  const auto parsed = rules_from_json(nlohmann::json::parse(R"([
    {"rule_id": "night-lab", "step": 4, "guard": "clock.hour >= 22", "command": {"actuator": "v-201", "setting": 0}},
    {"rule_id": "chill-office", "step": 3, "guard": "zone.office.temperature > 26",
     "assert": {"scenario_id": "cooling", "zone": "office", "action": "chill", "priority": 1}}
  ])"));
  CHECK(parsed.size() == 2);
  CHECK(validate_rules(parsed, *index).empty());
}

TEST_CASE("guard grammar") {
  auto ctx = step2_derive(step1_load(context_at(kMonday10), office(kMonday10, 19.0, true)));
  CHECK(Guard::parse("zone.office.temperature < 20 && zone.office.presence == 1").holds(ctx));
  CHECK(Guard::parse("not (1 > 2) and (2 * 3 - 1 == 5)").holds(ctx));
  CHECK(Guard::parse("-zone.office.temperature == -19").holds(ctx));
  CHECK(Guard::parse("clock.weekday == 0 && clock.hour == 10").holds(ctx));
  CHECK_FALSE(Guard::parse("sensor.t-201 > 0").evaluate(ctx).has_value());
  CHECK(Guard::parse("false && sensor.t-201 > 0").evaluate(ctx) == 0.0);
  CHECK(Guard::parse("true || sensor.t-201 > 0").holds(ctx));
  CHECK_THROWS_AS(Guard::parse("1 <"), GuardSyntaxError);
  CHECK_THROWS_AS(Guard::parse("(1 < 2"), GuardSyntaxError);
  CHECK(Guard::parse("zone.office.setpoint - zone.office.deadband / 2 == 20.75").holds(ctx));
}

TEST_CASE("frost dominance and conflict safety over random contexts") {
  const auto index = test::site_index();
  auto rules = heating_rules(*index);
  rules.push_back({"chill-office", 3, Guard::parse("zone.office.temperature > 5"),
                   AssertionTemplate{"cooling", "office", Action::chill, 1}});
  const ScenarioFlow flow(index, rules);
  for (int t10 = 0; t10 < 300; t10 += 7) {
    const double temperature = t10 / 10.0;
    for (bool presence : {false, true})
      for (auto clock : {kMonday10, kSunday10}) {
        const auto out = flow.run(flow.initial_context(clock), office(clock, temperature, presence), clock);
        std::map<std::string, std::set<double>> settings;
        for (const auto& c : out.commands) settings[c.zone_ref].insert(c.setting);
        for (const auto& [zone, s] : settings) CHECK(s.size() == 1);
        if (temperature < 12.0) CHECK(settings["office"] == std::set<double>{1.0});
      }
  }
}

TEST_CASE("hysteresis on a monotone temperature sweep") {
  const auto flow = ScenarioFlow::with_heating(test::site_index());
  // Rising from 19 to 23 then falling back while occupied by schedule.
  auto ctx = flow.initial_context(kMonday10);
  std::vector<std::pair<double, double>> switches;  // (temperature, new setting)
  std::vector<double> sweep;
  for (int i = 0; i <= 80; ++i) sweep.push_back(19.0 + i * 0.05);
  for (int i = 80; i >= 0; --i) sweep.push_back(19.0 + i * 0.05);
  Timestamp t = kMonday10;
  for (double temperature : sweep) {
    t += Seconds{60};
    auto out = flow.run(ctx, office(t, temperature, false), t);
    for (const auto& c : out.commands) {
      const double previous = ctx.actuator_settings.count(c.actuator) ? ctx.actuator_settings.at(c.actuator) : 0.0;
      if (c.actuator == "v-101" && c.setting != previous) switches.push_back({temperature, c.setting});
    }
    ctx = out.context;
  }
  REQUIRE(switches.size() >= 2);
  for (std::size_t i = 1; i < switches.size(); ++i) {
    CHECK(switches[i].second != switches[i - 1].second);
    CHECK(std::abs(switches[i].first - switches[i - 1].first) >= 0.5 - 1e-9);
  }
}
