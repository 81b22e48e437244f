#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "rider/scenario/context.hpp"
#include "rider/scenario/guard.hpp"

namespace rider::scenario {

enum class Action { heat, chill };
std::string_view to_string(Action a);

struct Assertion {
  std::string scenario_id;
  std::string zone_ref;
  Action action = Action::heat;
  int priority = 0;
  std::string reason;  // originating rule id
  Timestamp tick;

  friend bool operator==(const Assertion&, const Assertion&) = default;
};

struct Command {
  std::string actuator;
  double setting = 0.0;  // fraction in [0, 1]
  std::string zone_ref;
  Timestamp tick;
  std::vector<std::string> provenance;  // rule ids of the winning assertions

  friend bool operator==(const Command&, const Command&) = default;
};

struct AssertionTemplate {
  std::string scenario_id;
  std::string zone_ref;
  Action action = Action::heat;
  int priority = 0;
};

struct CommandTemplate {
  std::string actuator;
  double setting = 0.0;
};

struct RuleDef {
  std::string rule_id;
  int step = 3;
  Guard guard;
  std::variant<AssertionTemplate, CommandTemplate> effect;
};

struct TraceEvent {
  Timestamp tick;
  std::string event;  // rejected-measure, rule-fired, assertion, conflict, command, diagnostic
  nlohmann::json detail;

  nlohmann::json to_json() const;
};

class RuleValidationError : public std::runtime_error {
 public:
  explicit RuleValidationError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

/// The built-in heating scenario, per zone:
///  frost:    T < frost_guard                               (priority 2)
///  presence: presence AND T < setpoint - deadband/2        (priority 1)
///  schedule: occupied-by-schedule AND T < setpoint - deadband/2
///  and two hold rules that keep an already-open valve open while
///  presence/schedule still call for heat and T < setpoint + deadband/2,
///  which gives the deadband its hysteresis.
std::vector<RuleDef> heating_rules(const model::ModelIndex& index);

/// Rules file: a JSON list of {rule_id, step (3|4), guard, assert|command}.
std::vector<RuleDef> rules_from_json(const nlohmann::json& j);
std::vector<RuleDef> load_rules_file(const std::filesystem::path& file);

/// Every problem found: duplicate ids, wrong step/effect pairing, paths or
/// zones or actuators that the model does not define, priority < 0.
std::vector<std::string> validate_rules(const std::vector<RuleDef>& rules, const model::ModelIndex& index);

/// Step 1: per sensor, the latest-timestamp measure of (stored, batch) wins.
/// Unknown sensors and measures newer than the clock are rejected and logged.
EngineContext step1_load(EngineContext ctx, std::span<const Measure> batch,
                         std::vector<TraceEvent>* trace = nullptr);

/// Step 2: schedule occupancy per zone and virtual sensor values.
EngineContext step2_derive(EngineContext ctx);

/// Step 3: evaluates step-3 rules; one assertion per (scenario, zone, action, rule).
std::vector<Assertion> step3_evaluate(const EngineContext& ctx, std::span<const RuleDef> rules,
                                      std::vector<TraceEvent>* trace = nullptr);

struct ResolvePolicy {
  std::map<std::string, std::vector<std::string>> zone_valves;
  std::map<std::string, double> previous_settings;

  static ResolvePolicy from(const EngineContext& ctx);
};

struct Resolution {
  std::vector<Command> commands;
  std::vector<std::string> conflicts;  // zone ids with tied heat/chill
};

/// Step 4: per zone the action with the strictly higher max priority wins;
/// a tie yields no command and a conflict entry. Winning heat opens the
/// zone's valves fully; previously open valves without a winning heat are
/// closed.
Resolution step4_resolve(std::span<const Assertion> assertions, const ResolvePolicy& policy,
                         Timestamp tick, std::vector<TraceEvent>* trace = nullptr);

struct FlowResult {
  std::vector<Command> commands;
  std::vector<TraceEvent> trace;
  EngineContext context;
};

/// A validated rule book bound to a model. Construction refuses rules that
/// reference objects missing from the model.
class ScenarioFlow {
 public:
  ScenarioFlow(std::shared_ptr<const model::ModelIndex> index, std::vector<RuleDef> rules);

  /// Built-in heating rules followed by `custom`.
  static ScenarioFlow with_heating(std::shared_ptr<const model::ModelIndex> index,
                                   std::vector<RuleDef> custom = {});

  EngineContext initial_context(Timestamp clock) const;

  /// step1 -> step2 -> step3 -> step4 at `clock`. Pure in (ctx, batch, clock).
  FlowResult run(EngineContext ctx, std::span<const Measure> batch, Timestamp clock) const;

  const std::vector<RuleDef>& rules() const { return rules_; }

 private:
  std::shared_ptr<const model::ModelIndex> index_;
  std::vector<RuleDef> rules_;
};

}  // namespace rider::scenario
