#include "rider/app/pipeline.hpp"

#include <fstream>
#include <ostream>

#include "rider/ingest/rules.hpp"
#include "rider/model/json_io.hpp"
#include "rider/model/validate.hpp"

namespace rider::app {

namespace fs = std::filesystem;
using nlohmann::json;

json RunReport::to_json() const {
  json j{{"ticks", ticks},
         {"start", format_iso8601(start)},
         {"end", format_iso8601(end)},
         {"raw", raw},
         {"dropped", dropped},
         {"measures", measures},
         {"exceptions", exceptions},
         {"recovered", recovered},
         {"quarantined", quarantined},
         {"rule_updates", rule_updates},
         {"rules_version", rules_version},
         {"by_class", by_class},
         {"virtual_facts", virtual_facts},
         {"virtual_absent", virtual_absent},
         {"evaluation_errors", evaluation_errors},
         {"commands", commands},
         {"heat_commands", heat_commands},
         {"conflicts", conflicts},
         {"facts", facts},
         {"partial", partial}};
  if (!error.empty()) j["error"] = error;
  return j;
}

Pipeline::Pipeline(const PipelineConfig& config, bool replace_store) : config_(config) {
  std::vector<std::string> problems;

  std::optional<model::SiteModel> site;
  try {
    site = model::load_model(config.model);
    const auto report = model::validate_model(*site);
    for (const auto& v : report.violations) problems.push_back("model: " + v.code + " at " + v.path + ": " + v.message);
  } catch (const std::exception& e) {
    problems.push_back(std::string("model: ") + e.what());
  }

  std::optional<ingest::IntegrationRuleSet> rules;
  try {
    rules = ingest::load_rules(config.rules);
    for (const auto& p : rules->problems()) problems.push_back("rules: " + p);
  } catch (const std::exception& e) {
    problems.push_back(std::string("rules: ") + e.what());
  }

  try {
    harness_ = harness::load_harness(config.harness);
    for (const auto& z : harness_.zones)
      if (config.tick.count() > z.tau_s / 10.0)
        problems.push_back("tick of " + std::to_string(config.tick.count()) + " s exceeds tau/10 for zone '" +
                           z.zone_id + "'");
  } catch (const std::exception& e) {
    problems.push_back(std::string("harness: ") + e.what());
  }
  if (!problems.empty()) throw ValidationFailure("pipeline inputs are invalid", problems);

  index_ = std::make_shared<model::ModelIndex>(std::move(*site));
  try {
    std::vector<scenario::RuleDef> custom;
    if (!config.scenario_rules.empty()) custom = scenario::load_rules_file(config.scenario_rules);
    flow_ = std::make_unique<scenario::ScenarioFlow>(scenario::ScenarioFlow::with_heating(index_, std::move(custom)));
  } catch (const std::exception& e) {
    problems.push_back(std::string("scenario rules: ") + e.what());
  }
  try {
    plant_ = harness::initial_state(harness_, *index_);
  } catch (const std::exception& e) {
    problems.push_back(std::string("harness: ") + e.what());
  }
  if (!problems.empty()) throw ValidationFailure("pipeline inputs are invalid", problems);

  if (!config.store.empty()) {
    if (warehouse::Store::exists(config.store)) {
      if (!replace_store)
        throw ValidationFailure("store", {config.store.string() + " already holds a store"});
      fs::remove_all(config.store);
    }
    store_ = warehouse::Store::create(config.store, index_->model());
  } else {
    memory_ = std::make_unique<warehouse::Warehouse>(index_);
  }

  emitter_ = std::make_unique<harness::RawEmitter>(index_, harness_.faults);
  ingest_ = std::make_unique<ingest::IngestPipeline>(index_, std::move(*rules));
  context_ = flow_->initial_context(plant_.clock);
  report_.start = report_.end = plant_.clock;
}

Pipeline::~Pipeline() = default;

warehouse::Warehouse& Pipeline::warehouse() { return store_ ? store_->warehouse() : *memory_; }

void Pipeline::write_trace(Timestamp tick, const std::string& event, const json& detail) {
  if (!trace_) return;
  *trace_ << json{{"tick", format_iso8601(tick)}, {"event", event}, {"detail", detail}}.dump() << '\n';
}

TickResult Pipeline::tick() {
  auto& wh = warehouse();
  const Timestamp clock = plant_.clock;

  const auto emission = emitter_->emit(plant_);
  report_.dropped += emission.dropped;
  auto batch = ingest_->process(emission.records, clock);
  for (const auto& v : batch.verdicts) write_trace(clock, "drift-verdict", ingest::to_json(v));
  for (const auto& u : batch.updates)
    write_trace(clock, "rule-update", {{"sensor_id", u.sensor_id}, {"version", u.version}, {"lo", u.updated.lo}, {"hi", u.updated.hi}});
  wh.insert_all(batch.measures);
  wh.insert_all(batch.recovered);

  std::vector<Measure> measures = std::move(batch.measures);
  measures.insert(measures.end(), batch.recovered.begin(), batch.recovered.end());
  for (const auto& outcome : wh.evaluate_virtuals(clock, config_.align)) {
    if (const auto* m = std::get_if<Measure>(&outcome)) {
      ++report_.virtual_facts;
      measures.push_back(*m);
    } else if (std::holds_alternative<warehouse::Absent>(outcome)) {
      ++report_.virtual_absent;
    }
  }

  auto flow = flow_->run(context_, measures, clock);
  context_ = std::move(flow.context);
  if (trace_)
    for (const auto& e : flow.trace) *trace_ << e.to_json().dump() << '\n';

  TickResult out{clock, std::move(flow.commands), {}};
  for (const auto& e : flow.trace)
    if (e.event == "conflict") out.conflicts.push_back(e.detail.value("zone", ""));
  for (const auto& c : out.commands) {
    wh.insert({c.actuator, clock, c.setting});
    ++report_.commands;
    if (c.setting > 0.0) ++report_.heat_commands;
  }
  report_.conflicts += out.conflicts.size();

  plant_ = harness::step_plant(std::move(plant_), out.commands, config_.tick);
  ++report_.ticks;
  report_.end = plant_.clock;
  return out;
}

std::int64_t Pipeline::advance(std::int64_t n) {
  std::int64_t done = 0;
  for (; done < n && !report_.partial; ++done) {
    try {
      tick();
    } catch (const std::exception& e) {
      report_.partial = true;
      report_.error = e.what();
    }
  }
  return done;
}

RunReport Pipeline::report() const {
  RunReport r = report_;
  const auto c = ingest_->counters();
  r.raw = c.raw;
  r.measures = c.measures;
  r.exceptions = c.exceptions;
  r.recovered = c.recovered;
  r.rule_updates = c.rule_updates;
  for (const auto& [cls, n] : c.by_class) r.by_class[std::string(ingest::to_string(cls))] = n;
  r.quarantined = ingest_->quarantine().size();
  r.rules_version = ingest_->rules().version;
  const auto& wh = store_ ? store_->warehouse() : *memory_;
  r.evaluation_errors = wh.evaluation_errors();
  r.facts = wh.fact_count();
  return r;
}

void Pipeline::save() {
  if (!store_) return;
  store_->set_quarantine(ingest_->quarantine());
  store_->save();
  std::ofstream rules(store_->dir() / "rules.json");
  rules << ingest::to_json(ingest_->rules()).dump(2) << '\n';
}

RunReport run_pipeline(const PipelineConfig& config, bool replace_store) {
  Pipeline pipeline(config, replace_store);
  std::ofstream trace;
  if (pipeline.store()) {
    trace.open(pipeline.store()->dir() / "trace.jsonl", std::ios::binary);
    pipeline.set_trace(&trace);
  }
  pipeline.advance(config.ticks());
  auto report = pipeline.report();
  if (pipeline.store()) {
    try {
      pipeline.save();
      std::ofstream out(pipeline.store()->dir() / "run-report.json", std::ios::binary);
      out << report.to_json().dump(2) << '\n';
    } catch (const std::exception& e) {
      report.partial = true;
      report.error = e.what();
    }
  }
  return report;
}

}  // namespace rider::app
