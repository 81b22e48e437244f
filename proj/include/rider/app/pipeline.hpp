#pragma once

#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "rider/app/config.hpp"
#include "rider/harness/plant.hpp"
#include "rider/ingest/pipeline.hpp"
#include "rider/scenario/engine.hpp"
#include "rider/warehouse/store.hpp"

namespace rider::app {

struct RunReport {
  std::int64_t ticks = 0;
  Timestamp start;
  Timestamp end;
  std::size_t raw = 0;
  std::size_t dropped = 0;
  std::size_t measures = 0;     // accepted on arrival
  std::size_t exceptions = 0;   // quarantined on arrival
  std::size_t recovered = 0;    // reintegrated later
  std::size_t quarantined = 0;  // still in quarantine at the end
  std::size_t rule_updates = 0;
  std::uint64_t rules_version = 0;
  std::map<std::string, std::size_t> by_class;
  std::size_t virtual_facts = 0;
  std::size_t virtual_absent = 0;
  std::size_t evaluation_errors = 0;
  std::size_t commands = 0;
  std::size_t heat_commands = 0;
  std::size_t conflicts = 0;
  std::size_t facts = 0;
  bool partial = false;
  std::string error;

  nlohmann::json to_json() const;
};

struct TickResult {
  Timestamp clock;  // the tick the plant was sampled and the rules ran at
  std::vector<scenario::Command> commands;
  std::vector<std::string> conflicts;
};

/// The closed loop: harness -> ingest -> warehouse -> scenario -> plant.
///
/// Construction loads and validates every referenced file and throws
/// ValidationFailure with all problems found. With a store path the
/// warehouse lives in a fresh store there; an existing store is refused
/// unless `replace_store` is set.
class Pipeline {
 public:
  explicit Pipeline(const PipelineConfig& config, bool replace_store = false);
  ~Pipeline();

  /// Trace events are written as JSON lines, in tick order.
  void set_trace(std::ostream* out) { trace_ = out; }

  TickResult tick();

  /// Runs up to `n` ticks; an i/o or plant failure stops the run and is
  /// recorded in the report as partial.
  std::int64_t advance(std::int64_t n);

  /// Ticks left until the configured horizon.
  std::int64_t remaining() const { return config_.ticks() - report_.ticks; }

  RunReport report() const;

  /// Persists the store (no-op in memory).
  void save();

  const PipelineConfig& config() const { return config_; }
  const harness::PlantState& plant() const { return plant_; }
  const harness::HarnessConfig& harness_config() const { return harness_; }
  std::shared_ptr<const model::ModelIndex> index() const { return index_; }
  warehouse::Warehouse& warehouse();
  const ingest::IngestPipeline& ingest() const { return *ingest_; }
  warehouse::Store* store() { return store_.get(); }

 private:
  void write_trace(Timestamp tick, const std::string& event, const nlohmann::json& detail);

  PipelineConfig config_;
  std::shared_ptr<const model::ModelIndex> index_;
  harness::HarnessConfig harness_;
  harness::PlantState plant_;
  std::unique_ptr<harness::RawEmitter> emitter_;
  std::unique_ptr<ingest::IngestPipeline> ingest_;
  std::unique_ptr<scenario::ScenarioFlow> flow_;
  scenario::EngineContext context_;
  std::unique_ptr<warehouse::Store> store_;
  std::unique_ptr<warehouse::Warehouse> memory_;
  RunReport report_;
  std::ostream* trace_ = nullptr;
};

/// Runs the whole horizon. With a store, also writes run-report.json and
/// trace.jsonl into the store directory.
RunReport run_pipeline(const PipelineConfig& config, bool replace_store = false);

}  // namespace rider::app
