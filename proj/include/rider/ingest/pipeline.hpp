#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "rider/ingest/drift.hpp"
#include "rider/ingest/reintegrate.hpp"

namespace rider::ingest {

struct IngestOptions {
  DriftParams drift;
  std::size_t profile_samples = 0;  // 0 means 10 * drift.window_size
  bool auto_rule_update = true;
  bool drift_detection = true;
};

struct IngestCounters {
  std::size_t raw = 0;
  std::size_t measures = 0;
  std::size_t exceptions = 0;
  std::size_t recovered = 0;
  std::size_t rule_updates = 0;
  std::map<ExceptionClass, std::size_t> by_class;
};

/// The ETL stage: classifies records, tracks per-sensor drift on every value
/// that parsed (including out-of-range ones), applies automatic rule updates
/// and replays the quarantine after each update.
///
/// Records are handled strictly in input order and each against exactly one
/// rule-set version; process() calls are serialized internally.
class IngestPipeline {
 public:
  struct BatchResult {
    std::vector<Measure> measures;
    std::vector<ExceptionRecord> exceptions;  // newly quarantined in this batch
    std::vector<RuleUpdate> updates;
    std::vector<Measure> recovered;           // reintegrated from the quarantine
    std::vector<DriftVerdict> verdicts;
  };

  IngestPipeline(std::shared_ptr<const model::ModelIndex> registry, IntegrationRuleSet rules,
                 IngestOptions options = {});

  BatchResult process(std::span<const RawRecord> batch, Timestamp now);

  /// Streaming-file semantics: `now` is the running maximum timestamp seen so
  /// far (the arrival watermark), so late records age out but in-order
  /// history does not.
  BatchResult process_with_watermark(std::span<const RawRecord> batch);

  IntegrationRuleSet rules() const;
  std::vector<ExceptionRecord> quarantine() const;
  IngestCounters counters() const;

 private:
  std::optional<DriftVerdict> observe(const std::string& sensor_id, double value);
  void handle(const RawRecord& raw, Timestamp now, BatchResult& out);

  std::shared_ptr<const model::ModelIndex> registry_;
  IngestOptions options_;
  mutable std::mutex mutex_;
  IntegrationRuleSet rules_;
  std::vector<ExceptionRecord> quarantine_;
  std::map<std::string, DriftMonitor> monitors_;
  IngestCounters counters_;
  std::optional<Timestamp> watermark_;
};

}  // namespace rider::ingest
