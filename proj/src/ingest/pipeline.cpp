#include "rider/ingest/pipeline.hpp"

namespace rider::ingest {

IngestPipeline::IngestPipeline(std::shared_ptr<const model::ModelIndex> registry,
                               IntegrationRuleSet rules, IngestOptions options)
    : registry_(std::move(registry)), options_(options), rules_(std::move(rules)) {}

std::optional<DriftVerdict> IngestPipeline::observe(const std::string& sensor_id, double value) {
  if (!options_.drift_detection) return std::nullopt;
  auto it = monitors_.find(sensor_id);
  if (it == monitors_.end()) {
    const auto* info = registry_->sensor(sensor_id);
    // A binary occupancy signal has no drifting regime, only states.
    if (!info || info->kind == model::SensorKind::presence) return std::nullopt;
    it = monitors_
             .emplace(sensor_id,
                      DriftMonitor(sensor_id, info->kind, options_.drift, options_.profile_samples))
             .first;
  }
  return it->second.push(value);
}

void IngestPipeline::handle(const RawRecord& raw, Timestamp now, BatchResult& out) {
  ++counters_.raw;
  auto result = normalize(raw, *registry_, rules_, now);
  std::optional<DriftVerdict> verdict;
  if (auto* m = std::get_if<Measure>(&result)) {
    ++counters_.measures;
    verdict = observe(m->sensor_id, m->value);
    out.measures.push_back(std::move(*m));
  } else {
    auto& e = std::get<ExceptionRecord>(result);
    ++counters_.exceptions;
    ++counters_.by_class[e.exception_class()];
    // Values violating only a per-sensor override are behaviour worth
    // tracking; values outside the kind's physical bounds are faults.
    if (e.exception_class() == ExceptionClass::out_of_range && e.sensor_id && e.canonical_value) {
      const auto* info = registry_->sensor(*e.sensor_id);
      const auto kind_it = info ? rules_.kind_bounds.find(info->kind) : rules_.kind_bounds.end();
      if (kind_it != rules_.kind_bounds.end() && kind_it->second.contains(*e.canonical_value))
        verdict = observe(*e.sensor_id, *e.canonical_value);
    }
    quarantine_.push_back(e);
    out.exceptions.push_back(std::move(e));
  }

  if (!verdict) return;
  out.verdicts.push_back(*verdict);
  if (!options_.auto_rule_update) return;

  rules_ = propose_rule_update(*verdict, rules_);
  ++counters_.rule_updates;
  out.updates.push_back(rules_.update_log.back());

  auto replay = reintegrate(std::move(quarantine_), *registry_, rules_, now);
  quarantine_ = std::move(replay.remaining);
  counters_.recovered += replay.recovered.size();
  for (auto& m : replay.recovered) out.recovered.push_back(std::move(m));
}

IngestPipeline::BatchResult IngestPipeline::process(std::span<const RawRecord> batch, Timestamp now) {
  std::lock_guard lock(mutex_);
  BatchResult out;
  for (const auto& raw : batch) handle(raw, now, out);
  return out;
}

IngestPipeline::BatchResult IngestPipeline::process_with_watermark(std::span<const RawRecord> batch) {
  std::lock_guard lock(mutex_);
  BatchResult out;
  for (const auto& raw : batch) {
    if (auto ts = parse_iso8601(raw.timestamp_text); ts && (!watermark_ || *ts > *watermark_))
      watermark_ = *ts;
    handle(raw, watermark_.value_or(Timestamp{}), out);
  }
  return out;
}

IntegrationRuleSet IngestPipeline::rules() const {
  std::lock_guard lock(mutex_);
  return rules_;
}

std::vector<ExceptionRecord> IngestPipeline::quarantine() const {
  std::lock_guard lock(mutex_);
  return quarantine_;
}

IngestCounters IngestPipeline::counters() const {
  std::lock_guard lock(mutex_);
  return counters_;
}

}  // namespace rider::ingest
