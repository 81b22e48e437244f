#include "rider/ingest/reintegrate.hpp"

namespace rider::ingest {

Reintegration reintegrate(std::vector<ExceptionRecord> quarantine, const model::ModelIndex& registry,
                          const IntegrationRuleSet& rules, Timestamp now) {
  (void)now;
  Reintegration out;
  for (auto& record : quarantine) {
    auto replay = normalize(record.raw(), registry, rules, record.first_seen());
    if (auto* m = std::get_if<Measure>(&replay)) {
      record.transition(Disposition::reintegrated);
      out.recovered.push_back(std::move(*m));
      out.reintegrated.push_back(std::move(record));
      continue;
    }
    const auto& failed = std::get<ExceptionRecord>(replay);
    if (record.exception_class() == ExceptionClass::out_of_range &&
        failed.exception_class() == ExceptionClass::out_of_range && record.sensor_id &&
        rules.sensor_overrides.count(*record.sensor_id)) {
      record.transition(Disposition::rule_update_candidate);
    }
    out.remaining.push_back(std::move(record));
  }
  return out;
}

}  // namespace rider::ingest
