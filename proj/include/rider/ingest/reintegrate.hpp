#pragma once

#include <vector>

#include "rider/ingest/normalize.hpp"

namespace rider::ingest {

struct Reintegration {
  std::vector<Measure> recovered;             // original timestamps preserved
  std::vector<ExceptionRecord> reintegrated;  // the records behind `recovered`, disposition reintegrated
  std::vector<ExceptionRecord> remaining;     // still quarantined
};

/// Replays every quarantined record through normalize() against `rules`.
/// Staleness is judged at each record's first_seen instant, the moment it
/// originally arrived, so a replay later on does not age records out.
/// Records still failing stay quarantined; out-of-range records of a sensor
/// that now carries a bound override become rule-update candidates.
/// recovered + remaining is always a permutation of the input.
Reintegration reintegrate(std::vector<ExceptionRecord> quarantine, const model::ModelIndex& registry,
                          const IntegrationRuleSet& rules, Timestamp now);

}  // namespace rider::ingest
