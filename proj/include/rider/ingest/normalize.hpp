#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "rider/common/time.hpp"
#include "rider/ingest/raw_record.hpp"
#include "rider/ingest/rules.hpp"
#include "rider/model/index.hpp"
#include "rider/model/measure.hpp"

namespace rider::ingest {

enum class ExceptionClass {
  unknown_source,
  unparseable_value,
  unit_mismatch,
  out_of_range,
  stale_timestamp,
  drift_suspect,
};

enum class Disposition { dismissed, reintegrated, rule_update_candidate };

std::string_view to_string(ExceptionClass c);
std::optional<ExceptionClass> parse_exception_class(std::string_view text);
std::string_view to_string(Disposition d);
std::optional<Disposition> parse_disposition(std::string_view text);

/// A raw record that failed the integration rules. Its class is fixed at
/// creation; its disposition only moves dismissed -> reintegrated,
/// dismissed -> rule-update-candidate, or rule-update-candidate -> reintegrated.
class ExceptionRecord {
 public:
  ExceptionRecord(RawRecord raw, ExceptionClass cls, Timestamp first_seen)
      : raw_(std::move(raw)), class_(cls), first_seen_(first_seen) {}

  const RawRecord& raw() const { return raw_; }
  ExceptionClass exception_class() const { return class_; }
  Timestamp first_seen() const { return first_seen_; }
  Disposition disposition() const { return disposition_; }

  /// Applies a legal transition; returns false and leaves the record untouched otherwise.
  bool transition(Disposition next);

  // Context filled in as far as classification got before failing.
  std::optional<std::string> sensor_id;
  std::optional<Timestamp> timestamp;
  std::optional<double> canonical_value;
  std::uint64_t rules_version = 0;

 private:
  RawRecord raw_;
  ExceptionClass class_;
  Timestamp first_seen_;
  Disposition disposition_ = Disposition::dismissed;
};

using NormalizeResult = std::variant<Measure, ExceptionRecord>;

/// Turns a raw record into a canonical-unit measure, or classifies why not.
/// Checks run in a fixed order and the first failure wins:
/// unknown-source, unparseable-value, unit-mismatch, stale-timestamp, out-of-range.
/// A timestamp later than `now` counts as stale; an unparseable timestamp
/// counts as unparseable-value.
NormalizeResult normalize(const RawRecord& raw, const model::ModelIndex& registry,
                          const IntegrationRuleSet& rules, Timestamp now);

/// Numeric text, plus true/false/on/off for presence.
std::optional<double> parse_value(std::string_view text, model::SensorKind kind);

}  // namespace rider::ingest
