#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rider/common/time.hpp"
#include "rider/ingest/drift.hpp"
#include "rider/model/types.hpp"

namespace rider::ingest {

struct Bounds {
  double lo = 0.0;
  double hi = 0.0;

  double half_width() const { return (hi - lo) / 2.0; }
  double center() const { return (lo + hi) / 2.0; }
  bool contains(double v) const { return v >= lo && v <= hi; }

  friend bool operator==(const Bounds&, const Bounds&) = default;
};

/// canonical = (raw - subtract) * multiply / divide + add
struct UnitConversion {
  double subtract = 0.0;
  double multiply = 1.0;
  double divide = 1.0;
  double add = 0.0;

  double apply(double raw) const { return (raw - subtract) * multiply / divide + add; }
};

/// One automatic per-sensor bound change, with the verdict that caused it.
struct RuleUpdate {
  std::uint64_t version = 0;  // rule-set version produced by this update
  std::string sensor_id;
  std::optional<Bounds> previous_override;
  Bounds updated;
  DriftVerdict verdict;
};

class RuleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Integration rules applied a priori to every incoming record.
struct IntegrationRuleSet {
  std::string id = "default";
  std::map<model::SensorKind, Bounds> kind_bounds;
  Seconds max_staleness{900};
  std::map<model::SensorKind, std::map<std::string, UnitConversion>> unit_aliases;
  std::map<std::string, Bounds> sensor_overrides;
  std::uint64_t version = 0;
  std::vector<RuleUpdate> update_log;

  /// Override when present, otherwise the kind's bounds.
  Bounds bounds_for(const std::string& sensor_id, model::SensorKind kind) const;
  std::optional<UnitConversion> conversion(model::SensorKind kind, const std::string& unit_text) const;

  /// Empty when lo < hi everywhere and max_staleness > 0.
  std::vector<std::string> problems() const;

  /// Undoes the most recent update in the log; returns false when the log is empty.
  bool revert_last_update();

  static IntegrationRuleSet defaults();
};

IntegrationRuleSet rules_from_json(const nlohmann::json& j);
nlohmann::json to_json(const IntegrationRuleSet& rules);
IntegrationRuleSet load_rules(const std::filesystem::path& file);
nlohmann::json to_json(const DriftVerdict& v);

/// Recenters the sensor's bounds on the drifted window mean, keeping the
/// half-width of the bounds in force. Throws RuleError when the verdict is
/// not drift.
IntegrationRuleSet propose_rule_update(const DriftVerdict& verdict, const IntegrationRuleSet& rules);

}  // namespace rider::ingest
