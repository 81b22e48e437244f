#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "rider/model/types.hpp"

namespace rider::model {

struct Violation {
  std::string path;     // JSON-path-like location, e.g. $.buildings[0].sensors[2]
  std::string code;     // stable machine-readable identifier, e.g. position-outside-zone
  std::string message;

  friend bool operator==(const Violation&, const Violation&) = default;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  std::size_t count(std::string_view code) const;
  std::string to_text() const;

  friend bool operator==(const ValidationReport&, const ValidationReport&) = default;
};

/// Reports every violated invariant; never stops at the first.
///
/// Codes: no-buildings, empty-id, duplicate-id, degenerate-box, zone-overlap,
/// unknown-schedule, setpoint-policy, unit-mismatch, position-outside-zone,
/// valve-not-actuator, unknown-zone, unknown-sensor-ref, bad-expression,
/// virtual-cycle, schedule-interval, schedule-overlap.
ValidationReport validate_model(const SiteModel& model);

class VirtualCycleError : public std::runtime_error {
 public:
  explicit VirtualCycleError(std::vector<std::string> members);
  const std::vector<std::string>& members() const { return members_; }

 private:
  std::vector<std::string> members_;
};

/// Virtual sensor ids ordered so that every virtual dependency precedes its
/// dependents. Ties keep declaration order. Throws VirtualCycleError naming
/// the members of a dependency cycle.
std::vector<std::string> virtual_order(const SiteModel& model);

/// Strongly connected components of the virtual dependency graph that form
/// cycles (size > 1 or a self reference), members sorted.
std::vector<std::vector<std::string>> virtual_cycles(const SiteModel& model);

}  // namespace rider::model
