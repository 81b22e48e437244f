#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "rider/model/index.hpp"
#include "rider/model/measure.hpp"

namespace rider::warehouse {

class WarehouseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Key = std::uint32_t;

struct SensorDimRow {
  Key key = 0;
  std::string sensor_id;
  model::SensorKind kind = model::SensorKind::temperature;
  std::string unit;
  bool is_virtual = false;
  bool is_actuator = false;
};

struct TimeDimRow {
  Key key = 0;
  Timestamp timestamp;
  int year = 0, month = 0, day = 0, weekday = 0, hour = 0, minute = 0;
};

struct LocationDimRow {
  Key key = 0;
  std::string building_id;
  std::string zone_id;
  Vec3 position;
};

struct FactRow {
  Key sensor_key = 0;
  Key time_key = 0;
  Key location_key = 0;
  double value = 0.0;
};

struct FactKey {
  Key sensor_key = 0;
  Key time_key = 0;
  friend bool operator==(const FactKey&, const FactKey&) = default;
};

enum class Aggregation { raw, hourly_mean, daily_min, daily_max };

std::string_view to_string(Aggregation a);
std::optional<Aggregation> parse_aggregation(std::string_view text);

/// Conjunction of the non-empty sets. All three empty is rejected.
struct Filter {
  std::set<std::string> sensor_ids;
  std::set<std::string> zone_ids;
  std::set<model::SensorKind> kinds;

  bool empty() const { return sensor_ids.empty() && zone_ids.empty() && kinds.empty(); }
};

struct Point {
  Timestamp t;
  double value = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

struct Series {
  std::string sensor_id;
  std::vector<Point> points;
  friend bool operator==(const Series&, const Series&) = default;
};

struct Absent {
  std::string missing_sensor;
};
struct EvaluationError {
  std::string message;
};
using VirtualOutcome = std::variant<Measure, Absent, EvaluationError>;

/// Bins values of one sensor by aggregation. Points must be in ascending time
/// order; means are summed in that order.
std::vector<Point> aggregate(const std::vector<Point>& points, Aggregation agg);

/// Single-node star schema: one fact table keyed by (sensor, time) and three
/// flat dimension tables. The sensor and location dimensions are fixed by the
/// model; the time dimension grows with inserts.
///
/// Readers share a lock and see a consistent snapshot of facts and
/// dimensions; inserts are serialized.
class Warehouse {
 public:
  explicit Warehouse(std::shared_ptr<const model::ModelIndex> index);
  ~Warehouse();

  Warehouse(const Warehouse&) = delete;
  Warehouse& operator=(const Warehouse&) = delete;

  const model::ModelIndex& index() const { return *index_; }
  std::shared_ptr<const model::ModelIndex> index_ptr() const { return index_; }

  /// Last write wins on a duplicate (sensor, timestamp).
  FactKey insert(const Measure& m);
  void insert_all(const std::vector<Measure>& ms);

  /// Removes every fact of one sensor; the time dimension is left alone.
  std::size_t erase_sensor_facts(const std::string& sensor_id);

  std::vector<Series> query(const Filter& filter, Timestamp from, Timestamp to, Aggregation agg) const;

  /// Latest fact of a sensor in (t - align, t].
  std::optional<Measure> latest_in(const std::string& sensor_id, Timestamp t, Seconds align) const;

  /// Raw facts of one sensor in [from, to), ascending.
  std::vector<Point> series(const std::string& sensor_id, Timestamp from, Timestamp to) const;

  /// Latest fact at or before t, any age.
  std::optional<Point> last_at_or_before(const std::string& sensor_id, Timestamp t) const;

  /// Resolves inputs to their latest fact in (t - align, t], evaluates, and
  /// stores the result at t. A missing input or a division by zero stores nothing.
  VirtualOutcome evaluate_virtual(const model::VirtualSensorDef& vs, Timestamp t, Seconds align);

  /// Every virtual sensor in dependency order at t.
  std::vector<VirtualOutcome> evaluate_virtuals(Timestamp t, Seconds align);

  std::size_t fact_count() const;
  std::uint64_t overwrites() const;
  std::uint64_t evaluation_errors() const;
  std::optional<std::pair<Timestamp, Timestamp>> time_span() const;

  std::vector<FactRow> facts() const;
  std::vector<SensorDimRow> sensor_dim() const;
  std::vector<TimeDimRow> time_dim() const;
  std::vector<LocationDimRow> location_dim() const;

  /// Tables, columns and references, for checking the star shape.
  nlohmann::json schema_description() const;

  /// Replays an existing fact log, then appends every later write to it.
  void attach_log(const std::filesystem::path& file);
  void flush_log();

 private:
  struct Cell {
    Key time_key;
    double value;
  };

  Key time_key_locked(Timestamp t);
  FactKey insert_locked(Key sensor_key, Timestamp t, double value, bool log);
  std::size_t erase_locked(Key sensor_key, bool log);
  void append_log(std::uint8_t op, Key sensor_key, std::int64_t t, double value);

  std::shared_ptr<const model::ModelIndex> index_;
  mutable std::shared_mutex mutex_;
  std::vector<SensorDimRow> sensors_;
  std::vector<LocationDimRow> locations_;
  std::map<std::string, Key> sensor_keys_;
  std::vector<TimeDimRow> times_;
  std::map<std::int64_t, Key> time_keys_;
  std::vector<std::map<std::int64_t, Cell>> facts_;  // per sensor key
  std::size_t fact_count_ = 0;
  std::uint64_t overwrites_ = 0;
  std::uint64_t evaluation_errors_ = 0;
  std::unique_ptr<std::ofstream> log_;
};

}  // namespace rider::warehouse
