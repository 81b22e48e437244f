#include "rider/warehouse/warehouse.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <mutex>

#include "rider/model/expression.hpp"

namespace rider::warehouse {

using nlohmann::json;

namespace {

constexpr std::array<char, 8> kLogMagic = {'R', 'I', 'D', 'E', 'R', 'F', 'C', 'T'};
constexpr std::uint16_t kLogVersion = 1;
constexpr std::uint8_t kOpPut = 0;
constexpr std::uint8_t kOpErase = 1;
constexpr std::size_t kRecordSize = 1 + 4 + 8 + 8;

template <typename T>
void put_le(char* out, T v) {
  std::uint64_t bits = 0;
  std::memcpy(&bits, &v, sizeof(T));
  for (std::size_t i = 0; i < sizeof(T); ++i) out[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
}

template <typename T>
T get_le(const char* in) {
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i)
    bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[i])) << (8 * i);
  T v;
  std::memcpy(&v, &bits, sizeof(T));
  return v;
}

Seconds bucket_of(Aggregation agg) {
  return agg == Aggregation::hourly_mean ? Seconds{3600} : Seconds{86400};
}

}  // namespace

std::string_view to_string(Aggregation a) {
  switch (a) {
    case Aggregation::raw: return "raw";
    case Aggregation::hourly_mean: return "hourly-mean";
    case Aggregation::daily_min: return "daily-min";
    case Aggregation::daily_max: return "daily-max";
  }
  return "raw";
}

std::optional<Aggregation> parse_aggregation(std::string_view text) {
  for (auto a : {Aggregation::raw, Aggregation::hourly_mean, Aggregation::daily_min, Aggregation::daily_max})
    if (to_string(a) == text) return a;
  return std::nullopt;
}

std::vector<Point> aggregate(const std::vector<Point>& points, Aggregation agg) {
  if (agg == Aggregation::raw) return points;
  std::vector<Point> out;
  const Seconds bucket = bucket_of(agg);
  std::size_t i = 0;
  while (i < points.size()) {
    const Timestamp bin = floor_to(points[i].t, bucket);
    double acc = points[i].value;
    std::size_t n = 1;
    ++i;
    for (; i < points.size() && floor_to(points[i].t, bucket) == bin; ++i, ++n) {
      const double v = points[i].value;
      if (agg == Aggregation::hourly_mean) acc += v;
      else if (agg == Aggregation::daily_min) acc = std::min(acc, v);
      else acc = std::max(acc, v);
    }
    if (agg == Aggregation::hourly_mean) acc /= static_cast<double>(n);
    out.push_back({bin, acc});
  }
  return out;
}

Warehouse::Warehouse(std::shared_ptr<const model::ModelIndex> index) : index_(std::move(index)) {
  for (const auto& s : index_->sensors()) {
    const Key key = static_cast<Key>(sensors_.size());
    std::string unit(model::canonical_unit(s.kind));
    sensors_.push_back({key, s.sensor_id, s.kind, unit, s.is_virtual, s.is_actuator});
    locations_.push_back({key, s.building_id, s.zone_id, s.position});
    sensor_keys_[s.sensor_id] = key;
  }
  facts_.resize(sensors_.size());
}

Warehouse::~Warehouse() {
  if (log_) log_->flush();
}

Key Warehouse::time_key_locked(Timestamp t) {
  const auto unix_s = to_unix(t);
  auto it = time_keys_.find(unix_s);
  if (it != time_keys_.end()) return it->second;
  const Key key = static_cast<Key>(times_.size());
  const auto c = to_civil(t);
  times_.push_back({key, t, c.year, c.month, c.day, c.weekday, c.hour, c.minute});
  time_keys_.emplace(unix_s, key);
  return key;
}

FactKey Warehouse::insert_locked(Key sensor_key, Timestamp t, double value, bool log) {
  const Key tk = time_key_locked(t);
  auto [it, fresh] = facts_[sensor_key].try_emplace(to_unix(t), Cell{tk, value});
  if (fresh) {
    ++fact_count_;
  } else {
    it->second.value = value;
    ++overwrites_;
  }
  if (log) append_log(kOpPut, sensor_key, to_unix(t), value);
  return {sensor_key, tk};
}

FactKey Warehouse::insert(const Measure& m) {
  std::unique_lock lock(mutex_);
  auto it = sensor_keys_.find(m.sensor_id);
  if (it == sensor_keys_.end()) throw WarehouseError("unknown sensor '" + m.sensor_id + "'");
  return insert_locked(it->second, m.timestamp, m.value, true);
}

void Warehouse::insert_all(const std::vector<Measure>& ms) {
  std::unique_lock lock(mutex_);
  for (const auto& m : ms)
    if (!sensor_keys_.count(m.sensor_id)) throw WarehouseError("unknown sensor '" + m.sensor_id + "'");
  for (const auto& m : ms) insert_locked(sensor_keys_.at(m.sensor_id), m.timestamp, m.value, true);
}

std::size_t Warehouse::erase_locked(Key sensor_key, bool log) {
  const std::size_t n = facts_[sensor_key].size();
  facts_[sensor_key].clear();
  fact_count_ -= n;
  if (log) append_log(kOpErase, sensor_key, 0, 0.0);
  return n;
}

std::size_t Warehouse::erase_sensor_facts(const std::string& sensor_id) {
  std::unique_lock lock(mutex_);
  auto it = sensor_keys_.find(sensor_id);
  if (it == sensor_keys_.end()) throw WarehouseError("unknown sensor '" + sensor_id + "'");
  return erase_locked(it->second, true);
}

std::vector<Series> Warehouse::query(const Filter& filter, Timestamp from, Timestamp to, Aggregation agg) const {
  if (filter.empty()) throw WarehouseError("query filter is empty; name sensors, zones or kinds");
  if (!(from < to)) throw WarehouseError("query range must satisfy from < to");
  std::shared_lock lock(mutex_);
  std::vector<Series> out;
  for (const auto& [sensor_id, key] : sensor_keys_) {
    const auto& s = sensors_[key];
    if (!filter.sensor_ids.empty() && !filter.sensor_ids.count(sensor_id)) continue;
    if (!filter.zone_ids.empty() && !filter.zone_ids.count(locations_[key].zone_id)) continue;
    if (!filter.kinds.empty() && !filter.kinds.count(s.kind)) continue;
    Series series{sensor_id, {}};
    const auto& cells = facts_[key];
    for (auto it = cells.lower_bound(to_unix(from)); it != cells.end() && it->first < to_unix(to); ++it)
      series.points.push_back({from_unix(it->first), it->second.value});
    series.points = aggregate(series.points, agg);
    out.push_back(std::move(series));
  }
  return out;
}

std::optional<Measure> Warehouse::latest_in(const std::string& sensor_id, Timestamp t, Seconds align) const {
  std::shared_lock lock(mutex_);
  auto key = sensor_keys_.find(sensor_id);
  if (key == sensor_keys_.end()) return std::nullopt;
  const auto& cells = facts_[key->second];
  auto it = cells.upper_bound(to_unix(t));
  if (it == cells.begin()) return std::nullopt;
  --it;
  if (it->first <= to_unix(t - align)) return std::nullopt;
  return Measure{sensor_id, from_unix(it->first), it->second.value};
}

std::optional<Point> Warehouse::last_at_or_before(const std::string& sensor_id, Timestamp t) const {
  std::shared_lock lock(mutex_);
  auto key = sensor_keys_.find(sensor_id);
  if (key == sensor_keys_.end()) return std::nullopt;
  const auto& cells = facts_[key->second];
  auto it = cells.upper_bound(to_unix(t));
  if (it == cells.begin()) return std::nullopt;
  --it;
  return Point{from_unix(it->first), it->second.value};
}

std::vector<Point> Warehouse::series(const std::string& sensor_id, Timestamp from, Timestamp to) const {
  std::shared_lock lock(mutex_);
  std::vector<Point> out;
  auto key = sensor_keys_.find(sensor_id);
  if (key == sensor_keys_.end()) return out;
  const auto& cells = facts_[key->second];
  for (auto it = cells.lower_bound(to_unix(from)); it != cells.end() && it->first < to_unix(to); ++it)
    out.push_back({from_unix(it->first), it->second.value});
  return out;
}

VirtualOutcome Warehouse::evaluate_virtual(const model::VirtualSensorDef& vs, Timestamp t, Seconds align) {
  std::unique_lock lock(mutex_);
  auto target = sensor_keys_.find(vs.sensor_id);
  if (target == sensor_keys_.end()) throw WarehouseError("unknown virtual sensor '" + vs.sensor_id + "'");
  const auto lookup = [&](const std::string& id) -> std::optional<double> {
    auto key = sensor_keys_.find(id);
    if (key == sensor_keys_.end()) return std::nullopt;
    const auto& cells = facts_[key->second];
    auto it = cells.upper_bound(to_unix(t));
    if (it == cells.begin()) return std::nullopt;
    --it;
    if (it->first <= to_unix(t - align)) return std::nullopt;
    return it->second.value;
  };
  const auto outcome = model::evaluate(vs.expression, lookup);
  if (const auto* missing = std::get_if<model::MissingInput>(&outcome)) return Absent{missing->sensor_id};
  if (std::holds_alternative<model::DivisionByZero>(outcome)) {
    ++evaluation_errors_;
    return EvaluationError{"division by zero evaluating '" + vs.sensor_id + "'"};
  }
  const double value = std::get<double>(outcome);
  insert_locked(target->second, t, value, true);
  return Measure{vs.sensor_id, t, value};
}

std::vector<VirtualOutcome> Warehouse::evaluate_virtuals(Timestamp t, Seconds align) {
  std::vector<VirtualOutcome> out;
  for (const auto& id : index_->virtual_order()) out.push_back(evaluate_virtual(*index_->virtual_sensor(id), t, align));
  return out;
}

std::size_t Warehouse::fact_count() const {
  std::shared_lock lock(mutex_);
  return fact_count_;
}

std::uint64_t Warehouse::overwrites() const {
  std::shared_lock lock(mutex_);
  return overwrites_;
}

std::uint64_t Warehouse::evaluation_errors() const {
  std::shared_lock lock(mutex_);
  return evaluation_errors_;
}

std::optional<std::pair<Timestamp, Timestamp>> Warehouse::time_span() const {
  std::shared_lock lock(mutex_);
  std::optional<std::pair<Timestamp, Timestamp>> span;
  for (const auto& cells : facts_) {
    if (cells.empty()) continue;
    const auto lo = from_unix(cells.begin()->first);
    const auto hi = from_unix(cells.rbegin()->first);
    if (!span) span = {lo, hi};
    span->first = std::min(span->first, lo);
    span->second = std::max(span->second, hi);
  }
  return span;
}

std::vector<FactRow> Warehouse::facts() const {
  std::shared_lock lock(mutex_);
  std::vector<FactRow> out;
  out.reserve(fact_count_);
  for (Key k = 0; k < facts_.size(); ++k)
    for (const auto& [t, cell] : facts_[k]) out.push_back({k, cell.time_key, k, cell.value});
  return out;
}

std::vector<SensorDimRow> Warehouse::sensor_dim() const {
  std::shared_lock lock(mutex_);
  return sensors_;
}

std::vector<TimeDimRow> Warehouse::time_dim() const {
  std::shared_lock lock(mutex_);
  return times_;
}

std::vector<LocationDimRow> Warehouse::location_dim() const {
  std::shared_lock lock(mutex_);
  return locations_;
}

json Warehouse::schema_description() const {
  return {
      {"fact",
       {{"columns", {"sensor_key", "time_key", "location_key", "value"}},
        {"references", {{{"column", "sensor_key"}, {"table", "sensor_dim"}},
                        {{"column", "time_key"}, {"table", "time_dim"}},
                        {{"column", "location_key"}, {"table", "location_dim"}}}},
        {"unique", {"sensor_key", "time_key"}}}},
      {"sensor_dim",
       {{"columns", {"key", "sensor_id", "kind", "unit", "is_virtual", "is_actuator"}},
        {"references", json::array()}}},
      {"time_dim",
       {{"columns", {"key", "timestamp", "year", "month", "day", "weekday", "hour", "minute"}},
        {"references", json::array()}}},
      {"location_dim",
       {{"columns", {"key", "building_id", "zone_id", "x", "y", "z"}}, {"references", json::array()}}},
  };
}

void Warehouse::append_log(std::uint8_t op, Key sensor_key, std::int64_t t, double value) {
  if (!log_) return;
  char rec[kRecordSize];
  rec[0] = static_cast<char>(op);
  put_le<std::uint32_t>(rec + 1, sensor_key);
  put_le<std::int64_t>(rec + 5, t);
  put_le<double>(rec + 13, value);
  log_->write(rec, kRecordSize);
  if (!*log_) throw WarehouseError("fact log write failed");
}

void Warehouse::attach_log(const std::filesystem::path& file) {
  std::unique_lock lock(mutex_);
  const bool exists = std::filesystem::exists(file);
  if (exists) {
    std::ifstream in(file, std::ios::binary);
    char header[kLogMagic.size() + 2];
    if (!in.read(header, sizeof header) || !std::equal(kLogMagic.begin(), kLogMagic.end(), header))
      throw WarehouseError("fact log " + file.string() + " has no valid header");
    if (get_le<std::uint16_t>(header + kLogMagic.size()) != kLogVersion)
      throw WarehouseError("fact log " + file.string() + " has an unsupported version");
    char rec[kRecordSize];
    while (in.read(rec, kRecordSize)) {
      const auto op = static_cast<std::uint8_t>(rec[0]);
      const auto key = get_le<std::uint32_t>(rec + 1);
      if (key >= facts_.size()) throw WarehouseError("fact log references unknown sensor key");
      if (op == kOpPut) insert_locked(key, from_unix(get_le<std::int64_t>(rec + 5)), get_le<double>(rec + 13), false);
      else if (op == kOpErase) erase_locked(key, false);
      else throw WarehouseError("fact log has an unknown record type");
    }
    if (in.gcount() != 0) throw WarehouseError("fact log " + file.string() + " ends in a torn record");
  }
  log_ = std::make_unique<std::ofstream>(file, std::ios::binary | std::ios::app);
  if (!*log_) throw WarehouseError("cannot open fact log " + file.string());
  if (!exists) {
    char header[kLogMagic.size() + 2];
    std::copy(kLogMagic.begin(), kLogMagic.end(), header);
    put_le<std::uint16_t>(header + kLogMagic.size(), kLogVersion);
    log_->write(header, sizeof header);
  }
}

void Warehouse::flush_log() {
  std::unique_lock lock(mutex_);
  if (log_) {
    log_->flush();
    if (!*log_) throw WarehouseError("fact log flush failed");
  }
}

}  // namespace rider::warehouse
