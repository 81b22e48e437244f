#include "rider/ingest/normalize.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>

namespace rider::ingest {
namespace {

constexpr std::array<std::pair<ExceptionClass, std::string_view>, 6> kClasses = {{
    {ExceptionClass::unknown_source, "unknown-source"},
    {ExceptionClass::unparseable_value, "unparseable-value"},
    {ExceptionClass::unit_mismatch, "unit-mismatch"},
    {ExceptionClass::out_of_range, "out-of-range"},
    {ExceptionClass::stale_timestamp, "stale-timestamp"},
    {ExceptionClass::drift_suspect, "drift-suspect"},
}};

constexpr std::array<std::pair<Disposition, std::string_view>, 3> kDispositions = {{
    {Disposition::dismissed, "dismissed"},
    {Disposition::reintegrated, "reintegrated"},
    {Disposition::rule_update_candidate, "rule-update-candidate"},
}};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::tolower(static_cast<unsigned char>(a[i])) != std::tolower(static_cast<unsigned char>(b[i])))
      return false;
  return true;
}

}  // namespace

std::string_view to_string(ExceptionClass c) {
  for (const auto& [k, name] : kClasses)
    if (k == c) return name;
  return "?";
}

std::optional<ExceptionClass> parse_exception_class(std::string_view text) {
  for (const auto& [k, name] : kClasses)
    if (name == text) return k;
  return std::nullopt;
}

std::string_view to_string(Disposition d) {
  for (const auto& [k, name] : kDispositions)
    if (k == d) return name;
  return "?";
}

std::optional<Disposition> parse_disposition(std::string_view text) {
  for (const auto& [k, name] : kDispositions)
    if (name == text) return k;
  return std::nullopt;
}

bool ExceptionRecord::transition(Disposition next) {
  const bool legal =
      (disposition_ == Disposition::dismissed &&
       (next == Disposition::reintegrated || next == Disposition::rule_update_candidate)) ||
      (disposition_ == Disposition::rule_update_candidate && next == Disposition::reintegrated);
  if (legal) disposition_ = next;
  return legal;
}

std::optional<double> parse_value(std::string_view text, model::SensorKind kind) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  if (kind == model::SensorKind::presence) {
    if (iequals(text, "true") || iequals(text, "on")) return 1.0;
    if (iequals(text, "false") || iequals(text, "off")) return 0.0;
  }
  if (text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

NormalizeResult normalize(const RawRecord& raw, const model::ModelIndex& registry,
                          const IntegrationRuleSet& rules, Timestamp now) {
  auto reject = [&](ExceptionClass cls) {
    ExceptionRecord e(raw, cls, now);
    e.rules_version = rules.version;
    return e;
  };

  const auto* sensor = registry.by_address(std::string(trim(raw.source_address)));
  if (!sensor) return reject(ExceptionClass::unknown_source);

  const auto ts = parse_iso8601(raw.timestamp_text);
  const auto value = parse_value(raw.value_text, sensor->kind);
  if (!ts || !value) {
    auto e = reject(ExceptionClass::unparseable_value);
    e.sensor_id = sensor->sensor_id;
    e.timestamp = ts;
    return e;
  }

  const auto conversion = rules.conversion(sensor->kind, std::string(trim(raw.unit_text)));
  if (!conversion) {
    auto e = reject(ExceptionClass::unit_mismatch);
    e.sensor_id = sensor->sensor_id;
    e.timestamp = ts;
    return e;
  }
  const double canonical = conversion->apply(*value);

  if (*ts > now || now - *ts > rules.max_staleness) {
    auto e = reject(ExceptionClass::stale_timestamp);
    e.sensor_id = sensor->sensor_id;
    e.timestamp = ts;
    e.canonical_value = canonical;
    return e;
  }

  if (!rules.bounds_for(sensor->sensor_id, sensor->kind).contains(canonical)) {
    auto e = reject(ExceptionClass::out_of_range);
    e.sensor_id = sensor->sensor_id;
    e.timestamp = ts;
    e.canonical_value = canonical;
    return e;
  }

  return Measure{sensor->sensor_id, *ts, canonical};
}

}  // namespace rider::ingest
