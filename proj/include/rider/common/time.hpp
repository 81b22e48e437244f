#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace rider {

/// Simulated and recorded instants are whole seconds, UTC.
using Timestamp = std::chrono::sys_seconds;
using Seconds = std::chrono::seconds;

/// Broken-down UTC time. weekday is 0 for Monday through 6 for Sunday.
struct CivilTime {
  int year = 1970;
  int month = 1;
  int day = 1;
  int weekday = 0;
  int hour = 0;
  int minute = 0;
  int second = 0;
};

/// Accepts `YYYY-MM-DDTHH:MM[:SS[.fff]]` with an optional `Z` or `±HH:MM`
/// offset (no offset means UTC). A space may replace the `T`. Fractional
/// seconds are truncated.
std::optional<Timestamp> parse_iso8601(std::string_view text);

/// Always `YYYY-MM-DDTHH:MM:SSZ`.
std::string format_iso8601(Timestamp t);

CivilTime to_civil(Timestamp t);

inline std::int64_t to_unix(Timestamp t) { return t.time_since_epoch().count(); }
inline Timestamp from_unix(std::int64_t s) { return Timestamp{Seconds{s}}; }

/// Seconds elapsed since 00:00 UTC of the same day.
inline int seconds_of_day(Timestamp t) {
  const auto day = std::chrono::floor<std::chrono::days>(t);
  return static_cast<int>((t - day).count());
}

/// 0 = Monday ... 6 = Sunday.
inline int weekday_index(Timestamp t) {
  const std::chrono::weekday wd{std::chrono::floor<std::chrono::days>(t)};
  return static_cast<int>(wd.iso_encoding()) - 1;
}

inline Timestamp floor_to(Timestamp t, Seconds bucket) {
  const auto s = to_unix(t);
  const auto b = bucket.count();
  auto q = s / b;
  if (s % b != 0 && s < 0) --q;
  return from_unix(q * b);
}

std::optional<int> parse_weekday(std::string_view name);
std::string_view weekday_name(int index);

}  // namespace rider
