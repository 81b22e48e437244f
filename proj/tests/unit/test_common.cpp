#include <doctest.h>

#include "rider/common/geometry.hpp"
#include "rider/common/time.hpp"

using namespace rider;

TEST_CASE("iso8601 parsing and formatting") {
  const auto t = parse_iso8601("2024-01-08T09:30:15Z");
  REQUIRE(t);
  CHECK(to_unix(*t) == 1704706215);
  CHECK(format_iso8601(*t) == "2024-01-08T09:30:15Z");
  CHECK(parse_iso8601("2024-01-08 09:30:15") == t);
  CHECK(parse_iso8601("2024-01-08T10:30:15+01:00") == t);
  CHECK(parse_iso8601("2024-01-08T09:30:15.999Z") == t);
  CHECK(to_unix(*parse_iso8601("2024-01-08T09:30")) == 1704706200);
  CHECK_FALSE(parse_iso8601("2024-13-01T00:00:00Z"));
  CHECK_FALSE(parse_iso8601("yesterday"));
  CHECK_FALSE(parse_iso8601("2024-01-08T25:00:00Z"));
}

TEST_CASE("civil fields and weekday indexing") {
  const auto t = *parse_iso8601("2024-01-07T23:59:59Z");  // a Sunday
  const auto c = to_civil(t);
  CHECK(c.year == 2024);
  CHECK(c.month == 1);
  CHECK(c.day == 7);
  CHECK(c.weekday == 6);
  CHECK(weekday_index(t + Seconds{1}) == 0);
  CHECK(seconds_of_day(t) == 86399);
  CHECK(floor_to(t, Seconds{3600}) == *parse_iso8601("2024-01-07T23:00:00Z"));
  CHECK(parse_weekday("Wed") == 2);
  CHECK(parse_weekday("6") == 6);
  CHECK(weekday_name(4) == "Fri");
}

TEST_CASE("box containment and overlap") {
  const Box a{{0, 0, 0}, {1, 1, 1}}, b{{1, 0, 0}, {2, 1, 1}}, c{{0.5, 0.5, 0.5}, {3, 3, 3}};
  CHECK(a.well_formed());
  CHECK_FALSE(Box{{0, 0, 0}, {0, 1, 1}}.well_formed());
  CHECK(a.contains({1, 1, 1}));
  CHECK_FALSE(a.overlaps(b));
  CHECK(a.overlaps(c));
}
