#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "rider/ingest/drift.hpp"
#include "rider/ingest/normalize.hpp"
#include "rider/ingest/pipeline.hpp"
#include "rider/ingest/raw_io.hpp"
#include "rider/ingest/reintegrate.hpp"
#include "rider/ingest/rules.hpp"
#include "support.hpp"

using namespace rider;
using namespace rider::ingest;
using model::SensorKind;

namespace {

std::shared_ptr<const model::ModelIndex> registry() {
  model::SiteModel m;
  m.site_id = "s";
  model::Building b;
  b.building_id = "b";
  b.zones.push_back({"z", "z", {{0, 0, 0}, {10, 10, 3}}, std::nullopt, {}});
  b.sensors.push_back({"t-101", "AI_12", SensorKind::temperature, "degC", {1, 1, 1}, "z", false});
  b.sensors.push_back({"p-101", "BI_1", SensorKind::presence, "boolean", {1, 1, 1}, "z", false});
  b.sensors.push_back({"v-101", "AO_1", SensorKind::valve, "fraction", {1, 1, 1}, "z", true});
  m.buildings.push_back(b);
  return std::make_shared<model::ModelIndex>(m);
}

const Timestamp kNow = test::ts("2024-01-08T12:00:00Z");

RawRecord rec(std::string addr, std::string value, std::string unit, std::string t = "2024-01-08T11:59:00Z") {
  return {std::move(addr), std::move(t), std::move(value), std::move(unit)};
}

ExceptionClass cls(const NormalizeResult& r) { return std::get<ExceptionRecord>(r).exception_class(); }

// Offline window statistics: mean of each back-to-back window aligned to the end.
std::vector<double> window_means(const std::vector<double>& xs, std::size_t w) {
  std::vector<double> out;
  for (std::size_t end = xs.size(); end >= w; end -= w) {
    double s = 0;
    for (std::size_t i = end - w; i < end; ++i) s += xs[i];
    out.insert(out.begin(), s / w);
    if (end == w) break;
  }
  return out;
}

}  // namespace

TEST_CASE("normalize converts units and passes canonical values through") {
  const auto reg = registry();
  const auto rules = IntegrationRuleSet::defaults();
  const auto a = normalize(rec("AI_12", "21.5", "C"), *reg, rules, kNow);
  REQUIRE(std::holds_alternative<Measure>(a));
  CHECK(std::get<Measure>(a) == Measure{"t-101", test::ts("2024-01-08T11:59:00Z"), 21.5});
  const auto f = normalize(rec("AI_12", "68.0", "F"), *reg, rules, kNow);
  CHECK(std::get<Measure>(f).value == 20.0);
  CHECK(std::get<Measure>(normalize(rec("BI_1", "on", ""), *reg, rules, kNow)).value == 1.0);
  CHECK(std::get<Measure>(normalize(rec("AO_1", "40", "%"), *reg, rules, kNow)).value == 0.4);
}

TEST_CASE("normalize classifies failures in a fixed order") {
  const auto reg = registry();
  auto rules = IntegrationRuleSet::defaults();
  CHECK(cls(normalize(rec("XX_9", "21", "C"), *reg, rules, kNow)) == ExceptionClass::unknown_source);
  CHECK(cls(normalize(rec("XX_9", "-321", "C"), *reg, rules, kNow)) == ExceptionClass::unknown_source);
  CHECK(cls(normalize(rec("AI_12", "warm", "C"), *reg, rules, kNow)) == ExceptionClass::unparseable_value);
  CHECK(cls(normalize(rec("AI_12", "21", "C", "noon"), *reg, rules, kNow)) == ExceptionClass::unparseable_value);
  CHECK(cls(normalize(rec("AI_12", "21", "furlong"), *reg, rules, kNow)) == ExceptionClass::unit_mismatch);
  CHECK(cls(normalize(rec("AI_12", "-321", "C", "2024-01-08T10:00:00Z"), *reg, rules, kNow)) ==
        ExceptionClass::stale_timestamp);
  CHECK(cls(normalize(rec("AI_12", "21", "C", "2024-01-08T12:00:01Z"), *reg, rules, kNow)) ==
        ExceptionClass::stale_timestamp);
  const auto out = normalize(rec("AI_12", "-321", "C"), *reg, rules, kNow);
  CHECK(cls(out) == ExceptionClass::out_of_range);
  CHECK(std::get<ExceptionRecord>(out).canonical_value == -321.0);
  CHECK(std::get<ExceptionRecord>(out).disposition() == Disposition::dismissed);
}

TEST_CASE("exception dispositions only move forward") {
  ExceptionRecord e(rec("AI_12", "1", "C"), ExceptionClass::out_of_range, kNow);
  CHECK_FALSE(e.transition(Disposition::dismissed));
  CHECK(e.transition(Disposition::rule_update_candidate));
  CHECK_FALSE(e.transition(Disposition::dismissed));
  CHECK(e.transition(Disposition::reintegrated));
  CHECK_FALSE(e.transition(Disposition::rule_update_candidate));
  ExceptionRecord d(rec("AI_12", "1", "C"), ExceptionClass::out_of_range, kNow);
  CHECK(d.transition(Disposition::reintegrated));
}

TEST_CASE("totality over a mixed random stream") {
  const auto reg = registry();
  const auto rules = IntegrationRuleSet::defaults();
  std::mt19937_64 rng(3);
  const std::vector<std::string> addrs{"AI_12", "BI_1", "AO_1", "ZZ"};
  const std::vector<std::string> values{"21", "x", "-500", "0", "1", "99"};
  const std::vector<std::string> units{"C", "F", "", "%", "bogus"};
  std::size_t measures = 0, exceptions = 0;
  for (int i = 0; i < 2000; ++i) {
    const auto r = normalize(rec(addrs[rng() % 4], values[rng() % 6], units[rng() % 5]), *reg, rules, kNow);
    measures += std::holds_alternative<Measure>(r);
    exceptions += std::holds_alternative<ExceptionRecord>(r);
  }
  CHECK(measures + exceptions == 2000);
  CHECK(measures > 0);
  CHECK(exceptions > 0);
}

TEST_CASE("drift: stationary noise does not fire") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(20.0, 0.1);
  std::vector<double> history(600), recent(180);
  for (auto& v : history) v = noise(rng);
  for (auto& v : recent) v = noise(rng);
  const auto profile = compute_profile(history);
  const auto result = detect_drift("t", SensorKind::temperature, recent, profile, {});
  const auto& v = std::get<DriftVerdict>(result);
  CHECK(v.verdict == DriftState::none);
  // Oracle: recompute each window mean and the predicate offline.
  const auto means = window_means(recent, 60);
  CHECK(v.window_mean == doctest::Approx(means.back()).epsilon(1e-12));
  for (double m : means) CHECK(std::abs(m - profile.mean) <= 3 * profile.sigma);
}

TEST_CASE("drift: a sustained +5 sigma step fires after three windows") {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> noise(0.0, 0.1);
  std::vector<double> history(600);
  for (auto& v : history) v = 20.0 + noise(rng);
  const auto profile = compute_profile(history);
  std::vector<double> recent(180);
  for (auto& v : recent) v = 20.5 + noise(rng);
  const auto v = std::get<DriftVerdict>(detect_drift("t", SensorKind::temperature, recent, profile, {}));
  CHECK(v.verdict == DriftState::drift);
  CHECK(v.consecutive_windows == 3);
  const auto means = window_means(recent, 60);
  for (double m : means) CHECK(std::abs(m - profile.mean) > 3 * profile.sigma);

  // Two deviating windows are not enough.
  const std::vector<double> shorter(recent.begin() + 60, recent.end());
  std::vector<double> mixed(history.end() - 60, history.end());
  mixed.insert(mixed.end(), shorter.begin(), shorter.end());
  CHECK(std::get<DriftVerdict>(detect_drift("t", SensorKind::temperature, mixed, profile, {})).verdict ==
        DriftState::none);
}

TEST_CASE("drift: a single spike leaves the window mean in band") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> noise(20.0, 0.1);
  std::vector<double> history(600), recent(180);
  for (auto& v : history) v = noise(rng);
  for (auto& v : recent) v = noise(rng);
  const auto profile = compute_profile(history);
  recent[170] += 10 * profile.sigma;
  const auto means = window_means(recent, 60);
  CHECK(std::abs(means.back() - profile.mean) < 3 * profile.sigma);
  CHECK(std::get<DriftVerdict>(detect_drift("t", SensorKind::temperature, recent, profile, {})).verdict ==
        DriftState::none);
}

TEST_CASE("drift: insufficient history is explicit") {
  const std::vector<double> few(100, 20.0);
  const auto p = compute_profile(few);
  const auto r = detect_drift("t", SensorKind::temperature, few, p, {});
  REQUIRE(std::holds_alternative<NotEnoughData>(r));
  CHECK(std::get<NotEnoughData>(r).need == 600);
}

TEST_CASE("the deviation predicate never fires within k sigma") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const Profile p{20.0, std::abs(u(rng)) + 0.01, 600};
    const double m = p.mean + u(rng) * 3 * p.sigma;
    CHECK_FALSE(window_deviates(m, p, 3.0));
  }
}

TEST_CASE("rule updates recenter and keep the half-width") {
  auto rules = IntegrationRuleSet::defaults();
  rules.sensor_overrides["t-101"] = {15, 25};
  DriftVerdict v{"t-101", SensorKind::temperature, 25.0, 20.0, 1.0, 3, DriftState::drift};
  const auto once = propose_rule_update(v, rules);
  CHECK(once.sensor_overrides.at("t-101") == Bounds{20, 30});
  CHECK(once.version == rules.version + 1);
  CHECK(once.update_log.size() == 1);
  CHECK(once.update_log[0].previous_override == Bounds{15, 25});
  CHECK(once.kind_bounds == rules.kind_bounds);

  v.window_mean = 28.5;
  const auto twice = propose_rule_update(v, once);
  // By hand: half-width 5 around 28.5.
  CHECK(twice.sensor_overrides.at("t-101") == Bounds{23.5, 33.5});
  auto reverted = twice;
  CHECK(reverted.revert_last_update());
  CHECK(reverted.sensor_overrides.at("t-101") == Bounds{20, 30});

  v.verdict = DriftState::none;
  CHECK_THROWS_AS(propose_rule_update(v, rules), RuleError);
}

TEST_CASE("reintegration recovers values the new bounds accept") {
  const auto reg = registry();
  auto old_rules = IntegrationRuleSet::defaults();
  old_rules.sensor_overrides["t-101"] = {15, 25};
  std::vector<ExceptionRecord> q;
  for (const auto& raw : {rec("AI_12", "27", "C"), rec("ZZ", "27", "C"), rec("AI_12", "45", "C")})
    q.push_back(std::get<ExceptionRecord>(normalize(raw, *reg, old_rules, kNow)));
  CHECK(q[0].exception_class() == ExceptionClass::out_of_range);

  auto new_rules = old_rules;
  new_rules.sensor_overrides["t-101"] = {20, 30};
  const auto later = kNow + Seconds{7200};  // replay judges staleness at first arrival
  const auto r = reintegrate(q, *reg, new_rules, later);
  REQUIRE(r.recovered.size() == 1);
  CHECK(r.recovered[0] == Measure{"t-101", test::ts("2024-01-08T11:59:00Z"), 27.0});
  CHECK(r.reintegrated[0].disposition() == Disposition::reintegrated);
  REQUIRE(r.remaining.size() == 2);
  CHECK(r.remaining[0].exception_class() == ExceptionClass::unknown_source);
  CHECK(r.remaining[1].disposition() == Disposition::rule_update_candidate);
  CHECK(r.recovered.size() + r.remaining.size() == q.size());

  const auto empty = reintegrate({}, *reg, new_rules, kNow);
  CHECK(empty.recovered.empty());
  CHECK(empty.remaining.empty());
}

TEST_CASE("raw CSV and quarantine JSONL round-trip") {
  std::istringstream in("timestamp,source_address,value,unit\n2024-01-08T11:59:00Z,AI_12,21.5,C\nbroken\n");
  const auto records = read_raw_csv(in);
  REQUIRE(records.size() == 2);
  CHECK(records[0].source_address == "AI_12");
  CHECK(records[0].value_text == "21.5");
  std::ostringstream out;
  write_raw_csv(out, records);
  std::istringstream again(out.str());
  const auto back = read_raw_csv(again);
  REQUIRE(back.size() == 2);
  CHECK(back[0].timestamp_text == records[0].timestamp_text);

  const auto reg = registry();
  auto e = std::get<ExceptionRecord>(normalize(rec("AI_12", "99", "C"), *reg, IntegrationRuleSet::defaults(), kNow));
  e.transition(Disposition::rule_update_candidate);
  std::ostringstream q;
  write_quarantine(q, {e});
  std::istringstream qi(q.str());
  const auto loaded = read_quarantine(qi);
  REQUIRE(loaded.size() == 1);
  CHECK(loaded[0].exception_class() == ExceptionClass::out_of_range);
  CHECK(loaded[0].disposition() == Disposition::rule_update_candidate);
  CHECK(loaded[0].raw().value_text == "99");
  CHECK(loaded[0].first_seen() == kNow);
}

TEST_CASE("pipeline: drift triggers a rule update and recovers the quarantine") {
  const auto reg = registry();
  auto rules = IntegrationRuleSet::defaults();
  rules.sensor_overrides["t-101"] = {15, 25};
  IngestPipeline pipe(reg, rules);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<RawRecord> batch;
  Timestamp t = test::ts("2024-01-08T00:00:00Z");
  for (int i = 0; i < 600 + 300; ++i, t += Seconds{60}) {
    const double mean = i < 600 ? 20.0 : 25.0;
    batch.push_back({"AI_12", format_iso8601(t), std::to_string(mean + noise(rng)), "C"});
  }
  const auto out = pipe.process_with_watermark(batch);
  const auto c = pipe.counters();
  CHECK(c.raw == 900);
  CHECK(c.measures + c.exceptions == c.raw);
  REQUIRE(out.verdicts.size() >= 1);
  CHECK(c.rule_updates >= 1);
  const auto b = pipe.rules().sensor_overrides.at("t-101");
  CHECK(b.half_width() == doctest::Approx(5.0));
  CHECK(b.center() == doctest::Approx(25.0).epsilon(0.05));
  CHECK(out.recovered.size() > 0);
  CHECK(c.recovered == out.recovered.size());
}
