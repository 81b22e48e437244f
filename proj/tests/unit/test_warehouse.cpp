#include <doctest.h>

#include <cmath>
#include <fstream>

#include "rider/warehouse/indicators.hpp"
#include "rider/warehouse/store.hpp"
#include "rider/warehouse/warehouse.hpp"
#include "support.hpp"

using namespace rider;
using namespace rider::warehouse;

namespace {

const Timestamp kStart = test::ts("2024-01-08T00:00:00Z");  // a Monday

std::shared_ptr<const model::ModelIndex> index_with_virtuals() {
  auto j = nlohmann::json::parse(std::ifstream(test::data_dir() / "site.json"));
  auto& vs = j["virtual_sensors"];
  vs.push_back({{"sensor_id", "lab-avg"}, {"kind", "temperature"}, {"position", {15, 4, 1.5}}, {"zone_ref", "lab"},
                {"expression", {{"op", "avg"}, {"args", {"t-201", "t-202"}}}}});
  vs.push_back({{"sensor_id", "lab-diff"}, {"kind", "temperature"}, {"position", {15, 4, 1.5}}, {"zone_ref", "lab"},
                {"expression", {{"op", "-"}, {"args", {"t-201", "t-202"}}}}});
  vs.push_back({{"sensor_id", "lab-ratio"}, {"kind", "temperature"}, {"position", {15, 4, 1.5}}, {"zone_ref", "lab"},
                {"expression", {{"op", "/"}, {"args", {"t-201", {{"op", "-"}, {"args", {"t-202", "t-202"}}}}}}}});
  return std::make_shared<model::ModelIndex>(model::model_from_json(j));
}

template <class T, class V>
const T& as(const V& v) {
  REQUIRE(std::holds_alternative<T>(v));
  return std::get<T>(v);
}

// Independent oracle: a flat row list with last-write-wins, filtered and
// binned by a direct scan.
struct Row {
  std::string sensor_id;
  std::int64_t t;
  double value;
};

std::vector<Series> scan(const model::ModelIndex& index, const std::vector<Row>& rows, const Filter& f,
                         Timestamp from, Timestamp to, Aggregation agg) {
  std::map<std::string, std::map<std::int64_t, double>> latest;
  for (const auto& r : rows) latest[r.sensor_id][r.t] = r.value;
  std::vector<Series> out;
  for (const auto& s : index.sensors()) {
    if (!f.sensor_ids.empty() && !f.sensor_ids.count(s.sensor_id)) continue;
    if (!f.zone_ids.empty() && !f.zone_ids.count(s.zone_id)) continue;
    if (!f.kinds.empty() && !f.kinds.count(s.kind)) continue;
    Series series{s.sensor_id, {}};
    const std::int64_t lo = from.time_since_epoch().count(), hi = to.time_since_epoch().count();
    std::vector<std::pair<std::int64_t, double>> in;
    for (const auto& [t, v] : latest[s.sensor_id])
      if (t >= lo && t < hi) in.push_back({t, v});
    if (agg == Aggregation::raw) {
      for (const auto& [t, v] : in) series.points.push_back({Timestamp{Seconds{t}}, v});
    } else {
      const std::int64_t width = agg == Aggregation::hourly_mean ? 3600 : 86400;
      std::map<std::int64_t, std::vector<double>> bins;
      for (const auto& [t, v] : in) {
        const std::int64_t b = t >= 0 ? t / width * width : -((-t + width - 1) / width) * width;
        bins[b].push_back(v);
      }
      for (const auto& [b, vs] : bins) {
        double r = vs[0];
        if (agg == Aggregation::hourly_mean) {
          double sum = 0.0;
          for (double v : vs) sum += v;
          r = sum / static_cast<double>(vs.size());
        } else if (agg == Aggregation::daily_min) {
          for (double v : vs) r = std::min(r, v);
        } else {
          for (double v : vs) r = std::max(r, v);
        }
        series.points.push_back({Timestamp{Seconds{b}}, r});
      }
    }
    out.push_back(std::move(series));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.sensor_id < b.sensor_id; });
  return out;
}

Filter random_filter(std::mt19937_64& rng, const model::ModelIndex& index) {
  Filter f;
  std::uniform_int_distribution<int> pick(0, 2);
  while (f.empty()) {
    const int mode = pick(rng);
    for (const auto& s : index.sensors()) {
      if (std::bernoulli_distribution(0.3)(rng)) {
        if (mode == 0) f.sensor_ids.insert(s.sensor_id);
        if (mode == 1) f.zone_ids.insert(s.zone_id);
        if (mode == 2) f.kinds.insert(s.kind);
      }
    }
  }
  return f;
}

// Heat-up on a simulated first-order plant recorded into the office sensors.
void record_heat_up(Warehouse& wh, double t0, double tout, double tau, double gain, int minutes) {
  wh.insert({"v-101", kStart, 1.0});
  double temperature = t0;
  for (int i = 0; i <= minutes; ++i) {
    const auto t = kStart + Seconds{60 * i};
    for (const char* id : {"t-101", "t-102", "t-103"}) wh.insert({id, t, temperature});
    temperature = harness::euler_step(temperature, tout, tau, gain, 1.0, 60.0);
  }
}

}  // namespace

TEST_CASE("insert: fresh, overwrite, unknown") {
  Warehouse wh(test::site_index());
  const auto noon = test::ts("2024-01-08T12:00:00Z");
  wh.insert({"t-101", noon, 21.5});
  CHECK(wh.overwrites() == 0);
  wh.insert({"t-101", noon, 21.7});
  CHECK(wh.overwrites() == 1);
  CHECK(wh.fact_count() == 1);
  CHECK(wh.series("t-101", noon, noon + Seconds{1}) == std::vector<Point>{{noon, 21.7}});
  CHECK_THROWS_AS(wh.insert({"nope", noon, 1.0}), WarehouseError);
}

TEST_CASE("query basics") {
  Warehouse wh(test::site_index());
  const auto t = kStart + Seconds{600};
  wh.insert({"t-101", t, 20.0});
  Filter f;
  f.sensor_ids = {"t-101"};
  auto r = wh.query(f, kStart, kStart + Seconds{3600}, Aggregation::raw);
  REQUIRE(r.size() == 1);
  CHECK(r[0].points == std::vector<Point>{{t, 20.0}});
  r = wh.query(f, kStart + Seconds{3600}, kStart + Seconds{7200}, Aggregation::raw);
  REQUIRE(r.size() == 1);
  CHECK(r[0].points.empty());
  CHECK_THROWS_AS(wh.query(Filter{}, kStart, kStart + Seconds{1}, Aggregation::raw), WarehouseError);
  CHECK_THROWS_AS(wh.query(f, kStart, kStart, Aggregation::raw), WarehouseError);
  CHECK(parse_aggregation("hourly-mean") == Aggregation::hourly_mean);
  CHECK_FALSE(parse_aggregation("weekly").has_value());
}

TEST_CASE("query equals the brute-force scan on random data") {
  const auto index = index_with_virtuals();
  Warehouse wh(index);
  std::mt19937_64 rng(2024);
  const auto sensors = index->sensors();
  std::uniform_int_distribution<std::size_t> which(0, sensors.size() - 1);
  std::uniform_int_distribution<std::int64_t> when(0, 14 * 86400);
  std::normal_distribution<double> value(20.0, 5.0);
  std::vector<Row> rows;
  const std::int64_t base = kStart.time_since_epoch().count();
  for (int i = 0; i < 10000; ++i) {
    Row r{sensors[which(rng)].sensor_id, base + when(rng) / 30 * 30, value(rng)};
    rows.push_back(r);
    wh.insert({r.sensor_id, Timestamp{Seconds{r.t}}, r.value});
  }
  for (int q = 0; q < 40; ++q) {
    const auto f = random_filter(rng, *index);
    std::int64_t a = when(rng), b = when(rng);
    if (a > b) std::swap(a, b);
    const Timestamp from{Seconds{base + a}}, to{Seconds{base + b + 1}};
    for (auto agg : {Aggregation::raw, Aggregation::hourly_mean, Aggregation::daily_min, Aggregation::daily_max})
      CHECK(wh.query(f, from, to, agg) == scan(*index, rows, f, from, to, agg));
  }
}

TEST_CASE("virtual sensors") {
  const auto index = index_with_virtuals();
  Warehouse wh(index);
  const auto t = kStart + Seconds{3600};
  const Seconds align{300};
  wh.insert({"t-201", t - Seconds{60}, 18.0});
  wh.insert({"t-202", t - Seconds{120}, 22.0});
  CHECK(as<Measure>(wh.evaluate_virtual(*index->virtual_sensor("lab-avg"), t, align)).value == 20.0);
  CHECK(as<Measure>(wh.evaluate_virtual(*index->virtual_sensor("lab-diff"), t, align)).value == -4.0);
  CHECK(wh.series("lab-avg", t, t + Seconds{1}) == std::vector<Point>{{t, 20.0}});

  const auto before = wh.fact_count();
  as<EvaluationError>(wh.evaluate_virtual(*index->virtual_sensor("lab-ratio"), t, align));
  CHECK(wh.evaluation_errors() == 1);
  CHECK(wh.fact_count() == before);

  const auto later = t + Seconds{240};
  wh.insert({"t-201", later, 19.0});
  CHECK(as<Absent>(wh.evaluate_virtual(*index->virtual_sensor("lab-avg"), later, Seconds{60})).missing_sensor ==
        "t-202");
  CHECK(wh.series("lab-avg", later, later + Seconds{1}).empty());
}

TEST_CASE("virtual facts are reproducible after deletion") {
  const auto index = test::site_index();
  Warehouse wh(index);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> v(20.0, 2.0);
  for (int i = 0; i < 120; ++i) {
    const auto t = kStart + Seconds{60 * i};
    for (const char* id : {"t-101", "t-102", "t-103", "t-201", "t-202"}) wh.insert({id, t, v(rng)});
    wh.evaluate_virtuals(t, Seconds{60});
  }
  const auto end = kStart + Seconds{7200};
  const auto mean = wh.series("office-mean", kStart, end);
  const auto delta = wh.series("office-lab-delta", kStart, end);
  CHECK(mean.size() == 120);
  CHECK(delta.size() == 120);
  wh.erase_sensor_facts("office-mean");
  wh.erase_sensor_facts("office-lab-delta");
  CHECK(wh.series("office-mean", kStart, end).empty());
  for (int i = 0; i < 120; ++i) wh.evaluate_virtuals(kStart + Seconds{60 * i}, Seconds{60});
  CHECK(wh.series("office-mean", kStart, end) == mean);
  CHECK(wh.series("office-lab-delta", kStart, end) == delta);
}

TEST_CASE("star schema") {
  Warehouse wh(test::site_index());
  wh.insert({"t-101", kStart, 20.0});
  wh.insert({"t-201", kStart + Seconds{60}, 19.0});
  const auto schema = wh.schema_description();
  std::set<std::string> dims;
  for (const auto& [name, table] : schema.items()) {
    if (name == "fact") continue;
    CHECK(table["references"].empty());
    dims.insert(name);
  }
  CHECK(dims.size() == 3);
  std::set<std::string> referenced;
  for (const auto& r : schema["fact"]["references"]) referenced.insert(r["table"].get<std::string>());
  CHECK(referenced == dims);

  const auto sensors = wh.sensor_dim();
  const auto times = wh.time_dim();
  for (const auto& f : wh.facts()) {
    CHECK(std::count_if(sensors.begin(), sensors.end(), [&](auto& s) { return s.key == f.sensor_key; }) == 1);
    CHECK(std::count_if(times.begin(), times.end(), [&](auto& s) { return s.key == f.time_key; }) == 1);
  }
  CHECK(times[0].weekday == 0);
  CHECK(times[1].minute == 1);
}

TEST_CASE("time-to-reach against the closed form") {
  Warehouse wh(test::site_index());
  record_heat_up(wh, 15.0, 15.0, 3600.0, 10.0 / 3600.0, 180);
  const Window w{kStart, kStart + Seconds{3 * 3600}};
  const auto r = as<TimeToReach>(time_to_reach(wh, "office", 21.0, w, 0.0));
  REQUIRE(r.seconds);
  CHECK(std::abs(*r.seconds - 3600.0 * std::log(10.0 / 4.0)) <= 120.0);
  CHECK(r.episode_start == kStart);
  CHECK_FALSE(as<TimeToReach>(time_to_reach(wh, "office", 30.0, w, 0.0)).seconds);

  double previous = 0.0;
  for (double target = 15.5; target < 24.0; target += 0.5) {
    const auto s = as<TimeToReach>(time_to_reach(wh, "office", target, w, 0.0)).seconds;
    REQUIRE(s);
    CHECK(*s >= previous);
    previous = *s;
  }
  Warehouse empty(test::site_index());
  as<InsufficientData>(time_to_reach(empty, "office", 21.0, w));
}

TEST_CASE("statistical presence on a synthetic schedule") {
  const auto index = test::site_index();
  Warehouse wh(index);
  const auto* schedule = index->zone("office")->schedule;
  for (int m = 0; m < 4 * 7 * 1440; m += 5) {
    const auto t = kStart + Seconds{60 * m};
    wh.insert({"p-101", t, schedule->occupied_at(t) ? 1.0 : 0.0});
    wh.insert({"p-201", t, 0.0});
  }
  const Window w{kStart, kStart + Seconds{28 * 86400}};
  const auto office = as<PresenceMatrix>(statistical_presence(wh, "office", w));
  CHECK(office.fraction[0][10] == 1.0);
  CHECK(office.fraction[6][10] == 0.0);
  CHECK(office.fraction[0][8] == 0.0);
  CHECK(office.samples[0][10] == 48);
  const auto lab = as<PresenceMatrix>(statistical_presence(wh, "lab", w));
  for (const auto& day : lab.fraction)
    for (double c : day) CHECK(c == 0.0);
  for (const auto& day : office.fraction)
    for (double c : day) CHECK((c >= 0.0 && c <= 1.0));
}

TEST_CASE("savings is zero when the actual history is the baseline") {
  const auto index = test::site_index();
  Warehouse wh(index);
  SavingsParams p;
  p.tau_s = 3600;
  p.gain = 0.006944444444444444;
  p.heater_power_w = 2000;
  p.outdoor = harness::OutdoorTrajectory::constant(5.0);
  const Window w{kStart, kStart + Seconds{86400}};
  wh.insert({"t-101", kStart, 16.0});
  const auto steps = baseline_valve_steps(16.0, index->zone("office")->zone->setpoint_policy, p, w);
  REQUIRE(steps.size() > 2);
  for (const auto& s : steps) wh.insert({"v-101", s.t, s.value});
  const auto s = as<Savings>(savings(wh, "office", p, w));
  CHECK(s.saved_kwh == 0.0);
  CHECK(s.baseline_kwh > 0.0);

  // Heater never on: savings equal the whole baseline energy.
  Warehouse idle(index);
  idle.insert({"t-101", kStart, 16.0});
  idle.insert({"v-101", kStart, 0.0});
  const auto all = as<Savings>(savings(idle, "office", p, w));
  CHECK(all.saved_kwh == doctest::Approx(s.baseline_kwh));
}

TEST_CASE("optimal setback") {
  CHECK(setback_closed_form(3600, 25, 21, 7200, 12) == 12.0);
  const double unclamped = 25.0 - 4.0 * std::exp(2.0);
  CHECK(setback_closed_form(3600, 25, 21, 7200, -100) == doctest::Approx(unclamped));

  Warehouse wh(test::site_index());
  SetbackParams p;
  p.tau_s = 3600;
  p.t_inf = 25;
  p.target = 21;
  p.lead_s = 7200;
  p.frost_guard = 12;
  const Window w{kStart, kStart + Seconds{86400}};
  const auto s = as<Setback>(optimal_setback(wh, "office", p, w));
  CHECK(s.setpoint == 12.0);
  CHECK(s.clamped);
  CHECK(s.unclamped == doctest::Approx(unclamped));

  // Fitted from a recorded heat-up: the discrete step recovers the plant.
  record_heat_up(wh, 15.0, 15.0, 3600.0, 10.0 / 3600.0, 180);
  const auto fit = as<FirstOrderFit>(fit_heating_response(wh, "office", w));
  CHECK(fit.pairs == 180);
  CHECK(fit.tau_s == doctest::Approx(-60.0 / std::log(1.0 - 60.0 / 3600.0)).epsilon(1e-9));
  CHECK(fit.t_inf == doctest::Approx(25.0).epsilon(1e-9));
}

TEST_CASE("indicator results in uniform JSON") {
  Warehouse wh(test::site_index());
  record_heat_up(wh, 15.0, 15.0, 3600.0, 10.0 / 3600.0, 180);
  const Window w{kStart, kStart + Seconds{3 * 3600}};
  const auto r = compute_indicator(wh, "time-to-reach", {{"zone", "office"}, {"target", 21.0}, {"tol", 0.0}}, w);
  const auto j = r.to_json();
  CHECK(j["kind"] == "time-to-reach");
  CHECK(j["window"]["from"] == "2024-01-08T00:00:00Z");
  CHECK(j.contains("value"));
  const auto missing = compute_indicator(wh, "statistical-presence", {{"zone", "office"}}, w).to_json();
  CHECK(missing.contains("insufficient_data"));
  CHECK_THROWS(compute_indicator(wh, "weather", {{"zone", "office"}}, w));
}

TEST_CASE("store persists across reopen") {
  test::TempDir dir("store");
  const auto path = dir.path() / "s";
  {
    auto store = Store::create(path, test::site());
    store->warehouse().insert({"t-101", kStart, 20.5});
    store->warehouse().insert({"t-101", kStart, 20.25});
    store->warehouse().insert({"v-101", kStart + Seconds{60}, 1.0});
    store->set_quarantine({ingest::ExceptionRecord({"x", "2024-01-08T00:00:00Z", "1", "degC"},
                                                   ingest::ExceptionClass::unknown_source, kStart)});
    store->save();
  }
  CHECK(Store::exists(path));
  CHECK_THROWS(Store::create(path, test::site()));
  auto store = Store::open(path);
  CHECK(store->warehouse().fact_count() == 2);
  CHECK(store->warehouse().series("t-101", kStart, kStart + Seconds{1}) == std::vector<Point>{{kStart, 20.25}});
  REQUIRE(store->quarantine().size() == 1);
  CHECK(store->quarantine()[0].raw().source_address == "x");
  store->warehouse().insert({"t-102", kStart, 19.0});
  store->save();
  CHECK(Store::open(path)->warehouse().fact_count() == 3);

  // A torn tail is refused rather than silently dropped.
  {
    std::ofstream log(path / "facts.log", std::ios::binary | std::ios::app);
    log.put(0);
  }
  CHECK_THROWS(Store::open(path));
}
