#include <doctest.h>

#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "rider/app/cli.hpp"
#include "rider/app/pipeline.hpp"
#include "rider/app/queries.hpp"
#include "rider/app/service.hpp"
#include "rider/field/field.hpp"
#include "support.hpp"

using namespace rider;
using namespace rider::app;
namespace fs = std::filesystem;

namespace {

PipelineConfig demo(const fs::path& store = {}) {
  auto c = load_pipeline_config(test::data_dir() / "pipeline.json");
  c.store = store;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Writes a harness variant into `dir` and points the config at it.
PipelineConfig with_faults(const fs::path& dir, const nlohmann::json& faults, fs::path store = {}) {
  auto h = nlohmann::json::parse(slurp(test::data_dir() / "harness.json"));
  for (const auto& [k, v] : faults.items()) h["faults"][k] = v;
  std::ofstream(dir / "harness.json") << h.dump();
  auto c = demo(std::move(store));
  c.harness = dir / "harness.json";
  return c;
}

struct Cli {
  int code;
  std::string out;
  std::string err;
};

Cli cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

// Service on an ephemeral port, served from a background thread.
class Running {
 public:
  explicit Running(std::unique_ptr<Service> s) : service_(std::move(s)) {
    port_ = service_->bind("127.0.0.1", 0);
    REQUIRE(port_ > 0);
    thread_ = std::thread([this] { service_->listen(); });
  }
  ~Running() {
    service_->stop();
    thread_.join();
  }
  httplib::Client client() const { return httplib::Client("127.0.0.1", port_); }

 private:
  std::unique_ptr<Service> service_;
  int port_ = -1;
  std::thread thread_;
};

}  // namespace

TEST_CASE("a zero-fault day counts every sensor every minute") {
  Pipeline p(demo());
  p.advance(p.remaining());
  const auto r = p.report();
  CHECK(r.ticks == 1440);
  CHECK(r.measures == 10 * 1440);
  CHECK(r.exceptions == 0);
  CHECK(r.raw == r.measures + r.exceptions);
  CHECK_FALSE(r.partial);
  CHECK(r.end == test::ts("2024-01-09T00:00:00Z"));
}

TEST_CASE("unknown addresses everywhere quarantine everything") {
  test::TempDir dir("app-unknown");
  Pipeline p(with_faults(dir.path(), {{"unknown_address", 1.0}}));
  p.advance(p.remaining());
  const auto r = p.report();
  CHECK(r.raw == 14400);
  CHECK(r.exceptions == r.raw);
  CHECK(r.quarantined == r.raw);
  CHECK(r.facts == 0);
  CHECK(r.by_class.at("unknown-source") == r.raw);
}

TEST_CASE("records land in exactly one of facts or quarantine under faults") {
  test::TempDir dir("app-faults");
  Pipeline p(with_faults(dir.path(), {{"unit_corruption", 0.02}, {"value_spike", 0.01}, {"dropout", 0.01}}));
  p.advance(p.remaining());
  const auto r = p.report();
  CHECK(r.raw + r.dropped == 14400);
  CHECK(r.measures + r.recovered + r.quarantined == r.raw);
  CHECK(r.exceptions > 0);
}

TEST_CASE("reruns with the same seed are byte-identical") {
  test::TempDir dir("app-rerun");
  const auto a = run_pipeline(demo(dir.path() / "a"));
  const auto b = run_pipeline(demo(dir.path() / "b"));
  CHECK(a.to_json() == b.to_json());
  for (const char* f : {"run-report.json", "trace.jsonl", "facts.log", "quarantine.jsonl", "time_dim.json"})
    CHECK(slurp(dir.path() / "a" / f) == slurp(dir.path() / "b" / f));
  CHECK_FALSE(slurp(dir.path() / "a" / "trace.jsonl").empty());
  CHECK_THROWS_AS(run_pipeline(demo(dir.path() / "a")), ValidationFailure);
  CHECK_NOTHROW(run_pipeline(demo(dir.path() / "a"), true));
}

TEST_CASE("config validation refuses bad inputs") {
  auto c = demo();
  c.tick = Seconds{361};
  CHECK_THROWS_AS(Pipeline{c}, ValidationFailure);
  c = demo();
  c.model = "/nonexistent/site.json";
  CHECK_THROWS_AS(Pipeline{c}, ValidationFailure);
  CHECK_THROWS_AS(pipeline_config_from_json({{"model", "m"}, {"rules", "r"}, {"harness", "h"}, {"horizon_s", 0}}, "."),
                  ValidationFailure);
  CHECK_THROWS_AS(pipeline_config_from_json({{"model", "m"}}, "."), ValidationFailure);
  const auto ok = pipeline_config_from_json({{"model", "m.json"}, {"rules", "r"}, {"harness", "h"}}, "/base");
  CHECK(ok.model == fs::path("/base/m.json"));
  CHECK(ok.ticks() == 1440);
}

TEST_CASE("cli: validate, run, query, indicator, field export") {
  test::TempDir dir("app-cli");
  CHECK(cli({"validate", (test::data_dir() / "site.json").string()}).code == 0);
  auto bad = nlohmann::json::parse(slurp(test::data_dir() / "site.json"));
  bad["buildings"][0]["sensors"][0]["zone_ref"] = "attic";
  std::ofstream(dir.path() / "bad.json") << bad.dump();
  const auto invalid = cli({"validate", (dir.path() / "bad.json").string()});
  CHECK(invalid.code == 1);
  CHECK(invalid.out.find("unknown-zone") != std::string::npos);
  CHECK(cli({"query"}).code == 1);

  auto cfg = nlohmann::json::parse(slurp(test::data_dir() / "pipeline.json"));
  for (const char* k : {"model", "rules", "harness"}) cfg[k] = (test::data_dir() / cfg[k].get<std::string>()).string();
  cfg["store"] = (dir.path() / "store").string();
  cfg["horizon_s"] = 6 * 3600;
  std::ofstream(dir.path() / "pipeline.json") << cfg.dump();
  const auto run = cli({"run", "--config", (dir.path() / "pipeline.json").string()});
  REQUIRE(run.code == 0);
  CHECK(nlohmann::json::parse(run.out)["ticks"] == 360);
  CHECK(cli({"run", "--config", (dir.path() / "pipeline.json").string()}).code == 1);

  const auto store = (dir.path() / "store").string();
  const auto q = cli({"query", "--store", store, "--sensor", "t-101", "--from", "2024-01-08T00:00:00Z", "--to",
                      "2024-01-08T01:00:00Z"});
  REQUIRE(q.code == 0);
  CHECK(nlohmann::json::parse(q.out)["points"].size() == 60);
  CHECK(cli({"query", "--store", store, "--sensor", "t-101", "--from", "2024-01-08T00:00:00Z", "--to",
             "2024-01-08T01:00:00Z", "--agg", "weekly"})
            .code == 1);

  const auto ind = cli({"indicator", "optimal-setback", "--store", store, "--zone", "office", "--from",
                        "2024-01-08T00:00:00Z", "--to", "2024-01-08T06:00:00Z", "--param", "tau_s=3600", "--param",
                        "t_inf=25", "--param", "target=21", "--param", "frost_guard=12"});
  REQUIRE(ind.code == 0);
  CHECK(nlohmann::json::parse(ind.out)["value"]["setpoint"] == 12.0);

  const auto out = (dir.path() / "f.rfld").string();
  REQUIRE(cli({"field", "export", "--store", store, "--t", "2024-01-08T03:00:00Z", "--slice-z", "1.5", "--res",
               "10x4x1", "--format", "rfld", "-o", out})
              .code == 0);
  const auto f = field::read_rfld(out);
  CHECK(f.values.size() == 40);
  CHECK(fs::file_size(out) == 67 + 9 * 40);
}

TEST_CASE("cli: simulate then ingest conserves records") {
  test::TempDir dir("app-ingest");
  const auto site = (test::data_dir() / "site.json").string();
  const auto raw = (dir.path() / "raw.csv").string();
  const auto sim = cli({"simulate", "--model", site, "--harness", (test::data_dir() / "harness.json").string(),
                        "--hours", "2", "--out", raw});
  REQUIRE(sim.code == 0);
  CHECK(nlohmann::json::parse(sim.out)["records"] == 1200);
  const auto ing = cli({"ingest", raw, "--model", site, "--rules", (test::data_dir() / "rules.json").string(),
                        "--store", (dir.path() / "s").string()});
  REQUIRE(ing.code == 0);
  const auto j = nlohmann::json::parse(ing.out);
  CHECK(j["raw"] == 1200);
  CHECK(j["measures"].get<int>() + j["exceptions"].get<int>() == 1200);
  const auto replay = cli({"scenario", "run", "--store", (dir.path() / "s").string(), "--from",
                           "2024-01-08T00:00:00Z", "--to", "2024-01-08T02:00:00Z"});
  REQUIRE(replay.code == 0);
  CHECK(nlohmann::json::parse(replay.out)["ticks"] == 120);
}

TEST_CASE("service answers match the cli") {
  test::TempDir dir("app-service");
  const auto store_dir = dir.path() / "store";
  auto config = demo(store_dir);
  config.horizon = Seconds{6 * 3600};
  run_pipeline(config);
  const auto store = store_dir.string();

  Running server(std::make_unique<Service>(warehouse::Store::open(store_dir)));
  auto client = server.client();

  for (const char* agg : {"raw", "hourly-mean", "daily-max"}) {
    const auto via_cli = cli({"query", "--store", store, "--sensor", "office-mean", "--from", "2024-01-08T01:00:00Z",
                              "--to", "2024-01-08T05:00:00Z", "--agg", agg});
    const auto res = client.Get(std::string("/v1/measures?sensor=office-mean&from=2024-01-08T01:00:00Z&to=2024-01-08T05:00:00Z&agg=") + agg);
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(res->body == via_cli.out);
  }

  const auto ind_cli = cli({"indicator", "time-to-reach", "--store", store, "--zone", "office", "--from",
                            "2024-01-08T00:00:00Z", "--to", "2024-01-08T06:00:00Z", "--param", "target=12"});
  const auto ind = client.Get("/v1/indicators/time-to-reach?zone=office&from=2024-01-08T00:00:00Z&to=2024-01-08T06:00:00Z&target=12");
  REQUIRE(ind);
  CHECK(ind->body == ind_cli.out);

  const auto sensors = client.Get("/v1/sensors");
  REQUIRE(sensors);
  CHECK(nlohmann::json::parse(sensors->body).size() == 14);
  const auto ex = client.Get("/v1/exceptions?class=out-of-range");
  REQUIRE(ex);
  CHECK(ex->status == 200);
  CHECK(client.Get("/v1/exceptions?class=nonsense")->status == 400);
  CHECK(client.Get("/v1/measures?sensor=t-101")->status == 400);
  CHECK(client.Post("/v1/ticks", "{\"n\": 1}", "application/json")->status == 409);

  const auto rfld_path = (dir.path() / "f.rfld").string();
  REQUIRE(cli({"field", "export", "--store", store, "--t", "2024-01-08T03:00:00Z", "--slice-z", "1.5", "--res",
               "8x4x2", "--mode", "voronoi", "--format", "rfld", "-o", rfld_path})
              .code == 0);
  const auto bytes = client.Get("/v1/field?t=2024-01-08T03:00:00Z&slice_z=1.5&mode=voronoi&res=8x4x2",
                                {{"Accept", "application/octet-stream"}});
  REQUIRE(bytes);
  CHECK(bytes->body == slurp(rfld_path));
  const auto as_json = client.Get("/v1/field?t=2024-01-08T03:00:00Z&slice_z=1.5&mode=voronoi&res=8x4x2");
  REQUIRE(as_json);
  CHECK(nlohmann::json::parse(as_json->body)["values"].size() == 64);
}

TEST_CASE("a live service advances ticks on request") {
  auto config = demo();
  config.horizon = Seconds{3600};
  Running server(std::make_unique<Service>(std::make_unique<Pipeline>(config)));
  auto client = server.client();
  const auto res = client.Post("/v1/ticks", "{\"n\": 5}", "application/json");
  REQUIRE(res);
  REQUIRE(res->status == 200);
  const auto j = nlohmann::json::parse(res->body);
  CHECK(j["advanced"] == 5);
  CHECK(j["report"]["measures"] == 50);
  const auto m = client.Get("/v1/measures?sensor=t-101&from=2024-01-08T00:00:00Z&to=2024-01-08T01:00:00Z");
  REQUIRE(m);
  CHECK(nlohmann::json::parse(m->body)["points"].size() == 5);
}
