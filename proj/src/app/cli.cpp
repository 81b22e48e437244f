#include "rider/app/cli.hpp"

#include <fstream>
#include <iostream>
#include <set>

#include <CLI11.hpp>

#include "rider/app/pipeline.hpp"
#include "rider/app/queries.hpp"
#include "rider/app/service.hpp"
#include "rider/ingest/raw_io.hpp"
#include "rider/ingest/rules.hpp"
#include "rider/model/json_io.hpp"
#include "rider/model/validate.hpp"
#include "rider/warehouse/indicators.hpp"

namespace rider::app {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
  std::string model, rules, harness, store, raw, out, config, sensor, from, to, agg = "raw", zone, kind, at,
      mode = "delaunay", res = "50x50x1", format = "rfld", host = "127.0.0.1", trace;
  std::vector<std::string> params;
  double hours = 24.0, slice_z = 0.0;
  std::int64_t tick_s = 60, align_s = 600, virtual_align_s = 120;
  int port = 8080;
  bool force = false;
};

warehouse::Aggregation require_agg(const std::string& text) {
  auto a = warehouse::parse_aggregation(text);
  if (!a) throw std::invalid_argument("unknown aggregation '" + text + "'");
  return *a;
}

std::shared_ptr<const model::ModelIndex> load_index(const std::string& file) {
  auto site = model::load_model(file);
  const auto report = model::validate_model(site);
  if (!report.ok()) throw ValidationFailure("model " + file + " is invalid", {report.to_text()});
  return std::make_shared<model::ModelIndex>(std::move(site));
}

int cmd_validate(const Options& o, std::ostream& out) {
  const auto site = model::load_model(o.model);
  const auto report = model::validate_model(site);
  if (!o.rules.empty()) {
    for (const auto& p : ingest::load_rules(o.rules).problems()) out << "rules: " << p << '\n';
  }
  if (report.ok()) {
    out << "ok: " << site.site_id << '\n';
    return 0;
  }
  out << report.to_text();
  return 1;
}

int cmd_simulate(const Options& o, std::ostream& out) {
  const auto index = load_index(o.model);
  const auto config = harness::load_harness(o.harness);
  auto state = harness::initial_state(config, *index);
  harness::RawEmitter emitter(index, config.faults);
  const Seconds tick{o.tick_s};
  const auto ticks = static_cast<std::int64_t>(o.hours * 3600.0) / tick.count();
  std::ofstream file(o.out, std::ios::binary);
  if (!file) throw std::runtime_error("cannot write " + o.out);
  std::size_t records = 0, dropped = 0;
  bool header = true;
  for (std::int64_t i = 0; i < ticks; ++i) {
    const auto e = emitter.emit(state);
    ingest::write_raw_csv(file, e.records, header);
    header = false;
    records += e.records.size();
    dropped += e.dropped;
    state = harness::step_plant(std::move(state), {}, tick);
  }
  out << json{{"ticks", ticks}, {"records", records}, {"dropped", dropped}, {"out", o.out}}.dump(2) << '\n';
  return 0;
}

int cmd_ingest(const Options& o, std::ostream& out) {
  const auto index = load_index(o.model);
  auto rules = ingest::load_rules(o.rules);
  if (auto p = rules.problems(); !p.empty()) throw ValidationFailure("rules " + o.rules + " are invalid", p);
  std::unique_ptr<warehouse::Store> store = warehouse::Store::exists(o.store)
                                                ? warehouse::Store::open(o.store)
                                                : warehouse::Store::create(o.store, index->model());
  if (store->index()->model().site_id != index->model().site_id)
    throw std::invalid_argument("store belongs to site '" + store->index()->model().site_id + "'");

  std::ifstream in(o.raw, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + o.raw);
  const auto records = ingest::read_raw_csv(in);
  ingest::IngestPipeline pipeline(store->index(), std::move(rules));
  const auto result = pipeline.process_with_watermark(records);
  auto& wh = store->warehouse();
  wh.insert_all(result.measures);
  wh.insert_all(result.recovered);

  std::set<Timestamp> stamps;
  for (const auto& m : result.measures) stamps.insert(m.timestamp);
  for (const auto& m : result.recovered) stamps.insert(m.timestamp);
  for (auto t : stamps) wh.evaluate_virtuals(t, Seconds{o.virtual_align_s});

  auto quarantine = store->quarantine();
  for (auto& e : pipeline.quarantine()) quarantine.push_back(std::move(e));
  store->set_quarantine(std::move(quarantine));
  store->save();
  {
    std::ofstream r(store->dir() / "rules.json");
    r << ingest::to_json(pipeline.rules()).dump(2) << '\n';
  }

  const auto c = pipeline.counters();
  json by_class = json::object();
  for (const auto& [cls, n] : c.by_class) by_class[std::string(ingest::to_string(cls))] = n;
  out << json{{"raw", c.raw},
              {"measures", c.measures},
              {"exceptions", c.exceptions},
              {"recovered", c.recovered},
              {"rule_updates", c.rule_updates},
              {"by_class", by_class},
              {"facts", wh.fact_count()}}
             .dump(2)
      << '\n';
  return 0;
}

int cmd_query(const Options& o, std::ostream& out) {
  const auto store = warehouse::Store::open(o.store);
  out << measures_json(store->warehouse(), o.sensor, require_time(o.from), require_time(o.to), require_agg(o.agg))
             .dump(2)
      << '\n';
  return 0;
}

int cmd_indicator(const Options& o, std::ostream& out) {
  const auto store = warehouse::Store::open(o.store);
  std::vector<std::pair<std::string, std::string>> pairs{{"zone", o.zone}};
  for (const auto& p : o.params) {
    const auto eq = p.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("--param expects key=value, got '" + p + "'");
    pairs.emplace_back(p.substr(0, eq), p.substr(eq + 1));
  }
  std::optional<harness::HarnessConfig> plant;
  if (!o.harness.empty()) plant = harness::load_harness(o.harness);
  const warehouse::Window w{require_time(o.from), require_time(o.to)};
  const auto r = warehouse::compute_indicator(store->warehouse(), o.kind, indicator_params(pairs), w,
                                              plant ? &*plant : nullptr);
  out << r.to_json().dump(2) << '\n';
  return r.insufficient ? 3 : 0;
}

// Replays stored facts tick by tick through the rules without touching the store.
int cmd_scenario_run(const Options& o, std::ostream& out) {
  const auto store = warehouse::Store::open(o.store);
  const auto index = o.model.empty() ? store->index() : load_index(o.model);
  std::vector<scenario::RuleDef> custom;
  if (!o.rules.empty()) custom = scenario::load_rules_file(o.rules);
  const auto flow = scenario::ScenarioFlow::with_heating(index, std::move(custom));
  const auto& wh = store->warehouse();
  const Timestamp from = require_time(o.from), to = require_time(o.to);
  const Seconds tick{o.tick_s};
  if (tick.count() <= 0 || from >= to) throw std::invalid_argument("need tick > 0 and from < to");

  auto ctx = flow.initial_context(from);
  for (const auto& s : index->sensors())
    if (s.is_actuator)
      if (auto p = wh.last_at_or_before(s.sensor_id, from - Seconds{1})) ctx.actuator_settings[s.sensor_id] = p->value;

  std::ofstream trace;
  if (!o.trace.empty()) trace.open(o.trace, std::ios::binary);
  json commands = json::array();
  std::size_t ticks = 0, conflicts = 0;
  for (Timestamp t = from; t < to; t += tick, ++ticks) {
    std::vector<Measure> batch;
    for (const auto& s : index->sensors()) {
      if (s.is_actuator || !wh.index().sensor(s.sensor_id)) continue;
      for (const auto& p : wh.series(s.sensor_id, t - tick + Seconds{1}, t + Seconds{1}))
        batch.push_back({s.sensor_id, p.t, p.value});
    }
    auto result = flow.run(ctx, batch, t);
    ctx = std::move(result.context);
    for (const auto& c : result.commands)
      commands.push_back({{"tick", format_iso8601(c.tick)},
                          {"actuator", c.actuator},
                          {"setting", c.setting},
                          {"zone", c.zone_ref},
                          {"provenance", c.provenance}});
    for (const auto& e : result.trace) {
      if (e.event == "conflict") ++conflicts;
      if (trace) trace << e.to_json().dump() << '\n';
    }
  }
  out << json{{"ticks", ticks}, {"commands", commands}, {"conflicts", conflicts}}.dump(2) << '\n';
  return 0;
}

int cmd_field_export(const Options& o, std::ostream& out) {
  const auto store = warehouse::Store::open(o.store);
  const auto mode = field::parse_mode(o.mode);
  if (!mode) throw std::invalid_argument("mode must be delaunay or voronoi");
  const auto f = field_at(store->warehouse(), require_time(o.at), o.slice_z, *mode, parse_resolution(o.res),
                          Seconds{o.align_s});
  field::export_field(f, o.format, o.out);
  out << json{{"out", o.out}, {"format", o.format}, {"particles", f.values.size()}, {"mode", std::string(field::to_string(f.mode))}}
             .dump(2)
      << '\n';
  return 0;
}

int cmd_run(const Options& o, std::ostream& out) {
  const auto config = load_pipeline_config(o.config);
  const auto report = run_pipeline(config, o.force);
  out << report.to_json().dump(2) << '\n';
  return report.partial ? 2 : 0;
}

int cmd_serve(const Options& o, std::ostream& out) {
  std::unique_ptr<Service> service;
  int port = o.port;
  if (!o.config.empty()) {
    const auto config = load_pipeline_config(o.config);
    if (config.port && port == 8080) port = *config.port;
    service = std::make_unique<Service>(std::make_unique<Pipeline>(config, o.force));
  } else {
    std::optional<harness::HarnessConfig> plant;
    if (!o.harness.empty()) plant = harness::load_harness(o.harness);
    service = std::make_unique<Service>(warehouse::Store::open(o.store), std::move(plant));
  }
  const int bound = service->bind(o.host, port);
  if (bound < 0) throw std::runtime_error("cannot bind " + o.host + ":" + std::to_string(port));
  out << "listening on http://" << o.host << ':' << bound << std::endl;
  return service->listen() ? 0 : 2;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Building sensor pipeline: simulate, ingest, store, query, control"};
  app.name("rider");
  app.require_subcommand(1);

  auto* validate = app.add_subcommand("validate", "Check a site model (and optionally integration rules)");
  validate->add_option("model", o.model, "Site model JSON")->required();
  validate->add_option("--rules", o.rules, "Integration rules JSON");

  auto* simulate = app.add_subcommand("simulate", "Emit raw records from the open-loop plant to CSV");
  simulate->add_option("--model", o.model)->required();
  simulate->add_option("--harness", o.harness)->required();
  simulate->add_option("--hours", o.hours)->check(CLI::PositiveNumber);
  simulate->add_option("--tick", o.tick_s, "Seconds per tick")->check(CLI::PositiveNumber);
  simulate->add_option("--out", o.out)->required();

  auto* ingest = app.add_subcommand("ingest", "Normalize a raw CSV into a store");
  ingest->add_option("raw", o.raw, "Raw records CSV")->required();
  ingest->add_option("--model", o.model)->required();
  ingest->add_option("--rules", o.rules)->required();
  ingest->add_option("--store", o.store)->required();
  ingest->add_option("--align", o.virtual_align_s, "Virtual sensor input window, seconds")->check(CLI::PositiveNumber);

  auto* query = app.add_subcommand("query", "Read one sensor's series");
  query->add_option("--store", o.store)->required();
  query->add_option("--sensor", o.sensor)->required();
  query->add_option("--from", o.from)->required();
  query->add_option("--to", o.to)->required();
  query->add_option("--agg", o.agg, "raw, hourly-mean, daily-min or daily-max");

  auto* indicator = app.add_subcommand("indicator", "Compute an indicator over a window");
  indicator->add_option("kind", o.kind, "time-to-reach, statistical-presence, savings, optimal-setback")->required();
  indicator->add_option("--store", o.store)->required();
  indicator->add_option("--zone", o.zone)->required();
  indicator->add_option("--from", o.from)->required();
  indicator->add_option("--to", o.to)->required();
  indicator->add_option("--param", o.params, "Extra parameter as key=value");
  indicator->add_option("--harness", o.harness, "Plant parameters for savings");

  auto* scenario = app.add_subcommand("scenario", "Rule engine tools");
  scenario->require_subcommand(1);
  auto* scenario_run = scenario->add_subcommand("run", "Replay stored facts through the rules");
  scenario_run->add_option("--model", o.model);
  scenario_run->add_option("--rules", o.rules, "Custom rules JSON");
  scenario_run->add_option("--store", o.store)->required();
  scenario_run->add_option("--from", o.from)->required();
  scenario_run->add_option("--to", o.to)->required();
  scenario_run->add_option("--tick", o.tick_s)->check(CLI::PositiveNumber);
  scenario_run->add_option("--trace", o.trace, "Write trace events as JSON lines");

  auto* field_cmd = app.add_subcommand("field", "Temperature field tools");
  field_cmd->require_subcommand(1);
  auto* field_export = field_cmd->add_subcommand("export", "Interpolate and export a field");
  field_export->add_option("--store", o.store)->required();
  field_export->add_option("--t", o.at)->required();
  field_export->add_option("--slice-z", o.slice_z);
  field_export->add_option("--mode", o.mode);
  field_export->add_option("--res", o.res, "NXxNYxNZ");
  field_export->add_option("--format", o.format)->check(CLI::IsMember({"csv", "rfld"}));
  field_export->add_option("--align", o.align_s, "Sensor freshness window, seconds")->check(CLI::PositiveNumber);
  field_export->add_option("-o,--out", o.out)->required();

  auto* run = app.add_subcommand("run", "Run the closed loop over the configured horizon");
  run->add_option("--config", o.config)->required();
  run->add_flag("--force", o.force, "Replace an existing store");

  auto* serve = app.add_subcommand("serve", "Serve the HTTP API");
  auto* serve_store = serve->add_option("--store", o.store);
  auto* serve_config = serve->add_option("--config", o.config, "Live pipeline; enables POST /v1/ticks");
  serve_store->excludes(serve_config);
  serve->add_option("--port", o.port);
  serve->add_option("--host", o.host);
  serve->add_option("--harness", o.harness, "Plant parameters for savings");
  serve->add_flag("--force", o.force, "Replace an existing store (with --config)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 1;
  }

  try {
    if (*validate) return cmd_validate(o, out);
    if (*simulate) return cmd_simulate(o, out);
    if (*ingest) return cmd_ingest(o, out);
    if (*query) return cmd_query(o, out);
    if (*indicator) return cmd_indicator(o, out);
    if (*scenario_run) return cmd_scenario_run(o, out);
    if (*field_export) return cmd_field_export(o, out);
    if (*run) return cmd_run(o, out);
    if (*serve) {
      if (o.store.empty() && o.config.empty()) throw std::invalid_argument("serve needs --store or --config");
      return cmd_serve(o, out);
    }
  } catch (const ValidationFailure& e) {
    err << "invalid: " << e.what() << '\n';
    return 1;
  } catch (const model::ModelParseError& e) {
    err << "invalid: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace rider::app
