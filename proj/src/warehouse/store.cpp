#include "rider/warehouse/store.hpp"

#include <fstream>

#include "rider/ingest/raw_io.hpp"
#include "rider/model/json_io.hpp"

namespace rider::warehouse {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_json(const fs::path& file, const json& j) {
  const fs::path tmp = file.string() + ".tmp";
  {
    std::ofstream out(tmp);
    out << j.dump(1) << '\n';
    if (!out) throw WarehouseError("cannot write " + tmp.string());
  }
  fs::rename(tmp, file);
}

json read_json(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw WarehouseError("cannot open " + file.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw WarehouseError(file.string() + ": " + e.what());
  }
}

}  // namespace

Store::Store(fs::path dir, std::shared_ptr<const model::ModelIndex> index)
    : dir_(std::move(dir)), warehouse_(std::make_unique<Warehouse>(std::move(index))) {}

bool Store::exists(const fs::path& dir) { return fs::exists(dir / "manifest.json"); }

std::unique_ptr<Store> Store::create(const fs::path& dir, const model::SiteModel& model) {
  if (exists(dir)) throw WarehouseError("store already exists at " + dir.string());
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw WarehouseError("cannot create store directory " + dir.string() + ": " + ec.message());
  write_json(dir / "model.json", model::to_json(model));
  std::unique_ptr<Store> store(new Store(dir, std::make_shared<model::ModelIndex>(model)));
  store->warehouse_->attach_log(dir / "facts.log");
  store->save();
  return store;
}

std::unique_ptr<Store> Store::open(const fs::path& dir) {
  if (!exists(dir)) throw WarehouseError("no store at " + dir.string());
  const json manifest = read_json(dir / "manifest.json");
  if (manifest.value("format", "") != "rider-store" || manifest.value("version", 0) != kLayoutVersion)
    throw WarehouseError("unsupported store layout in " + dir.string());
  auto model = model::load_model(dir / "model.json");
  std::unique_ptr<Store> store(new Store(dir, std::make_shared<model::ModelIndex>(std::move(model))));
  store->warehouse_->attach_log(dir / "facts.log");
  if (fs::exists(dir / "quarantine.jsonl")) {
    std::ifstream in(dir / "quarantine.jsonl");
    store->quarantine_ = ingest::read_quarantine(in);
  }
  return store;
}

void Store::save() {
  const auto& wh = *warehouse_;
  json sensors = json::array();
  for (const auto& s : wh.sensor_dim())
    sensors.push_back({{"key", s.key},
                       {"sensor_id", s.sensor_id},
                       {"kind", model::to_string(s.kind)},
                       {"unit", s.unit},
                       {"is_virtual", s.is_virtual},
                       {"is_actuator", s.is_actuator}});
  json locations = json::array();
  for (const auto& l : wh.location_dim())
    locations.push_back({{"key", l.key},
                         {"building_id", l.building_id},
                         {"zone_id", l.zone_id},
                         {"x", l.position.x},
                         {"y", l.position.y},
                         {"z", l.position.z}});
  json times = json::array();
  for (const auto& t : wh.time_dim())
    times.push_back({{"key", t.key},
                     {"timestamp", format_iso8601(t.timestamp)},
                     {"year", t.year},
                     {"month", t.month},
                     {"day", t.day},
                     {"weekday", t.weekday},
                     {"hour", t.hour},
                     {"minute", t.minute}});
  write_json(dir_ / "sensor_dim.json", sensors);
  write_json(dir_ / "location_dim.json", locations);
  write_json(dir_ / "time_dim.json", times);
  {
    const fs::path tmp = dir_ / "quarantine.jsonl.tmp";
    {
      std::ofstream out(tmp);
      ingest::write_quarantine(out, quarantine_);
      if (!out) throw WarehouseError("cannot write " + tmp.string());
    }
    fs::rename(tmp, dir_ / "quarantine.jsonl");
  }
  warehouse_->flush_log();
  write_json(dir_ / "manifest.json", {{"format", "rider-store"},
                                      {"version", kLayoutVersion},
                                      {"site_id", wh.index().model().site_id},
                                      {"facts", wh.fact_count()},
                                      {"overwrites", wh.overwrites()},
                                      {"quarantined", quarantine_.size()},
                                      {"fact_log", "facts.log"}});
}

}  // namespace rider::warehouse
