#pragma once

#include <filesystem>
#include <memory>
#include <vector>

#include "rider/ingest/normalize.hpp"
#include "rider/model/types.hpp"
#include "rider/warehouse/warehouse.hpp"

namespace rider::warehouse {

/// A store directory:
///   manifest.json        format name, layout version, site id, counters
///   model.json           the model the dimensions were built from
///   facts.log            append-only fact log ("RIDERFCT", u16 version, records)
///   sensor_dim.json, location_dim.json, time_dim.json
///   quarantine.jsonl     one exception record per line
class Store {
 public:
  static constexpr int kLayoutVersion = 1;

  /// Creates a new store; refuses a directory that already holds one.
  static std::unique_ptr<Store> create(const std::filesystem::path& dir, const model::SiteModel& model);
  static std::unique_ptr<Store> open(const std::filesystem::path& dir);
  static bool exists(const std::filesystem::path& dir);

  Warehouse& warehouse() { return *warehouse_; }
  const Warehouse& warehouse() const { return *warehouse_; }
  std::shared_ptr<const model::ModelIndex> index() const { return warehouse_->index_ptr(); }
  const std::filesystem::path& dir() const { return dir_; }

  const std::vector<ingest::ExceptionRecord>& quarantine() const { return quarantine_; }
  /// Replaces the quarantine with the ingest stage's current view.
  void set_quarantine(std::vector<ingest::ExceptionRecord> records) { quarantine_ = std::move(records); }

  /// Writes dimension files, quarantine and manifest, and flushes the fact log.
  void save();

 private:
  Store(std::filesystem::path dir, std::shared_ptr<const model::ModelIndex> index);

  std::filesystem::path dir_;
  std::unique_ptr<Warehouse> warehouse_;
  std::vector<ingest::ExceptionRecord> quarantine_;
};

}  // namespace rider::warehouse
