#pragma once

#include <filesystem>
#include <memory>
#include <random>
#include <string>

#include "rider/common/time.hpp"
#include "rider/model/index.hpp"
#include "rider/model/json_io.hpp"

namespace test {

inline std::filesystem::path data_dir() { return RIDER_DATA_DIR; }

inline rider::Timestamp ts(const std::string& text) { return *rider::parse_iso8601(text); }

inline rider::model::SiteModel site() { return rider::model::load_model(data_dir() / "site.json"); }

inline std::shared_ptr<const rider::model::ModelIndex> site_index() {
  return std::make_shared<rider::model::ModelIndex>(site());
}

/// A fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("rider-" + tag + "-" + std::to_string(rd()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace test
