#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

#include "rider/model/types.hpp"

namespace rider::model {

/// The document could not be read into the SiteModel shape at all: bad JSON,
/// missing required keys, wrong value types, unknown enum names. Distinct from
/// semantic violations, which validate_model() reports.
class ModelParseError : public std::runtime_error {
 public:
  ModelParseError(std::string path, const std::string& message)
      : std::runtime_error(path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

SiteModel parse_model(std::string_view json_text);
SiteModel model_from_json(const nlohmann::json& doc);
SiteModel load_model(const std::filesystem::path& file);

nlohmann::json to_json(const SiteModel& model);
nlohmann::json expression_to_json(const Expression& e);
Expression expression_from_json(const nlohmann::json& j, const std::string& path);

/// "HH:MM" or "HH:MM:SS"; "24:00" is accepted as end of day.
int parse_time_of_day(std::string_view text, const std::string& path);
std::string format_time_of_day(int seconds);

}  // namespace rider::model
