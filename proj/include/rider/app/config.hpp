#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rider/common/time.hpp"

namespace rider::app {

/// A configuration or input file failed validation before anything ran.
class ValidationFailure : public std::runtime_error {
 public:
  ValidationFailure(std::string what, std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

struct PipelineConfig {
  std::filesystem::path model;
  std::filesystem::path rules;           // integration rules for ingest
  std::filesystem::path harness;
  std::filesystem::path scenario_rules;  // optional custom rules, empty for none
  std::filesystem::path store;           // empty runs in memory
  Seconds tick{60};
  Seconds horizon{86400};
  Seconds align{120};  // input window for virtual sensors
  std::optional<int> port;

  std::int64_t ticks() const { return (horizon.count() + tick.count() - 1) / tick.count(); }
};

/// Relative paths resolve against `base` (the config file's directory).
PipelineConfig pipeline_config_from_json(const nlohmann::json& j, const std::filesystem::path& base);
PipelineConfig load_pipeline_config(const std::filesystem::path& file);

}  // namespace rider::app
