#include "rider/app/config.hpp"

#include <fstream>

namespace rider::app {

namespace fs = std::filesystem;

ValidationFailure::ValidationFailure(std::string what, std::vector<std::string> problems)
    : std::runtime_error([&] {
        std::string text = what;
        for (const auto& p : problems) text += "\n  " + p;
        return text;
      }()),
      problems_(std::move(problems)) {}

namespace {

fs::path resolve(const nlohmann::json& j, const char* key, const fs::path& base, bool required,
                 std::vector<std::string>& problems) {
  if (!j.contains(key)) {
    if (required) problems.push_back(std::string("missing '") + key + "'");
    return {};
  }
  if (!j[key].is_string()) {
    problems.push_back(std::string("'") + key + "' must be a path string");
    return {};
  }
  fs::path p = j[key].get<std::string>();
  return p.is_absolute() ? p : (base / p).lexically_normal();
}

}  // namespace

PipelineConfig pipeline_config_from_json(const nlohmann::json& j, const fs::path& base) {
  if (!j.is_object()) throw ValidationFailure("pipeline config", {"expected a JSON object"});
  std::vector<std::string> problems;
  PipelineConfig c;
  c.model = resolve(j, "model", base, true, problems);
  c.rules = resolve(j, "rules", base, true, problems);
  c.harness = resolve(j, "harness", base, true, problems);
  c.scenario_rules = resolve(j, "scenario_rules", base, false, problems);
  c.store = resolve(j, "store", base, false, problems);
  try {
    c.tick = Seconds{j.value("tick_s", std::int64_t{60})};
    c.horizon = Seconds{j.value("horizon_s", std::int64_t{86400})};
    c.align = Seconds{j.value("align_s", std::int64_t{120})};
    if (j.contains("port")) c.port = j["port"].get<int>();
  } catch (const nlohmann::json::exception& e) {
    problems.push_back(e.what());
  }
  if (c.tick.count() <= 0) problems.push_back("tick_s must be positive");
  if (c.horizon.count() <= 0) problems.push_back("horizon_s must be positive");
  if (c.align.count() <= 0) problems.push_back("align_s must be positive");
  if (c.port && (*c.port < 0 || *c.port > 65535)) problems.push_back("port out of range");
  if (!problems.empty()) throw ValidationFailure("pipeline config", problems);
  return c;
}

PipelineConfig load_pipeline_config(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw ValidationFailure("pipeline config", {"cannot open " + file.string()});
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationFailure("pipeline config", {file.string() + ": " + e.what()});
  }
  return pipeline_config_from_json(j, file.parent_path());
}

}  // namespace rider::app
