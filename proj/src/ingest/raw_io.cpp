#include "rider/ingest/raw_io.hpp"

#include <stdexcept>

namespace rider::ingest {

using nlohmann::json;

RawRecord parse_raw_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (fields.size() < 3) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) break;
    fields.emplace_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  fields.emplace_back(line.substr(start));
  fields.resize(4);
  return RawRecord{fields[1], fields[0], fields[2], fields[3]};
}

std::string format_raw_line(const RawRecord& r) {
  return r.timestamp_text + "," + r.source_address + "," + r.value_text + "," + r.unit_text;
}

std::vector<RawRecord> read_raw_csv(std::istream& in) {
  std::vector<RawRecord> out;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (first && line.rfind("timestamp,", 0) == 0) {
      first = false;
      continue;
    }
    first = false;
    out.push_back(parse_raw_line(line));
  }
  return out;
}

void write_raw_csv(std::ostream& out, const std::vector<RawRecord>& records, bool header) {
  if (header) out << "timestamp,source_address,value,unit\n";
  for (const auto& r : records) out << format_raw_line(r) << '\n';
}

json to_json(const ExceptionRecord& e) {
  json j{{"raw",
           {{"source_address", e.raw().source_address},
            {"timestamp", e.raw().timestamp_text},
            {"value", e.raw().value_text},
            {"unit", e.raw().unit_text}}},
         {"class", std::string(to_string(e.exception_class()))},
         {"disposition", std::string(to_string(e.disposition()))},
         {"first_seen", format_iso8601(e.first_seen())},
         {"rules_version", e.rules_version}};
  if (e.sensor_id) j["sensor_id"] = *e.sensor_id;
  if (e.canonical_value) j["canonical_value"] = *e.canonical_value;
  return j;
}

ExceptionRecord exception_from_json(const json& j) {
  const auto& raw = j.at("raw");
  RawRecord r{raw.at("source_address").get<std::string>(), raw.at("timestamp").get<std::string>(),
              raw.at("value").get<std::string>(), raw.at("unit").get<std::string>()};
  const auto cls = parse_exception_class(j.at("class").get<std::string>());
  const auto first_seen = parse_iso8601(j.at("first_seen").get<std::string>());
  if (!cls || !first_seen) throw std::runtime_error("malformed quarantine entry");
  ExceptionRecord e(std::move(r), *cls, *first_seen);
  const auto disp = parse_disposition(j.value("disposition", "dismissed"));
  if (!disp) throw std::runtime_error("malformed quarantine disposition");
  if (*disp == Disposition::reintegrated && !e.transition(Disposition::reintegrated))
    throw std::runtime_error("illegal disposition");
  if (*disp == Disposition::rule_update_candidate) e.transition(Disposition::rule_update_candidate);
  e.rules_version = j.value("rules_version", std::uint64_t{0});
  if (j.contains("sensor_id")) e.sensor_id = j["sensor_id"].get<std::string>();
  if (j.contains("canonical_value")) e.canonical_value = j["canonical_value"].get<double>();
  e.timestamp = parse_iso8601(e.raw().timestamp_text);
  return e;
}

void write_quarantine(std::ostream& out, const std::vector<ExceptionRecord>& records) {
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

std::vector<ExceptionRecord> read_quarantine(std::istream& in) {
  std::vector<ExceptionRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(exception_from_json(json::parse(line)));
  }
  return out;
}

}  // namespace rider::ingest
