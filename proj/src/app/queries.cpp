#include "rider/app/queries.hpp"

#include <charconv>
#include <stdexcept>

#include "rider/ingest/raw_io.hpp"

namespace rider::app {

using nlohmann::json;

json sensors_json(const model::ModelIndex& index) {
  json out = json::array();
  for (const auto& s : index.sensors()) {
    out.push_back({{"sensor_id", s.sensor_id},
                   {"kind", std::string(model::to_string(s.kind))},
                   {"unit", std::string(model::canonical_unit(s.kind))},
                   {"building_id", s.building_id},
                   {"zone_id", s.zone_id},
                   {"position", {s.position.x, s.position.y, s.position.z}},
                   {"raw_address", s.raw_address},
                   {"is_virtual", s.is_virtual},
                   {"is_actuator", s.is_actuator}});
  }
  return out;
}

json measures_json(const warehouse::Warehouse& wh, const std::string& sensor_id, Timestamp from, Timestamp to,
                   warehouse::Aggregation agg) {
  warehouse::Filter f;
  f.sensor_ids = {sensor_id};
  if (!wh.index().sensor(sensor_id)) throw std::invalid_argument("unknown sensor '" + sensor_id + "'");
  const auto series = wh.query(f, from, to, agg);
  json points = json::array();
  for (const auto& s : series)
    for (const auto& p : s.points) points.push_back({{"t", format_iso8601(p.t)}, {"value", p.value}});
  return {{"sensor_id", sensor_id},
          {"from", format_iso8601(from)},
          {"to", format_iso8601(to)},
          {"agg", std::string(warehouse::to_string(agg))},
          {"points", points}};
}

json exceptions_json(const std::vector<ingest::ExceptionRecord>& quarantine,
                     std::optional<ingest::ExceptionClass> only) {
  json out = json::array();
  for (const auto& e : quarantine)
    if (!only || e.exception_class() == *only) out.push_back(ingest::to_json(e));
  return out;
}

std::array<std::uint32_t, 3> parse_resolution(const std::string& text) {
  std::array<std::uint32_t, 3> r{};
  const char* p = text.data();
  const char* end = text.data() + text.size();
  for (int axis = 0; axis < 3; ++axis) {
    if (axis > 0) {
      if (p == end || (*p != 'x' && *p != 'X')) throw std::invalid_argument("resolution must look like 50x50x1");
      ++p;
    }
    auto [next, ec] = std::from_chars(p, end, r[axis]);
    if (ec != std::errc() || r[axis] == 0) throw std::invalid_argument("resolution must look like 50x50x1");
    p = next;
  }
  if (p != end) throw std::invalid_argument("resolution must look like 50x50x1");
  return r;
}

field::ScalarField field_at(const warehouse::Warehouse& wh, Timestamp t, double slice_z, field::Mode mode,
                            std::array<std::uint32_t, 3> res, Seconds align) {
  std::vector<field::SensorSample> samples;
  for (const auto& s : wh.index().sensors()) {
    if (s.is_virtual || s.kind != model::SensorKind::temperature) continue;
    if (auto m = wh.latest_in(s.sensor_id, t, align)) samples.push_back({s.sensor_id, s.position, m->value});
  }
  if (samples.empty()) throw field::FieldError("no temperature facts within " + std::to_string(align.count()) +
                                               " s before " + format_iso8601(t));
  const auto grid = field::ParticleGrid::from_box(wh.index().site_bounds(), res[0], res[1], res[2]);
  return field::interpolate(grid, samples, mode, slice_z);
}

json field_json(const field::ScalarField& f) {
  json provenance = json::array();
  for (auto p : f.provenance) provenance.push_back(std::string(field::to_string(p)));
  json j{{"grid",
          {{"origin", {f.grid.origin.x, f.grid.origin.y, f.grid.origin.z}},
           {"spacing", {f.grid.spacing.x, f.grid.spacing.y, f.grid.spacing.z}},
           {"nx", f.grid.nx},
           {"ny", f.grid.ny},
           {"nz", f.grid.nz}}},
         {"mode", std::string(field::to_string(f.mode))},
         {"slice_height", f.slice_height},
         {"values", f.values},
         {"provenance", provenance}};
  if (f.fallback_reason) j["fallback_reason"] = *f.fallback_reason;
  return j;
}

Timestamp require_time(const std::string& text) {
  auto t = parse_iso8601(text);
  if (!t) throw std::invalid_argument("not an ISO-8601 UTC timestamp: '" + text + "'");
  return *t;
}

}  // namespace rider::app

namespace rider::app {

nlohmann::json indicator_params(const std::vector<std::pair<std::string, std::string>>& pairs) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [key, text] : pairs) {
    double v = 0.0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec == std::errc() && end == text.data() + text.size())
      j[key] = v;
    else
      j[key] = text;
  }
  return j;
}

}  // namespace rider::app
