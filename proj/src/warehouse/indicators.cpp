#include "rider/warehouse/indicators.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace rider::warehouse {

using nlohmann::json;

namespace {

std::vector<std::string> zone_sensor_ids(const Warehouse& wh, const std::string& zone_id, model::SensorKind kind) {
  std::vector<std::string> out;
  for (const auto* s : wh.index().zone_sensors(zone_id, kind))
    if (!s->is_virtual) out.push_back(s->sensor_id);
  return out;
}

const model::ZoneInfo& require_zone(const Warehouse& wh, const std::string& zone_id) {
  const auto* z = wh.index().zone(zone_id);
  if (!z) throw WarehouseError("unknown zone '" + zone_id + "'");
  return *z;
}

double integrate_steps(const std::vector<Point>& steps, Window w) {
  double acc = 0.0;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const Timestamp end = i + 1 < steps.size() ? steps[i + 1].t : w.to;
    acc += steps[i].value * static_cast<double>((end - steps[i].t).count());
  }
  return acc;
}

}  // namespace

std::vector<Point> zone_temperature_series(const Warehouse& wh, const std::string& zone_id, Window w) {
  require_zone(wh, zone_id);
  std::map<Timestamp, std::pair<double, int>> acc;
  for (const auto& id : zone_sensor_ids(wh, zone_id, model::SensorKind::temperature))
    for (const auto& p : wh.series(id, w.from, w.to)) {
      auto& [sum, n] = acc[p.t];
      sum += p.value;
      ++n;
    }
  std::vector<Point> out;
  out.reserve(acc.size());
  for (const auto& [t, sn] : acc) out.push_back({t, sn.first / sn.second});
  return out;
}

std::vector<Point> zone_valve_steps(const Warehouse& wh, const std::string& zone_id, Window w) {
  require_zone(wh, zone_id);
  const auto valves = zone_sensor_ids(wh, zone_id, model::SensorKind::valve);
  std::map<std::string, double> current;
  std::set<Timestamp> changes{w.from};
  std::map<Timestamp, std::vector<std::pair<std::string, double>>> events;
  for (const auto& v : valves) {
    const auto before = wh.last_at_or_before(v, w.from);
    current[v] = before ? before->value : 0.0;
    for (const auto& p : wh.series(v, w.from, w.to)) {
      events[p.t].push_back({v, p.value});
      changes.insert(p.t);
    }
  }
  std::vector<Point> out;
  for (const auto t : changes) {
    if (auto it = events.find(t); it != events.end())
      for (const auto& [v, value] : it->second) current[v] = value;
    double u = 0.0;
    for (const auto& [v, value] : current) u = std::max(u, value);
    if (out.empty() || out.back().value != u) out.push_back({t, u});
  }
  return out;
}

double heater_on_seconds(const Warehouse& wh, const std::string& zone_id, Window w) {
  return integrate_steps(zone_valve_steps(wh, zone_id, w), w);
}

std::variant<TimeToReach, InsufficientData> time_to_reach(const Warehouse& wh, const std::string& zone_id,
                                                          double target, Window w, double tol) {
  const auto steps = zone_valve_steps(wh, zone_id, w);
  double previous = 0.0;  // opening just before the window
  for (const auto& v : zone_sensor_ids(wh, zone_id, model::SensorKind::valve))
    if (auto p = wh.last_at_or_before(v, w.from - Seconds{1})) previous = std::max(previous, p->value);
  std::optional<Timestamp> start;
  for (const auto& s : steps) {
    if (s.value > 0.0 && previous <= 0.0) {
      start = s.t;
      break;
    }
    previous = s.value;
  }
  if (!start) return InsufficientData{"no heat command in window for zone '" + zone_id + "'"};
  const auto temps = zone_temperature_series(wh, zone_id, w);
  if (temps.empty()) return InsufficientData{"no temperature facts in window for zone '" + zone_id + "'"};
  TimeToReach r{*start, std::nullopt};
  for (const auto& p : temps) {
    if (p.t < *start) continue;
    if (p.value >= target - tol) {
      r.seconds = static_cast<double>((p.t - *start).count());
      break;
    }
  }
  return r;
}

std::variant<PresenceMatrix, InsufficientData> statistical_presence(const Warehouse& wh, const std::string& zone_id,
                                                                    Window w) {
  require_zone(wh, zone_id);
  PresenceMatrix m;
  std::array<std::array<std::size_t, 24>, 7> occupied{};
  std::size_t total = 0;
  for (const auto& id : zone_sensor_ids(wh, zone_id, model::SensorKind::presence))
    for (const auto& p : wh.series(id, w.from, w.to)) {
      const int d = weekday_index(p.t);
      const int h = seconds_of_day(p.t) / 3600;
      ++m.samples[d][h];
      if (p.value >= 0.5) ++occupied[d][h];
      ++total;
    }
  if (total == 0) return InsufficientData{"no presence facts in window for zone '" + zone_id + "'"};
  for (int d = 0; d < 7; ++d)
    for (int h = 0; h < 24; ++h)
      m.fraction[d][h] = m.samples[d][h] ? static_cast<double>(occupied[d][h]) / static_cast<double>(m.samples[d][h]) : 0.0;
  return m;
}

std::vector<Point> baseline_valve_steps(double initial_temperature, const model::SetpointPolicy& policy,
                                        const SavingsParams& p, Window w) {
  std::vector<Point> out;
  double temperature = initial_temperature;
  double u = 0.0;
  const double lo = policy.comfort_setpoint - policy.deadband / 2.0;
  const double hi = policy.comfort_setpoint + policy.deadband / 2.0;
  for (Timestamp t = w.from; t < w.to; t += p.tick) {
    if (temperature < lo) u = 1.0;
    else if (temperature >= hi) u = 0.0;
    if (out.empty() || out.back().value != u) out.push_back({t, u});
    const auto dt = std::min(p.tick, w.to - t);
    temperature = harness::euler_step(temperature, p.outdoor.at(t), p.tau_s, p.gain, u,
                                      static_cast<double>(dt.count()));
  }
  return out;
}

std::variant<Savings, InsufficientData> savings(const Warehouse& wh, const std::string& zone_id,
                                                const SavingsParams& params, Window w) {
  const auto& zone = require_zone(wh, zone_id);
  if (!(params.tau_s > 0.0) || params.tick.count() <= 0)
    return InsufficientData{"savings needs a plant time constant and tick"};
  if (zone_sensor_ids(wh, zone_id, model::SensorKind::valve).empty())
    return InsufficientData{"zone '" + zone_id + "' has no valve history"};
  const auto temps = zone_temperature_series(wh, zone_id, w);
  if (temps.empty()) return InsufficientData{"no temperature facts in window for zone '" + zone_id + "'"};

  Savings s;
  s.baseline_on_seconds = integrate_steps(baseline_valve_steps(temps.front().value, zone.zone->setpoint_policy, params, w), w);
  s.actual_on_seconds = heater_on_seconds(wh, zone_id, w);
  s.baseline_kwh = s.baseline_on_seconds * params.heater_power_w / 3.6e6;
  s.actual_kwh = s.actual_on_seconds * params.heater_power_w / 3.6e6;
  s.saved_kwh = (s.baseline_on_seconds - s.actual_on_seconds) * params.heater_power_w / 3.6e6;
  return s;
}

std::variant<FirstOrderFit, InsufficientData> fit_heating_response(const Warehouse& wh, const std::string& zone_id,
                                                                   Window w) {
  const auto temps = zone_temperature_series(wh, zone_id, w);
  const auto steps = zone_valve_steps(wh, zone_id, w);
  const auto valve_at = [&](Timestamp t) {
    auto it = std::upper_bound(steps.begin(), steps.end(), t, [](Timestamp v, const Point& p) { return v < p.t; });
    return it == steps.begin() ? 0.0 : std::prev(it)->value;
  };
  if (temps.size() < 2) return InsufficientData{"fewer than two temperature samples"};

  std::map<std::int64_t, std::size_t> gaps;
  for (std::size_t i = 0; i + 1 < temps.size(); ++i) ++gaps[(temps[i + 1].t - temps[i].t).count()];
  const auto dt = std::max_element(gaps.begin(), gaps.end(), [](const auto& a, const auto& b) {
                    return a.second < b.second;
                  })->first;

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i + 1 < temps.size(); ++i) {
    if ((temps[i + 1].t - temps[i].t).count() != dt) continue;
    // Only whole intervals at full opening.
    if (valve_at(temps[i].t) < 1.0 || valve_at(temps[i + 1].t - Seconds{1}) < 1.0) continue;
    const double x = temps[i].value, y = temps[i + 1].value;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 3) return InsufficientData{"fewer than three heat-up sample pairs"};
  const double nn = static_cast<double>(n);
  const double den = nn * sxx - sx * sx;
  if (!(std::abs(den) > 1e-12 * std::max(1.0, nn * sxx))) return InsufficientData{"heat-up samples do not vary"};
  const double a = (nn * sxy - sx * sy) / den;
  const double b = (sy - a * sx) / nn;
  if (!(a > 0.0 && a < 1.0)) return InsufficientData{"heat-up response is not first-order stable"};
  FirstOrderFit fit;
  fit.tau_s = -static_cast<double>(dt) / std::log(a);
  fit.t_inf = b / (1.0 - a);
  fit.pairs = n;
  return fit;
}

double setback_closed_form(double tau_s, double t_inf, double target, double lead_s, double frost_guard) {
  return std::max(frost_guard, t_inf - (t_inf - target) * std::exp(lead_s / tau_s));
}

std::variant<Setback, InsufficientData> optimal_setback(const Warehouse& wh, const std::string& zone_id,
                                                        const SetbackParams& params, Window w) {
  const auto& zone = require_zone(wh, zone_id);
  const auto& policy = zone.zone->setpoint_policy;
  Setback s;
  if (params.tau_s && params.t_inf) {
    s.tau_s = *params.tau_s;
    s.t_inf = *params.t_inf;
  } else {
    const auto fit = fit_heating_response(wh, zone_id, w);
    if (const auto* bad = std::get_if<InsufficientData>(&fit)) return *bad;
    const auto& f = std::get<FirstOrderFit>(fit);
    s.tau_s = params.tau_s.value_or(f.tau_s);
    s.t_inf = params.t_inf.value_or(f.t_inf);
  }
  if (!(s.tau_s > 0.0)) return InsufficientData{"time constant must be positive"};
  const double target = params.target.value_or(policy.comfort_setpoint);
  const double frost = params.frost_guard.value_or(policy.frost_guard);
  if (s.t_inf <= target) return InsufficientData{"heating cannot reach the target (T_inf <= target)"};
  s.unclamped = s.t_inf - (s.t_inf - target) * std::exp(params.lead_s / s.tau_s);
  s.setpoint = setback_closed_form(s.tau_s, s.t_inf, target, params.lead_s, frost);
  s.clamped = s.setpoint != s.unclamped;
  return s;
}

json IndicatorResult::to_json() const {
  json j{{"kind", kind},
         {"params", params},
         {"window", {{"from", format_iso8601(window.from)}, {"to", format_iso8601(window.to)}}}};
  if (insufficient) j["insufficient_data"] = *insufficient;
  else j["value"] = value;
  return j;
}

namespace {

template <typename T>
std::optional<T> opt(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<T>();
}

}  // namespace

IndicatorResult compute_indicator(const Warehouse& wh, const std::string& kind, const json& params, Window w,
                                  const harness::HarnessConfig* plant) {
  if (!(w.from < w.to)) throw WarehouseError("indicator window must satisfy from < to");
  const std::string zone = params.value("zone", "");
  if (zone.empty()) throw WarehouseError("indicator needs a zone");
  require_zone(wh, zone);
  IndicatorResult r{kind, params, w, nullptr, std::nullopt};

  if (kind == "time-to-reach") {
    const double target = params.contains("target") ? params["target"].get<double>()
                                                    : wh.index().zone(zone)->zone->setpoint_policy.comfort_setpoint;
    const double tol = params.value("tol", 0.25);
    r.params["target"] = target;
    r.params["tol"] = tol;
    auto out = time_to_reach(wh, zone, target, w, tol);
    if (auto* bad = std::get_if<InsufficientData>(&out)) {
      r.insufficient = bad->reason;
    } else {
      const auto& t = std::get<TimeToReach>(out);
      r.value = {{"episode_start", format_iso8601(t.episode_start)},
                 {"seconds", t.seconds ? json(*t.seconds) : json(nullptr)},
                 {"unit", "s"}};
    }
  } else if (kind == "statistical-presence") {
    auto out = statistical_presence(wh, zone, w);
    if (auto* bad = std::get_if<InsufficientData>(&out)) {
      r.insufficient = bad->reason;
    } else {
      const auto& m = std::get<PresenceMatrix>(out);
      json rows = json::array();
      json counts = json::array();
      for (int d = 0; d < 7; ++d) {
        rows.push_back(m.fraction[d]);
        counts.push_back(m.samples[d]);
      }
      r.value = {{"matrix", rows}, {"samples", counts}, {"unit", "fraction"}};
    }
  } else if (kind == "savings") {
    SavingsParams p;
    const harness::ZoneSpec* spec = nullptr;
    if (plant) {
      for (const auto& z : plant->zones)
        if (z.zone_id == zone) spec = &z;
      p.outdoor = plant->outdoor;
    }
    p.tau_s = params.value("tau_s", spec ? spec->tau_s : 0.0);
    p.gain = params.value("gain_c_per_s", spec ? spec->gain : 0.0);
    p.heater_power_w = params.value("heater_power_w", spec ? spec->heater_power_w : 0.0);
    p.tick = Seconds{params.value("tick_s", std::int64_t{60})};
    if (params.contains("outdoor")) p.outdoor = harness::OutdoorTrajectory::constant(params["outdoor"].get<double>());
    else if (!plant) p.outdoor = harness::OutdoorTrajectory::constant(10.0);
    r.params["baseline"] = "constant comfort setpoint with deadband hysteresis on the first-order plant";
    r.params["tau_s"] = p.tau_s;
    r.params["gain_c_per_s"] = p.gain;
    r.params["heater_power_w"] = p.heater_power_w;
    r.params["tick_s"] = p.tick.count();
    auto out = savings(wh, zone, p, w);
    if (auto* bad = std::get_if<InsufficientData>(&out)) {
      r.insufficient = bad->reason;
    } else {
      const auto& s = std::get<Savings>(out);
      r.value = {{"saved_kwh", s.saved_kwh},
                 {"baseline_kwh", s.baseline_kwh},
                 {"actual_kwh", s.actual_kwh},
                 {"baseline_on_seconds", s.baseline_on_seconds},
                 {"actual_on_seconds", s.actual_on_seconds},
                 {"unit", "kWh"}};
    }
  } else if (kind == "optimal-setback") {
    SetbackParams p;
    p.target = opt<double>(params, "target");
    p.lead_s = params.value("lead_s", 7200.0);
    p.frost_guard = opt<double>(params, "frost_guard");
    p.tau_s = opt<double>(params, "tau_s");
    p.t_inf = opt<double>(params, "t_inf");
    r.params["lead_s"] = p.lead_s;
    auto out = optimal_setback(wh, zone, p, w);
    if (auto* bad = std::get_if<InsufficientData>(&out)) {
      r.insufficient = bad->reason;
    } else {
      const auto& s = std::get<Setback>(out);
      r.value = {{"setpoint", s.setpoint},
                 {"unclamped", s.unclamped},
                 {"tau_s", s.tau_s},
                 {"t_inf", s.t_inf},
                 {"clamped", s.clamped},
                 {"unit", "degC"}};
    }
  } else {
    throw WarehouseError("unknown indicator '" + kind + "'");
  }
  return r;
}

}  // namespace rider::warehouse
