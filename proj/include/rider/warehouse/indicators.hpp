#pragma once

#include <array>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "rider/harness/plant.hpp"
#include "rider/warehouse/warehouse.hpp"

namespace rider::warehouse {

struct Window {
  Timestamp from;
  Timestamp to;  // exclusive
};

struct InsufficientData {
  std::string reason;
};

/// Mean of the zone's temperature sensors at each timestamp where at least
/// one of them has a fact, ascending.
std::vector<Point> zone_temperature_series(const Warehouse& wh, const std::string& zone_id, Window w);

/// Zone valve opening as a step function: the maximum over the zone's valves
/// of each valve's latest setting, evaluated at every change point in the
/// window. The first point is at w.from.
std::vector<Point> zone_valve_steps(const Warehouse& wh, const std::string& zone_id, Window w);

/// Integral of the valve step function over the window, in seconds at full opening.
double heater_on_seconds(const Warehouse& wh, const std::string& zone_id, Window w);

struct TimeToReach {
  Timestamp episode_start;
  std::optional<double> seconds;  // empty if the target was never reached in the window
};

/// The episode starts at the first valve opening in the window; the result is
/// the time until the zone temperature first reaches target - tol.
std::variant<TimeToReach, InsufficientData> time_to_reach(const Warehouse& wh, const std::string& zone_id,
                                                          double target, Window w, double tol = 0.25);

struct PresenceMatrix {
  std::array<std::array<double, 24>, 7> fraction{};  // [weekday][hour]
  std::array<std::array<std::size_t, 24>, 7> samples{};
};

std::variant<PresenceMatrix, InsufficientData> statistical_presence(const Warehouse& wh, const std::string& zone_id,
                                                                    Window w);

struct SavingsParams {
  double tau_s = 3600.0;
  double gain = 0.0;
  double heater_power_w = 0.0;
  harness::OutdoorTrajectory outdoor;
  Seconds tick{60};
};

struct Savings {
  double baseline_kwh = 0.0;
  double actual_kwh = 0.0;
  double saved_kwh = 0.0;
  double baseline_on_seconds = 0.0;
  double actual_on_seconds = 0.0;
};

/// The baseline heats to the comfort setpoint around the clock, with the
/// zone's deadband as hysteresis, on the plant model from the recorded zone
/// temperature at the window start.
std::vector<Point> baseline_valve_steps(double initial_temperature, const model::SetpointPolicy& policy,
                                        const SavingsParams& p, Window w);

std::variant<Savings, InsufficientData> savings(const Warehouse& wh, const std::string& zone_id,
                                                const SavingsParams& params, Window w);

struct FirstOrderFit {
  double tau_s = 0.0;
  double t_inf = 0.0;
  std::size_t pairs = 0;
};

/// Least squares on consecutive zone temperature pairs taken while the valve
/// is fully open: T[k+1] = a*T[k] + b, tau = -dt/ln(a), T_inf = b/(1 - a).
std::variant<FirstOrderFit, InsufficientData> fit_heating_response(const Warehouse& wh, const std::string& zone_id,
                                                                   Window w);

/// max(frost, T_inf - (T_inf - target) * exp(lead/tau)).
double setback_closed_form(double tau_s, double t_inf, double target, double lead_s, double frost_guard);

struct SetbackParams {
  std::optional<double> target;  // defaults to the zone's comfort setpoint
  double lead_s = 7200.0;
  std::optional<double> frost_guard;
  std::optional<double> tau_s;  // overrides the fitted values
  std::optional<double> t_inf;
};

struct Setback {
  double setpoint = 0.0;
  double unclamped = 0.0;
  double tau_s = 0.0;
  double t_inf = 0.0;
  bool clamped = false;
};

std::variant<Setback, InsufficientData> optimal_setback(const Warehouse& wh, const std::string& zone_id,
                                                        const SetbackParams& params, Window w);

/// Uniform JSON form of every indicator:
/// {kind, params, window {from, to}, value | insufficient_data}.
struct IndicatorResult {
  std::string kind;
  nlohmann::json params;
  Window window;
  nlohmann::json value;
  std::optional<std::string> insufficient;

  nlohmann::json to_json() const;
};

/// `kind` is time-to-reach, statistical-presence, savings or optimal-setback.
/// params: zone (required); target, tol; lead_s, frost_guard, tau_s, t_inf;
/// for savings tau_s, gain, heater_power_w, tick_s and an outdoor value or
/// trajectory, which `plant` fills in when given.
IndicatorResult compute_indicator(const Warehouse& wh, const std::string& kind, const nlohmann::json& params,
                                  Window w, const harness::HarnessConfig* plant = nullptr);

}  // namespace rider::warehouse
