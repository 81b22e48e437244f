#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <variant>

#include "rider/model/types.hpp"

namespace rider::ingest {

/// Historical behaviour of one sensor.
struct Profile {
  double mean = 0.0;
  double sigma = 0.0;  // sample standard deviation
  std::size_t samples = 0;
};

Profile compute_profile(std::span<const double> history);

struct DriftParams {
  double k = 3.0;
  std::size_t window_size = 60;
  std::size_t consecutive = 3;  // M
};

enum class DriftState { none, drift };

struct DriftVerdict {
  std::string sensor_id;
  model::SensorKind kind = model::SensorKind::temperature;
  double window_mean = 0.0;  // latest full window
  double profile_mean = 0.0;
  double profile_sigma = 0.0;
  std::size_t consecutive_windows = 0;
  DriftState verdict = DriftState::none;
};

struct NotEnoughData {
  std::string what;
  std::size_t have = 0;
  std::size_t need = 0;
};

using DriftResult = std::variant<DriftVerdict, NotEnoughData>;

/// The deviation predicate on one window mean.
inline bool window_deviates(double window_mean, const Profile& profile, double k) {
  const double d = window_mean - profile.mean;
  return (d < 0 ? -d : d) > k * profile.sigma;
}

/// Splits the tail of `recent` into back-to-back windows of window_size
/// samples, aligned to its end, and counts how many trailing windows deviate.
/// The verdict is drift when that count reaches params.consecutive.
/// Needs a profile built from at least 10 windows of history and one full
/// recent window; otherwise returns NotEnoughData.
DriftResult detect_drift(const std::string& sensor_id, model::SensorKind kind,
                         std::span<const double> recent, const Profile& profile,
                         const DriftParams& params);

/// Streaming form of detect_drift for one sensor: learns the profile from the
/// first `profile_samples` values, then evaluates at each window boundary.
/// After a drift verdict the profile is recentred on the drifted window mean
/// so the new regime becomes the reference.
class DriftMonitor {
 public:
  DriftMonitor(std::string sensor_id, model::SensorKind kind, DriftParams params,
               std::size_t profile_samples = 0);

  /// Returns a verdict only when the value completes a window and drift fires.
  std::optional<DriftVerdict> push(double value);

  bool profiled() const { return profile_.has_value(); }
  const std::optional<Profile>& profile() const { return profile_; }
  std::size_t windows_seen() const { return windows_seen_; }

 private:
  std::string sensor_id_;
  model::SensorKind kind_;
  DriftParams params_;
  std::size_t profile_samples_;
  std::vector<double> history_;
  std::optional<Profile> profile_;
  std::deque<double> recent_;
  std::size_t fill_ = 0;
  std::size_t windows_seen_ = 0;
};

}  // namespace rider::ingest
