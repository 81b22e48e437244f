#include "rider/ingest/drift.hpp"

#include <cmath>

namespace rider::ingest {

Profile compute_profile(std::span<const double> history) {
  Profile p;
  p.samples = history.size();
  if (history.empty()) return p;
  double sum = 0.0;
  for (double v : history) sum += v;
  p.mean = sum / static_cast<double>(history.size());
  if (history.size() > 1) {
    double ss = 0.0;
    for (double v : history) ss += (v - p.mean) * (v - p.mean);
    p.sigma = std::sqrt(ss / static_cast<double>(history.size() - 1));
  }
  return p;
}

DriftResult detect_drift(const std::string& sensor_id, model::SensorKind kind,
                         std::span<const double> recent, const Profile& profile,
                         const DriftParams& params) {
  const std::size_t w = params.window_size;
  if (w == 0) return NotEnoughData{"window_size must be positive", 0, 1};
  if (profile.samples < 10 * w) return NotEnoughData{"profile history", profile.samples, 10 * w};
  if (recent.size() < w) return NotEnoughData{"recent window", recent.size(), w};

  DriftVerdict v;
  v.sensor_id = sensor_id;
  v.kind = kind;
  v.profile_mean = profile.mean;
  v.profile_sigma = profile.sigma;

  const std::size_t windows = recent.size() / w;
  for (std::size_t i = 0; i < windows; ++i) {
    const auto end = recent.size() - i * w;
    double sum = 0.0;
    for (std::size_t j = end - w; j < end; ++j) sum += recent[j];
    const double mean = sum / static_cast<double>(w);
    if (i == 0) v.window_mean = mean;
    if (!window_deviates(mean, profile, params.k)) break;
    ++v.consecutive_windows;
  }
  v.verdict = v.consecutive_windows >= params.consecutive ? DriftState::drift : DriftState::none;
  return v;
}

DriftMonitor::DriftMonitor(std::string sensor_id, model::SensorKind kind, DriftParams params,
                           std::size_t profile_samples)
    : sensor_id_(std::move(sensor_id)),
      kind_(kind),
      params_(params),
      profile_samples_(profile_samples ? profile_samples : 10 * params.window_size) {}

std::optional<DriftVerdict> DriftMonitor::push(double value) {
  if (!profile_) {
    history_.push_back(value);
    if (history_.size() >= profile_samples_) {
      profile_ = compute_profile(history_);
      history_.clear();
      history_.shrink_to_fit();
    }
    return std::nullopt;
  }

  recent_.push_back(value);
  const std::size_t capacity = params_.window_size * params_.consecutive;
  while (recent_.size() > capacity) recent_.pop_front();
  if (++fill_ < params_.window_size) return std::nullopt;
  fill_ = 0;
  ++windows_seen_;

  const std::vector<double> buffer(recent_.begin(), recent_.end());
  auto result = detect_drift(sensor_id_, kind_, buffer, *profile_, params_);
  auto* verdict = std::get_if<DriftVerdict>(&result);
  if (!verdict || verdict->verdict != DriftState::drift) return std::nullopt;

  profile_->mean = verdict->window_mean;
  recent_.clear();
  return *verdict;
}

}  // namespace rider::ingest
