#pragma once

#include <string>

#include "rider/common/time.hpp"

namespace rider {

/// One timestamped sensor value in the canonical unit of the sensor's kind.
struct Measure {
  std::string sensor_id;
  Timestamp timestamp;
  double value = 0.0;

  friend bool operator==(const Measure&, const Measure&) = default;
};

}  // namespace rider
