#pragma once

#include <cmath>

namespace rider {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Vec3&, const Vec3&) = default;
};

inline double distance_squared(const Vec3& a, const Vec3& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dz = a.z - b.z;
  return dx * dx + dy * dy + dz * dz;
}

/// Axis-aligned cuboid in meters.
struct Box {
  Vec3 min;
  Vec3 max;

  bool well_formed() const { return min.x < max.x && min.y < max.y && min.z < max.z; }

  /// Closed containment: points on a face count as inside.
  bool contains(const Vec3& p) const {
    return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y && p.z >= min.z &&
           p.z <= max.z;
  }

  /// True when the interiors intersect; boxes sharing only a face do not overlap.
  bool overlaps(const Box& o) const {
    return min.x < o.max.x && o.min.x < max.x && min.y < o.max.y && o.min.y < max.y &&
           min.z < o.max.z && o.min.z < max.z;
  }

  friend bool operator==(const Box&, const Box&) = default;
};

}  // namespace rider
