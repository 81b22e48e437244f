#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rider/field/predicates.hpp"

namespace rider::field {

class DegenerateInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DuplicatePoints : public std::runtime_error {
 public:
  DuplicatePoints(std::string a, std::string b);
  const std::string& first() const { return first_; }
  const std::string& second() const { return second_; }

 private:
  std::string first_;
  std::string second_;
};

struct Vertex {
  std::string id;
  Point2 position;
};

struct Triangulation {
  std::vector<Vertex> vertices;              // sorted by (x, y)
  std::vector<std::array<int, 3>> triangles;  // counter-clockwise, sorted
};

inline constexpr double kDuplicateTolerance = 1e-9;

/// Bowyer-Watson insertion in lexicographic order, with ghost triangles for
/// the hull so no bounding super-triangle is needed. Predicates are exact;
/// cocircular points are resolved by the insertion order (a point on a
/// circumcircle does not break that triangle). The result depends only on
/// the set of (id, position) pairs, not on their input order.
///
/// Throws DegenerateInput for fewer than 3 points or all collinear, and
/// DuplicatePoints naming the first pair closer than kDuplicateTolerance.
Triangulation build_delaunay(std::vector<Vertex> points);

struct Location {
  int triangle = -1;
  std::array<double, 3> weights{};  // for the triangle's vertices, in order
};

/// Barycentric coordinates of p in triangle t, clamped to >= 0 and summing to 1.
std::array<double, 3> barycentric(const Triangulation& tri, int t, Point2 p);

/// The first triangle (in stored order) that contains p, boundary included,
/// or empty when p lies outside the convex hull.
std::optional<Location> locate(const Triangulation& tri, Point2 p);

/// Indices of hull vertices, counter-clockwise.
std::vector<int> convex_hull(const Triangulation& tri);

}  // namespace rider::field
