#pragma once

namespace rider::field {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

/// Sign of the orientation determinant: > 0 when a, b, c turn counter-clockwise,
/// < 0 clockwise, 0 when collinear. Exact for all finite double inputs: a
/// floating-point filter answers most calls, the rest are decided with
/// expansion arithmetic.
int orient2d(Point2 a, Point2 b, Point2 c);

/// > 0 when d lies strictly inside the circle through a, b, c (given
/// counter-clockwise), < 0 outside, 0 on it. Exact, same scheme as orient2d.
int incircle(Point2 a, Point2 b, Point2 c, Point2 d);

/// The plain floating-point determinants, for barycentric weights.
double orient2d_value(Point2 a, Point2 b, Point2 c);

}  // namespace rider::field
