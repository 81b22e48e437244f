#include "rider/field/predicates.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace rider::field {

namespace {

// Nonoverlapping expansions, least significant component first.
using Expansion = std::vector<double>;

constexpr double kEps = std::numeric_limits<double>::epsilon() / 2.0;  // 2^-53
constexpr double kCcwBound = (3.0 + 16.0 * kEps) * kEps;
constexpr double kIccBound = (10.0 + 96.0 * kEps) * kEps;

inline void two_sum(double a, double b, double& x, double& y) {
  x = a + b;
  const double bv = x - a;
  const double av = x - bv;
  y = (a - av) + (b - bv);
}

inline void two_diff(double a, double b, double& x, double& y) {
  x = a - b;
  const double bv = a - x;
  const double av = x + bv;
  y = (a - av) + (bv - b);
}

inline void two_product(double a, double b, double& x, double& y) {
  x = a * b;
  y = std::fma(a, b, -x);
}

Expansion grow(const Expansion& e, double b) {
  Expansion h;
  h.reserve(e.size() + 1);
  double q = b;
  for (double c : e) {
    double sum, err;
    two_sum(q, c, sum, err);
    if (err != 0.0) h.push_back(err);
    q = sum;
  }
  if (q != 0.0 || h.empty()) h.push_back(q);
  return h;
}

Expansion add(const Expansion& e, const Expansion& f) {
  Expansion h = e;
  for (double c : f) h = grow(h, c);
  return h;
}

Expansion negate(Expansion e) {
  for (double& c : e) c = -c;
  return e;
}

Expansion scale(const Expansion& e, double b) {
  Expansion h;
  if (e.empty()) return h;
  double q, hh;
  two_product(e[0], b, q, hh);
  if (hh != 0.0) h.push_back(hh);
  for (std::size_t i = 1; i < e.size(); ++i) {
    double p1, p0, sum, err;
    two_product(e[i], b, p1, p0);
    two_sum(q, p0, sum, err);
    if (err != 0.0) h.push_back(err);
    two_sum(p1, sum, q, err);
    if (err != 0.0) h.push_back(err);
  }
  if (q != 0.0 || h.empty()) h.push_back(q);
  return h;
}

Expansion mul(const Expansion& e, const Expansion& f) {
  Expansion h{0.0};
  for (double c : f) h = add(h, scale(e, c));
  return h;
}

Expansion diff(double a, double b) {
  double x, y;
  two_diff(a, b, x, y);
  if (y == 0.0) return {x};
  return {y, x};
}

int sign(const Expansion& e) {
  for (auto it = e.rbegin(); it != e.rend(); ++it)
    if (*it != 0.0) return *it > 0.0 ? 1 : -1;
  return 0;
}

int orient2d_exact(Point2 a, Point2 b, Point2 c) {
  const auto acx = diff(a.x, c.x), bcy = diff(b.y, c.y);
  const auto acy = diff(a.y, c.y), bcx = diff(b.x, c.x);
  return sign(add(mul(acx, bcy), negate(mul(acy, bcx))));
}

int incircle_exact(Point2 a, Point2 b, Point2 c, Point2 d) {
  const auto adx = diff(a.x, d.x), ady = diff(a.y, d.y);
  const auto bdx = diff(b.x, d.x), bdy = diff(b.y, d.y);
  const auto cdx = diff(c.x, d.x), cdy = diff(c.y, d.y);
  const auto alift = add(mul(adx, adx), mul(ady, ady));
  const auto blift = add(mul(bdx, bdx), mul(bdy, bdy));
  const auto clift = add(mul(cdx, cdx), mul(cdy, cdy));
  const auto bc = add(mul(bdx, cdy), negate(mul(cdx, bdy)));
  const auto ca = add(mul(cdx, ady), negate(mul(adx, cdy)));
  const auto ab = add(mul(adx, bdy), negate(mul(bdx, ady)));
  return sign(add(add(mul(alift, bc), mul(blift, ca)), mul(clift, ab)));
}

}  // namespace

double orient2d_value(Point2 a, Point2 b, Point2 c) {
  return (a.x - c.x) * (b.y - c.y) - (a.y - c.y) * (b.x - c.x);
}

int orient2d(Point2 a, Point2 b, Point2 c) {
  const double left = (a.x - c.x) * (b.y - c.y);
  const double right = (a.y - c.y) * (b.x - c.x);
  const double det = left - right;
  const double bound = kCcwBound * (std::abs(left) + std::abs(right));
  if (det > bound) return 1;
  if (-det > bound) return -1;
  return orient2d_exact(a, b, c);
}

int incircle(Point2 a, Point2 b, Point2 c, Point2 d) {
  const double adx = a.x - d.x, ady = a.y - d.y;
  const double bdx = b.x - d.x, bdy = b.y - d.y;
  const double cdx = c.x - d.x, cdy = c.y - d.y;
  const double bdxcdy = bdx * cdy, cdxbdy = cdx * bdy;
  const double cdxady = cdx * ady, adxcdy = adx * cdy;
  const double adxbdy = adx * bdy, bdxady = bdx * ady;
  const double alift = adx * adx + ady * ady;
  const double blift = bdx * bdx + bdy * bdy;
  const double clift = cdx * cdx + cdy * cdy;
  const double det = alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) + clift * (adxbdy - bdxady);
  const double permanent = (std::abs(bdxcdy) + std::abs(cdxbdy)) * alift +
                           (std::abs(cdxady) + std::abs(adxcdy)) * blift +
                           (std::abs(adxbdy) + std::abs(bdxady)) * clift;
  const double bound = kIccBound * permanent;
  if (det > bound) return 1;
  if (-det > bound) return -1;
  return incircle_exact(a, b, c, d);
}

}  // namespace rider::field
