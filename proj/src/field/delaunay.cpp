#include "rider/field/delaunay.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace rider::field {

DuplicatePoints::DuplicatePoints(std::string a, std::string b)
    : std::runtime_error("duplicate points '" + a + "' and '" + b + "'"), first_(std::move(a)), second_(std::move(b)) {}

namespace {

constexpr int kGhost = -1;

struct Tri {
  std::array<int, 3> v;
  bool alive = true;
};

class Builder {
 public:
  explicit Builder(const std::vector<Vertex>& vertices) : vs_(vertices) {}

  void run() {
    const int n = static_cast<int>(vs_.size());
    int k = 2;
    while (k < n && orient2d(p(0), p(1), p(k)) == 0) ++k;
    if (k == n) throw DegenerateInput("all points are collinear");
    if (orient2d(p(0), p(1), p(k)) > 0) seed(0, 1, k);
    else seed(0, k, 1);
    for (int i = 2; i < n; ++i)
      if (i != k) insert(i);
  }

  std::vector<std::array<int, 3>> solid() const {
    std::vector<std::array<int, 3>> out;
    for (const auto& t : tris_) {
      if (!t.alive || t.v[0] == kGhost || t.v[1] == kGhost || t.v[2] == kGhost) continue;
      // Rotate so the smallest index comes first; orientation is kept.
      auto v = t.v;
      std::rotate(v.begin(), std::min_element(v.begin(), v.end()), v.end());
      out.push_back(v);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  Point2 p(int i) const { return vs_[static_cast<std::size_t>(i)].position; }

  void seed(int a, int b, int c) {
    add({a, b, c});
    add({b, a, kGhost});
    add({c, b, kGhost});
    add({a, c, kGhost});
  }

  void add(std::array<int, 3> v) {
    // Ghost triangles are kept with the ghost last.
    if (v[0] == kGhost) v = {v[1], v[2], v[0]};
    else if (v[1] == kGhost) v = {v[2], v[0], v[1]};
    const int id = static_cast<int>(tris_.size());
    tris_.push_back({v, true});
    for (int e = 0; e < 3; ++e) edges_[{v[e], v[(e + 1) % 3]}] = id;
  }

  void remove(int id) {
    auto& t = tris_[static_cast<std::size_t>(id)];
    t.alive = false;
    for (int e = 0; e < 3; ++e) {
      auto it = edges_.find({t.v[e], t.v[(e + 1) % 3]});
      if (it != edges_.end() && it->second == id) edges_.erase(it);
    }
  }

  bool conflicts(int id, int q) const {
    const auto& v = tris_[static_cast<std::size_t>(id)].v;
    if (v[2] == kGhost) {
      // Solid side lies to the right of v0 -> v1.
      const int o = orient2d(p(v[0]), p(v[1]), p(q));
      if (o > 0) return true;
      if (o < 0) return false;
      const Point2 a = p(v[0]), b = p(v[1]), x = p(q);
      return (x.x - a.x) * (x.x - b.x) + (x.y - a.y) * (x.y - b.y) < 0.0;
    }
    return incircle(p(v[0]), p(v[1]), p(v[2]), p(q)) > 0;
  }

  void insert(int q) {
    int start = -1;
    for (int id = 0; id < static_cast<int>(tris_.size()) && start < 0; ++id)
      if (tris_[static_cast<std::size_t>(id)].alive && tris_[static_cast<std::size_t>(id)].v[2] == kGhost &&
          conflicts(id, q))
        start = id;
    if (start < 0) throw std::logic_error("inserted point sees no hull edge");

    std::vector<int> cavity{start};
    std::vector<char> in_cavity(tris_.size(), 0);
    in_cavity[static_cast<std::size_t>(start)] = 1;
    for (std::size_t i = 0; i < cavity.size(); ++i) {
      const auto v = tris_[static_cast<std::size_t>(cavity[i])].v;
      for (int e = 0; e < 3; ++e) {
        auto it = edges_.find({v[(e + 1) % 3], v[e]});
        if (it == edges_.end()) continue;
        const int nb = it->second;
        if (in_cavity[static_cast<std::size_t>(nb)] || !conflicts(nb, q)) continue;
        in_cavity[static_cast<std::size_t>(nb)] = 1;
        cavity.push_back(nb);
      }
    }

    std::vector<std::array<int, 2>> boundary;
    for (int id : cavity) {
      const auto v = tris_[static_cast<std::size_t>(id)].v;
      for (int e = 0; e < 3; ++e) {
        auto it = edges_.find({v[(e + 1) % 3], v[e]});
        if (it != edges_.end() && in_cavity[static_cast<std::size_t>(it->second)]) continue;
        boundary.push_back({v[e], v[(e + 1) % 3]});
      }
    }
    for (int id : cavity) remove(id);
    for (const auto& [a, b] : boundary) {
      if (a != kGhost && b != kGhost && orient2d(p(a), p(b), p(q)) <= 0)
        throw std::logic_error("cavity is not star-shaped");
      add({a, b, q});
    }
  }

  const std::vector<Vertex>& vs_;
  std::vector<Tri> tris_;
  std::map<std::pair<int, int>, int> edges_;
};

}  // namespace

Triangulation build_delaunay(std::vector<Vertex> points) {
  if (points.size() < 3) throw DegenerateInput("need at least 3 points, got " + std::to_string(points.size()));
  for (const auto& v : points)
    if (!std::isfinite(v.position.x) || !std::isfinite(v.position.y))
      throw DegenerateInput("point '" + v.id + "' is not finite");
  std::sort(points.begin(), points.end(), [](const Vertex& a, const Vertex& b) {
    if (a.position.x != b.position.x) return a.position.x < b.position.x;
    if (a.position.y != b.position.y) return a.position.y < b.position.y;
    return a.id < b.id;
  });
  // Points closer than the tolerance have x within it; scan that band only.
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      const double dx = points[j].position.x - points[i].position.x;
      if (dx > kDuplicateTolerance) break;
      const double dy = points[j].position.y - points[i].position.y;
      if (std::hypot(dx, dy) <= kDuplicateTolerance) {
        const bool ordered = points[i].id <= points[j].id;
        throw DuplicatePoints(ordered ? points[i].id : points[j].id, ordered ? points[j].id : points[i].id);
      }
    }

  Triangulation tri;
  tri.vertices = std::move(points);
  Builder builder(tri.vertices);
  builder.run();
  tri.triangles = builder.solid();
  return tri;
}

std::array<double, 3> barycentric(const Triangulation& tri, int t, Point2 p) {
  const auto& v = tri.triangles[static_cast<std::size_t>(t)];
  const Point2 a = tri.vertices[static_cast<std::size_t>(v[0])].position;
  const Point2 b = tri.vertices[static_cast<std::size_t>(v[1])].position;
  const Point2 c = tri.vertices[static_cast<std::size_t>(v[2])].position;
  const double area = orient2d_value(a, b, c);
  std::array<double, 3> w{orient2d_value(p, b, c) / area, orient2d_value(a, p, c) / area,
                          orient2d_value(a, b, p) / area};
  double sum = 0.0;
  for (double& x : w) {
    x = std::max(0.0, x);
    sum += x;
  }
  for (double& x : w) x /= sum;
  return w;
}

std::optional<Location> locate(const Triangulation& tri, Point2 p) {
  for (std::size_t t = 0; t < tri.triangles.size(); ++t) {
    const auto& v = tri.triangles[t];
    const Point2 a = tri.vertices[static_cast<std::size_t>(v[0])].position;
    const Point2 b = tri.vertices[static_cast<std::size_t>(v[1])].position;
    const Point2 c = tri.vertices[static_cast<std::size_t>(v[2])].position;
    if (p.x < std::min({a.x, b.x, c.x}) || p.x > std::max({a.x, b.x, c.x}) || p.y < std::min({a.y, b.y, c.y}) ||
        p.y > std::max({a.y, b.y, c.y}))
      continue;
    if (orient2d(a, b, p) >= 0 && orient2d(b, c, p) >= 0 && orient2d(c, a, p) >= 0)
      return Location{static_cast<int>(t), barycentric(tri, static_cast<int>(t), p)};
  }
  return std::nullopt;
}

std::vector<int> convex_hull(const Triangulation& tri) {
  // Directed edges with no reverse twin are hull edges, interior on the left.
  std::map<std::pair<int, int>, int> count;
  for (const auto& t : tri.triangles)
    for (int e = 0; e < 3; ++e) count[{t[e], t[(e + 1) % 3]}] = 1;
  std::map<int, int> next;
  for (const auto& [edge, one] : count)
    if (!count.count({edge.second, edge.first})) next[edge.first] = edge.second;
  std::vector<int> hull;
  if (next.empty()) return hull;
  const int start = next.begin()->first;
  int cur = start;
  do {
    hull.push_back(cur);
    cur = next.at(cur);
  } while (cur != start && hull.size() <= next.size());
  return hull;
}

}  // namespace rider::field
