#pragma once

// Small 2-D convex geometry kernel. Polygons are stored as counter-clockwise
// vertex chains; chains with one or two vertices represent points and
// segments, which are first-class citizens here (reachable sets of single
// states are segments).

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

namespace reachplan {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2() = default;
  constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
  constexpr Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
  constexpr Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
};

constexpr Vec2 operator*(double s, Vec2 v) { return {v.x * s, v.y * s}; }

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double norm_sq(Vec2 a) { return a.x * a.x + a.y * a.y; }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

namespace geom {

// Vertex dedup / collinearity tolerance, in coordinate units. Keeps slivers
// from accumulating over long propagation chains.
inline constexpr double kEps = 1e-9;

using Chain = std::vector<Vec2>;  // CCW convex vertex chain

inline double polygon_area(const Chain& c) {
  if (c.size() < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const Vec2& a = c[i];
    const Vec2& b = c[(i + 1) % c.size()];
    twice += cross(a, b);
  }
  return 0.5 * twice;
}

inline double perimeter(const Chain& c) {
  if (c.size() < 2) return 0.0;
  double p = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i)
    p += distance(c[i], c[(i + 1) % c.size()]);
  return p;
}

// Perpendicular distance of p from the infinite line through a->b,
// positive on the left side.
inline double line_side(Vec2 a, Vec2 b, Vec2 p) {
  const double len = distance(a, b);
  if (len <= kEps) return distance(a, p);
  return cross(b - a, p - a) / len;
}

// Removes duplicate and collinear vertices; may reduce a chain to a segment
// or a point. Treats the chain as cyclic when it has 3+ vertices.
inline Chain normalized(Chain c) {
  // consecutive duplicates
  auto dedup = [](Chain& v) {
    Chain out;
    for (const Vec2& p : v) {
      if (out.empty() || distance(out.back(), p) > kEps) out.push_back(p);
    }
    while (out.size() > 1 && distance(out.front(), out.back()) <= kEps)
      out.pop_back();
    return out;
  };
  c = dedup(c);
  if (c.size() < 3) return c;
  bool changed = true;
  while (changed && c.size() >= 3) {
    changed = false;
    Chain out;
    const std::size_t n = c.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2& prev = c[(i + n - 1) % n];
      const Vec2& cur = c[i];
      const Vec2& next = c[(i + 1) % n];
      if (std::abs(line_side(prev, next, cur)) <= kEps) {
        changed = true;  // cur lies on the prev->next line
        continue;
      }
      out.push_back(cur);
    }
    c = dedup(out);
  }
  return c;
}

// Monotone chain hull, CCW. Collinear points on the hull boundary are
// dropped; exact extreme points are preserved untouched.
inline Chain convex_hull(Chain pts) {
  std::sort(pts.begin(), pts.end(), [](Vec2 a, Vec2 b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](Vec2 a, Vec2 b) {
                          return distance(a, b) <= kEps;
                        }),
            pts.end());
  const std::size_t n = pts.size();
  if (n < 3) return pts;
  Chain hull(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {  // lower
    while (k >= 2 &&
           cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <=
               kEps * distance(pts[i], hull[k - 2]))
      --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = n - 1, t = k + 1; i-- > 0;) {  // upper
    while (k >= t &&
           cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <=
               kEps * distance(pts[i], hull[k - 2]))
      --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return normalized(std::move(hull));
}

// Clips the chain against the half-plane on the left of the directed line
// a->b. Works for degenerate chains; vertices within kEps of the line are
// kept on both sides so adjacent pieces stay closed.
inline Chain clip_left(const Chain& poly, Vec2 a, Vec2 b) {
  if (poly.empty()) return {};
  const double len = distance(a, b);
  if (len <= kEps) return poly;
  const Vec2 d = (b - a) / len;
  auto side = [&](Vec2 p) { return cross(d, p - a); };  // perpendicular dist
  if (poly.size() == 1)
    return side(poly[0]) >= -kEps ? poly : Chain{};
  Chain out;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 cur = poly[i];
    const Vec2 nxt = poly[(i + 1) % n];
    const double dc = side(cur);
    const double dn = side(nxt);
    if (dc >= -kEps) out.push_back(cur);
    if ((dc > kEps && dn < -kEps) || (dc < -kEps && dn > kEps)) {
      const double t = dc / (dc - dn);
      out.push_back(cur + (nxt - cur) * t);
    }
  }
  return normalized(std::move(out));
}

inline bool is_degenerate(const Chain& c) { return c.size() < 3; }

inline Vec2 closest_point_on_segment(Vec2 a, Vec2 b, Vec2 p) {
  const Vec2 d = b - a;
  const double len2 = norm_sq(d);
  if (len2 <= kEps * kEps) return a;
  const double t = std::clamp(dot(p - a, d) / len2, 0.0, 1.0);
  return a + d * t;
}

inline bool contains(const Chain& c, Vec2 p, double tol = kEps) {
  if (c.empty()) return false;
  if (c.size() == 1) return distance(c[0], p) <= tol;
  if (c.size() == 2)
    return distance(closest_point_on_segment(c[0], c[1], p), p) <= tol;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (line_side(c[i], c[(i + 1) % c.size()], p) < -tol) return false;
  }
  return true;
}

// Closest point and Euclidean distance from p to the (closed) chain.
inline std::pair<Vec2, double> closest_point(const Chain& c, Vec2 p) {
  if (c.empty())
    return {Vec2{}, std::numeric_limits<double>::infinity()};
  if (c.size() == 1) return {c[0], distance(c[0], p)};
  if (c.size() >= 3 && contains(c, p, 0.0)) return {p, 0.0};
  Vec2 best = c[0];
  double best_d = std::numeric_limits<double>::infinity();
  const std::size_t n = c.size();
  const std::size_t edges = (n == 2) ? 1 : n;
  for (std::size_t i = 0; i < edges; ++i) {
    const Vec2 q = closest_point_on_segment(c[i], c[(i + 1) % n], p);
    const double d = distance(q, p);
    if (d < best_d) {
      best_d = d;
      best = q;
    }
  }
  return {best, best_d};
}

// Signed distance: positive inside (distance to the boundary), negative
// outside. Degenerate chains have no interior, so values are <= 0.
inline double signed_distance(const Chain& c, Vec2 p) {
  if (c.empty()) return -std::numeric_limits<double>::infinity();
  if (c.size() < 3) return -closest_point(c, p).second;
  double inside = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double s = line_side(c[i], c[(i + 1) % c.size()], p);
    if (s < 0.0) return -closest_point(c, p).second;
    inside = std::min(inside, s);
  }
  return inside;
}

// Convex-convex intersection. Handles every degeneracy combination; the
// result may be a polygon, a segment, a point, or empty.
inline Chain intersect_convex(const Chain& p, const Chain& q) {
  if (p.empty() || q.empty()) return {};
  if (q.size() >= 3) {
    Chain r = p;
    for (std::size_t i = 0; i < q.size() && !r.empty(); ++i)
      r = clip_left(r, q[i], q[(i + 1) % q.size()]);
    return r;
  }
  if (p.size() >= 3) return intersect_convex(q, p);
  // both degenerate
  if (q.size() == 1) return contains(p, q[0]) ? q : Chain{};
  if (p.size() == 1) return contains(q, p[0]) ? p : Chain{};
  // segment vs segment
  const Vec2 r = p[1] - p[0];
  const Vec2 s = q[1] - q[0];
  const double rxs = cross(r, s);
  const Vec2 qp = q[0] - p[0];
  if (std::abs(rxs) > kEps * norm(r) * std::max(norm(s), 1.0)) {
    const double t = cross(qp, s) / rxs;
    const double u = cross(qp, r) / rxs;
    const double tol_t = kEps / std::max(norm(r), kEps);
    const double tol_u = kEps / std::max(norm(s), kEps);
    if (t >= -tol_t && t <= 1.0 + tol_t && u >= -tol_u && u <= 1.0 + tol_u)
      return {p[0] + r * std::clamp(t, 0.0, 1.0)};
    return {};
  }
  // parallel: collinear overlap or nothing
  if (std::abs(cross(qp, r)) > kEps * std::max(norm(r), 1.0)) return {};
  const double rlen2 = norm_sq(r);
  if (rlen2 <= kEps * kEps) return contains(q, p[0]) ? Chain{p[0]} : Chain{};
  double t0 = dot(qp, r) / rlen2;
  double t1 = dot(q[1] - p[0], r) / rlen2;
  if (t0 > t1) std::swap(t0, t1);
  t0 = std::max(t0, 0.0);
  t1 = std::min(t1, 1.0);
  if (t0 > t1 + kEps) return {};
  if (t1 - t0 <= kEps) return {p[0] + r * (0.5 * (t0 + t1))};
  return {p[0] + r * t0, p[0] + r * t1};
}

// Convex difference decomposition: pieces of p outside q, pairwise
// interior-disjoint, each convex. p ∩ q is not part of the output.
inline std::vector<Chain> subtract_convex(const Chain& p, const Chain& q) {
  if (p.empty()) return {};
  if (q.size() < 3) return {p};  // q has empty interior
  std::vector<Chain> out;
  Chain remaining = p;
  for (std::size_t i = 0; i < q.size() && !remaining.empty(); ++i) {
    const Vec2 a = q[i];
    const Vec2 b = q[(i + 1) % q.size()];
    Chain outside = clip_left(remaining, b, a);  // right of a->b
    if (!outside.empty()) out.push_back(std::move(outside));
    remaining = clip_left(remaining, a, b);
  }
  return out;
}

inline Chain translated(Chain c, Vec2 d) {
  for (Vec2& v : c) v += d;
  return c;
}

}  // namespace geom
}  // namespace reachplan
