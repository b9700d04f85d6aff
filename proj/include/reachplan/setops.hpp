#pragma once

// Set arithmetic on regions of longitudinal position-velocity space.
// A region is a finite union of convex polygons; forward and backward
// propagation map each part exactly, so soundness never depends on an
// over-approximation step.

#include <array>
#include <limits>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "reachplan/geometry.hpp"

namespace reachplan {

struct PVPoint {
  double xi = 0.0;  // longitudinal position [m]
  double v = 0.0;   // velocity [m/s]

  constexpr PVPoint() = default;
  constexpr PVPoint(double xi_, double v_) : xi(xi_), v(v_) {}
  constexpr Vec2 vec() const { return {xi, v}; }
};

struct PVBox {
  double xi_lo = 0.0, xi_hi = 0.0;
  double v_lo = 0.0, v_hi = 0.0;

  bool valid() const { return xi_lo <= xi_hi && v_lo <= v_hi; }
  double width() const { return xi_hi - xi_lo; }
  double height() const { return v_hi - v_lo; }
  bool contains(PVPoint p, double tol = 0.0) const {
    return p.xi >= xi_lo - tol && p.xi <= xi_hi + tol && p.v >= v_lo - tol &&
           p.v <= v_hi + tol;
  }
  geom::Chain chain() const {
    if (width() <= geom::kEps && height() <= geom::kEps)
      return {Vec2{xi_lo, v_lo}};
    if (width() <= geom::kEps) return {Vec2{xi_lo, v_lo}, Vec2{xi_lo, v_hi}};
    if (height() <= geom::kEps) return {Vec2{xi_lo, v_lo}, Vec2{xi_hi, v_lo}};
    return {Vec2{xi_lo, v_lo}, Vec2{xi_hi, v_lo}, Vec2{xi_hi, v_hi},
            Vec2{xi_lo, v_hi}};
  }
};

struct ConvexPoly {
  geom::Chain verts;  // CCW

  ConvexPoly() = default;
  explicit ConvexPoly(geom::Chain c) : verts(std::move(c)) {}

  bool empty() const { return verts.empty(); }
  double area() const { return geom::polygon_area(verts); }
  bool degenerate() const { return verts.size() < 3; }

  PVBox bounds() const {
    PVBox b{std::numeric_limits<double>::infinity(),
            -std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity(),
            -std::numeric_limits<double>::infinity()};
    for (const Vec2& p : verts) {
      b.xi_lo = std::min(b.xi_lo, p.x);
      b.xi_hi = std::max(b.xi_hi, p.x);
      b.v_lo = std::min(b.v_lo, p.y);
      b.v_hi = std::max(b.v_hi, p.y);
    }
    return b;
  }
};

struct PVRegion {
  std::vector<ConvexPoly> parts;  // pairwise interior-disjoint

  PVRegion() = default;
  explicit PVRegion(ConvexPoly p) {
    if (!p.empty()) parts.push_back(std::move(p));
  }
  static PVRegion point(PVPoint z) {
    return PVRegion{ConvexPoly{{z.vec()}}};
  }
  static PVRegion box(const PVBox& b) { return PVRegion{ConvexPoly{b.chain()}}; }

  bool empty() const { return parts.empty(); }
  double area() const {
    double a = 0.0;
    for (const ConvexPoly& p : parts) a += p.area();
    return a;
  }
  PVBox bounds() const {
    PVBox b{std::numeric_limits<double>::infinity(),
            -std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity(),
            -std::numeric_limits<double>::infinity()};
    for (const ConvexPoly& p : parts) {
      const PVBox pb = p.bounds();
      b.xi_lo = std::min(b.xi_lo, pb.xi_lo);
      b.xi_hi = std::max(b.xi_hi, pb.xi_hi);
      b.v_lo = std::min(b.v_lo, pb.v_lo);
      b.v_hi = std::max(b.v_hi, pb.v_hi);
    }
    return b;
  }
};

namespace setops {

inline constexpr double kAreaEps = 1e-12;

inline bool boxes_overlap(const PVBox& a, const PVBox& b, double tol = 0.0) {
  return a.xi_lo <= b.xi_hi + tol && b.xi_lo <= a.xi_hi + tol &&
         a.v_lo <= b.v_hi + tol && b.v_lo <= a.v_hi + tol;
}

// Drops vanished parts, re-partitions overlapping full-dimensional parts so
// the region invariant (pairwise interior-disjoint) holds, and greedily
// fuses adjacent parts whose union is convex.
inline PVRegion normalize(PVRegion r) {
  std::vector<ConvexPoly> clean;
  clean.reserve(r.parts.size());
  for (ConvexPoly& p : r.parts) {
    p.verts = geom::normalized(std::move(p.verts));
    if (!p.verts.empty()) clean.push_back(std::move(p));
  }

  std::vector<ConvexPoly> out;
  std::vector<PVBox> out_bounds;
  for (ConvexPoly& p : clean) {
    std::vector<geom::Chain> pieces{std::move(p.verts)};
    const PVBox pb = ConvexPoly{pieces.front()}.bounds();
    for (std::size_t i = 0; i < out.size() && !pieces.empty(); ++i) {
      if (out[i].degenerate() || !boxes_overlap(pb, out_bounds[i], geom::kEps))
        continue;
      std::vector<geom::Chain> next;
      for (geom::Chain& piece : pieces) {
        for (geom::Chain& q : geom::subtract_convex(piece, out[i].verts))
          next.push_back(std::move(q));
      }
      pieces = std::move(next);
    }
    for (geom::Chain& piece : pieces) {
      ConvexPoly part{geom::normalized(std::move(piece))};
      if (part.empty()) continue;
      out_bounds.push_back(part.bounds());
      out.push_back(std::move(part));
    }
  }

  // cheap convexity-preserving fusion to keep part counts bounded
  bool merged = true;
  while (merged) {
    merged = false;
    for (std::size_t i = 0; i < out.size() && !merged; ++i) {
      for (std::size_t j = i + 1; j < out.size() && !merged; ++j) {
        if (out[i].degenerate() || out[j].degenerate()) continue;
        if (!boxes_overlap(out[i].bounds(), out[j].bounds(), geom::kEps))
          continue;
        geom::Chain all = out[i].verts;
        all.insert(all.end(), out[j].verts.begin(), out[j].verts.end());
        geom::Chain hull = geom::convex_hull(std::move(all));
        const double hull_area = geom::polygon_area(hull);
        const double sum = out[i].area() + out[j].area();
        if (hull_area <= sum + std::max(kAreaEps, 1e-9 * sum)) {
          out[i] = ConvexPoly{std::move(hull)};
          out.erase(out.begin() + static_cast<std::ptrdiff_t>(j));
          merged = true;
        }
      }
    }
  }

  PVRegion res;
  res.parts = std::move(out);
  return res;
}

namespace detail {

// Exact image of one convex part under the one-step double-integrator map:
// shear by dt, then Minkowski sum with the acceleration segment.
inline ConvexPoly propagate_part(const ConvexPoly& p, double dt, double a_max,
                                 bool backward) {
  if (p.empty()) return {};
  const Vec2 b_vec{0.5 * dt * dt, dt};
  auto shear = [dt, backward](Vec2 v) {
    return backward ? Vec2{v.x - dt * v.y, v.y} : Vec2{v.x + dt * v.y, v.y};
  };
  if (a_max == 0.0) {
    geom::Chain c;
    c.reserve(p.verts.size());
    for (Vec2 v : p.verts) c.push_back(shear(v));
    return ConvexPoly{std::move(c)};
  }
  geom::Chain pts;
  pts.reserve(2 * p.verts.size());
  if (backward) {
    // A^{-1}(P ⊕ B[-a,a]): sum first, then inverse shear
    for (Vec2 v : p.verts) {
      pts.push_back(shear(v + b_vec * a_max));
      pts.push_back(shear(v - b_vec * a_max));
    }
  } else {
    // A P ⊕ B[-a,a]
    for (Vec2 v : p.verts) {
      pts.push_back(shear(v) + b_vec * a_max);
      pts.push_back(shear(v) - b_vec * a_max);
    }
  }
  if (pts.size() == 2) return ConvexPoly{std::move(pts)};  // exact segment
  return ConvexPoly{geom::convex_hull(std::move(pts))};
}

inline PVRegion map_region(const PVRegion& r, double dt, double a_max,
                           bool backward) {
  PVRegion out;
  out.parts.reserve(r.parts.size());
  for (const ConvexPoly& p : r.parts) {
    ConvexPoly q = propagate_part(p, dt, a_max, backward);
    if (!q.empty()) out.parts.push_back(std::move(q));
  }
  if (out.parts.size() <= 1) return out;
  // images of disjoint parts can grow into each other
  bool any_overlap = false;
  for (std::size_t i = 0; i < out.parts.size() && !any_overlap; ++i)
    for (std::size_t j = i + 1; j < out.parts.size() && !any_overlap; ++j)
      any_overlap =
          boxes_overlap(out.parts[i].bounds(), out.parts[j].bounds());
  return any_overlap ? normalize(std::move(out)) : out;
}

}  // namespace detail

// R(t+dt) = A R(t) ⊕ B[-a_max, a_max]
inline PVRegion propagate(const PVRegion& r, double dt, double a_max) {
  return detail::map_region(r, dt, a_max, false);
}

// Pre-image: A^{-1}(R ⊕ B[-a_max, a_max])
inline PVRegion backward_step(const PVRegion& r, double dt, double a_max) {
  return detail::map_region(r, dt, a_max, true);
}

// One output region per cell with a nonempty intersection, in cell order.
inline std::vector<PVRegion> intersect_cells(const PVRegion& r,
                                             std::span<const PVBox> cells) {
  std::vector<PVRegion> out;
  const PVBox rb = r.bounds();
  for (const PVBox& cell : cells) {
    if (r.empty() || !boxes_overlap(rb, cell, geom::kEps)) continue;
    const geom::Chain cc = cell.chain();
    PVRegion piece;
    for (const ConvexPoly& p : r.parts) {
      geom::Chain clipped = geom::intersect_convex(p.verts, cc);
      if (!clipped.empty()) piece.parts.push_back(ConvexPoly{std::move(clipped)});
    }
    if (!piece.empty()) out.push_back(std::move(piece));
  }
  return out;
}

// Union of all per-cell intersections as a single region. Disjointness of
// the cells keeps the result interior-disjoint without re-partitioning.
inline PVRegion intersect_cells_merged(const PVRegion& r,
                                       std::span<const PVBox> cells) {
  PVRegion out;
  for (PVRegion& piece : intersect_cells(r, cells))
    for (ConvexPoly& p : piece.parts) out.parts.push_back(std::move(p));
  return out;
}

inline PVRegion intersect_box(const PVRegion& r, const PVBox& cell) {
  const std::array<PVBox, 1> one{cell};
  auto v = intersect_cells(r, one);
  return v.empty() ? PVRegion{} : std::move(v.front());
}

inline PVRegion intersect_poly(const PVRegion& r, const ConvexPoly& q) {
  PVRegion out;
  for (const ConvexPoly& p : r.parts) {
    geom::Chain c = geom::intersect_convex(p.verts, q.verts);
    if (!c.empty()) out.parts.push_back(ConvexPoly{std::move(c)});
  }
  return out;
}

// a ∩ b; both inputs interior-disjoint, so the pairwise pieces are too.
inline PVRegion intersect_regions(const PVRegion& a, const PVRegion& b) {
  PVRegion out;
  for (const ConvexPoly& q : b.parts) {
    PVRegion piece = intersect_poly(a, q);
    for (ConvexPoly& p : piece.parts) out.parts.push_back(std::move(p));
  }
  return out;
}

// Set union; overlapping full-dimensional parts are re-partitioned so the
// output stays interior-disjoint.
inline PVRegion union_merge(const PVRegion& a, const PVRegion& b) {
  if (a.empty()) return normalize(b);
  if (b.empty()) return normalize(a);
  PVRegion all = a;
  for (const ConvexPoly& p : b.parts) all.parts.push_back(p);
  return normalize(std::move(all));
}

inline PVRegion shift_long(PVRegion r, double dxi) {
  for (ConvexPoly& p : r.parts)
    for (Vec2& v : p.verts) v.x += dxi;
  return r;
}

struct PVScale {
  double xi = 1.0;  // meters per unit
  double v = 1.0;   // m/s per unit
};

// Arg-min of the scaled Euclidean distance from z over the region.
inline std::pair<PVPoint, double> closest_point(const PVRegion& r, PVPoint z,
                                                PVScale scale = {}) {
  if (r.empty())
    throw std::invalid_argument("closest_point: empty region");
  const Vec2 zs{z.xi / scale.xi, z.v / scale.v};
  double best = std::numeric_limits<double>::infinity();
  Vec2 best_pt{};
  for (const ConvexPoly& p : r.parts) {
    geom::Chain scaled;
    scaled.reserve(p.verts.size());
    for (Vec2 v : p.verts) scaled.push_back({v.x / scale.xi, v.y / scale.v});
    auto [pt, d] = geom::closest_point(scaled, zs);
    if (d < best) {
      best = d;
      best_pt = pt;
    }
  }
  return {PVPoint{best_pt.x * scale.xi, best_pt.y * scale.v}, best};
}

// Max over parts of the per-part signed distance (positive inside).
inline double signed_distance(const PVRegion& r, PVPoint z) {
  double best = -std::numeric_limits<double>::infinity();
  for (const ConvexPoly& p : r.parts)
    best = std::max(best, geom::signed_distance(p.verts, z.vec()));
  return best;
}

inline bool region_contains(const PVRegion& r, PVPoint z, double tol = 1e-9) {
  return signed_distance(r, z) >= -tol;
}

namespace detail {

inline double union_signed_distance(std::span<const PVRegion* const> cover,
                                    Vec2 p) {
  double best = -std::numeric_limits<double>::infinity();
  for (const PVRegion* r : cover)
    for (const ConvexPoly& q : r->parts)
      best = std::max(best, geom::signed_distance(q.verts, p));
  return best;
}

}  // namespace detail

// Conservative containment of `candidate` in the union of `cover` within a
// distance tolerance. Full-dimensional leftovers are accepted only when
// provably thin (inradius <= tol via 2A/P); degenerate leftovers only when
// short. Never claims containment that does not hold at tolerance `tol`.
inline bool contained_in_union(const PVRegion& candidate,
                               std::span<const PVRegion* const> cover,
                               double tol) {
  for (const ConvexPoly& part : candidate.parts) {
    std::vector<geom::Chain> pieces{part.verts};
    for (const PVRegion* r : cover) {
      if (pieces.empty()) break;
      for (const ConvexPoly& q : r->parts) {
        if (q.degenerate()) continue;
        std::vector<geom::Chain> next;
        for (geom::Chain& piece : pieces)
          for (geom::Chain& s : geom::subtract_convex(piece, q.verts))
            next.push_back(std::move(s));
        pieces = std::move(next);
        if (pieces.empty()) break;
      }
    }
    for (const geom::Chain& piece : pieces) {
      if (piece.size() >= 3) {
        const double a = geom::polygon_area(piece);
        const double per = geom::perimeter(piece);
        if (per > 0.0 && 2.0 * a / per > tol) return false;
        if (per == 0.0 && a > kAreaEps) return false;
      } else if (piece.size() == 2) {
        // exact 1-D coverage along the leftover segment; eps-inclusive
        // clipping routinely leaves zero-width slivers on cover boundaries
        const Vec2 a = piece[0];
        const Vec2 d = piece[1] - a;
        const double len = norm(d);
        if (len <= tol) continue;
        std::vector<std::pair<double, double>> spans;
        for (const PVRegion* r : cover) {
          for (const ConvexPoly& q : r->parts) {
            const geom::Chain sub = geom::intersect_convex(piece, q.verts);
            if (sub.empty()) continue;
            double t0 = dot(sub.front() - a, d) / (len * len);
            double t1 = dot(sub.back() - a, d) / (len * len);
            if (t0 > t1) std::swap(t0, t1);
            spans.emplace_back(std::max(0.0, t0 - tol / len),
                               std::min(1.0, t1 + tol / len));
          }
        }
        std::sort(spans.begin(), spans.end());
        double covered_until = 0.0;
        double uncovered = 0.0;
        for (const auto& [lo, hi] : spans) {
          if (lo > covered_until) uncovered += lo - covered_until;
          covered_until = std::max(covered_until, hi);
        }
        uncovered += std::max(0.0, 1.0 - covered_until);
        if (uncovered * len > tol) return false;
      } else if (piece.size() == 1) {
        if (detail::union_signed_distance(cover, piece[0]) < -tol)
          return false;
      }
    }
  }
  return true;
}

}  // namespace setops
}  // namespace reachplan
