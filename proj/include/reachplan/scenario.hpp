#pragma once

// Scenario data model: lanelet road network, obstacle timelines, planning
// problem and parameters, plus the curvilinear <-> global transforms that
// everything downstream is built on. All types are immutable after
// construction and safe to share across threads.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "reachplan/geometry.hpp"

namespace reachplan {

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public ScenarioError {
 public:
  using ScenarioError::ScenarioError;
};

class ValidationError : public ScenarioError {
 public:
  using ScenarioError::ScenarioError;
};

class OutOfLaneletError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool valid() const { return lo <= hi; }
  double length() const { return hi - lo; }
  bool contains(double x, double tol = 0.0) const {
    return x >= lo - tol && x <= hi + tol;
  }
  bool overlaps(const Interval& o, double tol = 0.0) const {
    return lo <= o.hi + tol && o.lo <= hi + tol;
  }
};

inline double wrap_angle(double a) {
  while (a > std::numbers::pi) a -= 2.0 * std::numbers::pi;
  while (a < -std::numbers::pi) a += 2.0 * std::numbers::pi;
  return a;
}

struct Lanelet {
  int id = 0;
  std::optional<int> left;
  std::optional<int> right;
  std::vector<int> successors;
  std::vector<Vec2> centerline;
  double width = 0.0;
  double speed_limit = 0.0;

  // derived
  std::vector<double> arc;  // cumulative arc length at each vertex
  double length = 0.0;

  void finalize() {
    arc.resize(centerline.size());
    double s = 0.0;
    for (std::size_t i = 0; i < centerline.size(); ++i) {
      if (i > 0) s += distance(centerline[i - 1], centerline[i]);
      arc[i] = s;
    }
    length = s;
  }

  std::size_t segment_count() const {
    return centerline.size() < 2 ? 0 : centerline.size() - 1;
  }
  Vec2 segment_dir(std::size_t i) const {
    const Vec2 d = centerline[i + 1] - centerline[i];
    return d / norm(d);
  }
  double segment_heading(std::size_t i) const {
    const Vec2 d = centerline[i + 1] - centerline[i];
    return std::atan2(d.y, d.x);
  }
  // segment index whose arc range contains xi (last segment owns its end)
  std::size_t segment_at(double xi) const {
    const std::size_t n = segment_count();
    for (std::size_t i = 0; i + 1 < n; ++i)
      if (xi < arc[i + 1]) return i;
    return n - 1;
  }
};

struct CurvilinearPos {
  double xi = 0.0;   // arc length along the centerline [m]
  double eta = 0.0;  // signed lateral offset, left positive [m]
};

struct Projection {
  double xi = 0.0;
  double eta = 0.0;
  double dist = 0.0;  // |eta|, distance to the centerline
};

// Closest-point projection onto the centerline polyline. Never throws; the
// caller decides what distance is acceptable.
inline Projection project_to_centerline(const Lanelet& lane, Vec2 p) {
  Projection best;
  best.dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < lane.segment_count(); ++i) {
    const Vec2 a = lane.centerline[i];
    const Vec2 b = lane.centerline[i + 1];
    const Vec2 q = geom::closest_point_on_segment(a, b, p);
    const double d = distance(q, p);
    if (d < best.dist - 1e-12) {
      const Vec2 dir = lane.segment_dir(i);
      best.dist = d;
      best.xi = lane.arc[i] + distance(a, q);
      best.eta = cross(dir, p - a) >= 0.0 ? d : -d;  // left positive
    }
  }
  best.xi = std::clamp(best.xi, 0.0, lane.length);
  return best;
}

inline CurvilinearPos to_curvilinear(const Lanelet& lane, double x, double y) {
  const Projection pr = project_to_centerline(lane, {x, y});
  if (pr.dist > lane.width / 2.0 + 1.0)
    throw OutOfLaneletError("point (" + std::to_string(x) + ", " +
                            std::to_string(y) + ") projects " +
                            std::to_string(pr.dist) + " m from lanelet " +
                            std::to_string(lane.id) + " centerline");
  return {pr.xi, pr.eta};
}

struct GlobalPose {
  double x = 0.0;
  double y = 0.0;
  double orientation = 0.0;
};

inline GlobalPose from_curvilinear(const Lanelet& lane, double xi,
                                   double eta) {
  if (xi < -1e-9 || xi > lane.length + 1e-9)
    throw std::domain_error("xi = " + std::to_string(xi) +
                            " outside [0, " + std::to_string(lane.length) +
                            "] on lanelet " + std::to_string(lane.id));
  xi = std::clamp(xi, 0.0, lane.length);
  const std::size_t i = lane.segment_at(xi);
  const Vec2 dir = lane.segment_dir(i);
  const Vec2 normal{-dir.y, dir.x};  // left normal
  const Vec2 p =
      lane.centerline[i] + dir * (xi - lane.arc[i]) + normal * eta;
  return {p.x, p.y, lane.segment_heading(i)};
}

struct RoadNetwork {
  std::vector<Lanelet> lanelets;

  const Lanelet* find(int id) const {
    for (const Lanelet& l : lanelets)
      if (l.id == id) return &l;
    return nullptr;
  }
  const Lanelet& at(int id) const {
    const Lanelet* l = find(id);
    if (!l)
      throw ValidationError("unknown lanelet id " + std::to_string(id));
    return *l;
  }

  void validate() const {
    for (const Lanelet& l : lanelets) {
      const std::string where = "lanelet " + std::to_string(l.id);
      if (l.centerline.size() < 2)
        throw ValidationError(where + ": centerline needs >= 2 points");
      for (std::size_t i = 0; i + 1 < l.centerline.size(); ++i)
        if (distance(l.centerline[i], l.centerline[i + 1]) <= 1e-12)
          throw ValidationError(where + ": duplicate centerline point " +
                                std::to_string(i));
      if (l.width <= 0.0) throw ValidationError(where + ": width must be > 0");
      if (l.speed_limit <= 0.0)
        throw ValidationError(where + ": speed_limit must be > 0");
      int seen = 0;
      for (const Lanelet& o : lanelets)
        if (o.id == l.id) ++seen;
      if (seen != 1)
        throw ValidationError("duplicate lanelet id " + std::to_string(l.id));
      auto check_ref = [&](std::optional<int> ref, const char* kind) {
        if (ref && !find(*ref))
          throw ValidationError(where + ": " + kind + " refers to unknown id " +
                                std::to_string(*ref));
      };
      check_ref(l.left, "left");
      check_ref(l.right, "right");
      for (int s : l.successors) {
        if (!find(s))
          throw ValidationError(where + ": successor refers to unknown id " +
                                std::to_string(s));
        if (s == l.id)
          throw ValidationError(where + ": lanelet is its own successor");
      }
      if (l.left) {
        const Lanelet& nb = at(*l.left);
        if (!nb.right || *nb.right != l.id)
          throw ValidationError(
              "inconsistent adjacency: lanelet " + std::to_string(l.id) +
              " declares left=" + std::to_string(*l.left) + " but lanelet " +
              std::to_string(nb.id) + " declares right=" +
              (nb.right ? std::to_string(*nb.right) : std::string("null")));
      }
      if (l.right) {
        const Lanelet& nb = at(*l.right);
        if (!nb.left || *nb.left != l.id)
          throw ValidationError(
              "inconsistent adjacency: lanelet " + std::to_string(l.id) +
              " declares right=" + std::to_string(*l.right) + " but lanelet " +
              std::to_string(nb.id) + " declares left=" +
              (nb.left ? std::to_string(*nb.left) : std::string("null")));
      }
    }
  }
};

inline std::array<Vec2, 4> rect_corners(Vec2 center, double orientation,
                                        double length, double width) {
  const Vec2 dir{std::cos(orientation), std::sin(orientation)};
  const Vec2 nrm{-dir.y, dir.x};
  const Vec2 dl = dir * (length / 2.0);
  const Vec2 dw = nrm * (width / 2.0);
  return {center - dl - dw, center + dl - dw, center + dl + dw,
          center - dl + dw};
}

struct ObstacleTimeline {
  struct State {
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
    double orientation = 0.0;
  };

  int id = 0;
  double length = 0.0;
  double width = 0.0;
  std::vector<State> states;

  void validate() const {
    const std::string where = "obstacle " + std::to_string(id);
    if (length <= 0.0 || width <= 0.0)
      throw ValidationError(where + ": dimensions must be > 0");
    if (states.empty()) throw ValidationError(where + ": empty trajectory");
    for (std::size_t i = 0; i + 1 < states.size(); ++i)
      if (states[i + 1].t <= states[i].t)
        throw ValidationError(where + ": trajectory times must be strictly "
                                      "increasing at sample " +
                              std::to_string(i + 1));
  }

  // Linear interpolation between samples; the pose is held constant outside
  // the sampled range.
  GlobalPose pose_at(double t) const {
    if (t <= states.front().t)
      return {states.front().x, states.front().y, states.front().orientation};
    if (t >= states.back().t)
      return {states.back().x, states.back().y, states.back().orientation};
    std::size_t i = 1;
    while (states[i].t < t) ++i;
    const State& a = states[i - 1];
    const State& b = states[i];
    const double u = (t - a.t) / (b.t - a.t);
    return {a.x + (b.x - a.x) * u, a.y + (b.y - a.y) * u,
            a.orientation + wrap_angle(b.orientation - a.orientation) * u};
  }

  std::array<Vec2, 4> corners_at(double t) const {
    const GlobalPose p = pose_at(t);
    return rect_corners({p.x, p.y}, p.orientation, length, width);
  }
};

namespace detail {

inline void merge_intervals(std::vector<Interval>& xs, double gap = 1e-9) {
  std::sort(xs.begin(), xs.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  std::vector<Interval> out;
  for (const Interval& x : xs) {
    if (!out.empty() && x.lo <= out.back().hi + gap)
      out.back().hi = std::max(out.back().hi, x.hi);
    else
      out.push_back(x);
  }
  xs = std::move(out);
}

}  // namespace detail

// Longitudinal lanelet positions whose lateral cross-section intersects the
// obstacle's oriented rectangle at time t. Computed exactly per centerline
// segment by clipping the obstacle against the segment strip.
inline std::vector<Interval> occupied_long_intervals(
    const Lanelet& lane, const ObstacleTimeline& obstacle, double t) {
  const std::array<Vec2, 4> rc = obstacle.corners_at(t);
  const geom::Chain rect{rc[0], rc[1], rc[2], rc[3]};
  std::vector<Interval> out;
  for (std::size_t i = 0; i < lane.segment_count(); ++i) {
    const Vec2 a = lane.centerline[i];
    const Vec2 b = lane.centerline[i + 1];
    const Vec2 dir = lane.segment_dir(i);
    const Vec2 nrm{-dir.y, dir.x};
    const Vec2 half = nrm * (lane.width / 2.0);
    const geom::Chain strip{a - half, b - half, b + half, a + half};
    const geom::Chain inter = geom::intersect_convex(rect, strip);
    if (inter.empty()) continue;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const Vec2& p : inter) {
      const double s = dot(p - a, dir);
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
    const double seg_len = lane.arc[i + 1] - lane.arc[i];
    out.push_back({lane.arc[i] + std::clamp(lo, 0.0, seg_len),
                   lane.arc[i] + std::clamp(hi, 0.0, seg_len)});
  }
  detail::merge_intervals(out);
  return out;
}

// Lateral band of the lanelet cross-section covered by the obstacle where it
// overlaps the lanelet strip; nullopt when there is no overlap.
inline std::optional<Interval> obstacle_lateral_band(
    const Lanelet& lane, const ObstacleTimeline& obstacle, double t) {
  const std::array<Vec2, 4> rc = obstacle.corners_at(t);
  const geom::Chain rect{rc[0], rc[1], rc[2], rc[3]};
  bool any = false;
  Interval band{std::numeric_limits<double>::infinity(),
                -std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < lane.segment_count(); ++i) {
    const Vec2 a = lane.centerline[i];
    const Vec2 b = lane.centerline[i + 1];
    const Vec2 dir = lane.segment_dir(i);
    const Vec2 nrm{-dir.y, dir.x};
    const Vec2 half = nrm * (lane.width / 2.0);
    const geom::Chain strip{a - half, b - half, b + half, a + half};
    const geom::Chain inter = geom::intersect_convex(rect, strip);
    if (inter.empty()) continue;
    any = true;
    for (const Vec2& p : inter) {
      const double eta = dot(p - a, nrm);
      band.lo = std::min(band.lo, eta);
      band.hi = std::max(band.hi, eta);
    }
  }
  if (!any) return std::nullopt;
  return band;
}

struct VehicleParams {
  double length = 4.5;     // l_car [m]
  double width = 2.0;      // [m]
  double wheelbase = 2.6;  // l_wb [m]
  double a_max = 6.0;      // [m/s^2]
  double s_max = 0.7;      // max steering angle [rad]

  void validate() const {
    if (length <= 0 || width <= 0 || wheelbase <= 0 || a_max <= 0 ||
        s_max <= 0)
      throw ValidationError("vehicle parameters must be positive");
    if (s_max >= std::numbers::pi / 2.0)
      throw ValidationError("s_max must be < pi/2");
  }
};

struct PlanningProblem {
  struct Initial {
    double x = 0.0;
    double y = 0.0;
    double v = 0.0;
    double orientation = 0.0;
  };

  Initial initial;
  int goal_lanelet = 0;
  Interval goal_xi;
  Interval goal_v;
  Interval goal_time;

  void validate(const RoadNetwork& net) const {
    if (initial.v < 0.0) throw ValidationError("initial velocity must be >= 0");
    if (!goal_xi.valid() || !goal_v.valid() || !goal_time.valid())
      throw ValidationError("goal intervals must be nonempty");
    const Lanelet& goal = net.at(goal_lanelet);
    if (goal_xi.lo < -1e-9 || goal_xi.hi > goal.length + 1e-9)
      throw ValidationError("goal xi interval outside [0, " +
                            std::to_string(goal.length) + "] of lanelet " +
                            std::to_string(goal_lanelet));
  }
};

struct PlannerConfig {
  double dt = 0.1;                 // [s]
  double d_min = 1.0;              // minimum safe distance [m]
  double a_des = 1.0;              // desired acceleration [m/s^2]
  double w_change = 10.0;
  double w_profile = 1.0;
  double min_lateral_width = 2.5;  // partial-occupancy clearance [m]
  double lateral_margin = 0.25;    // per-side margin for partial occupancy
  double time_budget = 10.0;       // corridor search budget [s]
  double w_safe = 0.0;             // safe-distance penalty weight (off)
  double d_safe = 1.0;             // soft safe distance [m]

  void validate() const {
    if (dt <= 0.0) throw ValidationError("config dt must be > 0");
    if (d_min < 0.0) throw ValidationError("config d_min must be >= 0");
    if (w_change < 0.0 || w_profile < 0.0 || w_safe < 0.0)
      throw ValidationError("config weights must be >= 0");
  }
};

struct TrafficLightRule {
  int lanelet = 0;
  double stop_xi = 0.0;
  std::vector<Interval> red;

  bool red_at(double t) const {
    for (const Interval& r : red)
      if (r.contains(t)) return true;
    return false;
  }
};

struct Scenario {
  RoadNetwork network;
  std::vector<ObstacleTimeline> obstacles;
  PlanningProblem problem;
  VehicleParams vehicle;
  PlannerConfig config;
  std::vector<TrafficLightRule> traffic_lights;

  void validate() const {
    network.validate();
    for (const ObstacleTimeline& o : obstacles) o.validate();
    vehicle.validate();
    config.validate();
    problem.validate(network);
    for (const TrafficLightRule& r : traffic_lights) network.at(r.lanelet);
  }
};

// Lanelet containing the pose, preferring the smallest lateral offset among
// lanelets whose heading roughly agrees with the vehicle's.
inline std::optional<int> locate_lanelet(const RoadNetwork& net, double x,
                                         double y, double orientation) {
  std::optional<int> best;
  double best_eta = std::numeric_limits<double>::infinity();
  for (const Lanelet& l : net.lanelets) {
    const Projection pr = project_to_centerline(l, {x, y});
    if (pr.dist > l.width / 2.0 + 0.5) continue;
    const double heading = l.segment_heading(l.segment_at(pr.xi));
    if (std::abs(wrap_angle(heading - orientation)) > std::numbers::pi / 2.0)
      continue;
    if (pr.dist < best_eta) {
      best_eta = pr.dist;
      best = l.id;
    }
  }
  return best;
}

}  // namespace reachplan
