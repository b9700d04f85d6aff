#pragma once

// Closed-loop harness: kinematic single-track plant, friction-circle
// monitor, reference tracker, constant-velocity obstacle prediction and a
// replanning loop with a braking fallback. The loop is single-threaded and
// deterministic for a given scenario and seed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <optional>
#include <vector>

#include "reachplan/planner.hpp"
#include "reachplan/scenario.hpp"

namespace reachplan {

struct VehicleState {
  double x = 0.0;  // rear-axle position
  double y = 0.0;
  double v = 0.0;
  double orientation = 0.0;
};

struct ControlInput {
  double a = 0.0;  // acceleration [m/s^2]
  double s = 0.0;  // steering angle [rad]
};

namespace detail {

struct StateDeriv {
  double dx, dy, dv, dphi;
};

inline StateDeriv plant_deriv(const VehicleState& st, const ControlInput& u,
                              const VehicleParams& params) {
  return {st.v * std::cos(st.orientation), st.v * std::sin(st.orientation),
          u.a, st.v / params.wheelbase * std::tan(u.s)};
}

}  // namespace detail

// Classic RK4 with inputs held constant over the step; velocity is floored
// at zero afterwards.
inline VehicleState step_plant(const VehicleState& st, const ControlInput& u,
                               double dt, const VehicleParams& params) {
  auto add = [](const VehicleState& s, const detail::StateDeriv& d,
                double h) {
    return VehicleState{s.x + d.dx * h, s.y + d.dy * h, s.v + d.dv * h,
                        s.orientation + d.dphi * h};
  };
  const detail::StateDeriv k1 = detail::plant_deriv(st, u, params);
  const detail::StateDeriv k2 =
      detail::plant_deriv(add(st, k1, dt / 2.0), u, params);
  const detail::StateDeriv k3 =
      detail::plant_deriv(add(st, k2, dt / 2.0), u, params);
  const detail::StateDeriv k4 = detail::plant_deriv(add(st, k3, dt), u, params);
  VehicleState out{
      st.x + dt / 6.0 * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx),
      st.y + dt / 6.0 * (k1.dy + 2.0 * k2.dy + 2.0 * k3.dy + k4.dy),
      st.v + dt / 6.0 * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv),
      st.orientation +
          dt / 6.0 * (k1.dphi + 2.0 * k2.dphi + 2.0 * k3.dphi + k4.dphi)};
  out.v = std::max(0.0, out.v);
  return out;
}

// a_max - sqrt(a^2 + (v*phidot)^2); negative means the friction circle is
// violated. Monitored, never enforced.
inline double friction_margin(const VehicleState& st, const ControlInput& u,
                              const VehicleParams& params) {
  const double phidot = st.v / params.wheelbase * std::tan(u.s);
  return params.a_max - std::hypot(u.a, st.v * phidot);
}

inline Vec2 vehicle_center(const VehicleState& st,
                           const VehicleParams& params) {
  return {st.x + std::cos(st.orientation) * params.wheelbase / 2.0,
          st.y + std::sin(st.orientation) * params.wheelbase / 2.0};
}

struct CollisionReport {
  bool collided = false;
  double min_gap = std::numeric_limits<double>::infinity();
};

namespace detail {

inline double rect_distance(const std::array<Vec2, 4>& a,
                            const std::array<Vec2, 4>& b) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      best = std::min(best, distance(geom::closest_point_on_segment(
                                         b[j], b[(j + 1) % 4], a[i]),
                                     a[i]));
      best = std::min(best, distance(geom::closest_point_on_segment(
                                         a[j], a[(j + 1) % 4], b[i]),
                                     b[i]));
    }
  return best;
}

inline bool rects_separated(const std::array<Vec2, 4>& a,
                            const std::array<Vec2, 4>& b, double tol) {
  auto axis_gap = [&](Vec2 axis) {
    double a_lo = std::numeric_limits<double>::infinity(), a_hi = -a_lo;
    double b_lo = a_lo, b_hi = -a_lo;
    for (const Vec2& p : a) {
      a_lo = std::min(a_lo, dot(p, axis));
      a_hi = std::max(a_hi, dot(p, axis));
    }
    for (const Vec2& p : b) {
      b_lo = std::min(b_lo, dot(p, axis));
      b_hi = std::max(b_hi, dot(p, axis));
    }
    return std::max(b_lo - a_hi, a_lo - b_hi);
  };
  for (const std::array<Vec2, 4>& rect : {a, b})
    for (int i = 0; i < 2; ++i) {
      const Vec2 e = rect[i + 1] - rect[i];
      if (axis_gap({-e.y, e.x}) > tol) return true;
    }
  return false;
}

}  // namespace detail

// Separating-axis test of the ego footprint against every obstacle at time
// t; tangency counts as collision.
inline CollisionReport collision_check(Vec2 ego_center, double orientation,
                                       const VehicleParams& params,
                                       const std::vector<ObstacleTimeline>& obstacles,
                                       double t) {
  const std::array<Vec2, 4> ego =
      rect_corners(ego_center, orientation, params.length, params.width);
  CollisionReport out;
  for (const ObstacleTimeline& ob : obstacles) {
    const std::array<Vec2, 4> rect = ob.corners_at(t);
    if (!detail::rects_separated(ego, rect, 1e-9)) {
      out.collided = true;
      out.min_gap = 0.0;
      return out;
    }
    out.min_gap = std::min(out.min_gap, detail::rect_distance(ego, rect));
  }
  return out;
}

struct TrackerGains {
  double k_v = 1.5;   // velocity error gain
  double k_xi = 0.5;  // along-track error gain
};

// Longitudinal feedforward+feedback plus pure-pursuit steering on the
// reference path. The reference samples are vehicle-center states; the
// tracker controls the rear axle.
inline ControlInput track(const ReferenceTrajectory& ref,
                          const VehicleState& st, double t,
                          const VehicleParams& params, TrackerGains gains = {}) {
  ControlInput u;
  if (ref.samples.empty()) return u;
  const double t0 = ref.samples.front().t;
  const double span = ref.dt;
  const std::size_t n = ref.samples.size();
  double idx = (t - t0) / span;
  idx = std::clamp(idx, 0.0, static_cast<double>(n - 1));
  const std::size_t i0 = static_cast<std::size_t>(idx);
  const std::size_t i1 = std::min(i0 + 1, n - 1);
  const double frac = idx - static_cast<double>(i0);

  const RefSample& s0 = ref.samples[i0];
  const RefSample& s1 = ref.samples[i1];
  const double v_ref = s0.v + (s1.v - s0.v) * frac;
  const double a_ref = s0.accel;
  const Vec2 p_ref{s0.x + (s1.x - s0.x) * frac, s0.y + (s1.y - s0.y) * frac};
  const Vec2 tangent{std::cos(s0.orientation), std::sin(s0.orientation)};

  const Vec2 center = vehicle_center(st, params);
  const double along = dot(tangent, p_ref - center);
  u.a = std::clamp(a_ref + gains.k_v * (v_ref - st.v) + gains.k_xi * along,
                   -params.a_max, params.a_max);

  // pure pursuit: rear-axle target on the (center) reference path shifted
  // back by half a wheelbase
  const double lookahead = std::max(3.0, 0.5 * st.v);
  const Vec2 rear{st.x, st.y};
  std::size_t nearest = i0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double d = distance({ref.samples[i].x, ref.samples[i].y}, rear);
    if (d < best) {
      best = d;
      nearest = i;
    }
  }
  Vec2 target{ref.samples[n - 1].x, ref.samples[n - 1].y};
  double run = 0.0;
  for (std::size_t i = nearest; i + 1 < n; ++i) {
    run += distance({ref.samples[i].x, ref.samples[i].y},
                    {ref.samples[i + 1].x, ref.samples[i + 1].y});
    if (run >= lookahead) {
      target = {ref.samples[i + 1].x, ref.samples[i + 1].y};
      break;
    }
  }
  const Vec2 back{std::cos(ref.samples[nearest].orientation),
                  std::sin(ref.samples[nearest].orientation)};
  target -= back * (params.wheelbase / 2.0);
  const Vec2 to_target = target - rear;
  const double dist = norm(to_target);
  if (dist > 1e-6) {
    const double alpha =
        wrap_angle(std::atan2(to_target.y, to_target.x) - st.orientation);
    const double curvature = 2.0 * std::sin(alpha) / dist;
    u.s = std::clamp(std::atan(curvature * params.wheelbase), -params.s_max,
                     params.s_max);
  }
  return u;
}

struct SimTick {
  double t = 0.0;
  VehicleState state;
  ControlInput input;
  double ref_x = 0.0, ref_y = 0.0, ref_v = 0.0;
  double min_gap = std::numeric_limits<double>::infinity();
  double friction_margin = 0.0;
  bool replanned = false;
  double replan_ms = 0.0;
  bool fallback = false;
};

struct SimSummary {
  bool reached = false;
  bool collided = false;
  int ticks = 0;
  double min_gap = std::numeric_limits<double>::infinity();
  double mean_replan_ms = 0.0;
  double p95_replan_ms = 0.0;
  int fallback_ticks = 0;
  unsigned seed = 0;
};

struct SimLog {
  double sim_dt = 0.01;
  std::vector<SimTick> ticks;
  SimSummary summary;
};

namespace detail {

// Shortest lanelet-hop route over successor/left/right edges.
inline std::optional<std::vector<int>> lanelet_route(const RoadNetwork& net,
                                                     int from, int to) {
  std::deque<int> queue{from};
  std::map<int, int> parent{{from, from}};
  while (!queue.empty()) {
    const int cur = queue.front();
    queue.pop_front();
    if (cur == to) {
      std::vector<int> path{cur};
      while (path.back() != from) path.push_back(parent.at(path.back()));
      std::reverse(path.begin(), path.end());
      return path;
    }
    const Lanelet& lane = net.at(cur);
    std::vector<int> next = lane.successors;
    if (lane.left) next.push_back(*lane.left);
    if (lane.right) next.push_back(*lane.right);
    for (int nb : next)
      if (parent.emplace(nb, cur).second) queue.push_back(nb);
  }
  return std::nullopt;
}

inline std::vector<ObstacleTimeline> predict_constant_velocity(
    const std::vector<ObstacleTimeline>& obstacles, double t_now,
    double horizon, double dt) {
  std::vector<ObstacleTimeline> out;
  out.reserve(obstacles.size());
  for (const ObstacleTimeline& ob : obstacles) {
    const GlobalPose now = ob.pose_at(t_now);
    Vec2 vel{0.0, 0.0};
    if (ob.states.size() >= 2) {
      // latest observed segment at or before t_now
      std::size_t i = ob.states.size() - 1;
      while (i > 1 && ob.states[i - 1].t > t_now) --i;
      const auto& a = ob.states[i - 1];
      const auto& b = ob.states[i];
      vel = Vec2{(b.x - a.x), (b.y - a.y)} / (b.t - a.t);
    }
    ObstacleTimeline pred;
    pred.id = ob.id;
    pred.length = ob.length;
    pred.width = ob.width;
    const int steps = static_cast<int>(std::ceil(horizon / dt)) + 1;
    for (int k = 0; k <= steps; ++k) {
      const double tau = k * dt;
      pred.states.push_back({tau, now.x + vel.x * tau, now.y + vel.y * tau,
                             now.orientation});
    }
    out.push_back(std::move(pred));
  }
  return out;
}

struct ReplanGoal {
  PlanRequest request;
  bool final_goal = false;
};

inline std::optional<ReplanGoal> make_replan_request(
    const Scenario& sc, double t_now, double plan_horizon, int ego_lanelet,
    double ego_xi, double ego_v) {
  const double remaining = sc.problem.goal_time.hi - t_now;
  if (remaining <= 0.0) return std::nullopt;
  const PlannerConfig& cfg = sc.config;

  if (remaining <= plan_horizon + 1e-9) {
    ReplanGoal out;
    out.final_goal = true;
    out.request.horizon =
        std::max(1, static_cast<int>(std::ceil(remaining / cfg.dt - 1e-9)));
    out.request.goal_step_lo = std::max(
        0, static_cast<int>(
               std::ceil((sc.problem.goal_time.lo - t_now) / cfg.dt - 1e-9)));
    out.request.goal_step_hi = out.request.horizon;
    out.request.goals.push_back(
        {sc.problem.goal_lanelet,
         PVBox{sc.problem.goal_xi.lo, sc.problem.goal_xi.hi,
               sc.problem.goal_v.lo, sc.problem.goal_v.hi}});
    return out;
  }

  const std::optional<std::vector<int>> route =
      lanelet_route(sc.network, ego_lanelet, sc.problem.goal_lanelet);
  if (!route) return std::nullopt;

  // distance the desired profile covers over the plan horizon
  const int steps = static_cast<int>(std::round(plan_horizon / cfg.dt));
  const double v_eff =
      effective_speed_limit(sc.network.at(ego_lanelet), sc.vehicle.a_max);
  double v = ego_v;
  double dist = 0.0;
  for (int k = 0; k < steps; ++k) {
    const double a =
        std::max(-cfg.a_des, std::min(cfg.a_des, (v_eff - v) / cfg.dt));
    dist += v * cfg.dt + 0.5 * a * cfg.dt * cfg.dt;
    v += a * cfg.dt;
  }

  // walk the route: successor hops consume arc length, lateral hops do not
  int target = ego_lanelet;
  double xi_t = ego_xi + dist;
  for (std::size_t i = 0; i + 1 < route->size(); ++i) {
    const Lanelet& cur = sc.network.at((*route)[i]);
    const int next = (*route)[i + 1];
    const bool lateral = (cur.left && *cur.left == next) ||
                         (cur.right && *cur.right == next);
    if (lateral) {
      target = next;
      continue;
    }
    if (xi_t <= cur.length) break;
    xi_t -= cur.length;
    target = next;
  }
  const Lanelet& target_lane = sc.network.at(target);
  xi_t = std::clamp(xi_t, 0.0, target_lane.length);

  ReplanGoal out;
  out.request.horizon = steps;
  out.request.goal_step_lo = std::max(0, steps - 2);
  out.request.goal_step_hi = steps;
  double v_cap = 0.0;
  for (const Lanelet& l : sc.network.lanelets)
    v_cap = std::max(v_cap, l.speed_limit);
  auto add_goal = [&](int lanelet_id) {
    const Lanelet& lane = sc.network.at(lanelet_id);
    const double lo = std::clamp(xi_t - 30.0, 0.0, lane.length);
    const double hi = std::clamp(xi_t + 5.0, 0.0, lane.length);
    if (hi > lo) out.request.goals.push_back({lanelet_id, PVBox{lo, hi, 0.0, v_cap}});
  };
  add_goal(target);
  if (target_lane.left) add_goal(*target_lane.left);
  if (target_lane.right) add_goal(*target_lane.right);
  if (out.request.goals.empty()) return std::nullopt;
  return out;
}

}  // namespace detail

// Full closed loop per the replanning protocol: plan, track, repeat. A
// failed plan engages a braking fallback (full deceleration, steering toward
// the lane center) until the next replan attempt succeeds.
inline SimLog run_closed_loop(const Scenario& sc, double plan_horizon = 3.0,
                              double replan_period = 0.3, double sim_dt = 0.01,
                              unsigned seed = 0) {
  SimLog log;
  log.sim_dt = sim_dt;
  log.summary.seed = seed;

  VehicleState st;
  {
    const double phi = sc.problem.initial.orientation;
    st.x = sc.problem.initial.x - std::cos(phi) * sc.vehicle.wheelbase / 2.0;
    st.y = sc.problem.initial.y - std::sin(phi) * sc.vehicle.wheelbase / 2.0;
    st.v = sc.problem.initial.v;
    st.orientation = phi;
  }

  std::optional<ReferenceTrajectory> ref;
  bool fallback = false;
  std::vector<double> replan_times;
  const int replan_every = std::max(1, static_cast<int>(std::round(replan_period / sim_dt)));
  const double t_stop = sc.problem.goal_time.hi + 2.0;

  const Lanelet& goal_lane = sc.network.at(sc.problem.goal_lanelet);

  int tick_index = 0;
  for (double t = 0.0; t <= t_stop + 1e-9; t += sim_dt, ++tick_index) {
    const Vec2 center = vehicle_center(st, sc.vehicle);

    SimTick tick;
    tick.t = t;
    tick.state = st;

    // goal reached?
    {
      const Projection pr = project_to_centerline(goal_lane, center);
      if (pr.dist <= goal_lane.width / 2.0 + 0.5 &&
          sc.problem.goal_xi.contains(pr.xi) &&
          sc.problem.goal_v.contains(st.v, 0.25) &&
          sc.problem.goal_time.contains(t)) {
        log.summary.reached = true;
        log.ticks.push_back(tick);
        break;
      }
    }

    // replan cadence
    if (tick_index % replan_every == 0) {
      tick.replanned = true;
      const auto tic = std::chrono::steady_clock::now();
      bool planned = false;
      try {
        const std::optional<int> lane_id = locate_lanelet(
            sc.network, center.x, center.y, st.orientation);
        if (lane_id) {
          const CurvilinearPos cp =
              to_curvilinear(sc.network.at(*lane_id), center.x, center.y);
          const std::optional<detail::ReplanGoal> goal =
              detail::make_replan_request(sc, t, plan_horizon, *lane_id,
                                          cp.xi, st.v);
          if (goal) {
            Scenario snap = sc;
            snap.problem.initial = {center.x, center.y, st.v, st.orientation};
            snap.obstacles = detail::predict_constant_velocity(
                sc.obstacles, t, goal->request.horizon * sc.config.dt,
                sc.config.dt);
            snap.traffic_lights.clear();
            for (const TrafficLightRule& r : sc.traffic_lights) {
              TrafficLightRule shifted = r;
              for (Interval& iv : shifted.red) {
                iv.lo -= t;
                iv.hi -= t;
              }
              snap.traffic_lights.push_back(std::move(shifted));
            }
            PlanResult plan = run_pipeline(snap, goal->request);
            if (plan.ok()) {
              for (RefSample& s : plan.reference.samples) s.t += t;
              for (LaneChangeBlend& b : plan.reference.blends) {
                b.t_init += t;
                b.t_fin += t;
              }
              ref = std::move(plan.reference);
              planned = true;
            }
          }
        }
      } catch (const std::exception&) {
        planned = false;
      }
      tick.replan_ms = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - tic)
                           .count();
      replan_times.push_back(tick.replan_ms);
      fallback = !planned;
    }

    // control
    ControlInput u;
    if (!fallback && ref) {
      u = track(*ref, st, t, sc.vehicle);
      const double t0 = ref->samples.front().t;
      const double idx = std::clamp((t - t0) / ref->dt, 0.0,
                                    static_cast<double>(ref->samples.size() - 1));
      const RefSample& rs = ref->samples[static_cast<std::size_t>(idx)];
      tick.ref_x = rs.x;
      tick.ref_y = rs.y;
      tick.ref_v = rs.v;
    } else {
      tick.fallback = true;
      ++log.summary.fallback_ticks;
      u.a = -sc.vehicle.a_max;
      // steer toward the center of the nearest lanelet
      const std::optional<int> lane_id =
          locate_lanelet(sc.network, center.x, center.y, st.orientation);
      if (lane_id && st.v > 0.1) {
        const Lanelet& lane = sc.network.at(*lane_id);
        const Projection pr = project_to_centerline(lane, {st.x, st.y});
        const double ahead =
            std::min(pr.xi + std::max(3.0, 0.5 * st.v), lane.length);
        const GlobalPose tp = from_curvilinear(lane, ahead, 0.0);
        const Vec2 to_target = Vec2{tp.x, tp.y} - Vec2{st.x, st.y};
        if (norm(to_target) > 1e-6) {
          const double alpha = wrap_angle(
              std::atan2(to_target.y, to_target.x) - st.orientation);
          const double curvature = 2.0 * std::sin(alpha) / norm(to_target);
          u.s = std::clamp(std::atan(curvature * sc.vehicle.wheelbase),
                           -sc.vehicle.s_max, sc.vehicle.s_max);
        }
      }
    }
    tick.input = u;
    tick.friction_margin = friction_margin(st, u, sc.vehicle);

    const CollisionReport col =
        collision_check(center, st.orientation, sc.vehicle, sc.obstacles, t);
    tick.min_gap = col.min_gap;
    log.summary.min_gap = std::min(log.summary.min_gap, col.min_gap);
    log.ticks.push_back(tick);
    if (col.collided) {
      log.summary.collided = true;
      break;
    }

    st = step_plant(st, u, sim_dt, sc.vehicle);
  }

  log.summary.ticks = static_cast<int>(log.ticks.size());
  if (!replan_times.empty()) {
    double sum = 0.0;
    for (double x : replan_times) sum += x;
    log.summary.mean_replan_ms = sum / static_cast<double>(replan_times.size());
    std::vector<double> sorted = replan_times;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t idx = static_cast<std::size_t>(
        std::ceil(0.95 * static_cast<double>(sorted.size()))) - 1;
    log.summary.p95_replan_ms = sorted[std::min(idx, sorted.size() - 1)];
  }
  return log;
}

}  // namespace reachplan
