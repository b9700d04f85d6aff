#pragma once

// Reference trajectory generation: a greedy one-step arg-min toward the
// desired profile inside the refined corridor, mapped to the global frame
// with sigmoid blending across lane changes and a lateral correction around
// obstacles that only partially occupy their lanelet.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "reachplan/corridor_search.hpp"
#include "reachplan/freespace.hpp"
#include "reachplan/limits.hpp"
#include "reachplan/refine.hpp"
#include "reachplan/scenario.hpp"

namespace reachplan {

struct CurvilinearTrajectory {
  int start_step = 0;
  std::vector<PVPoint> states;  // route frame
  std::vector<double> accels;   // accels[i] drives states[i] -> states[i+1]
};

// z(t_{i+1}) = argmin_{z in I} |z - z_des(t_{i+1})| with
// I = D(t_{i+1}) ∩ (A z(t_i) ⊕ B [-a_max, a_max]).
// After refinement I is provably nonempty; an empty I is a broken invariant
// and throws, it is never recovered from.
inline CurvilinearTrajectory generate_curvilinear(const Corridor& refined,
                                                  const DesiredProfile& profile,
                                                  const VehicleParams& params,
                                                  const PlannerConfig& config) {
  const int s0 = corridor_first_step(refined);
  CurvilinearTrajectory out;
  out.start_step = s0;

  PVPoint z = profile.states[static_cast<std::size_t>(s0)];
  {
    const PVRegion r0 = corridor_step_region(refined, s0);
    if (setops::signed_distance(r0, z) < -1e-9)
      throw std::invalid_argument(
          "generate_curvilinear: start state outside the refined area");
  }
  out.states.push_back(z);

  const double dt = config.dt;
  for (int s = s0; s < refined.goal_step; ++s) {
    const PVRegion next = corridor_step_region(refined, s + 1);
    const PVPoint z_des = profile.states[static_cast<std::size_t>(s + 1)];
    // one-step reachable segment, parametrized by the acceleration
    const Vec2 base{z.xi + z.v * dt, z.v};
    const Vec2 b_vec{0.5 * dt * dt, dt};
    const geom::Chain segment{base - b_vec * params.a_max,
                              base + b_vec * params.a_max};

    double best = std::numeric_limits<double>::infinity();
    Vec2 best_pt{};
    bool found = false;
    for (const ConvexPoly& part : next.parts) {
      const geom::Chain cut = geom::intersect_convex(segment, part.verts);
      if (cut.empty()) continue;
      auto [pt, d] = geom::closest_point(cut, z_des.vec());
      if (d < best) {
        best = d;
        best_pt = pt;
        found = true;
      }
    }
    if (!found)
      throw std::logic_error(
          "empty one-step intersection in a refined corridor at step " +
          std::to_string(s + 1));

    // snap onto the exact discrete dynamics
    double a = (best_pt.y - z.v) / dt;
    a = std::clamp(a, -params.a_max, params.a_max);
    const PVPoint z_next{z.xi + z.v * dt + 0.5 * a * dt * dt, z.v + a * dt};
    out.accels.push_back(a);
    out.states.push_back(z_next);
    z = z_next;
  }
  return out;
}

struct RefSample {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double v = 0.0;
  double orientation = 0.0;
  double xi = 0.0;   // node-frame longitudinal position
  double eta = 0.0;  // lateral offset from the assigned centerline
  int lanelet_id = -1;
  double accel = 0.0;
};

struct LaneChangeBlend {
  double t_init = 0.0;
  double t_fin = 0.0;
  int source = -1;
  int target = -1;
  int first_step = 0;
  int last_blend_step = 0;
};

struct ReferenceTrajectory {
  double dt = 0.1;
  int start_step = 0;
  std::vector<RefSample> samples;
  std::vector<LaneChangeBlend> blends;
};

inline double sigmoid_blend(double delta) {
  return 1.0 / (1.0 + std::exp(-10.0 * (delta - 0.5)));
}

namespace detail {

inline void refresh_orientation(std::vector<RefSample>& samples,
                                std::size_t i) {
  if (samples.size() < 2) return;
  const std::size_t lo = i > 0 ? i - 1 : 0;
  const std::size_t hi = std::min(i + 1, samples.size() - 1);
  if (lo == hi) return;
  const Vec2 d{samples[hi].x - samples[lo].x, samples[hi].y - samples[lo].y};
  if (norm(d) > 1e-12) samples[i].orientation = std::atan2(d.y, d.x);
}

}  // namespace detail

inline ReferenceTrajectory to_global(const CurvilinearTrajectory& traj,
                                     const Corridor& refined,
                                     const RoadNetwork& net,
                                     const VehicleParams& params,
                                     const PlannerConfig& config) {
  ReferenceTrajectory out;
  out.dt = config.dt;
  out.start_step = traj.start_step;
  const std::size_t n = traj.states.size();
  out.samples.resize(n);

  // assign each sample to a corridor node
  std::vector<std::size_t> node_of(n, 0);
  {
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const int step = traj.start_step + static_cast<int>(i);
      while (k + 1 < refined.nodes.size()) {
        const CorridorNode& next = refined.nodes[k + 1];
        if (step < next.timeline.start_step) break;
        const bool lateral =
            next.entered && next.entered->kind != TransitionKind::kSuccessor;
        if (lateral) {
          ++k;  // committed at the gated entry step
          continue;
        }
        const bool crossed =
            traj.states[i].xi >= next.frame_offset - 1e-9 ||
            !refined.nodes[k].timeline.has_step(step);
        if (crossed) {
          ++k;
          continue;
        }
        break;
      }
      node_of[i] = k;
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    const CorridorNode& node = refined.nodes[node_of[i]];
    const Lanelet& lane = net.at(node.lanelet_id);
    const int step = traj.start_step + static_cast<int>(i);
    const double xi_lane =
        std::clamp(traj.states[i].xi - node.frame_offset, 0.0, lane.length);
    const GlobalPose pose = from_curvilinear(lane, xi_lane, 0.0);
    RefSample& s = out.samples[i];
    s.t = step * config.dt;
    s.x = pose.x;
    s.y = pose.y;
    s.v = traj.states[i].v;
    s.orientation = pose.orientation;
    s.xi = xi_lane;
    s.eta = 0.0;
    s.lanelet_id = node.lanelet_id;
    s.accel = i < traj.accels.size() ? traj.accels[i] : 0.0;
  }

  // sigmoid blending across lane-change windows
  for (std::size_t k = 1; k < refined.nodes.size(); ++k) {
    const CorridorNode& node = refined.nodes[k];
    if (!node.entered || node.entered->kind == TransitionKind::kSuccessor)
      continue;
    const Transition& tr = *node.entered;
    const CorridorNode& source = refined.nodes[k - 1];
    const Lanelet& src_lane = net.at(source.lanelet_id);
    const Lanelet& dst_lane = net.at(node.lanelet_id);
    const int n_lc = min_lane_change_steps(
        limits::neighbor_lateral_offset(src_lane, dst_lane), params.a_max,
        config.dt);
    const int window = tr.window_steps();
    if (window < n_lc)
      throw ValidationError("lane-change window of " + std::to_string(window) +
                            " steps is shorter than the minimum of " +
                            std::to_string(n_lc));
    const int blend_steps = std::max(window, n_lc);
    const double t_init = tr.first_step * config.dt;
    const double t_fin = t_init + blend_steps * config.dt;

    LaneChangeBlend blend{t_init, t_fin, source.lanelet_id, node.lanelet_id,
                          tr.first_step, tr.first_step + blend_steps};
    out.blends.push_back(blend);

    for (std::size_t i = 0; i < n; ++i) {
      const int step = traj.start_step + static_cast<int>(i);
      if (step < blend.first_step || step > blend.last_blend_step) continue;
      const double delta = (step * config.dt - t_init) / (t_fin - t_init);
      const double mu = sigmoid_blend(delta);
      const double xi_src = std::clamp(
          traj.states[i].xi - source.frame_offset, 0.0, src_lane.length);
      const double xi_dst = std::clamp(
          traj.states[i].xi - node.frame_offset, 0.0, dst_lane.length);
      const GlobalPose p2 = from_curvilinear(dst_lane, xi_dst, 0.0);
      // depart from the current (possibly already blended) position when the
      // sample still belongs to the source lane, else from the source
      // centerline at equal xi
      Vec2 p1{out.samples[i].x, out.samples[i].y};
      if (out.samples[i].lanelet_id != source.lanelet_id) {
        const GlobalPose g1 = from_curvilinear(src_lane, xi_src, 0.0);
        p1 = {g1.x, g1.y};
      }
      const Vec2 pos = p1 * (1.0 - mu) + Vec2{p2.x, p2.y} * mu;
      out.samples[i].x = pos.x;
      out.samples[i].y = pos.y;
      const Lanelet& assigned = net.at(out.samples[i].lanelet_id);
      out.samples[i].eta =
          project_to_centerline(assigned, pos).eta;
    }
    // orientation across the blended stretch from finite differences
    for (std::size_t i = 0; i < n; ++i) {
      const int step = traj.start_step + static_cast<int>(i);
      if (step < blend.first_step || step > blend.last_blend_step + 1) continue;
      detail::refresh_orientation(out.samples, i);
    }
  }
  return out;
}

// Shifts the lateral offset of samples that would sweep through a partially
// occupying obstacle toward the center of the free lateral band. Longitudinal
// states and times are untouched; the shift is rate-limited per step.
inline ReferenceTrajectory lateral_correction(
    const ReferenceTrajectory& traj,
    const std::vector<ObstacleTimeline>& obstacles, const RoadNetwork& net,
    double vehicle_width, double margin, double min_lateral_width = 0.0,
    double rate_limit = 0.1) {
  if (min_lateral_width <= 0.0)
    min_lateral_width = vehicle_width + 2.0 * margin;
  ReferenceTrajectory out = traj;
  const std::size_t n = out.samples.size();
  if (n == 0) return out;

  auto in_blend = [&](double t) {
    for (const LaneChangeBlend& b : traj.blends)
      if (t >= b.t_init - 1e-9 && t <= b.t_fin + 1e-9) return true;
    return false;
  };

  std::vector<std::optional<double>> target(n);
  constexpr double kLonMargin = 2.5;  // fore/aft clearance window [m]
  for (std::size_t i = 0; i < n; ++i) {
    const RefSample& s = out.samples[i];
    if (in_blend(s.t)) continue;
    const Lanelet& lane = net.at(s.lanelet_id);
    const double half = lane.width / 2.0;
    std::vector<Interval> covered;
    for (const ObstacleTimeline& ob : obstacles) {
      if (!lateral_pass(lane, ob, s.t, vehicle_width, min_lateral_width,
                        margin))
        continue;  // full blockers are the free space's business
      const std::optional<Interval> band =
          obstacle_lateral_band(lane, ob, s.t);
      if (!band) continue;
      const std::vector<Interval> xi = occupied_long_intervals(lane, ob, s.t);
      bool near = false;
      for (const Interval& iv : xi)
        near = near || (s.xi >= iv.lo - kLonMargin && s.xi <= iv.hi + kLonMargin);
      if (!near) continue;
      const Interval sweep{s.eta - vehicle_width / 2.0 - margin,
                           s.eta + vehicle_width / 2.0 + margin};
      if (!sweep.overlaps(*band)) continue;
      covered.push_back(*band);
    }
    if (covered.empty()) continue;
    // largest free lateral band of the cross-section
    detail::merge_intervals(covered);
    double cursor = -half;
    Interval best{0.0, 0.0};
    for (const Interval& c : covered) {
      if (c.lo > cursor && c.lo - cursor > best.length())
        best = {cursor, std::min(c.lo, half)};
      cursor = std::max(cursor, c.hi);
    }
    if (half > cursor && half - cursor > best.length())
      best = {cursor, half};
    if (best.length() < vehicle_width + 2.0 * margin) continue;  // no room
    const double lo = best.lo + vehicle_width / 2.0 + margin;
    const double hi = best.hi - vehicle_width / 2.0 - margin;
    target[i] = std::clamp(0.5 * (best.lo + best.hi), lo, hi);
  }

  bool any = false;
  for (const auto& t : target) any = any || t.has_value();
  if (!any) return out;

  std::vector<double> eta(n);
  for (std::size_t i = 0; i < n; ++i)
    eta[i] = target[i] ? *target[i] : out.samples[i].eta;
  eta[0] = out.samples[0].eta;  // the start is wherever the vehicle is
  for (int pass = 0; pass < 4; ++pass) {
    for (std::size_t i = n - 1; i-- > 0;)
      eta[i] = std::clamp(eta[i], eta[i + 1] - rate_limit,
                          eta[i + 1] + rate_limit);
    eta[0] = out.samples[0].eta;
    for (std::size_t i = 1; i < n; ++i)
      eta[i] = std::clamp(eta[i], eta[i - 1] - rate_limit,
                          eta[i - 1] + rate_limit);
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(eta[i] - out.samples[i].eta) < 1e-12) continue;
    RefSample& s = out.samples[i];
    if (in_blend(s.t)) continue;
    const Lanelet& lane = net.at(s.lanelet_id);
    const GlobalPose pose = from_curvilinear(lane, s.xi, eta[i]);
    s.x = pose.x;
    s.y = pose.y;
    s.eta = eta[i];
  }
  for (std::size_t i = 0; i < n; ++i)
    if (std::abs(eta[i] - traj.samples[i].eta) > 1e-12)
      detail::refresh_orientation(out.samples, i);
  return out;
}

}  // namespace reachplan
