#pragma once

// Independent oracles used to pin expected values: brute-force simulation of
// the discrete double integrator, dense-grid arg-min queries, Monte-Carlo
// areas, and a forward exhaustive reachability search with state-space
// pruning. These never call the propagation code they check.

#include <cmath>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "reachplan/freespace.hpp"
#include "reachplan/scenario.hpp"
#include "reachplan/setops.hpp"

namespace reachplan::testing {

struct SimState {
  double xi;
  double v;
};

inline SimState integrate_step(SimState z, double a, double dt) {
  return {z.xi + z.v * dt + 0.5 * a * dt * dt, z.v + a * dt};
}

inline std::vector<double> accel_grid(double a_max, int count) {
  std::vector<double> out;
  for (int i = 0; i < count; ++i)
    out.push_back(-a_max + 2.0 * a_max * i / (count - 1));
  return out;
}

// every endpoint of constant-per-step acceleration sequences over an accel
// grid, from every corner/grid start point of a box
inline std::vector<SimState> brute_force_endpoints(const PVBox& start,
                                                   int steps, double dt,
                                                   double a_max,
                                                   int accel_count,
                                                   int start_grid = 5) {
  std::vector<SimState> starts;
  for (int i = 0; i < start_grid; ++i)
    for (int j = 0; j < start_grid; ++j)
      starts.push_back(
          {start.xi_lo + start.width() * i / (start_grid - 1 + 1e-300),
           start.v_lo + start.height() * j / (start_grid - 1 + 1e-300)});
  const std::vector<double> accels = accel_grid(a_max, accel_count);
  std::vector<SimState> frontier = starts;
  for (int s = 0; s < steps; ++s) {
    std::vector<SimState> next;
    next.reserve(frontier.size() * accels.size());
    for (const SimState& z : frontier)
      for (double a : accels) next.push_back(integrate_step(z, a, dt));
    frontier = std::move(next);
  }
  return frontier;
}

// dense-grid arg-min of the distance to z over a region's bounding box
inline std::pair<PVPoint, double> grid_closest_point(const PVRegion& region,
                                                     PVPoint z,
                                                     double xi_res,
                                                     double v_res) {
  const PVBox b = region.bounds();
  double best = std::numeric_limits<double>::infinity();
  PVPoint best_pt{};
  for (double xi = b.xi_lo; xi <= b.xi_hi + 1e-12; xi += xi_res)
    for (double v = b.v_lo; v <= b.v_hi + 1e-12; v += v_res) {
      const PVPoint p{xi, v};
      if (setops::signed_distance(region, p) < -1e-12) continue;
      const double d = std::hypot(p.xi - z.xi, p.v - z.v);
      if (d < best) {
        best = d;
        best_pt = p;
      }
    }
  return {best_pt, best};
}

inline double monte_carlo_area(const PVRegion& region, const PVBox& window,
                               int samples, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dx(window.xi_lo, window.xi_hi);
  std::uniform_real_distribution<double> dv(window.v_lo, window.v_hi);
  int hits = 0;
  for (int i = 0; i < samples; ++i)
    if (setops::signed_distance(region, {dx(rng), dv(rng)}) >= 0.0) ++hits;
  return window.width() * window.height() * hits / static_cast<double>(samples);
}

// ---------------------------------------------------------------------------
// Forward exhaustive reachability over a lanelet network with grid pruning.
// A state is (lanelet, xi, v) at a step; it must lie inside the free space of
// its lanelet at every sampled step. Crossing the lanelet end mid-step moves
// the state into a successor frame. Lane changes are not simulated; the
// check covers longitudinal propagation, free-space clipping, and successor
// handoffs.
// ---------------------------------------------------------------------------

struct OracleState {
  int lanelet;
  double xi;
  double v;
};

struct OracleLevels {
  // states per step, pruned to one representative per 5 cm x 0.05 m/s cell
  std::vector<std::vector<OracleState>> per_step;
};

inline OracleLevels exhaustive_forward_states(
    const RoadNetwork& net, const FreeSpaceTable& free, int start_lanelet,
    PVPoint start, int horizon, double dt, double a_max, int accel_count,
    double prune_xi = 0.05, double prune_v = 0.05) {
  OracleLevels out;
  out.per_step.resize(static_cast<std::size_t>(horizon) + 1);
  const std::vector<double> accels = accel_grid(a_max, accel_count);

  using Key = std::tuple<int, long long, long long>;
  auto key_of = [&](const OracleState& s) {
    return Key{s.lanelet,
               static_cast<long long>(std::floor(s.xi / prune_xi)),
               static_cast<long long>(std::floor(s.v / prune_v))};
  };

  std::vector<OracleState> frontier;
  if (free.inside(start_lanelet, 0, {start.xi, start.v}))
    frontier.push_back({start_lanelet, start.xi, start.v});
  out.per_step[0] = frontier;

  for (int step = 0; step < horizon; ++step) {
    std::set<Key> seen;
    std::vector<OracleState> next;
    auto admit = [&](const OracleState& s) {
      if (!free.inside(s.lanelet, step + 1, {s.xi, s.v})) return;
      if (seen.insert(key_of(s)).second) next.push_back(s);
    };
    for (const OracleState& s : frontier) {
      for (double a : accels) {
        const SimState z = integrate_step({s.xi, s.v}, a, dt);
        if (z.v < -1e-12) {
          // the plant cannot drive backwards in these fixtures; free space
          // rejects negative velocities anyway
        }
        const Lanelet& lane = net.at(s.lanelet);
        if (z.xi <= lane.length) {
          admit({s.lanelet, z.xi, z.v});
        } else {
          for (int suc : lane.successors)
            admit({suc, z.xi - lane.length, z.v});
        }
      }
    }
    out.per_step[static_cast<std::size_t>(step) + 1] = next;
    frontier = std::move(next);
  }
  return out;
}

// 1 cm scan oracle for the free-space construction: a longitudinal station
// is free iff its distance to every blocking obstacle's occupied interval is
// at least l_car/2 + d_min and it is not inside a red stop band.
inline std::vector<bool> free_space_scan(
    const Lanelet& lane, const std::vector<ObstacleTimeline>& obstacles,
    const std::vector<TrafficLightRule>& rules, double t,
    const VehicleParams& params, const PlannerConfig& config,
    double resolution = 0.01) {
  const int n = static_cast<int>(std::floor(lane.length / resolution)) + 1;
  std::vector<bool> free_at(static_cast<std::size_t>(n), true);
  const double clearance = params.length / 2.0 + config.d_min;
  for (const ObstacleTimeline& ob : obstacles) {
    if (lateral_pass(lane, ob, t, params.width, config.min_lateral_width,
                     config.lateral_margin))
      continue;
    const std::vector<Interval> occ = occupied_long_intervals(lane, ob, t);
    for (int i = 0; i < n; ++i) {
      const double xi = i * resolution;
      for (const Interval& iv : occ) {
        const double dist =
            xi < iv.lo ? iv.lo - xi : (xi > iv.hi ? xi - iv.hi : 0.0);
        if (dist < clearance) {
          free_at[static_cast<std::size_t>(i)] = false;
          break;
        }
      }
    }
  }
  for (const TrafficLightRule& rule : rules) {
    if (rule.lanelet != lane.id || !rule.red_at(t)) continue;
    for (int i = 0; i < n; ++i) {
      const double xi = i * resolution;
      if (xi >= rule.stop_xi - 0.5 && xi <= rule.stop_xi)
        free_at[static_cast<std::size_t>(i)] = false;
    }
  }
  return free_at;
}

}  // namespace reachplan::testing
