#pragma once

// Free-space cells per lanelet and timestep: the longitudinal range not
// blocked by bloated obstacles or red traffic lights, capped by the
// effective speed limit. Obstacles that leave enough lateral room do not
// block the lanelet; they are collected separately so the reference
// trajectory can steer around them.

#include <map>
#include <vector>

#include "reachplan/limits.hpp"
#include "reachplan/scenario.hpp"
#include "reachplan/setops.hpp"

namespace reachplan {

// Legal speed limit clamped by the cornering cap of the worst centerline
// segment.
inline double effective_speed_limit(const Lanelet& lane, double a_max) {
  const double cap =
      limits::max_corner_speed(limits::max_segment_curvature(lane), a_max);
  return std::min(lane.speed_limit, cap);
}

// True when the lateral band left free by the obstacle is wide enough to
// drive through, so the obstacle should not block the lanelet
// longitudinally.
inline bool lateral_pass(const Lanelet& lane, const ObstacleTimeline& obstacle,
                         double t, double vehicle_width,
                         double min_lateral_width,
                         double lateral_margin = 0.25) {
  const std::optional<Interval> band = obstacle_lateral_band(lane, obstacle, t);
  if (!band) return true;  // no overlap with the lanelet strip
  const double half = lane.width / 2.0;
  const Interval covered{std::max(band->lo, -half), std::min(band->hi, half)};
  if (!covered.valid()) return true;
  const double free_low = covered.lo - (-half);
  const double free_high = half - covered.hi;
  const double need =
      std::max(vehicle_width + 2.0 * lateral_margin, min_lateral_width);
  return std::max(free_low, free_high) >= need;
}

inline std::vector<PVBox> compute_free_space(
    const Lanelet& lane, const std::vector<ObstacleTimeline>& obstacles,
    const std::vector<TrafficLightRule>& rules, double t,
    const VehicleParams& params, const PlannerConfig& config) {
  const double bloat = params.length / 2.0 + config.d_min;
  std::vector<Interval> blocked;
  for (const ObstacleTimeline& ob : obstacles) {
    if (lateral_pass(lane, ob, t, params.width, config.min_lateral_width,
                     config.lateral_margin))
      continue;
    for (const Interval& iv : occupied_long_intervals(lane, ob, t))
      blocked.push_back({iv.lo - bloat, iv.hi + bloat});
  }
  for (const TrafficLightRule& rule : rules) {
    if (rule.lanelet != lane.id || !rule.red_at(t)) continue;
    blocked.push_back({rule.stop_xi - 0.5, rule.stop_xi});
  }
  detail::merge_intervals(blocked);

  const double v_eff = effective_speed_limit(lane, params.a_max);
  std::vector<PVBox> cells;
  double cursor = 0.0;
  for (const Interval& b : blocked) {
    if (b.lo > cursor) {
      const double hi = std::min(b.lo, lane.length);
      if (hi > cursor) cells.push_back({cursor, hi, 0.0, v_eff});
    }
    cursor = std::max(cursor, b.hi);
    if (cursor >= lane.length) break;
  }
  if (cursor < lane.length) cells.push_back({cursor, lane.length, 0.0, v_eff});
  return cells;
}

struct PartialOccupier {
  int obstacle_id = 0;
  Interval lateral_band;  // eta range covered on the lanelet
  Interval xi_range;      // longitudinal extent on the lanelet
};

inline std::vector<PartialOccupier> partial_occupiers(
    const Lanelet& lane, const std::vector<ObstacleTimeline>& obstacles,
    double t, const VehicleParams& params, const PlannerConfig& config) {
  std::vector<PartialOccupier> out;
  for (const ObstacleTimeline& ob : obstacles) {
    if (!lateral_pass(lane, ob, t, params.width, config.min_lateral_width,
                      config.lateral_margin))
      continue;
    const std::optional<Interval> band = obstacle_lateral_band(lane, ob, t);
    if (!band) continue;
    const std::vector<Interval> xi = occupied_long_intervals(lane, ob, t);
    if (xi.empty()) continue;
    Interval range = xi.front();
    for (const Interval& iv : xi) {
      range.lo = std::min(range.lo, iv.lo);
      range.hi = std::max(range.hi, iv.hi);
    }
    out.push_back({ob.id, *band, range});
  }
  return out;
}

// Cells for every (lanelet, timestep) pair of a planning horizon. Immutable
// once built; construction is independent per entry.
class FreeSpaceTable {
 public:
  FreeSpaceTable() = default;

  FreeSpaceTable(const RoadNetwork& net,
                 const std::vector<ObstacleTimeline>& obstacles,
                 const std::vector<TrafficLightRule>& rules, int horizon,
                 const VehicleParams& params, const PlannerConfig& config)
      : horizon_(horizon) {
    for (const Lanelet& lane : net.lanelets) {
      auto& per_step = cells_[lane.id];
      per_step.resize(static_cast<std::size_t>(horizon) + 1);
      for (int i = 0; i <= horizon; ++i)
        per_step[static_cast<std::size_t>(i)] = compute_free_space(
            lane, obstacles, rules, i * config.dt, params, config);
      v_eff_[lane.id] = effective_speed_limit(lane, params.a_max);
    }
  }

  int horizon() const { return horizon_; }

  const std::vector<PVBox>& cells(int lanelet_id, int step) const {
    static const std::vector<PVBox> kEmpty;
    auto it = cells_.find(lanelet_id);
    if (it == cells_.end()) return kEmpty;
    if (step < 0 || step > horizon_) return kEmpty;
    return it->second[static_cast<std::size_t>(step)];
  }

  double v_eff(int lanelet_id) const { return v_eff_.at(lanelet_id); }

  bool inside(int lanelet_id, int step, PVPoint z, double tol = 1e-9) const {
    for (const PVBox& c : cells(lanelet_id, step))
      if (c.contains(z, tol)) return true;
    return false;
  }

 private:
  int horizon_ = 0;
  std::map<int, std::vector<std::vector<PVBox>>> cells_;
  std::map<int, double> v_eff_;
};

}  // namespace reachplan
