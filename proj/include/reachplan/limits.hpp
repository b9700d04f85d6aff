#pragma once

// Closed-form kinematic limits shared by free-space construction and the
// lane-change gating.

#include <cmath>
#include <limits>
#include <stdexcept>

#include "reachplan/scenario.hpp"

namespace reachplan {
namespace limits {

// Friction-circle cornering cap: v <= sqrt(a_max * dxi / dphi). Zero
// curvature is unbounded; callers clamp with the legal speed limit.
inline double max_corner_speed(double dphi_per_dxi, double a_max) {
  if (dphi_per_dxi < 0.0)
    throw std::invalid_argument("curvature must be >= 0");
  if (dphi_per_dxi == 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(a_max / dphi_per_dxi);
}

// t_fin >= sqrt(4 * d_eta / a_max)
inline double min_lane_change_time(double d_eta, double a_max) {
  if (d_eta < 0.0) throw std::invalid_argument("d_eta must be >= 0");
  if (a_max <= 0.0) throw std::invalid_argument("a_max must be > 0");
  return std::sqrt(4.0 * d_eta / a_max);
}

// Maximum per-segment curvature of a centerline: turn angle at each interior
// vertex over the mean adjacent segment length.
inline double max_segment_curvature(const Lanelet& lane) {
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < lane.segment_count(); ++i) {
    const double dphi = std::abs(
        wrap_angle(lane.segment_heading(i + 1) - lane.segment_heading(i)));
    const double len_a = lane.arc[i + 1] - lane.arc[i];
    const double len_b = lane.arc[i + 2] - lane.arc[i + 1];
    const double dxi = 0.5 * (len_a + len_b);
    if (dxi > 0.0) worst = std::max(worst, dphi / dxi);
  }
  return worst;
}

// Mean centerline-to-centerline distance between two neighboring lanelets,
// sampled at 1 m steps along the first.
inline double neighbor_lateral_offset(const Lanelet& a, const Lanelet& b) {
  double sum = 0.0;
  int count = 0;
  for (double s = 0.0; s <= a.length; s += 1.0) {
    const GlobalPose p = from_curvilinear(a, std::min(s, a.length), 0.0);
    const Projection pr = project_to_centerline(b, {p.x, p.y});
    sum += pr.dist;
    ++count;
  }
  return count > 0 ? sum / count : 0.0;
}

}  // namespace limits
}  // namespace reachplan
