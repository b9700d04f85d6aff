#pragma once

// Backward refinement of a selected corridor: starting from the intersection
// of the goal-step area with the goal set, intersect each earlier area with
// the backward-propagated successor set, so every remaining state can still
// reach the goal.
//
// Handoffs run backward through the recorded transitions. Successor
// boundaries shift sets by the predecessor length and also admit states that
// cross the boundary mid-step (their predecessors sit one step earlier on
// the previous lanelet); lane-change boundaries carry sets across unchanged
// at each viable completion step.

#include <map>
#include <stdexcept>
#include <vector>

#include "reachplan/corridor_search.hpp"
#include "reachplan/setops.hpp"

namespace reachplan {

namespace detail {

// Trims empty leading/trailing sets; throws if emptiness appears strictly
// inside the block, which would break forward viability.
inline AreaTimeline trim_timeline(int lanelet_id, int start_step,
                                  std::vector<PVRegion> areas) {
  std::size_t lo = 0;
  while (lo < areas.size() && areas[lo].empty()) ++lo;
  std::size_t hi = areas.size();
  while (hi > lo && areas[hi - 1].empty()) --hi;
  for (std::size_t i = lo; i < hi; ++i)
    if (areas[i].empty())
      throw std::logic_error("refinement produced an interior empty area");
  AreaTimeline out;
  out.lanelet_id = lanelet_id;
  out.start_step = start_step + static_cast<int>(lo);
  out.areas.assign(
      std::make_move_iterator(areas.begin() + static_cast<std::ptrdiff_t>(lo)),
      std::make_move_iterator(areas.begin() + static_cast<std::ptrdiff_t>(hi)));
  return out;
}

}  // namespace detail

inline Corridor refine_corridor(const Corridor& corridor, const PVBox& goal_box,
                                const VehicleParams& params,
                                const PlannerConfig& config) {
  if (corridor.nodes.empty())
    throw std::invalid_argument("refine_corridor: empty corridor");

  const int k_last = static_cast<int>(corridor.nodes.size()) - 1;
  Corridor out = corridor;

  // Crossing contributions into the predecessor's frame, keyed by the
  // predecessor step they apply to.
  std::map<int, PVRegion> handin;

  for (int k = k_last; k >= 0; --k) {
    const CorridorNode& node = corridor.nodes[static_cast<std::size_t>(k)];
    const AreaTimeline& orig = node.timeline;

    int top;
    if (k == k_last) {
      top = corridor.goal_step;
    } else {
      top = orig.start_step - 1;
      for (const auto& [step, region] : handin)
        top = std::max(top, step);
      top = std::min(top, orig.end_step());
    }
    const int bottom = orig.start_step;
    if (top < bottom)
      throw std::logic_error("refinement window collapsed on lanelet " +
                             std::to_string(node.lanelet_id));

    std::vector<PVRegion> refined(static_cast<std::size_t>(top - bottom + 1));
    for (int s = top; s >= bottom; --s) {
      const PVRegion& base = orig.at(s);
      if (k == k_last && s == top) {
        PVRegion goal_hit = setops::intersect_box(base, goal_box);
        if (goal_hit.empty())
          throw std::invalid_argument(
              "refine_corridor: goal-step area does not intersect the goal");
        refined[static_cast<std::size_t>(s - bottom)] = std::move(goal_hit);
        continue;
      }
      PVRegion allowed;  // states at s that can still reach the goal
      if (s < top) {
        const PVRegion& next =
            refined[static_cast<std::size_t>(s + 1 - bottom)];
        if (!next.empty())
          allowed = setops::backward_step(next, config.dt, params.a_max);
      }
      if (k < k_last) {
        auto it = handin.find(s);
        if (it != handin.end())
          allowed = setops::union_merge(allowed, it->second);
      }
      refined[static_cast<std::size_t>(s - bottom)] =
          setops::intersect_regions(base, allowed);
    }

    out.nodes[static_cast<std::size_t>(k)].timeline =
        detail::trim_timeline(node.lanelet_id, bottom, std::move(refined));

    if (k > 0) {
      const Transition& tr = *node.entered;
      const double shift =
          node.frame_offset -
          corridor.nodes[static_cast<std::size_t>(k - 1)].frame_offset;
      const AreaTimeline& rt = out.nodes[static_cast<std::size_t>(k)].timeline;
      handin.clear();
      auto add_handin = [&](int step, PVRegion region) {
        if (region.empty()) return;
        auto it = handin.find(step);
        if (it == handin.end())
          handin.emplace(step, std::move(region));
        else
          it->second = setops::union_merge(it->second, region);
      };
      if (tr.kind == TransitionKind::kSuccessor) {
        for (int s = std::max(tr.first_step, rt.start_step);
             s <= std::min(tr.last_step, rt.end_step()); ++s) {
          // states that enter the successor exactly at step s
          PVRegion crossing = setops::normalize(
              setops::intersect_regions(rt.at(s), tr.seed_at(s)));
          if (crossing.empty()) continue;
          crossing = setops::shift_long(std::move(crossing), shift);
          // boundary states present on both lanelets at step s
          add_handin(s, crossing);
          // mid-step crossers: their predecessors sit one step earlier
          add_handin(s - 1,
                     setops::backward_step(crossing, config.dt, params.a_max));
        }
      } else {
        const int c_last =
            tr.completion_first +
            static_cast<int>(tr.completions.size()) - 1;
        for (int s = std::max(tr.completion_first, rt.start_step);
             s <= std::min(c_last, rt.end_step()); ++s) {
          const PVRegion& gate =
              tr.completions[static_cast<std::size_t>(s - tr.completion_first)];
          if (gate.empty()) continue;
          add_handin(s, setops::normalize(
                            setops::intersect_regions(rt.at(s), gate)));
        }
      }
      if (handin.empty())
        throw std::logic_error("refined handoff window vanished");
    }
  }
  return out;
}

// Union of a corridor's per-step areas expressed in the route frame, where
// the double-integrator dynamics are uniform across node boundaries.
inline PVRegion corridor_step_region(const Corridor& corridor, int step) {
  PVRegion out;
  for (const CorridorNode& n : corridor.nodes) {
    if (!n.timeline.has_step(step)) continue;
    PVRegion shifted = setops::shift_long(n.timeline.at(step), n.frame_offset);
    for (ConvexPoly& p : shifted.parts) out.parts.push_back(std::move(p));
  }
  return setops::normalize(std::move(out));
}

inline int corridor_first_step(const Corridor& corridor) {
  int first = std::numeric_limits<int>::max();
  for (const CorridorNode& n : corridor.nodes)
    first = std::min(first, n.timeline.start_step);
  return first;
}

}  // namespace reachplan
