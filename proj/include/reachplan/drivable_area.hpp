#pragma once

// Forward drivable-area computation on a single lanelet: propagate the
// reachable set step by step, unite scheduled seed sets, split by the
// free-space cells, and record overlap windows with left/right/successor
// lanelets. Lane changes are gated by the minimum number of steps a real
// lane change needs.

#include <cmath>
#include <map>
#include <utility>
#include <vector>

#include "reachplan/freespace.hpp"
#include "reachplan/limits.hpp"
#include "reachplan/setops.hpp"

namespace reachplan {

inline int min_lane_change_steps(double d_eta, double a_max, double dt) {
  const double t_fin = limits::min_lane_change_time(d_eta, a_max);
  const int steps = static_cast<int>(std::ceil(t_fin / dt - 1e-9));
  return std::max(1, steps);
}

struct Seed {
  int step = 0;
  PVRegion region;
};

struct AreaTimeline {
  int lanelet_id = -1;
  int start_step = 0;
  std::vector<PVRegion> areas;  // areas[k] is the set at start_step + k

  int end_step() const {
    return start_step + static_cast<int>(areas.size()) - 1;
  }
  bool has_step(int step) const {
    return step >= start_step && step <= end_step();
  }
  const PVRegion& at(int step) const {
    return areas[static_cast<std::size_t>(step - start_step)];
  }
};

enum class TransitionKind { kLeft, kRight, kSuccessor };

inline const char* to_string(TransitionKind k) {
  switch (k) {
    case TransitionKind::kLeft: return "left";
    case TransitionKind::kRight: return "right";
    default: return "successor";
  }
}

struct Transition {
  TransitionKind kind = TransitionKind::kSuccessor;
  int target = -1;
  int first_step = 0;
  int last_step = 0;
  // One overlap set per step of [first_step, last_step]; successor seeds are
  // already shifted into the target frame.
  std::vector<PVRegion> seeds;
  // Lateral transitions only: a lane change may complete at step s once the
  // overlap persisted for the previous N_lc steps; completions[s -
  // completion_first] is the running intersection of that gating window.
  int completion_first = 0;
  std::vector<PVRegion> completions;

  int window_steps() const { return last_step - first_step + 1; }

  const PVRegion& seed_at(int step) const {
    return seeds[static_cast<std::size_t>(step - first_step)];
  }
};

struct LaneletAreaResult {
  AreaTimeline timeline;
  std::vector<Transition> transitions;
  // Seeds scheduled after the step where the area became empty. The caller
  // restarts the computation from them, otherwise reachable states would be
  // lost.
  std::vector<Seed> unconsumed;
};

namespace detail {

struct OpenGroup {
  int first_step = 0;
  int last_step = 0;
  std::vector<PVRegion> seeds;
};

}  // namespace detail

inline LaneletAreaResult compute_lanelet_area(
    const RoadNetwork& net, int lanelet_id, std::vector<Seed> seeds,
    const FreeSpaceTable& free, int horizon, const VehicleParams& params,
    const PlannerConfig& config) {
  if (seeds.empty())
    throw std::invalid_argument("compute_lanelet_area: no seeds");
  std::sort(seeds.begin(), seeds.end(),
            [](const Seed& a, const Seed& b) { return a.step < b.step; });

  const Lanelet& lane = net.at(lanelet_id);
  std::vector<PVRegion> cell_regions;
  auto check_seed = [&](const Seed& s) {
    const std::vector<PVBox>& cells = free.cells(lanelet_id, s.step);
    cell_regions.clear();
    for (const PVBox& c : cells) cell_regions.push_back(PVRegion::box(c));
    std::vector<const PVRegion*> cover;
    for (const PVRegion& r : cell_regions) cover.push_back(&r);
    if (!setops::contained_in_union(s.region, cover, 1e-6))
      throw std::invalid_argument(
          "seed at step " + std::to_string(s.step) +
          " violates the free space of lanelet " + std::to_string(lanelet_id));
  };
  for (const Seed& s : seeds) check_seed(s);

  LaneletAreaResult out;
  out.timeline.lanelet_id = lanelet_id;
  out.timeline.start_step = seeds.front().step;

  std::size_t next_seed = 0;
  PVRegion current;
  while (next_seed < seeds.size() &&
         seeds[next_seed].step == out.timeline.start_step) {
    current = setops::union_merge(current, seeds[next_seed].region);
    ++next_seed;
  }
  out.timeline.areas.push_back(current);

  std::map<std::pair<TransitionKind, int>, detail::OpenGroup> open;
  auto close_group = [&](std::pair<TransitionKind, int> key) {
    auto it = open.find(key);
    if (it == open.end()) return;
    Transition tr;
    tr.kind = key.first;
    tr.target = key.second;
    tr.first_step = it->second.first_step;
    tr.last_step = it->second.last_step;
    tr.seeds = std::move(it->second.seeds);
    open.erase(it);
    if (tr.kind != TransitionKind::kSuccessor) {
      const int n_lc = min_lane_change_steps(
          limits::neighbor_lateral_offset(lane, net.at(tr.target)),
          params.a_max, config.dt);
      if (tr.window_steps() < n_lc) return;  // too short for a lane change
      tr.completion_first = tr.first_step + n_lc - 1;
      bool any = false;
      for (int s = tr.completion_first; s <= tr.last_step; ++s) {
        PVRegion acc = tr.seed_at(s);
        for (int j = s - 1; j >= s - n_lc + 1 && !acc.empty(); --j)
          acc = setops::normalize(
              setops::intersect_regions(acc, tr.seed_at(j)));
        any = any || !acc.empty();
        tr.completions.push_back(std::move(acc));
      }
      if (!any) return;  // overlap never persisted long enough anywhere
    }
    out.transitions.push_back(std::move(tr));
  };
  auto feed_group = [&](TransitionKind kind, int target, int step,
                        PVRegion overlap) {
    const std::pair<TransitionKind, int> key{kind, target};
    if (overlap.empty()) {
      close_group(key);
      return;
    }
    auto it = open.find(key);
    if (it != open.end() && it->second.last_step == step - 1) {
      it->second.last_step = step;
      it->second.seeds.push_back(std::move(overlap));
    } else {
      close_group(key);
      detail::OpenGroup g;
      g.first_step = step;
      g.last_step = step;
      g.seeds.push_back(std::move(overlap));
      open[key] = std::move(g);
    }
  };

  for (int i = out.timeline.start_step; i < horizon && !current.empty(); ++i) {
    PVRegion reach = setops::propagate(current, config.dt, params.a_max);
    while (next_seed < seeds.size() && seeds[next_seed].step == i + 1) {
      reach = setops::union_merge(reach, seeds[next_seed].region);
      ++next_seed;
    }
    PVRegion next =
        setops::intersect_cells_merged(reach, free.cells(lanelet_id, i + 1));
    if (next.empty()) break;
    out.timeline.areas.push_back(next);

    if (lane.left)
      feed_group(TransitionKind::kLeft, *lane.left, i + 1,
                 setops::intersect_cells_merged(next,
                                                free.cells(*lane.left, i + 1)));
    if (lane.right)
      feed_group(TransitionKind::kRight, *lane.right, i + 1,
                 setops::intersect_cells_merged(
                     next, free.cells(*lane.right, i + 1)));
    if (!lane.successors.empty()) {
      // The pre-clip reachable set keeps states that crossed the lanelet end
      // mid-step; clipping first would reduce the handoff to the boundary
      // slice and lose them.
      const PVRegion shifted = setops::shift_long(reach, -lane.length);
      for (int suc : lane.successors)
        feed_group(TransitionKind::kSuccessor, suc, i + 1,
                   setops::intersect_cells_merged(shifted,
                                                  free.cells(suc, i + 1)));
    }
    current = std::move(next);
  }

  std::vector<std::pair<TransitionKind, int>> keys;
  for (const auto& [key, group] : open) keys.push_back(key);
  for (const auto& key : keys) close_group(key);
  for (; next_seed < seeds.size(); ++next_seed)
    if (seeds[next_seed].step > out.timeline.end_step())
      out.unconsumed.push_back(std::move(seeds[next_seed]));
  return out;
}

}  // namespace reachplan
