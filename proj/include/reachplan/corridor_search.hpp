#pragma once

// Queue-driven exploration of the lanelet graph. Each queue entry seeds a
// single-lanelet drivable-area computation; overlap windows with neighbors
// and successors feed new entries, pruned when an existing drivable area
// already covers them. Corridors are recorded whenever an area intersects
// the goal set inside the goal time window.
//
// Queue processing is sequential; all data handed to expansions is
// immutable, so entries could be expanded concurrently behind a snapshot of
// the coverage map, but this implementation ships the sequential mode.

#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "reachplan/drivable_area.hpp"
#include "reachplan/freespace.hpp"
#include "reachplan/scenario.hpp"
#include "reachplan/setops.hpp"

namespace reachplan {

struct CorridorNode {
  int lanelet_id = -1;
  AreaTimeline timeline;
  std::optional<Transition> entered;  // transition from the previous node
  // route-frame xi = node-frame xi + frame_offset; grows by the predecessor
  // length at successor boundaries
  double frame_offset = 0.0;
};

struct Corridor {
  std::vector<CorridorNode> nodes;
  int n_change = 0;
  int goal_step = 0;

  std::vector<int> lanelet_sequence() const {
    std::vector<int> ids;
    ids.reserve(nodes.size());
    for (const CorridorNode& n : nodes) ids.push_back(n.lanelet_id);
    return ids;
  }
};

struct GoalSpec {
  int lanelet = 0;
  PVBox box;  // xi x velocity window in the goal lanelet frame
};

struct ExpandedNode {
  int lanelet_id = -1;
  std::shared_ptr<const ExpandedNode> parent;
  std::optional<Transition> entered;
  double frame_offset = 0.0;
  int n_change = 0;
  AreaTimeline timeline;
};

struct SearchResult {
  std::vector<Corridor> corridors;
  bool timed_out = false;
  int expansions = 0;
  std::vector<std::shared_ptr<const ExpandedNode>> expanded;

  // Union of every computed drivable area for (lanelet, step).
  std::vector<const PVRegion*> coverage(int lanelet_id, int step) const {
    std::vector<const PVRegion*> out;
    for (const auto& node : expanded)
      if (node->lanelet_id == lanelet_id && node->timeline.has_step(step))
        out.push_back(&node->timeline.at(step));
    return out;
  }
};

namespace detail {

struct QueueEntry {
  int lanelet_id = -1;
  std::vector<Seed> seeds;
  std::shared_ptr<const ExpandedNode> parent;
  std::optional<Transition> entered;
  double frame_offset = 0.0;
  int n_change = 0;
};

class CoverageMap {
 public:
  void add(const AreaTimeline& tl) {
    for (int s = tl.start_step; s <= tl.end_step(); ++s)
      map_[{tl.lanelet_id, s}].push_back(&tl.at(s));
  }
  bool covers(int lanelet_id, int step, const PVRegion& region,
              double tol) const {
    auto it = map_.find({lanelet_id, step});
    if (it == map_.end()) return false;
    return setops::contained_in_union(region, it->second, tol);
  }

 private:
  std::map<std::pair<int, int>, std::vector<const PVRegion*>> map_;
};

}  // namespace detail

// Breadth-first corridor search. `horizon` is the last step index,
// ceil(t_end / dt); `goal_steps` is the inclusive step window derived from
// the goal time interval.
inline SearchResult search_corridors(
    const RoadNetwork& net, const FreeSpaceTable& free, int start_lanelet,
    PVPoint start, std::span<const GoalSpec> goals, int goal_step_lo,
    int goal_step_hi, int horizon, const VehicleParams& params,
    const PlannerConfig& config) {
  using clock = std::chrono::steady_clock;
  const auto deadline =
      clock::now() + std::chrono::duration_cast<clock::duration>(
                         std::chrono::duration<double>(config.time_budget));

  SearchResult result;
  detail::CoverageMap coverage;
  std::vector<detail::QueueEntry> queue;
  std::size_t head = 0;

  {
    detail::QueueEntry root;
    root.lanelet_id = start_lanelet;
    root.seeds.push_back({0, PVRegion::point(start)});
    queue.push_back(std::move(root));
  }

  constexpr double kCoverTol = 1e-6;

  while (head < queue.size()) {
    if (clock::now() > deadline) {
      result.timed_out = true;
      break;
    }
    detail::QueueEntry entry = std::move(queue[head++]);

    // drop seeds that became covered while waiting in the queue
    std::vector<Seed> live;
    for (Seed& s : entry.seeds) {
      if (!coverage.covers(entry.lanelet_id, s.step, s.region, kCoverTol))
        live.push_back(std::move(s));
    }
    if (live.empty()) continue;

    LaneletAreaResult area =
        compute_lanelet_area(net, entry.lanelet_id, std::move(live), free,
                             horizon, params, config);

    auto node = std::make_shared<ExpandedNode>();
    node->lanelet_id = entry.lanelet_id;
    node->parent = entry.parent;
    node->entered = entry.entered;
    node->frame_offset = entry.frame_offset;
    node->n_change = entry.n_change;
    node->timeline = std::move(area.timeline);
    coverage.add(node->timeline);
    result.expanded.push_back(node);
    ++result.expansions;

    // goal test on this node's own areas; one corridor per chain, at the
    // earliest satisfying step
    bool recorded = false;
    for (const GoalSpec& goal : goals) {
      if (recorded) break;
      if (node->lanelet_id != goal.lanelet) continue;
      const int lo = std::max(node->timeline.start_step, goal_step_lo);
      const int hi = std::min(node->timeline.end_step(), goal_step_hi);
      for (int s = lo; s <= hi; ++s) {
        if (setops::intersect_box(node->timeline.at(s), goal.box).empty())
          continue;
        Corridor c;
        c.n_change = node->n_change;
        c.goal_step = s;
        for (const ExpandedNode* n = node.get(); n != nullptr;
             n = n->parent.get())
          c.nodes.push_back(
              {n->lanelet_id, n->timeline, n->entered, n->frame_offset});
        std::reverse(c.nodes.begin(), c.nodes.end());
        result.corridors.push_back(std::move(c));
        recorded = true;
        break;
      }
    }

    // seeds that outlived the timeline restart on the same lanelet
    if (!area.unconsumed.empty()) {
      detail::QueueEntry restart = entry;
      restart.seeds = std::move(area.unconsumed);
      queue.push_back(std::move(restart));
    }

    for (Transition& tr : area.transitions) {
      detail::QueueEntry child;
      child.lanelet_id = tr.target;
      child.parent = node;
      child.frame_offset =
          node->frame_offset +
          (tr.kind == TransitionKind::kSuccessor ? net.at(entry.lanelet_id).length
                                                 : 0.0);
      child.n_change =
          node->n_change + (tr.kind == TransitionKind::kSuccessor ? 0 : 1);
      if (tr.kind == TransitionKind::kSuccessor) {
        for (int s = tr.first_step; s <= tr.last_step; ++s) {
          const PVRegion& seed = tr.seed_at(s);
          if (coverage.covers(tr.target, s, seed, kCoverTol)) continue;
          child.seeds.push_back({s, seed});
        }
      } else {
        for (int s = tr.completion_first; s <= tr.last_step; ++s) {
          const PVRegion& seed =
              tr.completions[static_cast<std::size_t>(s - tr.completion_first)];
          if (seed.empty()) continue;
          if (coverage.covers(tr.target, s, seed, kCoverTol)) continue;
          child.seeds.push_back({s, seed});
        }
      }
      if (child.seeds.empty()) continue;
      child.entered = std::move(tr);
      queue.push_back(std::move(child));
    }
  }
  return result;
}

struct DesiredProfile {
  // route-frame states for steps 0..horizon and the acceleration applied
  // between consecutive steps
  std::vector<PVPoint> states;
  std::vector<double> accels;
};

struct ProfileSegment {
  int from_step = 0;
  double v_max = 0.0;
};

// Accelerate toward the governing speed limit at a_des, saturated so the
// limit is met exactly.
inline DesiredProfile desired_profile(double xi0, double v0,
                                      std::span<const ProfileSegment> segments,
                                      int horizon,
                                      const PlannerConfig& config) {
  DesiredProfile out;
  out.states.reserve(static_cast<std::size_t>(horizon) + 1);
  out.states.push_back({xi0, v0});
  std::size_t seg = 0;
  for (int i = 0; i < horizon; ++i) {
    while (seg + 1 < segments.size() && segments[seg + 1].from_step <= i)
      ++seg;
    const double v_max = segments.empty() ? v0 : segments[seg].v_max;
    const PVPoint z = out.states.back();
    const double a = std::max(
        -config.a_des,
        std::min(config.a_des, (v_max - z.v) / config.dt));
    out.accels.push_back(a);
    out.states.push_back({z.xi + z.v * config.dt + 0.5 * a * config.dt * config.dt,
                          z.v + a * config.dt});
  }
  return out;
}

inline std::vector<ProfileSegment> profile_segments(const Corridor& corridor,
                                                    const RoadNetwork& net,
                                                    const VehicleParams& params) {
  std::vector<ProfileSegment> segs;
  for (const CorridorNode& n : corridor.nodes) {
    const double v_eff = effective_speed_limit(net.at(n.lanelet_id), params.a_max);
    const int from = n.timeline.start_step;
    if (!segs.empty() && segs.back().from_step == from)
      segs.back().v_max = v_eff;
    else
      segs.push_back({from, v_eff});
  }
  return segs;
}

inline DesiredProfile corridor_profile(const Corridor& corridor,
                                       const RoadNetwork& net, PVPoint start,
                                       int horizon, const VehicleParams& params,
                                       const PlannerConfig& config) {
  const std::vector<ProfileSegment> segs =
      profile_segments(corridor, net, params);
  return desired_profile(start.xi, start.v, segs, horizon, config);
}

struct CostBreakdown {
  int n_change = 0;
  double d_profile = 0.0;
  double safe_distance_penalty = 0.0;
  double J = 0.0;
};

struct CostWeights {
  double w_change = 10.0;
  double w_profile = 1.0;
};

// Context for the optional soft safe-distance rule. Off by default
// (w_safe = 0); violations of the soft distance to the leading obstacle are
// charged to the cost instead of being cut from the free space, so planning
// still succeeds when the rule is already violated.
struct SafeDistanceContext {
  const Scenario* scenario = nullptr;
  double w_safe = 0.0;
  double d_safe = 0.0;
};

inline CostBreakdown corridor_cost(const Corridor& corridor,
                                   const DesiredProfile& profile,
                                   const CostWeights& weights, int horizon,
                                   const SafeDistanceContext& safe = {}) {
  CostBreakdown out;
  out.n_change = corridor.n_change;
  double sum = 0.0;
  for (int step = 0; step <= horizon &&
                     step < static_cast<int>(profile.states.size());
       ++step) {
    double best = std::numeric_limits<double>::infinity();
    PVPoint witness{};
    const CorridorNode* witness_node = nullptr;
    for (const CorridorNode& n : corridor.nodes) {
      if (!n.timeline.has_step(step)) continue;
      const PVPoint z_des{profile.states[static_cast<std::size_t>(step)].xi -
                              n.frame_offset,
                          profile.states[static_cast<std::size_t>(step)].v};
      auto [pt, d] = setops::closest_point(n.timeline.at(step), z_des);
      if (d < best) {
        best = d;
        witness = pt;
        witness_node = &n;
      }
    }
    if (witness_node == nullptr) continue;
    sum += best;

    if (safe.w_safe > 0.0 && safe.scenario != nullptr) {
      const Scenario& sc = *safe.scenario;
      const Lanelet& lane = sc.network.at(witness_node->lanelet_id);
      const double t = step * sc.config.dt;
      double gap = std::numeric_limits<double>::infinity();
      for (const ObstacleTimeline& ob : sc.obstacles) {
        for (const Interval& iv : occupied_long_intervals(lane, ob, t)) {
          const double ahead = iv.lo - witness.xi - sc.vehicle.length / 2.0;
          if (iv.lo >= witness.xi && ahead < gap) gap = ahead;
        }
      }
      if (std::isfinite(gap))
        out.safe_distance_penalty +=
            safe.w_safe * std::max(0.0, safe.d_safe - gap);
    }
  }
  out.d_profile = horizon > 0 ? sum / horizon : sum;
  out.J = weights.w_change * out.n_change + weights.w_profile * out.d_profile +
          out.safe_distance_penalty;
  return out;
}

// Arg-min of J; ties broken by fewer lane changes, earlier goal step, then
// the lexicographically smallest lanelet-id sequence, which makes the choice
// independent of input order.
inline std::size_t select_best(std::span<const Corridor> corridors,
                               std::span<const CostBreakdown> costs) {
  if (corridors.empty())
    throw std::invalid_argument("select_best: no corridors");
  std::size_t best = 0;
  for (std::size_t i = 1; i < corridors.size(); ++i) {
    const CostBreakdown& a = costs[i];
    const CostBreakdown& b = costs[best];
    bool better = false;
    if (a.J != b.J) {
      better = a.J < b.J;
    } else if (corridors[i].n_change != corridors[best].n_change) {
      better = corridors[i].n_change < corridors[best].n_change;
    } else if (corridors[i].goal_step != corridors[best].goal_step) {
      better = corridors[i].goal_step < corridors[best].goal_step;
    } else {
      better = corridors[i].lanelet_sequence() <
               corridors[best].lanelet_sequence();
    }
    if (better) best = i;
  }
  return best;
}

inline int horizon_steps(const PlanningProblem& problem,
                         const PlannerConfig& config) {
  return static_cast<int>(std::ceil(problem.goal_time.hi / config.dt - 1e-9));
}

// Spec-level entry point: corridors from the scenario's initial state to its
// goal region.
inline SearchResult find_corridors(const Scenario& sc,
                                   const FreeSpaceTable& free) {
  const std::optional<int> start_lane =
      locate_lanelet(sc.network, sc.problem.initial.x, sc.problem.initial.y,
                     sc.problem.initial.orientation);
  if (!start_lane)
    throw OutOfLaneletError("initial state lies on no lanelet");
  const CurvilinearPos cp = to_curvilinear(
      sc.network.at(*start_lane), sc.problem.initial.x, sc.problem.initial.y);

  const int horizon = horizon_steps(sc.problem, sc.config);
  const int lo = static_cast<int>(
      std::ceil(sc.problem.goal_time.lo / sc.config.dt - 1e-9));
  const int hi = std::min(
      horizon,
      static_cast<int>(std::floor(sc.problem.goal_time.hi / sc.config.dt + 1e-9)));
  const GoalSpec goal{sc.problem.goal_lanelet,
                      PVBox{sc.problem.goal_xi.lo, sc.problem.goal_xi.hi,
                            sc.problem.goal_v.lo, sc.problem.goal_v.hi}};
  return search_corridors(sc.network, free, *start_lane,
                          {cp.xi, sc.problem.initial.v},
                          std::span<const GoalSpec>(&goal, 1), lo, hi, horizon,
                          sc.vehicle, sc.config);
}

}  // namespace reachplan
