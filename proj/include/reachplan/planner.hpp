#pragma once

// End-to-end pipeline: free space -> corridor search -> cost/selection ->
// refinement -> reference trajectory. Used by the CLI and the closed-loop
// simulator.

#include <chrono>
#include <optional>
#include <vector>

#include "reachplan/corridor_search.hpp"
#include "reachplan/freespace.hpp"
#include "reachplan/refine.hpp"
#include "reachplan/reference.hpp"
#include "reachplan/scenario.hpp"

namespace reachplan {

enum class PlanStatus { kOk, kNoCorridor, kTimeout };

struct PlanRequest {
  std::vector<GoalSpec> goals;
  int goal_step_lo = 0;
  int goal_step_hi = 0;
  int horizon = 0;

  static PlanRequest from_problem(const PlanningProblem& problem,
                                  const PlannerConfig& config) {
    PlanRequest req;
    req.horizon = horizon_steps(problem, config);
    req.goal_step_lo = static_cast<int>(
        std::ceil(problem.goal_time.lo / config.dt - 1e-9));
    req.goal_step_hi = std::min(
        req.horizon,
        static_cast<int>(std::floor(problem.goal_time.hi / config.dt + 1e-9)));
    req.goals.push_back({problem.goal_lanelet,
                         PVBox{problem.goal_xi.lo, problem.goal_xi.hi,
                               problem.goal_v.lo, problem.goal_v.hi}});
    return req;
  }
};

struct PlanResult {
  PlanStatus status = PlanStatus::kNoCorridor;
  SearchResult search;
  std::vector<DesiredProfile> profiles;    // parallel to search.corridors
  std::vector<CostBreakdown> costs;        // parallel to search.corridors
  std::size_t best = 0;
  std::optional<Corridor> refined;
  CurvilinearTrajectory curvilinear;
  ReferenceTrajectory reference;
  int start_lanelet = -1;
  PVPoint start{};
  double wall_ms = 0.0;

  bool ok() const { return status == PlanStatus::kOk; }
  const Corridor& best_corridor() const {
    return search.corridors[best];
  }
};

inline PlanResult run_pipeline(const Scenario& sc, const PlanRequest& req) {
  const auto tic = std::chrono::steady_clock::now();
  PlanResult out;

  const std::optional<int> start_lane =
      locate_lanelet(sc.network, sc.problem.initial.x, sc.problem.initial.y,
                     sc.problem.initial.orientation);
  if (!start_lane)
    throw OutOfLaneletError("initial state lies on no lanelet");
  out.start_lanelet = *start_lane;
  const CurvilinearPos cp = to_curvilinear(
      sc.network.at(*start_lane), sc.problem.initial.x, sc.problem.initial.y);
  out.start = {cp.xi, sc.problem.initial.v};

  const FreeSpaceTable free(sc.network, sc.obstacles, sc.traffic_lights,
                            req.horizon, sc.vehicle, sc.config);
  out.search = search_corridors(sc.network, free, *start_lane, out.start,
                                req.goals, req.goal_step_lo, req.goal_step_hi,
                                req.horizon, sc.vehicle, sc.config);

  if (out.search.corridors.empty()) {
    out.status =
        out.search.timed_out ? PlanStatus::kTimeout : PlanStatus::kNoCorridor;
    out.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - tic)
                      .count();
    return out;
  }

  SafeDistanceContext safe;
  if (sc.config.w_safe > 0.0) {
    safe.scenario = &sc;
    safe.w_safe = sc.config.w_safe;
    safe.d_safe = sc.config.d_safe;
  }
  const CostWeights weights{sc.config.w_change, sc.config.w_profile};
  for (const Corridor& c : out.search.corridors) {
    out.profiles.push_back(
        corridor_profile(c, sc.network, out.start, req.horizon, sc.vehicle,
                         sc.config));
    out.costs.push_back(
        corridor_cost(c, out.profiles.back(), weights, req.horizon, safe));
  }
  out.best = select_best(out.search.corridors, out.costs);

  const Corridor& best = out.search.corridors[out.best];
  const GoalSpec* goal = nullptr;
  for (const GoalSpec& g : req.goals)
    if (g.lanelet == best.nodes.back().lanelet_id) goal = &g;
  out.refined = refine_corridor(best, goal->box, sc.vehicle, sc.config);
  out.curvilinear = generate_curvilinear(*out.refined, out.profiles[out.best],
                                         sc.vehicle, sc.config);
  out.reference = to_global(out.curvilinear, *out.refined, sc.network,
                            sc.vehicle, sc.config);
  out.reference = lateral_correction(out.reference, sc.obstacles, sc.network,
                                     sc.vehicle.width, sc.config.lateral_margin,
                                     sc.config.min_lateral_width);
  out.status = PlanStatus::kOk;
  out.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - tic)
                    .count();
  return out;
}

inline PlanResult plan_scenario(const Scenario& sc) {
  return run_pipeline(sc, PlanRequest::from_problem(sc.problem, sc.config));
}

}  // namespace reachplan
