#pragma once

// Artifact writers: trajectory CSV/JSON, simulation log CSV, summaries.
// Numeric fields use 9 significant digits so identical runs produce
// identical bytes.

#include <cstdio>
#include <fstream>
#include <string>

#include <json.hpp>

#include "reachplan/planner.hpp"
#include "reachplan/reference.hpp"
#include "reachplan/simulator.hpp"

namespace reachplan {
namespace io {

inline std::string fmt9(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

inline std::string reference_csv(const ReferenceTrajectory& traj) {
  std::string out = "t,x,y,v,orientation\n";
  for (const RefSample& s : traj.samples) {
    out += fmt9(s.t) + "," + fmt9(s.x) + "," + fmt9(s.y) + "," + fmt9(s.v) +
           "," + fmt9(s.orientation) + "\n";
  }
  return out;
}

inline nlohmann::json reference_json(const ReferenceTrajectory& traj) {
  nlohmann::json arr = nlohmann::json::array();
  for (const RefSample& s : traj.samples)
    arr.push_back({{"t", s.t},
                   {"x", s.x},
                   {"y", s.y},
                   {"v", s.v},
                   {"orientation", s.orientation}});
  return arr;
}

inline nlohmann::json corridor_json(const PlanResult& plan) {
  nlohmann::json out;
  out["corridor_count"] = plan.search.corridors.size();
  out["timed_out"] = plan.search.timed_out;
  out["expansions"] = plan.search.expansions;
  if (!plan.ok()) {
    out["status"] =
        plan.status == PlanStatus::kTimeout ? "timeout" : "no_corridor";
    return out;
  }
  out["status"] = "ok";
  const Corridor& best = plan.best_corridor();
  const CostBreakdown& cost = plan.costs[plan.best];
  out["lanelets"] = best.lanelet_sequence();
  out["n_change"] = best.n_change;
  out["goal_step"] = best.goal_step;
  out["cost"] = {{"J", cost.J},
                 {"n_change", cost.n_change},
                 {"d_profile", cost.d_profile},
                 {"safe_distance_penalty", cost.safe_distance_penalty}};
  nlohmann::json nodes = nlohmann::json::array();
  for (const CorridorNode& n : plan.refined->nodes) {
    nlohmann::json jn;
    jn["lanelet"] = n.lanelet_id;
    jn["start_step"] = n.timeline.start_step;
    nlohmann::json steps = nlohmann::json::array();
    for (int s = n.timeline.start_step; s <= n.timeline.end_step(); ++s) {
      nlohmann::json parts = nlohmann::json::array();
      for (const ConvexPoly& p : n.timeline.at(s).parts) {
        nlohmann::json verts = nlohmann::json::array();
        for (const Vec2& v : p.verts) verts.push_back({v.x, v.y});
        parts.push_back(std::move(verts));
      }
      steps.push_back({{"step", s}, {"parts", std::move(parts)}});
    }
    jn["areas"] = std::move(steps);
    nodes.push_back(std::move(jn));
  }
  out["refined_nodes"] = std::move(nodes);
  return out;
}

inline std::string simlog_csv(const SimLog& log) {
  std::string out =
      "t,x,y,v,orientation,a,s,ref_x,ref_y,ref_v,min_gap,friction_margin,"
      "replanned,replan_ms,fallback\n";
  for (const SimTick& tk : log.ticks) {
    out += fmt9(tk.t) + "," + fmt9(tk.state.x) + "," + fmt9(tk.state.y) + "," +
           fmt9(tk.state.v) + "," + fmt9(tk.state.orientation) + "," +
           fmt9(tk.input.a) + "," + fmt9(tk.input.s) + "," + fmt9(tk.ref_x) +
           "," + fmt9(tk.ref_y) + "," + fmt9(tk.ref_v) + "," +
           fmt9(tk.min_gap) + "," + fmt9(tk.friction_margin) + "," +
           (tk.replanned ? "1" : "0") + "," + fmt9(tk.replan_ms) + "," +
           (tk.fallback ? "1" : "0") + "\n";
  }
  return out;
}

inline nlohmann::json summary_json(const SimSummary& s) {
  return {{"reached", s.reached},
          {"collided", s.collided},
          {"ticks", s.ticks},
          {"min_gap", s.min_gap},
          {"mean_replan_ms", s.mean_replan_ms},
          {"p95_replan_ms", s.p95_replan_ms},
          {"fallback_ticks", s.fallback_ticks},
          {"seed", s.seed}};
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

}  // namespace io
}  // namespace reachplan
