#pragma once

// SVG rendering of a scenario and plan: lanelet strips, obstacle snapshots,
// the goal region, drivable-area bands projected onto the road, and the
// reference trajectory. Y axis points up; the scale is pixels per meter.

#include <string>
#include <vector>

#include "reachplan/export.hpp"
#include "reachplan/planner.hpp"
#include "reachplan/scenario.hpp"

namespace reachplan {
namespace svg {

namespace detail {

struct Mapper {
  double min_x = 0.0, max_y = 0.0, scale = 10.0, pad = 20.0;
  Vec2 operator()(Vec2 p) const {
    return {(p.x - min_x) * scale + pad, (max_y - p.y) * scale + pad};
  }
};

inline std::string points_attr(const std::vector<Vec2>& pts,
                               const Mapper& map) {
  std::string out;
  for (const Vec2& p : pts) {
    const Vec2 q = map(p);
    out += io::fmt9(q.x) + "," + io::fmt9(q.y) + " ";
  }
  if (!out.empty()) out.pop_back();
  return out;
}

// lanelet band between two arc positions, offset to both sides
inline std::vector<Vec2> lane_band(const Lanelet& lane, double xi_lo,
                                   double xi_hi, double half_width) {
  std::vector<double> stations{xi_lo};
  for (std::size_t i = 0; i < lane.centerline.size(); ++i)
    if (lane.arc[i] > xi_lo && lane.arc[i] < xi_hi)
      stations.push_back(lane.arc[i]);
  stations.push_back(xi_hi);
  std::vector<Vec2> left, right;
  for (double s : stations) {
    const std::size_t i = lane.segment_at(std::clamp(s, 0.0, lane.length));
    const Vec2 dir = lane.segment_dir(i);
    const Vec2 nrm{-dir.y, dir.x};
    const GlobalPose g = from_curvilinear(lane, std::clamp(s, 0.0, lane.length), 0.0);
    left.push_back(Vec2{g.x, g.y} + nrm * half_width);
    right.push_back(Vec2{g.x, g.y} - nrm * half_width);
  }
  std::vector<Vec2> poly = left;
  poly.insert(poly.end(), right.rbegin(), right.rend());
  return poly;
}

}  // namespace detail

inline std::string render(const Scenario& sc, const PlanResult* plan,
                          const std::vector<double>& times, double scale) {
  double min_x = 1e18, max_x = -1e18, min_y = 1e18, max_y = -1e18;
  auto grow = [&](Vec2 p) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  };
  for (const Lanelet& l : sc.network.lanelets)
    for (const Vec2& p : l.centerline) {
      grow(p + Vec2{0, l.width});
      grow(p - Vec2{0, l.width});
    }
  for (const ObstacleTimeline& ob : sc.obstacles)
    for (const auto& st : ob.states) grow({st.x, st.y});

  detail::Mapper map{min_x, max_y, scale, 20.0};
  const double w = (max_x - min_x) * scale + 40.0;
  const double h = (max_y - min_y) * scale + 40.0;

  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                    io::fmt9(w) + "\" height=\"" + io::fmt9(h) + "\">\n";

  for (const Lanelet& l : sc.network.lanelets) {
    const std::vector<Vec2> band =
        detail::lane_band(l, 0.0, l.length, l.width / 2.0);
    out += "<polygon points=\"" + detail::points_attr(band, map) +
           "\" fill=\"#d8d8d8\" stroke=\"#777777\" stroke-width=\"1\"/>\n";
  }

  {  // goal region in yellow
    const Lanelet& goal = sc.network.at(sc.problem.goal_lanelet);
    const std::vector<Vec2> band = detail::lane_band(
        goal, sc.problem.goal_xi.lo, sc.problem.goal_xi.hi, goal.width / 2.0);
    out += "<polygon points=\"" + detail::points_attr(band, map) +
           "\" fill=\"#f5d742\" fill-opacity=\"0.8\"/>\n";
  }

  if (plan && plan->ok()) {  // drivable areas in red, projected to the road
    for (double t : times) {
      const int step = static_cast<int>(std::llround(t / sc.config.dt));
      for (const CorridorNode& n : plan->refined->nodes) {
        if (!n.timeline.has_step(step)) continue;
        const Lanelet& lane = sc.network.at(n.lanelet_id);
        for (const ConvexPoly& part : n.timeline.at(step).parts) {
          const PVBox b = part.bounds();
          const std::vector<Vec2> band = detail::lane_band(
              lane, std::clamp(b.xi_lo, 0.0, lane.length),
              std::clamp(b.xi_hi, 0.0, lane.length), lane.width / 2.0);
          out += "<polygon points=\"" + detail::points_attr(band, map) +
                 "\" fill=\"#d62020\" fill-opacity=\"0.4\"/>\n";
        }
      }
    }
  }

  for (double t : times) {  // obstacle snapshots in blue
    for (const ObstacleTimeline& ob : sc.obstacles) {
      const std::array<Vec2, 4> c = ob.corners_at(t);
      out += "<polygon points=\"" +
             detail::points_attr({c[0], c[1], c[2], c[3]}, map) +
             "\" fill=\"#2050d6\" fill-opacity=\"0.7\"/>\n";
    }
  }

  if (plan && plan->ok() && !plan->reference.samples.empty()) {
    std::vector<Vec2> path;
    for (const RefSample& s : plan->reference.samples)
      path.push_back({s.x, s.y});
    out += "<polyline points=\"" + detail::points_attr(path, map) +
           "\" fill=\"none\" stroke=\"#000000\" stroke-width=\"2\"/>\n";
  }

  out += "</svg>\n";
  return out;
}

}  // namespace svg
}  // namespace reachplan
