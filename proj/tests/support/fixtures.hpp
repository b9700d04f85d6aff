#pragma once

// Programmatic scenario builders and randomized fixture generation shared by
// the unit and acceptance suites.

#include <random>
#include <vector>

#include "reachplan/scenario.hpp"
#include "reachplan/setops.hpp"

namespace reachplan::testing {

inline Lanelet straight_lanelet(int id, Vec2 start, double length,
                                double width = 3.5, double speed = 13.9,
                                double y_step = 0.0) {
  Lanelet l;
  l.id = id;
  l.width = width;
  l.speed_limit = speed;
  l.centerline = {start, start + Vec2{length / 2.0, y_step / 2.0},
                  start + Vec2{length, y_step}};
  l.finalize();
  return l;
}

// n parallel straight lanes along +x; lane i sits at y = i * width, so lane
// i+1 is the left neighbor of lane i.
inline RoadNetwork parallel_road(int lanes, double length, double width = 3.5,
                                 double speed = 13.9) {
  RoadNetwork net;
  for (int i = 0; i < lanes; ++i) {
    Lanelet l = straight_lanelet(i, {0.0, i * width}, length, width, speed);
    if (i + 1 < lanes) l.left = i + 1;
    if (i > 0) l.right = i - 1;
    net.lanelets.push_back(std::move(l));
  }
  return net;
}

// chain of `count` straight lanelets along +x, ids 0..count-1, linked by the
// successor relation
inline RoadNetwork chain_road(int count, double length, double width = 3.5,
                              double speed = 13.9) {
  RoadNetwork net;
  for (int i = 0; i < count; ++i) {
    Lanelet l = straight_lanelet(i, {i * length, 0.0}, length, width, speed);
    if (i + 1 < count) l.successors = {i + 1};
    net.lanelets.push_back(std::move(l));
  }
  return net;
}

inline ObstacleTimeline static_obstacle(int id, Vec2 pos, double length,
                                        double width,
                                        double orientation = 0.0) {
  ObstacleTimeline ob;
  ob.id = id;
  ob.length = length;
  ob.width = width;
  ob.states = {{0.0, pos.x, pos.y, orientation}};
  return ob;
}

inline ObstacleTimeline moving_obstacle(int id, Vec2 pos, Vec2 velocity,
                                        double length, double width,
                                        double duration, double dt = 0.5,
                                        double orientation = 0.0) {
  ObstacleTimeline ob;
  ob.id = id;
  ob.length = length;
  ob.width = width;
  for (double t = 0.0; t <= duration + 1e-9; t += dt)
    ob.states.push_back(
        {t, pos.x + velocity.x * t, pos.y + velocity.y * t, orientation});
  return ob;
}

inline Scenario basic_scenario(RoadNetwork net, double v0 = 10.0) {
  Scenario sc;
  sc.network = std::move(net);
  const Lanelet& first = sc.network.lanelets.front();
  sc.problem.initial = {first.centerline.front().x + 2.0,
                        first.centerline.front().y, v0, 0.0};
  sc.problem.goal_lanelet = first.id;
  sc.problem.goal_xi = {first.length * 0.6, first.length * 0.9};
  sc.problem.goal_v = {0.0, first.speed_limit};
  sc.problem.goal_time = {0.0, 6.0};
  return sc;
}

inline ConvexPoly random_convex_poly(std::mt19937& rng, double cx, double cy,
                                     double radius, int points = 8) {
  std::uniform_real_distribution<double> d(-radius, radius);
  geom::Chain pts;
  for (int i = 0; i < points; ++i)
    pts.push_back({cx + d(rng), cy + d(rng)});
  return ConvexPoly{geom::convex_hull(std::move(pts))};
}

inline PVBox random_box(std::mt19937& rng, double xi_span, double v_span) {
  std::uniform_real_distribution<double> dx(0.0, xi_span);
  std::uniform_real_distribution<double> dv(0.0, v_span);
  double a = dx(rng), b = dx(rng);
  double c = dv(rng), d = dv(rng);
  if (a > b) std::swap(a, b);
  if (c > d) std::swap(c, d);
  return {a, b, c, d};
}

}  // namespace reachplan::testing
