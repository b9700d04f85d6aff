#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "reachplan/freespace.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace reachplan;
namespace rt = reachplan::testing;

namespace {

VehicleParams car4() {
  VehicleParams v;
  v.length = 4.0;
  return v;
}

// agreement with the 1 cm scan oracle: classifications may flip only within
// one scan cell of a computed boundary
void check_against_scan(const Lanelet& lane,
                        const std::vector<ObstacleTimeline>& obstacles,
                        const std::vector<TrafficLightRule>& rules, double t,
                        const VehicleParams& params,
                        const PlannerConfig& config) {
  const auto cells = compute_free_space(lane, obstacles, rules, t, params, config);
  const auto scan = rt::free_space_scan(lane, obstacles, rules, t, params, config);
  const double res = 0.01;
  for (std::size_t i = 0; i < scan.size(); ++i) {
    const double xi = i * res;
    bool in_cell = false;
    bool near_boundary = false;
    for (const PVBox& c : cells) {
      if (xi >= c.xi_lo && xi <= c.xi_hi) in_cell = true;
      if (std::abs(xi - c.xi_lo) <= res || std::abs(xi - c.xi_hi) <= res)
        near_boundary = true;
    }
    if (!near_boundary) {
      CAPTURE(lane.id, xi, t);
      CHECK(in_cell == scan[i]);
    }
  }
}

}  // namespace

TEST_CASE("compute_free_space: single obstacle bloats by l_car/2 + d_min") {
  const Lanelet lane = rt::straight_lanelet(0, {0, 0}, 100.0, 3.5, 13.9);
  // occupied interval [40,50]: 10 m long, 2 m wide, centered at 45
  const ObstacleTimeline ob = rt::static_obstacle(1, {45.0, 0.0}, 10.0, 2.0);
  PlannerConfig cfg;  // d_min = 1
  const auto cells = compute_free_space(lane, {ob}, {}, 0.0, car4(), cfg);
  REQUIRE(cells.size() == 2);
  CHECK(cells[0].xi_lo == Catch::Approx(0.0));
  CHECK(cells[0].xi_hi == Catch::Approx(37.0));
  CHECK(cells[1].xi_lo == Catch::Approx(53.0));
  CHECK(cells[1].xi_hi == Catch::Approx(100.0));
  for (const PVBox& c : cells) {
    CHECK(c.v_lo == 0.0);
    CHECK(c.v_hi == Catch::Approx(13.9));
  }
}

TEST_CASE("compute_free_space: empty road is one full cell") {
  const Lanelet lane = rt::straight_lanelet(0, {0, 0}, 100.0);
  const auto cells =
      compute_free_space(lane, {}, {}, 0.0, VehicleParams{}, PlannerConfig{});
  REQUIRE(cells.size() == 1);
  CHECK(cells[0].xi_lo == 0.0);
  CHECK(cells[0].xi_hi == Catch::Approx(100.0));
}

TEST_CASE("compute_free_space: overlapping bloated intervals merge") {
  const Lanelet lane = rt::straight_lanelet(0, {0, 0}, 100.0);
  const std::vector<ObstacleTimeline> obstacles{
      rt::static_obstacle(1, {40.0, 0.0}, 4.0, 2.0),
      rt::static_obstacle(2, {46.0, 0.0}, 4.0, 2.0)};
  PlannerConfig cfg;
  const auto cells = compute_free_space(lane, obstacles, {}, 0.0, car4(), cfg);
  REQUIRE(cells.size() == 2);
  check_against_scan(lane, obstacles, {}, 0.0, car4(), cfg);
}

TEST_CASE("compute_free_space: fully blocked lanelet yields no cells") {
  const Lanelet lane = rt::straight_lanelet(0, {0, 0}, 10.0);
  const ObstacleTimeline ob = rt::static_obstacle(1, {5.0, 0.0}, 8.0, 2.0);
  CHECK(compute_free_space(lane, {ob}, {}, 0.0, car4(), PlannerConfig{}).empty());
}

TEST_CASE("compute_free_space: randomized layouts match the scan oracle") {
  std::mt19937 rng(1717);
  std::uniform_real_distribution<double> x(5.0, 95.0);
  std::uniform_real_distribution<double> y(-1.0, 1.0);
  std::uniform_real_distribution<double> ang(-0.5, 0.5);
  std::uniform_int_distribution<int> count(0, 3);
  const Lanelet lane = rt::straight_lanelet(0, {0, 0}, 100.0);
  PlannerConfig cfg;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<ObstacleTimeline> obstacles;
    const int n = count(rng);
    for (int k = 0; k < n; ++k)
      obstacles.push_back(rt::static_obstacle(
          k, {x(rng), y(rng)}, 3.0 + y(rng), 1.8, ang(rng)));
    check_against_scan(lane, obstacles, {}, 0.0, car4(), cfg);
  }
}

TEST_CASE("compute_free_space: adding an obstacle never enlarges cells") {
  const Lanelet lane = rt::straight_lanelet(0, {0, 0}, 100.0);
  PlannerConfig cfg;
  std::mt19937 rng(33);
  std::uniform_real_distribution<double> x(5.0, 95.0);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<ObstacleTimeline> obstacles{
        rt::static_obstacle(1, {x(rng), 0.0}, 4.0, 2.0)};
    const auto before = compute_free_space(lane, obstacles, {}, 0.0, car4(), cfg);
    obstacles.push_back(rt::static_obstacle(2, {x(rng), 0.0}, 4.0, 2.0));
    const auto after = compute_free_space(lane, obstacles, {}, 0.0, car4(), cfg);
    for (const PVBox& c : after) {
      bool inside_some = false;
      for (const PVBox& b : before)
        inside_some = inside_some ||
                      (c.xi_lo >= b.xi_lo - 1e-9 && c.xi_hi <= b.xi_hi + 1e-9);
      CHECK(inside_some);
    }
  }
}

TEST_CASE("traffic light blocks a stop band during red") {
  const Lanelet lane = rt::straight_lanelet(0, {0, 0}, 100.0);
  TrafficLightRule rule{0, 60.0, {{0.0, 10.0}}};
  PlannerConfig cfg;
  const auto red = compute_free_space(lane, {}, {rule}, 5.0, car4(), cfg);
  REQUIRE(red.size() == 2);
  CHECK(red[0].xi_hi == Catch::Approx(59.5));
  CHECK(red[1].xi_lo == Catch::Approx(60.0));
  const auto green = compute_free_space(lane, {}, {rule}, 15.0, car4(), cfg);
  CHECK(green.size() == 1);
}

TEST_CASE("lateral_pass: bicycle at the lane edge leaves room") {
  const Lanelet lane = rt::straight_lanelet(0, {0, 0}, 100.0, 3.5);
  // bicycle band [1.0, 1.6] leaves [-1.75, 1.0]: 2.75 m >= 2.5 m
  const ObstacleTimeline bike = rt::static_obstacle(1, {50.0, 1.3}, 1.8, 0.6);
  CHECK(lateral_pass(lane, bike, 0.0, 2.0, 2.5, 0.25));
}

TEST_CASE("lateral_pass: centered car blocks") {
  const Lanelet lane = rt::straight_lanelet(0, {0, 0}, 100.0, 3.5);
  const ObstacleTimeline car = rt::static_obstacle(1, {50.0, 0.0}, 4.5, 2.0);
  CHECK_FALSE(lateral_pass(lane, car, 0.0, 2.0, 2.5, 0.25));
}

TEST_CASE("lateral_pass: no overlap with the strip passes trivially") {
  const Lanelet lane = rt::straight_lanelet(0, {0, 0}, 100.0, 3.5);
  const ObstacleTimeline far = rt::static_obstacle(1, {50.0, 8.0}, 4.5, 2.0);
  CHECK(lateral_pass(lane, far, 0.0, 2.0, 2.5, 0.25));
}

TEST_CASE("partial occupiers do not block the free space") {
  const Lanelet lane = rt::straight_lanelet(0, {0, 0}, 100.0, 3.5);
  const ObstacleTimeline bike = rt::static_obstacle(1, {50.0, 1.3}, 1.8, 0.6);
  PlannerConfig cfg;
  const auto cells = compute_free_space(lane, {bike}, {}, 0.0, car4(), cfg);
  REQUIRE(cells.size() == 1);
  CHECK(cells[0].xi_hi == Catch::Approx(100.0));
  const auto partial = partial_occupiers(lane, {bike}, 0.0, car4(), cfg);
  REQUIRE(partial.size() == 1);
  CHECK(partial[0].lateral_band.lo == Catch::Approx(1.0));
  CHECK(partial[0].lateral_band.hi == Catch::Approx(1.6));
}

TEST_CASE("effective_speed_limit: straight lane keeps the legal limit") {
  const Lanelet lane = rt::straight_lanelet(0, {0, 0}, 100.0, 3.5, 13.9);
  CHECK(effective_speed_limit(lane, 6.0) == Catch::Approx(13.9));
}

TEST_CASE("effective_speed_limit: corner cap binds") {
  Lanelet lane;
  lane.id = 0;
  lane.width = 3.5;
  lane.speed_limit = 30.0;
  const double radius = 9.0;
  for (int deg = 0; deg <= 90; deg += 5) {
    const double a = deg * std::numbers::pi / 180.0;
    lane.centerline.push_back({radius * std::sin(a), radius * (1.0 - std::cos(a))});
  }
  lane.finalize();
  VehicleParams params;
  params.a_max = 4.0;
  // sqrt(a_max * R) = 6 for R = 9
  CHECK(effective_speed_limit(lane, params.a_max) ==
        Catch::Approx(6.0).epsilon(0.02));
}

TEST_CASE("free-space table caps every cell at the effective limit") {
  RoadNetwork net = rt::parallel_road(2, 80.0);
  const std::vector<ObstacleTimeline> obstacles{
      rt::static_obstacle(1, {30.0, 0.0}, 4.0, 2.0)};
  VehicleParams params;
  PlannerConfig cfg;
  const FreeSpaceTable table(net, obstacles, {}, 20, params, cfg);
  for (const Lanelet& lane : net.lanelets) {
    const double cap = effective_speed_limit(lane, params.a_max);
    for (int step = 0; step <= 20; ++step)
      for (const PVBox& c : table.cells(lane.id, step))
        CHECK(c.v_hi == cap);
  }
}
