#include <catch2/catch_amalgamated.hpp>

#include "reachplan/limits.hpp"
#include "support/fixtures.hpp"

using namespace reachplan;

TEST_CASE("max_corner_speed closed form") {
  CHECK(limits::max_corner_speed(0.1, 10.0) == Catch::Approx(10.0).margin(1e-12));
  CHECK(std::isinf(limits::max_corner_speed(0.0, 6.0)));
  CHECK(limits::max_corner_speed(0.05, 6.0) ==
        Catch::Approx(std::sqrt(120.0)).margin(1e-12));
  CHECK_THROWS_AS(limits::max_corner_speed(-0.1, 6.0), std::invalid_argument);
}

TEST_CASE("min_lane_change_time closed form") {
  CHECK(limits::min_lane_change_time(4.0, 4.0) == Catch::Approx(2.0).margin(1e-12));
  CHECK(limits::min_lane_change_time(0.0, 4.0) == 0.0);
  CHECK(limits::min_lane_change_time(3.5, 8.0) ==
        Catch::Approx(std::sqrt(1.75)).margin(1e-12));
  CHECK_THROWS_AS(limits::min_lane_change_time(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("both limits are monotone") {
  double prev = 0.0;
  for (double a = 1.0; a <= 10.0; a += 0.5) {
    const double v = limits::max_corner_speed(0.05, a);
    CHECK(v >= prev);
    prev = v;
  }
  prev = 1e18;
  for (double a = 1.0; a <= 10.0; a += 0.5) {
    const double t = limits::min_lane_change_time(3.5, a);
    CHECK(t <= prev);
    prev = t;
  }
  prev = 0.0;
  for (double eta = 0.0; eta <= 6.0; eta += 0.25) {
    const double t = limits::min_lane_change_time(eta, 6.0);
    CHECK(t >= prev);
    prev = t;
  }
}

TEST_CASE("max_segment_curvature of a sampled arc approaches 1/R") {
  Lanelet lane;
  lane.id = 0;
  lane.width = 3.5;
  lane.speed_limit = 30.0;
  const double radius = 20.0;
  for (int deg = 0; deg <= 90; deg += 5) {
    const double a = deg * std::numbers::pi / 180.0;
    lane.centerline.push_back({radius * std::sin(a), radius * (1.0 - std::cos(a))});
  }
  lane.finalize();
  const double curv = limits::max_segment_curvature(lane);
  CHECK(curv == Catch::Approx(1.0 / radius).epsilon(0.02));
  const double cap = limits::max_corner_speed(curv, 4.0);
  CHECK(cap == Catch::Approx(std::sqrt(4.0 * radius)).epsilon(0.02));
}

TEST_CASE("neighbor_lateral_offset of parallel lanes") {
  const RoadNetwork net = reachplan::testing::parallel_road(2, 100.0, 3.5);
  CHECK(limits::neighbor_lateral_offset(net.at(0), net.at(1)) ==
        Catch::Approx(3.5).margin(1e-9));
}
