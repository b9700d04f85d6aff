#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "reachplan/geometry.hpp"

using namespace reachplan;
using geom::Chain;

TEST_CASE("polygon area and perimeter") {
  const Chain square{{0, 0}, {2, 0}, {2, 2}, {0, 2}};
  CHECK(geom::polygon_area(square) == Catch::Approx(4.0));
  CHECK(geom::perimeter(square) == Catch::Approx(8.0));
  CHECK(geom::polygon_area(Chain{{0, 0}, {1, 0}}) == 0.0);
  CHECK(geom::polygon_area(Chain{{0, 0}}) == 0.0);
}

TEST_CASE("convex hull keeps extreme points exactly") {
  Chain pts{{0, 0}, {1, 0}, {0.5, 0.2}, {1, 1}, {0, 1}, {0.5, 0.5}};
  const Chain hull = geom::convex_hull(pts);
  REQUIRE(hull.size() == 4);
  CHECK(geom::polygon_area(hull) == Catch::Approx(1.0));
}

TEST_CASE("convex hull of collinear points is the exact segment") {
  Chain pts{{0, 0}, {1, 1}, {2, 2}, {0.5, 0.5}};
  const Chain hull = geom::convex_hull(pts);
  REQUIRE(hull.size() == 2);
  CHECK(hull[0].x == 0.0);
  CHECK(hull[1].x == 2.0);
}

TEST_CASE("clip_left basic and degenerate") {
  const Chain square{{0, 0}, {2, 0}, {2, 2}, {0, 2}};
  // keep x <= 1: left of the upward line x=1
  const Chain cut = geom::clip_left(square, {1, 0}, {1, 1});
  CHECK(geom::polygon_area(cut) == Catch::Approx(2.0));
  for (const Vec2& p : cut) CHECK(p.x <= 1.0 + 1e-9);

  const Chain seg{{0, 0}, {2, 0}};
  const Chain cut_seg = geom::clip_left(seg, {1, 0}, {1, 1});
  REQUIRE(cut_seg.size() == 2);
  CHECK(cut_seg[0].x <= 1.0 + 1e-12);
  CHECK(cut_seg[1].x <= 1.0 + 1e-12);

  const Chain pt{{2, 2}};
  CHECK(geom::clip_left(pt, {1, 0}, {1, 1}).empty());
}

TEST_CASE("intersect_convex covers degeneracies") {
  const Chain square{{0, 0}, {2, 0}, {2, 2}, {0, 2}};
  const Chain tri{{1, 1}, {3, 1}, {3, 3}};

  SECTION("polygon x polygon") {
    const Chain inter = geom::intersect_convex(square, tri);
    CHECK(geom::polygon_area(inter) == Catch::Approx(0.5));
  }
  SECTION("segment x polygon") {
    const Chain seg{{-1, 1}, {3, 1}};
    const Chain inter = geom::intersect_convex(seg, square);
    REQUIRE(inter.size() == 2);
    CHECK(std::min(inter[0].x, inter[1].x) == Catch::Approx(0.0));
    CHECK(std::max(inter[0].x, inter[1].x) == Catch::Approx(2.0));
  }
  SECTION("point x polygon") {
    CHECK(geom::intersect_convex(Chain{{1, 1}}, square).size() == 1);
    CHECK(geom::intersect_convex(Chain{{5, 5}}, square).empty());
  }
  SECTION("segment x segment crossing") {
    const Chain a{{0, 0}, {2, 2}};
    const Chain b{{0, 2}, {2, 0}};
    const Chain inter = geom::intersect_convex(a, b);
    REQUIRE(inter.size() == 1);
    CHECK(inter[0].x == Catch::Approx(1.0));
    CHECK(inter[0].y == Catch::Approx(1.0));
  }
  SECTION("segment x segment collinear overlap") {
    const Chain a{{0, 0}, {3, 0}};
    const Chain b{{1, 0}, {5, 0}};
    const Chain inter = geom::intersect_convex(a, b);
    REQUIRE(inter.size() == 2);
    CHECK(std::min(inter[0].x, inter[1].x) == Catch::Approx(1.0));
    CHECK(std::max(inter[0].x, inter[1].x) == Catch::Approx(3.0));
  }
  SECTION("disjoint") {
    const Chain far{{10, 10}, {11, 10}, {11, 11}};
    CHECK(geom::intersect_convex(square, far).empty());
  }
}

TEST_CASE("closest point and signed distance") {
  const Chain square{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  auto [p_in, d_in] = geom::closest_point(square, {0.5, 0.5});
  CHECK(d_in == 0.0);
  auto [p_out, d_out] = geom::closest_point(square, {2.0, 0.5});
  CHECK(d_out == Catch::Approx(1.0));
  CHECK(p_out.x == Catch::Approx(1.0));
  CHECK(p_out.y == Catch::Approx(0.5));

  CHECK(geom::signed_distance(square, {0.5, 0.5}) == Catch::Approx(0.5));
  CHECK(geom::signed_distance(square, {2.0, 0.5}) == Catch::Approx(-1.0));
  CHECK(geom::signed_distance(Chain{{0, 0}, {1, 0}}, {0.5, 0.0}) ==
        Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("subtract_convex partitions the difference") {
  const Chain big{{0, 0}, {4, 0}, {4, 4}, {0, 4}};
  const Chain hole{{1, 1}, {3, 1}, {3, 3}, {1, 3}};
  const auto pieces = geom::subtract_convex(big, hole);
  double total = 0.0;
  for (const Chain& p : pieces) total += geom::polygon_area(p);
  CHECK(total == Catch::Approx(16.0 - 4.0));
  // pieces must be interior-disjoint: pairwise intersection has zero area
  for (std::size_t i = 0; i < pieces.size(); ++i)
    for (std::size_t j = i + 1; j < pieces.size(); ++j) {
      const Chain inter = geom::intersect_convex(pieces[i], pieces[j]);
      CHECK(geom::polygon_area(inter) == Catch::Approx(0.0).margin(1e-9));
    }
  // subtracting something with empty interior is the identity
  const auto same = geom::subtract_convex(big, Chain{{1, 1}, {2, 2}});
  REQUIRE(same.size() == 1);
  CHECK(geom::polygon_area(same[0]) == Catch::Approx(16.0));
}

TEST_CASE("random convex intersections agree with point sampling") {
  std::mt19937 rng(1234);
  std::uniform_real_distribution<double> d(-3.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    Chain pts_a, pts_b;
    for (int i = 0; i < 7; ++i) pts_a.push_back({d(rng), d(rng)});
    for (int i = 0; i < 7; ++i) pts_b.push_back({d(rng), d(rng)});
    const Chain a = geom::convex_hull(pts_a);
    const Chain b = geom::convex_hull(pts_b);
    if (a.size() < 3 || b.size() < 3) continue;
    const Chain inter = geom::intersect_convex(a, b);
    std::uniform_real_distribution<double> s(-3.0, 3.0);
    for (int i = 0; i < 200; ++i) {
      const Vec2 p{s(rng), s(rng)};
      const bool in_both = geom::contains(a, p, 1e-9) && geom::contains(b, p, 1e-9);
      const bool in_inter = !inter.empty() && geom::contains(inter, p, 1e-6);
      if (in_both) CHECK(in_inter);
      if (!in_inter)
        CHECK_FALSE((geom::contains(a, p, -1e-6) && geom::contains(b, p, -1e-6)));
    }
  }
}
