#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "trailer_lab/path.hpp"

using namespace trailer_lab;

namespace {

std::string field_of(const PiecewiseLinearPath& path) {
  try {
    path.validate();
  } catch (const ValidationError& e) {
    return e.field();
  }
  return "";
}

std::vector<Point2> random_polyline(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<Point2> pts;
  while (static_cast<int>(pts.size()) < n) {
    const Point2 p{u(rng), u(rng)};
    if (pts.empty() || (p - pts.back()).norm() > 0.05) pts.push_back(p);
  }
  return pts;
}

}  // namespace

TEST(PathValidation, NamesOffendingEntry) {
  EXPECT_EQ(field_of(PiecewiseLinearPath{}), "path.legs");
  PiecewiseLinearPath p{{PathLeg{Direction::reverse, {Point2{0, 0}}}}};
  EXPECT_EQ(field_of(p), "path.legs[0].waypoints");
  p.legs[0].waypoints = {Point2{0, 0}, Point2{1, 0}, Point2{1, 0}};
  EXPECT_EQ(field_of(p), "path.legs[0].waypoints[2]");
  p.legs[0].waypoints = {Point2{0, 0}, Point2{std::nan(""), 0}};
  EXPECT_EQ(field_of(p), "path.legs[0].waypoints[1]");
  p.legs[0].waypoints = {Point2{0, 0}, Point2{1, 0}};
  EXPECT_EQ(field_of(p), "");
}

TEST(PathValidation, MirrorAboutX) {
  const PiecewiseLinearPath p{{PathLeg{Direction::forward, {Point2{0, 1}, Point2{2, -3}}}}};
  const PiecewiseLinearPath m = p.mirrored_about_x();
  EXPECT_EQ(m.legs[0].direction, Direction::forward);
  EXPECT_EQ(m.legs[0].waypoints[0], Point2(0, -1));
  EXPECT_EQ(m.legs[0].waypoints[1], Point2(2, 3));
}

TEST(Polyline, ArcLengthAndPointAt) {
  const Polyline line({Point2{0, 0}, Point2{3, 0}, Point2{3, 4}});
  EXPECT_DOUBLE_EQ(line.length(), 7.0);
  EXPECT_EQ(line.vertex_arc_lengths(), (std::vector<double>{0.0, 3.0, 7.0}));
  EXPECT_TRUE(line.point_at(0.0).isApprox(Point2(0, 0)));
  EXPECT_TRUE(line.point_at(4.0).isApprox(Point2(3, 1)));
  EXPECT_TRUE(line.point_at(7.0).isApprox(Point2(3, 4)));
  EXPECT_TRUE(line.point_at(100.0).isApprox(Point2(3, 4)));
  EXPECT_TRUE(line.point_at(-1.0).isApprox(Point2(0, 0)));
}

TEST(Polyline, NearestMatchesDenseSampling) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 40; ++trial) {
    const auto pts = random_polyline(rng, 6);
    const Polyline line(pts);
    const Point2 q{u(rng), u(rng)};
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
      best = std::min(best, oracle::sampled_segment_distance(pts[i], pts[i + 1], q));
    const PolylinePoint near = line.nearest(q);
    EXPECT_NEAR(near.distance, best, 1e-4);
    EXPECT_NEAR((near.point - q).norm(), near.distance, 1e-12);
    EXPECT_TRUE(line.point_at(near.arc_length).isApprox(near.point, 1e-12));
    EXPECT_NEAR(distance_to_polyline(pts, q), best, 1e-4);
  }
}

TEST(Polyline, NearestRespectsWindow) {
  const Polyline line({Point2{0, 0}, Point2{4, 0}});
  const PolylinePoint p = line.nearest(Point2{1, 1}, 2.0, 3.0);
  EXPECT_DOUBLE_EQ(p.arc_length, 2.0);
  EXPECT_TRUE(p.point.isApprox(Point2(2, 0)));
}

TEST(Polyline, CircleCrossingsMatchSampling) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const Polyline line(random_polyline(rng, 5));
    const Point2 c{u(rng), u(rng)};
    const double r = 0.5 + std::abs(u(rng));
    const auto crossings = line.circle_crossings(c, r, 0.0, line.length());
    for (double s : crossings) EXPECT_NEAR((line.point_at(s) - c).norm(), r, 1e-9);
    EXPECT_TRUE(std::is_sorted(crossings.begin(), crossings.end()));
    // Count sign changes of |p(s) - c| - r on a fine grid.
    int changes = 0;
    const int n = 200000;
    double prev = (line.point_at(0.0) - c).norm() - r;
    for (int i = 1; i <= n; ++i) {
      const double cur = (line.point_at(line.length() * i / n) - c).norm() - r;
      if ((prev < 0) != (cur < 0)) ++changes;
      prev = cur;
    }
    EXPECT_EQ(static_cast<int>(crossings.size()), changes);
  }
}

TEST(Polyline, SinglePointDistance) {
  const std::vector<Point2> pts{Point2{1, 1}};
  EXPECT_DOUBLE_EQ(distance_to_polyline(pts, Point2{4, 5}), 5.0);
}
