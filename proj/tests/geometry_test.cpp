#include "socnav/geometry.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace socnav;

constexpr double kPi = std::numbers::pi;

TEST(CameraToLidar, DirectApplication) {
  const Point2 a = camera_to_lidar({0, 0, 2}, {0.2, 0});
  EXPECT_DOUBLE_EQ(a.x, 2.2);
  EXPECT_DOUBLE_EQ(a.y, 0.0);

  const Point2 b = camera_to_lidar({1, 0.5, 3}, {0.1, -0.05});
  EXPECT_DOUBLE_EQ(b.x, 3.1);
  EXPECT_DOUBLE_EQ(b.y, 0.95);

  const Point2 c = camera_to_lidar({0, 0, 0}, {0, 0});
  EXPECT_DOUBLE_EQ(c.x, 0.0);
  EXPECT_DOUBLE_EQ(c.y, 0.0);
}

TEST(CameraToLidar, HeightIsDiscarded) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int i = 0; i < 200; ++i) {
    const Point3 p{u(rng), u(rng), u(rng)};
    const Extrinsics e{u(rng), u(rng)};
    const Point2 base = camera_to_lidar(p, e);
    const Point2 lifted = camera_to_lidar({p.x, p.y + u(rng), p.z}, e);
    EXPECT_DOUBLE_EQ(base.x, lifted.x);
    EXPECT_DOUBLE_EQ(base.y, lifted.y);
  }
}

TEST(SolveExtrinsics, KnownCases) {
  const Extrinsics a = solve_extrinsics({0.02, -0.1, 1.3}, 1.5);
  EXPECT_NEAR(a.dx, 0.2, 1e-15);
  EXPECT_DOUBLE_EQ(a.dy, 0.02);

  const Extrinsics b = solve_extrinsics({0, 0, 1.0}, 1.0);
  EXPECT_DOUBLE_EQ(b.dx, 0.0);
  EXPECT_DOUBLE_EQ(b.dy, 0.0);

  const Extrinsics c = solve_extrinsics({-0.05, 0, 0.8}, 1.1);
  EXPECT_NEAR(c.dx, 0.3, 1e-15);
  EXPECT_DOUBLE_EQ(c.dy, -0.05);
}

TEST(SolveExtrinsics, RejectsNonPositiveInputs) {
  EXPECT_THROW(solve_extrinsics({0, 0, 1.0}, 0.0), std::invalid_argument);
  EXPECT_THROW(solve_extrinsics({0, 0, 1.0}, -1.0), std::invalid_argument);
  EXPECT_THROW(solve_extrinsics({0, 0, 0.0}, 1.0), std::invalid_argument);
  EXPECT_THROW(solve_extrinsics({0, 0, -0.5}, 1.0), std::invalid_argument);
}

TEST(SolveExtrinsics, RoundTripRecoversRange) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> range_d(0.2, 8.0);
  std::uniform_real_distribution<double> lateral(-2.0, 2.0);
  std::uniform_real_distribution<double> depth(0.1, 6.0);
  for (int i = 0; i < 1000; ++i) {
    const Point3 marker{lateral(rng), lateral(rng), depth(rng)};
    const double d = range_d(rng);
    const Extrinsics e = solve_extrinsics(marker, d);
    EXPECT_NEAR(camera_to_lidar(marker, e).x, d, 1e-12);
  }
}

TEST(NormalizeAngle, KnownValues) {
  EXPECT_DOUBLE_EQ(normalize_angle(0.0), 0.0);
  EXPECT_NEAR(normalize_angle(3 * kPi), kPi, 1e-12);
  EXPECT_DOUBLE_EQ(normalize_angle(-kPi), kPi);
  EXPECT_DOUBLE_EQ(normalize_angle(kPi), kPi);
}

TEST(NormalizeAngle, RangeAndCongruence) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-50, 50);
  for (int i = 0; i < 2000; ++i) {
    const double a = u(rng);
    const double r = normalize_angle(a);
    EXPECT_GT(r, -kPi);
    EXPECT_LE(r, kPi);
    // r == a (mod 2*pi): the difference is an integer number of turns.
    const double turns = (a - r) / (2 * kPi);
    EXPECT_NEAR(turns, std::round(turns), 1e-9);
  }
}

TEST(NormalizeAngle, Idempotent) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-50, 50);
  for (int i = 0; i < 2000; ++i) {
    const double r = normalize_angle(u(rng));
    EXPECT_DOUBLE_EQ(normalize_angle(r), r);
  }
}
