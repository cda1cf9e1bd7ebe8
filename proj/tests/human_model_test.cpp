#include "socnav/human_model.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace socnav;

TEST(VarianceSchedule, PaperValues) {
  const auto a = variance_schedule(0.0, 1.0);
  EXPECT_DOUBLE_EQ(a.sigma_h, 0.5);
  EXPECT_DOUBLE_EQ(a.sigma_s, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(a.sigma_r, 0.25);

  const auto b = variance_schedule(0.25, 1.0);  // max(0.5, 0.5) boundary
  EXPECT_DOUBLE_EQ(b.sigma_h, 0.5);
  EXPECT_DOUBLE_EQ(b.sigma_s, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(b.sigma_r, 0.25);

  const auto c = variance_schedule(1.0, 1.0);
  EXPECT_DOUBLE_EQ(c.sigma_h, 2.0);
  EXPECT_DOUBLE_EQ(c.sigma_s, 4.0 / 3.0);
  EXPECT_DOUBLE_EQ(c.sigma_r, 1.0);
}

TEST(VarianceSchedule, RejectsNegativeSpeed) {
  EXPECT_THROW(variance_schedule(-0.1, 1.0), std::domain_error);
}

TEST(VarianceSchedule, MonotoneWithFloor) {
  const double scale = 1.7;
  double prev = 0.0;
  for (double speed = 0.0; speed <= 3.0; speed += 0.01) {
    const auto p = variance_schedule(speed, scale);
    EXPECT_GE(p.sigma_h, prev);
    EXPECT_GE(p.sigma_h, 0.5);
    if (speed <= 0.25 / scale) EXPECT_DOUBLE_EQ(p.sigma_h, 0.5);
    EXPECT_DOUBLE_EQ(p.sigma_s, (2.0 / 3.0) * p.sigma_h);
    EXPECT_DOUBLE_EQ(p.sigma_r, 0.5 * p.sigma_h);
    prev = p.sigma_h;
  }
}

TEST(ClassifyMotion, Cases) {
  EXPECT_EQ(classify_motion({0, 0, 0, 0}, 0.1).kind, MotionKind::Static);
  const auto m = classify_motion({0, 0, 1, 0}, 0.1);
  EXPECT_EQ(m.kind, MotionKind::Moving);
  EXPECT_DOUBLE_EQ(m.heading, 0.0);
  const auto d = classify_motion({0, 0, 0, -0.5}, 0.1);
  EXPECT_EQ(d.kind, MotionKind::Moving);
  EXPECT_DOUBLE_EQ(d.heading, -std::numbers::pi / 2);
}

TEST(PersonalSpaceCost, PeakAtCenter) {
  const HumanState h{1.0, 2.0, 0.6, 0.0};
  const auto p = variance_schedule(h.speed(), 1.0);
  EXPECT_DOUBLE_EQ(personal_space_cost(h, {1.0, 2.0}, p), p.amplitude);
}

TEST(PersonalSpaceCost, StaticSymmetricGaussian) {
  // Independent oracle: evaluate the symmetric Gaussian analytically.
  const HumanState h{0.0, 0.0, 0.0, 0.0};
  auto p = variance_schedule(0.0, 1.0);
  p.amplitude = 1.0;
  const double expected = std::exp(-0.5);  // d = sigma = 0.5
  for (double ang = 0.0; ang < 6.28; ang += 0.37) {
    const Point2 q{0.5 * std::cos(ang), 0.5 * std::sin(ang)};
    EXPECT_NEAR(personal_space_cost(h, q, p), expected, 1e-12);
  }
}

TEST(PersonalSpaceCost, AsymmetricEqualNormalizedOffsets) {
  // Moving at 1 m/s along +x: sigma_h = 2, sigma_r = 1. Equal normalized
  // offsets (2 sigma ahead vs 2 sigma behind) give equal cost e^-2.
  const HumanState h{0.0, 0.0, 1.0, 0.0};
  auto p = variance_schedule(h.speed(), 1.0);
  p.amplitude = 1.0;
  EXPECT_NEAR(personal_space_cost(h, {2.0 * p.sigma_h, 0.0}, p), std::exp(-2.0),
              1e-12);
  EXPECT_NEAR(personal_space_cost(h, {-2.0 * p.sigma_r, 0.0}, p), std::exp(-2.0),
              1e-12);
}

TEST(PersonalSpaceCost, FrontGeSideGeRear) {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> speed_d(0.15, 2.5);
  std::uniform_real_distribution<double> ang_d(-std::numbers::pi, std::numbers::pi);
  std::uniform_real_distribution<double> dist_d(0.05, 4.0);
  for (int i = 0; i < 500; ++i) {
    const double speed = speed_d(rng);
    const double heading = ang_d(rng);
    const HumanState h{0, 0, speed * std::cos(heading), speed * std::sin(heading)};
    const auto p = variance_schedule(speed, 1.0);
    const double d = dist_d(rng);
    const double c = std::cos(heading), s = std::sin(heading);
    const double front = personal_space_cost(h, {d * c, d * s}, p);
    const double side = personal_space_cost(h, {-d * s, d * c}, p);
    const double rear = personal_space_cost(h, {-d * c, -d * s}, p);
    EXPECT_GE(front, side);
    EXPECT_GE(side, rear);
  }
}

TEST(PersonalSpaceCost, BoundedByAmplitude) {
  std::mt19937 rng(29);
  std::uniform_real_distribution<double> u(-5, 5);
  std::uniform_real_distribution<double> v(-2, 2);
  for (int i = 0; i < 1000; ++i) {
    const HumanState h{u(rng), u(rng), v(rng), v(rng)};
    const auto p = variance_schedule(h.speed(), 1.0);
    const Point2 q{u(rng), u(rng)};
    const double c = personal_space_cost(h, q, p);
    EXPECT_LE(c, p.amplitude);
    EXPECT_GE(c, 0.0);
    if (std::hypot(q.x - h.x, q.y - h.y) > 1e-6) EXPECT_LT(c, p.amplitude);
  }
}

TEST(PersonalSpaceCost, StaticFieldRotationallySymmetric) {
  const HumanState h{0.3, -0.7, 0.02, -0.03};  // below the 0.1 m/s threshold
  const auto p = variance_schedule(h.speed(), 1.0);
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> dist_d(0.0, 3.0);
  std::uniform_real_distribution<double> ang_d(0, 2 * std::numbers::pi);
  for (int i = 0; i < 300; ++i) {
    const double d = dist_d(rng);
    const double a1 = ang_d(rng), a2 = ang_d(rng);
    const double c1 = personal_space_cost(
        h, {h.x + d * std::cos(a1), h.y + d * std::sin(a1)}, p);
    const double c2 = personal_space_cost(
        h, {h.x + d * std::cos(a2), h.y + d * std::sin(a2)}, p);
    EXPECT_NEAR(c1, c2, 1e-12);
  }
}

TEST(PersonalSpaceCost, ContinuousAcrossFrontRearBoundary) {
  const HumanState h{0, 0, 1.2, 0};
  const auto p = variance_schedule(h.speed(), 1.0);
  for (double lateral = 0.1; lateral < 3.0; lateral += 0.3) {
    const double ahead = personal_space_cost(h, {1e-9, lateral}, p);
    const double behind = personal_space_cost(h, {-1e-9, lateral}, p);
    EXPECT_NEAR(ahead, behind, 1e-6);
  }
}
