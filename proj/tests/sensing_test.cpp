#include "socnav/sensing.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace socnav;

namespace {

KeypointSet make_set(std::initializer_list<std::tuple<Joint, bool, Point3, double>> kps) {
  KeypointSet set;
  for (const auto& [joint, is_left, pos, conf] : kps) {
    set.side(joint, is_left) = Keypoint{pos, conf};
  }
  return set;
}

}  // namespace

TEST(JointPosition, Midpoint) {
  const Point3 a = joint_position({1, 2, 3}, {3, 2, 1});
  EXPECT_DOUBLE_EQ(a.x, 2);
  EXPECT_DOUBLE_EQ(a.y, 2);
  EXPECT_DOUBLE_EQ(a.z, 2);

  const Point3 b = joint_position({0.5, 0.5, 0.5}, {0.5, 0.5, 0.5});
  EXPECT_DOUBLE_EQ(b.x, 0.5);
  EXPECT_DOUBLE_EQ(b.y, 0.5);
  EXPECT_DOUBLE_EQ(b.z, 0.5);

  const Point3 c = joint_position({0, 0, 1}, {0.2, 0, 1.4});
  EXPECT_DOUBLE_EQ(c.x, 0.1);
  EXPECT_DOUBLE_EQ(c.y, 0);
  EXPECT_DOUBLE_EQ(c.z, 1.2);
}

TEST(SelectJoint, HipWinsOverAnkle) {
  const auto set = make_set({{Joint::Hip, true, {0.1, 0, 2}, 0.9},
                             {Joint::Hip, false, {-0.1, 0, 2}, 0.9},
                             {Joint::Ankle, true, {0.1, 0.8, 2}, 0.9},
                             {Joint::Ankle, false, {-0.1, 0.8, 2}, 0.9}});
  const auto sel = select_joint(set, 0.5);
  ASSERT_TRUE(sel.has_value());
  EXPECT_EQ(sel->joint, Joint::Hip);
  EXPECT_DOUBLE_EQ(sel->pos.x, 0.0);
  EXPECT_DOUBLE_EQ(sel->pos.z, 2.0);
}

TEST(SelectJoint, FallsBackToKneeWhenHipsLowConfidence) {
  const auto set = make_set({{Joint::Hip, true, {0.1, 0, 2}, 0.2},
                             {Joint::Hip, false, {-0.1, 0, 2}, 0.9},
                             {Joint::Knee, true, {0.2, 0.4, 2.1}, 0.8},
                             {Joint::Knee, false, {-0.2, 0.4, 2.1}, 0.8}});
  const auto sel = select_joint(set, 0.5);
  ASSERT_TRUE(sel.has_value());
  EXPECT_EQ(sel->joint, Joint::Knee);
  EXPECT_DOUBLE_EQ(sel->pos.z, 2.1);
}

TEST(SelectJoint, NoQualifyingJoint) {
  const auto set = make_set({{Joint::Hip, true, {0, 0, 2}, 0.1},
                             {Joint::Hip, false, {0, 0, 2}, 0.1},
                             {Joint::Ankle, true, {0, 0, 2}, 0.4}});
  EXPECT_FALSE(select_joint(set, 0.5).has_value());
  EXPECT_FALSE(select_joint(KeypointSet{}, 0.5).has_value());
}

TEST(SelectJoint, NeverReturnsLowerPriorityWhenHigherQualifies) {
  const auto set = make_set({{Joint::Hip, true, {0, 0, 2}, 0.6},
                             {Joint::Hip, false, {0, 0, 2}, 0.6},
                             {Joint::Knee, true, {0, 0, 1}, 1.0},
                             {Joint::Knee, false, {0, 0, 1}, 1.0},
                             {Joint::Ankle, true, {0, 0, 1}, 1.0},
                             {Joint::Ankle, false, {0, 0, 1}, 1.0}});
  for (double conf = 0.0; conf <= 0.6; conf += 0.1) {
    const auto sel = select_joint(set, conf);
    ASSERT_TRUE(sel.has_value());
    EXPECT_EQ(sel->joint, Joint::Hip);
  }
}

TEST(CameraPipeline, HipThroughCalibration) {
  const auto set = make_set({{Joint::Hip, true, {0.1, 0.3, 2.0}, 0.9},
                             {Joint::Hip, false, {-0.1, 0.3, 2.0}, 0.9}});
  const auto z = camera_pipeline(set, {0.2, 0.0}, 0.5, CameraNoiseModel{}, 1.25);
  ASSERT_TRUE(z.has_value());
  EXPECT_DOUBLE_EQ(z->pos.x, 2.2);
  EXPECT_DOUBLE_EQ(z->pos.y, 0.0);
  EXPECT_EQ(z->source, Source::Camera);
  EXPECT_DOUBLE_EQ(z->t, 1.25);
}

TEST(CameraPipeline, EmptySetGivesNothing) {
  EXPECT_FALSE(
      camera_pipeline(KeypointSet{}, {0, 0}, 0.5, CameraNoiseModel{}, 0.0));
}

TEST(CameraPipeline, KneeOnlyComposition) {
  // Oracle by hand: knee midpoint x = (0.15 + -0.05)/2 = 0.05, z = 1.5;
  // with zero extrinsics, Eq-4 order gives pos = (z, x) = (1.5, 0.05).
  const auto set = make_set({{Joint::Knee, true, {0.15, 0.5, 1.5}, 0.9},
                             {Joint::Knee, false, {-0.05, 0.5, 1.5}, 0.9}});
  const auto z = camera_pipeline(set, {0, 0}, 0.5, CameraNoiseModel{}, 0.0);
  ASSERT_TRUE(z.has_value());
  EXPECT_DOUBLE_EQ(z->pos.x, 1.5);
  EXPECT_DOUBLE_EQ(z->pos.y, 0.05);
}

TEST(CameraPipeline, NoiseCovGrowsWithRange) {
  const CameraNoiseModel m;
  const auto near_set = make_set({{Joint::Hip, true, {0, 0, 1.0}, 0.9},
                                  {Joint::Hip, false, {0, 0, 1.0}, 0.9}});
  const auto far_set = make_set({{Joint::Hip, true, {0, 0, 4.0}, 0.9},
                                 {Joint::Hip, false, {0, 0, 4.0}, 0.9}});
  const auto zn = camera_pipeline(near_set, {0, 0}, 0.5, m, 0.0);
  const auto zf = camera_pipeline(far_set, {0, 0}, 0.5, m, 0.0);
  ASSERT_TRUE(zn && zf);
  EXPECT_NEAR(zn->noise_cov(0, 0), m.std_at_1m * m.std_at_1m, 1e-15);
  EXPECT_GT(zf->noise_cov(0, 0), zn->noise_cov(0, 0));
  const double expected_std = m.std_at_1m + m.std_slope * 3.0;
  EXPECT_NEAR(zf->noise_cov(1, 1), expected_std * expected_std, 1e-12);
}

TEST(SimulateLidar, NoiselessLimitReproducesTruth) {
  LidarNoiseModel m;
  m.pos_std = 0.0;
  m.false_positive_rate = 0.0;
  LidarSim sim(m, 42);
  const auto out = sim.sample({{2.0, 0.0, 0, 0}}, {}, 1.0, 0.1);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_DOUBLE_EQ(out[0].pos.x, 2.0);
  EXPECT_DOUBLE_EQ(out[0].pos.y, 0.0);
  EXPECT_EQ(out[0].source, Source::Lidar);
  EXPECT_DOUBLE_EQ(out[0].t, 1.0);
}

TEST(SimulateLidar, OneMeasurementPerHumanWithoutFalsePositives) {
  LidarNoiseModel m;
  m.false_positive_rate = 0.0;
  LidarSim sim(m, 1);
  const std::vector<HumanState> humans = {
      {1, 0, 0, 0}, {0, 2, 0, 0}, {-3, -1, 0, 0}};
  for (int k = 0; k < 50; ++k) {
    EXPECT_EQ(sim.sample(humans, {}, 0.1 * k, 0.1).size(), humans.size());
  }
}

TEST(SimulateLidar, FalsePositiveRateMatchesPoisson) {
  // Monte-Carlo against Poisson statistics: rate 2.0/s over 10 s gives mean
  // 20 per run; the mean over 100 seeded runs must land within 3 sigma of the
  // Poisson mean (sigma_mean = sqrt(20/100)).
  LidarNoiseModel m;
  m.false_positive_rate = 2.0;
  long total = 0;
  const int runs = 100;
  for (int seed = 0; seed < runs; ++seed) {
    LidarSim sim(m, seed);
    for (int k = 0; k < 100; ++k) {
      total += static_cast<long>(sim.sample({}, {}, 0.1 * k, 0.1).size());
    }
  }
  const double mean = static_cast<double>(total) / runs;
  const double sigma_mean = std::sqrt(20.0 / runs);
  EXPECT_NEAR(mean, 20.0, 3.0 * sigma_mean);
}

TEST(SimulateLidar, FalsePositivesStayInBox) {
  LidarNoiseModel m;
  m.false_positive_rate = 50.0;
  m.false_positive_box = {-1.0, 2.0, 1.5, 3.0};
  LidarSim sim(m, 9);
  for (int k = 0; k < 20; ++k) {
    for (const auto& z : sim.sample({}, {}, 0.1 * k, 0.1)) {
      EXPECT_GE(z.pos.x, -1.0);
      EXPECT_LE(z.pos.x, 1.5);
      EXPECT_GE(z.pos.y, 2.0);
      EXPECT_LE(z.pos.y, 3.0);
    }
  }
}

TEST(SimulateCamera, FovAndRangeGating) {
  CameraNoiseModel m;  // fov 87 deg, max range 5
  CameraSim sim(m, {}, 3);
  // Bearing 0, range 2: detected.
  EXPECT_EQ(sim.sample({{2, 0, 0, 0}}, {}, 0).size(), 1u);
  // Bearing 60 deg > 43.5 deg half-angle: not detected.
  const double b = 60.0 * std::numbers::pi / 180.0;
  EXPECT_EQ(sim.sample({{2 * std::cos(b), 2 * std::sin(b), 0, 0}}, {}, 0).size(), 0u);
  // Beyond max range: not detected.
  EXPECT_EQ(sim.sample({{6.0, 0, 0, 0}}, {}, 0).size(), 0u);
  // Behind the robot: not detected.
  EXPECT_EQ(sim.sample({{-1.0, 0, 0, 0}}, {}, 0).size(), 0u);
}

TEST(SimulateCamera, NoiselessLimitReproducesTruth) {
  CameraNoiseModel m;
  m.std_at_1m = 0.0;
  m.std_slope = 0.0;
  CameraSim sim(m, {}, 5);
  const auto out = sim.sample({{1.5, 0.2, 0, 0}}, {}, 2.0);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_NEAR(out[0].pos.x, 1.5, 1e-12);
  EXPECT_NEAR(out[0].pos.y, 0.2, 1e-12);
  EXPECT_EQ(out[0].source, Source::Camera);
}

TEST(SimulateCamera, NoiselessExactThroughNonzeroExtrinsicsAndPose) {
  CameraNoiseModel m;
  m.std_at_1m = 0.0;
  m.std_slope = 0.0;
  CameraSim sim(m, {0.15, -0.04}, 5);
  const Pose2D robot{1.0, -2.0, 0.6};
  const HumanState human{2.5, -1.2, 0, 0};
  const auto out = sim.sample({human}, robot, 0.5);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_NEAR(out[0].pos.x, human.x, 1e-12);
  EXPECT_NEAR(out[0].pos.y, human.y, 1e-12);
}

TEST(SimulateCamera, MeasurementsNeverOutsideWedge) {
  CameraNoiseModel m;
  CameraSim sim(m, {}, 17);
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> u(-6, 6);
  for (int i = 0; i < 500; ++i) {
    const std::vector<HumanState> humans = {{u(rng), u(rng), 0, 0}};
    for (const auto& z : sim.sample(humans, {}, 0)) {
      // The emitted measurement corresponds to a human inside the wedge; its
      // true position (not the noisy one) obeyed the gate, so check the truth.
      const auto& h = humans[0];
      EXPECT_LE(std::hypot(h.x, h.y), m.max_range + 1e-9);
      EXPECT_LE(std::abs(std::atan2(h.y, h.x)), 0.5 * m.fov + 1e-9);
      (void)z;
    }
  }
}

TEST(Determinism, SameSeedSameStreams) {
  LidarNoiseModel lm;
  CameraNoiseModel cm;
  const std::vector<HumanState> humans = {{2, 0.3, 0.5, 0}, {1, -0.4, 0, 0}};
  for (int trial = 0; trial < 3; ++trial) {
    LidarSim a(lm, 77), b(lm, 77);
    CameraSim ca(cm, {0.1, 0}, 78), cb(cm, {0.1, 0}, 78);
    for (int k = 0; k < 25; ++k) {
      const auto za = a.sample(humans, {}, 0.1 * k, 0.1);
      const auto zb = b.sample(humans, {}, 0.1 * k, 0.1);
      ASSERT_EQ(za.size(), zb.size());
      for (size_t i = 0; i < za.size(); ++i) {
        EXPECT_EQ(za[i].pos.x, zb[i].pos.x);
        EXPECT_EQ(za[i].pos.y, zb[i].pos.y);
      }
      const auto ya = ca.sample(humans, {}, 0.1 * k);
      const auto yb = cb.sample(humans, {}, 0.1 * k);
      ASSERT_EQ(ya.size(), yb.size());
      for (size_t i = 0; i < ya.size(); ++i) {
        EXPECT_EQ(ya[i].pos.x, yb[i].pos.x);
        EXPECT_EQ(ya[i].pos.y, yb[i].pos.y);
      }
    }
  }
}

TEST(KeypointLog, ParsesAndGroupsByTimestamp) {
  std::stringstream ss;
  ss << "# replay capture\n"
     << "0.1,hip,left,0.05,0.3,2.0,0.92\n"
     << "0.1,hip,right,-0.05,0.3,2.0,0.88\n"
     << "0.1,ankle,left,0.06,0.9,2.1,0.55\n"
     << "0.2,knee,left,0.04,0.6,2.05,0.7\n"
     << "0.2,knee,right,-0.04,0.6,2.05,0.7\n";
  const auto sets = load_keypoint_log(ss);
  ASSERT_EQ(sets.size(), 2u);
  EXPECT_DOUBLE_EQ(sets[0].t, 0.1);
  const auto sel0 = select_joint(sets[0].set, 0.5);
  ASSERT_TRUE(sel0.has_value());
  EXPECT_EQ(sel0->joint, Joint::Hip);
  const auto z = camera_pipeline(sets[1].set, {0.0, 0.0}, 0.5,
                                 CameraNoiseModel{}, sets[1].t);
  ASSERT_TRUE(z.has_value());
  EXPECT_DOUBLE_EQ(z->pos.x, 2.05);
  EXPECT_DOUBLE_EQ(z->pos.y, 0.0);
}

TEST(KeypointLog, RejectsMalformedLines) {
  {
    std::stringstream ss("0.1,hip,left,0.05,0.3\n");
    EXPECT_THROW(load_keypoint_log(ss), std::runtime_error);
  }
  {
    std::stringstream ss("0.1,elbow,left,0.05,0.3,2.0,0.9\n");
    EXPECT_THROW(load_keypoint_log(ss), std::runtime_error);
  }
  {
    std::stringstream ss("0.1,hip,left,0.05,0.3,-2.0,0.9\n");
    EXPECT_THROW(load_keypoint_log(ss), std::runtime_error);
  }
  {
    std::stringstream ss("0.1,hip,up,0.05,0.3,2.0,0.9\n");
    EXPECT_THROW(load_keypoint_log(ss), std::runtime_error);
  }
}
