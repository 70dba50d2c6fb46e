#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "vservo/kinematics.hpp"

using namespace vservo;

namespace {

Vec6 deg(std::initializer_list<double> l) {
  Vec6 q;
  int i = 0;
  for (double d : l) q[i++] = deg2rad(d);
  return q;
}

double pose_error(const Pose& a, const Pose& b) {
  return std::max((a.d - b.d).norm(), (a.R - b.R).cwiseAbs().maxCoeff());
}

// random q inside the limits, away from the three singular families
Vec6 random_regular_q(std::mt19937_64& g, const RobotGeometry& geo) {
  std::uniform_real_distribution<double> u(0, 1);
  for (;;) {
    Vec6 q;
    for (int i = 0; i < 6; ++i) {
      auto [lo, hi] = geo.limits[i];
      lo = std::max(lo, -kPi);
      hi = std::min(hi, kPi);
      q[i] = lo + (hi - lo) * u(g);
    }
    if (classify_singularity(q, geo, {1e-2, 1e-2, 1e-3}).tag == SingularityTag::None) return q;
  }
}

}  // namespace

TEST(Kinematics, HomePositionIsExactSumOfLinks) {
  RobotGeometry geo;
  Pose p = forward_kinematics(Vec6::Zero(), geo);
  // arm up, forearm and tool horizontal
  EXPECT_NEAR(p.d.x(), geo.a1 + geo.L4 + geo.Lt, 1e-12);
  EXPECT_NEAR(p.d.x(), 1.27, 1e-12);
  EXPECT_NEAR(p.d.y(), 0.0, 1e-12);
  EXPECT_NEAR(p.d.z(), 1.57, 1e-12);
  EXPECT_NEAR(p.d.z(), geo.L1 + geo.L2 + geo.L3, 1e-12);
  EXPECT_NEAR(p.R.determinant(), 1.0, 1e-12);
}

TEST(Kinematics, ReferenceConfiguration) {
  Pose p = forward_kinematics(deg({30, 60, -45, 15, 45, 90}), RobotGeometry{});
  EXPECT_NEAR(p.d.x(), 1.7157, 1e-3);
  EXPECT_NEAR(p.d.y(), 1.0191, 1e-3);
  EXPECT_NEAR(p.d.z(), 0.7518, 1e-3);
}

TEST(Kinematics, DhTransformIsRigid) {
  Mat4 T = dh_transform(0.3, 0.7, -0.2, 1.1);
  Mat3 R = T.topLeftCorner<3, 3>();
  EXPECT_LT((R * R.transpose() - Mat3::Identity()).norm(), 1e-14);
  EXPECT_NEAR(T(0, 3), 0.3 * std::cos(1.1), 1e-15);
  EXPECT_NEAR(T(2, 3), -0.2, 1e-15);
}

TEST(Kinematics, WristCentreIsIndependentOfLastThreeJoints) {
  RobotGeometry geo;
  Vec6 a = deg({20, 30, -40, 0, 50, 0});
  Vec6 b = deg({20, 30, -40, 70, -20, 130});
  Vec3 wa = wrist_center(forward_kinematics(a, geo), geo);
  Vec3 wb = wrist_center(forward_kinematics(b, geo), geo);
  EXPECT_LT((wa - wb).norm(), 1e-12);
}

TEST(Kinematics, IkRoundTripOverRandomConfigurations) {
  RobotGeometry geo;
  std::mt19937_64 g(7);
  int total_candidates = 0;
  for (int k = 0; k < 1000; ++k) {
    Vec6 q = random_regular_q(g, geo);
    Pose target = forward_kinematics(q, geo);
    IkSolutionSet set = inverse_kinematics(target, geo);
    ASSERT_FALSE(set.candidates.empty());
    bool found_original = false;
    for (const auto& c : set.candidates) {
      EXPECT_LT(pose_error(forward_kinematics(c.q, geo), target), 1e-9);
      double d = 0;
      for (int i = 0; i < 6; ++i) d = std::max(d, std::abs(angle_diff(c.q[i], q[i])));
      found_original |= d < 1e-7;
      ++total_candidates;
    }
    EXPECT_TRUE(found_original) << "sample " << k;
  }
  EXPECT_GE(total_candidates, 4000);
}

TEST(Kinematics, CandidateCountFollowsShoulderReach) {
  RobotGeometry geo;
  // the left arm reaches over the base: horizontal reach grows by 2 a1
  for (Vec6 q : {deg({20, 30, -20, 10, 40, 5}), deg({20, -40, -120, 10, 40, 5}), deg({-70, -20, -100, 30, 60, 0})}) {
    IkSolutionSet set = inverse_kinematics(forward_kinematics(q, geo), geo);
    Vec3 wc = wrist_center(set.target, geo);
    double rho = std::hypot(wc.x(), wc.y()), Z = wc.z() - geo.L1;
    double lo = std::pow(geo.L2 - geo.D(), 2), hi = std::pow(geo.L2 + geo.D(), 2);
    double left = std::pow(rho + geo.a1, 2) + Z * Z;
    std::size_t expected = (left >= lo && left <= hi) ? 8 : 4;
    EXPECT_EQ(set.candidates.size(), expected);
    EXPECT_FALSE(set.wrist_singular);
    EXPECT_FALSE(set.shoulder_singular);
  }
}

TEST(Kinematics, WristSetsDifferBySignOfQ5) {
  RobotGeometry geo;
  IkSolutionSet set = inverse_kinematics(forward_kinematics(deg({10, 20, -10, 30, 40, 50}), geo), geo);
  for (const auto& c : set.candidates) {
    if (c.wrist == WristSet::Set1) EXPECT_GT(c.q[4], 0);
    else EXPECT_LT(c.q[4], 0);
  }
}

TEST(Kinematics, Q1HandlesAllQuadrants) {
  RobotGeometry geo;
  for (double q1 : {10.0, 100.0, -100.0, -170.0, 170.0}) {
    Vec6 q = deg({q1, 20, -30, 10, 30, 10});
    IkSolutionSet set = inverse_kinematics(forward_kinematics(q, geo), geo);
    Vec6 sel = select_joint_solution(set, geo, q, SelectMode::Estimation);
    EXPECT_NEAR(sel[0], q[0], 1e-9) << q1;
  }
}

TEST(Kinematics, TargetGenerationPrefersRightAboveSet1) {
  RobotGeometry geo;
  Vec6 q = deg({15, 25, -35, 20, 45, 10});
  IkSolutionSet set = inverse_kinematics(forward_kinematics(q, geo), geo);
  Vec6 sel = select_joint_solution(set, geo, std::nullopt, SelectMode::TargetGen);
  bool matched = false;
  for (const auto& c : set.candidates)
    if (c.arm == Arm::Right && c.elbow == ElbowBranch::Above && c.wrist == WristSet::Set1)
      matched |= (c.q - sel).norm() < 1e-12;
  EXPECT_TRUE(matched);
  EXPECT_GT(sel[4], 0);
}

TEST(Kinematics, EstimationFollowsPreviousJoints) {
  RobotGeometry geo;
  Vec6 q = deg({15, 25, -35, 20, -45, 10});  // set 2 branch
  IkSolutionSet set = inverse_kinematics(forward_kinematics(q, geo), geo);
  Vec6 sel = select_joint_solution(set, geo, q, SelectMode::Estimation);
  EXPECT_LT((sel - q).norm(), 1e-9);
  // unwrapped near prev rather than onto (-pi, pi]
  Vec6 prev = q;
  prev[5] += 2 * kPi;
  sel = select_joint_solution(set, geo, prev, SelectMode::Estimation);
  EXPECT_NEAR(sel[5], prev[5], 1e-9);
}

TEST(Kinematics, WristSingularityIsFlagged) {
  RobotGeometry geo;
  Vec6 q = deg({10, 20, -30, 40, 0, 25});
  EXPECT_EQ(classify_singularity(q, geo).tag, SingularityTag::Wrist);
  IkSolutionSet set = inverse_kinematics(forward_kinematics(q, geo), geo);
  EXPECT_TRUE(set.wrist_singular);
  for (const auto& c : set.candidates)
    EXPECT_LT(pose_error(forward_kinematics(c.q, geo), set.target), 1e-9);
  // only q4 + q6 is determined; estimation must keep prev's split
  Vec6 sel = select_joint_solution(set, geo, q, SelectMode::Estimation);
  EXPECT_LT(pose_error(forward_kinematics(sel, geo), set.target), 1e-9);
  EXPECT_NEAR(sel[3] + sel[5], q[3] + q[5], 1e-9);
  EXPECT_THROW(select_joint_solution(set, geo, std::nullopt, SelectMode::Estimation), Error);
}

TEST(Kinematics, ElbowSingularityIsFullExtension) {
  RobotGeometry geo;
  Vec6 q = Vec6::Zero();
  q[1] = deg2rad(20);
  q[2] = -geo.gamma();
  EXPECT_EQ(classify_singularity(q, geo).tag, SingularityTag::Elbow);
  auto T = joint_frames(q, geo);
  Vec3 shoulder = T[1].topRightCorner<3, 1>();
  Vec3 wc = wrist_center(forward_kinematics(q, geo), geo);
  EXPECT_NEAR((wc - shoulder).norm(), geo.L2 + geo.D(), 1e-12);
}

TEST(Kinematics, ShoulderSingularityOnBaseAxis) {
  RobotGeometry geo;
  // put the wrist centre on z0: the horizontal reach must cancel a1
  Pose p;
  p.R = Mat3::Identity();
  p.R << 0, 0, 1, 0, 1, 0, -1, 0, 0;
  p.d = Vec3(0, 0, 1.5) + geo.Lt * p.a();
  IkSolutionSet set = inverse_kinematics(p, geo);
  EXPECT_TRUE(set.shoulder_singular);
  IkOptions o;
  o.q1_hint = 0.3;
  Vec6 sel = select_joint_solution(set, geo, std::nullopt, SelectMode::TargetGen, o);
  EXPECT_LT(pose_error(forward_kinematics(sel, geo), p), 1e-9);
}

TEST(Kinematics, UnreachableTargetThrows) {
  Pose p;
  p.d = Vec3(5, 5, 5);
  try {
    inverse_kinematics(p, RobotGeometry{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Unreachable);
  }
}

TEST(Kinematics, JacobianMatchesFiniteDifferences) {
  RobotGeometry geo;
  std::mt19937_64 g(11);
  const double h = 1e-6;
  for (int k = 0; k < 200; ++k) {
    Vec6 q = random_regular_q(g, geo);
    Mat6 J = manipulator_jacobian(q, geo);
    Pose p0 = forward_kinematics(q, geo);
    for (int i = 0; i < 6; ++i) {
      Vec6 qp = q, qm = q;
      qp[i] += h;
      qm[i] -= h;
      Pose pp = forward_kinematics(qp, geo), pm = forward_kinematics(qm, geo);
      Vec3 v = (pp.d - pm.d) / (2 * h);
      Mat3 W = (pp.R - pm.R) / (2 * h) * p0.R.transpose();
      Vec3 w(W(2, 1), W(0, 2), W(1, 0));
      Eigen::Matrix<double, 6, 1> fd;
      fd << v, w;
      double scale = std::max(1.0, J.col(i).norm());
      EXPECT_LT((fd - J.col(i)).norm() / scale, 1e-6);
    }
  }
}

TEST(Kinematics, LimitsAreEnforced) {
  RobotGeometry geo;
  Vec6 q = Vec6::Zero();
  EXPECT_TRUE(geo.within_limits(q));
  q[1] = deg2rad(151);
  EXPECT_FALSE(geo.within_limits(q));
  q[1] = 0;
  q[4] = deg2rad(-126);
  EXPECT_FALSE(geo.within_limits(q));
}
