#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "vservo/dynamics.hpp"

using namespace vservo;

namespace {

Vec6 random_q(std::mt19937_64& g) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  Vec6 q;
  for (int i = 0; i < 6; ++i) q[i] = u(g);
  return q;
}

// kinetic energy from finite-differenced link motion, no Jacobians involved
double kinetic_energy_fd(const Vec6& q, const Vec6& qd, const DynamicsModel& m) {
  const double h = 1e-6;
  auto Tp = joint_frames(q + h * qd, m.geo), Tm = joint_frames(q - h * qd, m.geo), T0 = joint_frames(q, m.geo);
  double K = 0;
  for (int i = 0; i < 6; ++i) {
    const auto& L = m.links[i];
    Vec3 pp = (Tp[i + 1] * L.com.homogeneous()).head<3>();
    Vec3 pm = (Tm[i + 1] * L.com.homogeneous()).head<3>();
    Vec3 v = (pp - pm) / (2 * h);
    Mat3 R = T0[i + 1].topLeftCorner<3, 3>();
    Mat3 W = (Tp[i + 1].topLeftCorner<3, 3>() - Tm[i + 1].topLeftCorner<3, 3>()) / (2 * h) * R.transpose();
    Vec3 w(W(2, 1), W(0, 2), W(1, 0));
    Mat3 I = R * L.inertia_diag.asDiagonal() * R.transpose();
    K += 0.5 * L.mass * v.squaredNorm() + 0.5 * w.dot(I * w);
  }
  return K;
}

}  // namespace

TEST(Dynamics, InertiaIsSymmetricPositiveDefinite) {
  DynamicsModel m;
  std::mt19937_64 g(1);
  for (int k = 0; k < 50; ++k) {
    Mat6 D = inertia_matrix(random_q(g), m);
    EXPECT_LT((D - D.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    Mat6 M = D;
    M.diagonal() += m.reflected_inertia();
    Eigen::SelfAdjointEigenSolver<Mat6> es(M);
    EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
  }
}

TEST(Dynamics, InertiaMatchesKineticEnergy) {
  DynamicsModel m;
  std::mt19937_64 g(2);
  for (int k = 0; k < 20; ++k) {
    Vec6 q = random_q(g), qd = random_q(g);
    double K = 0.5 * qd.dot(inertia_matrix(q, m) * qd);
    EXPECT_NEAR(K, kinetic_energy_fd(q, qd, m), 1e-6 * std::max(1.0, K));
  }
}

TEST(Dynamics, GravityIsGradientOfPotential) {
  DynamicsModel m;
  std::mt19937_64 g(3);
  const double h = 1e-6;
  for (int k = 0; k < 50; ++k) {
    Vec6 q = random_q(g);
    Vec6 gq = gravity_torque(q, m);
    for (int i = 0; i < 6; ++i) {
      Vec6 qp = q, qm = q;
      qp[i] += h;
      qm[i] -= h;
      double fd = (potential_energy(qp, m) - potential_energy(qm, m)) / (2 * h);
      EXPECT_NEAR(gq[i], fd, 1e-6 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST(Dynamics, GravityFollowsConfiguredDirection) {
  DynamicsModel up, down;
  down.g_hat = Vec3(0, 0, -9.8);
  Vec6 q = Vec6::Constant(0.3);
  EXPECT_LT((gravity_torque(q, up) + gravity_torque(q, down)).norm(), 1e-9);
}

TEST(Dynamics, DdotMinusTwoCIsSkew) {
  DynamicsModel m;
  std::mt19937_64 g(4);
  const double h = 1e-6;
  for (int k = 0; k < 30; ++k) {
    Vec6 q = random_q(g), qd = random_q(g), x = random_q(g);
    Mat6 Dd = (inertia_matrix(q + h * qd, m) - inertia_matrix(q - h * qd, m)) / (2 * h);
    Mat6 N = Dd - 2.0 * coriolis_matrix(q, qd, m);
    EXPECT_LT(std::abs(x.dot(N * x)), 1e-8 * std::max(1.0, N.norm()));
  }
}

TEST(Dynamics, FeedbackLinearisationReconstructsAcceleration) {
  DynamicsModel m;
  std::mt19937_64 g(5);
  for (int k = 0; k < 50; ++k) {
    Vec6 q = random_q(g), qd = random_q(g), v = random_q(g);
    Vec6 u = feedback_linearize(q, qd, v, m);
    EXPECT_LT((full_dynamics_rhs(q, qd, u, m) - v).norm(), 1e-10);
  }
}

TEST(Dynamics, GravityTorqueHoldsStill) {
  DynamicsModel m;
  Vec6 q;
  q << 0.2, -0.4, 0.6, 0.1, -0.9, 0.3;
  Vec6 a = full_dynamics_rhs(q, Vec6::Zero(), gravity_torque(q, m), m);
  EXPECT_LT(a.norm(), 1e-10);
  // without support the arm falls
  EXPECT_GT(full_dynamics_rhs(q, Vec6::Zero(), Vec6::Zero(), m).norm(), 1e-3);
}

TEST(Dynamics, ReflectedActuatorTerms) {
  DynamicsModel m;
  Vec6 j = m.reflected_inertia(), b = m.reflected_damping();
  EXPECT_NEAR(j[0], (0.09847 + 0.05) / 200.0, 1e-15);
  EXPECT_NEAR(b[0], (0.06 + 0.0674 * 0.0674 / 0.03) / 200.0, 1e-15);
}

TEST(Dynamics, BundledTermsAgree) {
  DynamicsModel m;
  Vec6 q = Vec6::Constant(0.1), qd = Vec6::Constant(-0.2);
  DynamicsTerms t = dynamics_terms(q, qd, m);
  EXPECT_LT((t.D - inertia_matrix(q, m)).norm(), 1e-14);
  EXPECT_LT((t.g - gravity_torque(q, m)).norm(), 1e-14);
  EXPECT_LT((t.C - coriolis_matrix(q, qd, m)).norm(), 1e-14);
}
