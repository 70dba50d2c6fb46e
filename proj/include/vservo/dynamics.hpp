#pragma once

#include <array>

#include "vservo/kinematics.hpp"

namespace vservo {

struct LinkInertial {
  double mass = 0;
  Vec3 com = Vec3::Zero();           // in the link's own DH frame, m
  Vec3 inertia_diag = Vec3::Zero();  // Ixx Iyy Izz about the CoM
};

struct ActuatorParams {
  double R = 0.03;
  double L = 1e-4;
  double Km = 0.0674;
  double Ja = 0.09847;
  double Jg = 0.05;
  double Bm = 0.06;
  std::array<double, 6> r = {200, 200, 200, 200, 200, 200};

  double Jm() const { return Ja + Jg; }
  double B() const { return Bm + Km * Km / R; }
};

struct DynamicsModel {
  RobotGeometry geo;
  std::array<LinkInertial, 6> links = default_links();
  ActuatorParams act;
  Vec3 g_hat = Vec3(0, 0, 9.8);  // potential V = sum m_i g_hat . p_ci
  double fd_step = 1e-6;

  static std::array<LinkInertial, 6> default_links();
  // diag(Jm / r_k) and diag(B / r_k)
  Vec6 reflected_inertia() const;
  Vec6 reflected_damping() const;
};

struct DynamicsTerms {
  Mat6 D = Mat6::Zero();
  Mat6 C = Mat6::Zero();
  Vec6 g = Vec6::Zero();
};

Mat6 inertia_matrix(const Vec6& q, const DynamicsModel& m);
double potential_energy(const Vec6& q, const DynamicsModel& m);
Vec6 gravity_torque(const Vec6& q, const DynamicsModel& m);
// dD/dq_k by central differences, k = 0..5
std::array<Mat6, 6> inertia_derivatives(const Vec6& q, const DynamicsModel& m);
Mat6 coriolis_matrix(const Vec6& q, const Vec6& qd, const DynamicsModel& m);

DynamicsTerms dynamics_terms(const Vec6& q, const Vec6& qd, const DynamicsModel& m);

/// (D+J) qdd + (C + B/r) qd + g = u
Vec6 full_dynamics_rhs(const Vec6& q, const Vec6& qd, const Vec6& u, const DynamicsModel& m);

/// u such that the plant above gives qdd = v
Vec6 feedback_linearize(const Vec6& q, const Vec6& qd, const Vec6& v, const DynamicsModel& m);

}  // namespace vservo
