#include "vservo/dynamics.hpp"

namespace vservo {

std::array<LinkInertial, 6> DynamicsModel::default_links() {
  std::array<LinkInertial, 6> l;
  l[0] = {3.1, Vec3(0, 0.05, 0), Vec3(0, 0.35, 0)};
  l[1] = {277.5, Vec3(-0.55, 0, 0.02), Vec3(0.13, 0.524, 0.539)};
  l[2] = {61.9, Vec3(0, 0, 0), Vec3(0.066, 0.086, 0.0125)};
  l[3] = {31.0, Vec3(0, -0.3755, 0), Vec3(1.8e-3, 1.3e-3, 1.8e-3)};
  l[4] = {20.5, Vec3(0, 0, 0), Vec3(3e-4, 4e-4, 3e-4)};
  l[5] = {1.0, Vec3(0, 0.675, 0), Vec3(1.5e-4, 1.5e-4, 4e-5)};
  return l;
}

Vec6 DynamicsModel::reflected_inertia() const {
  Vec6 j;
  for (int k = 0; k < 6; ++k) j[k] = act.Jm() / act.r[k];
  return j;
}

Vec6 DynamicsModel::reflected_damping() const {
  Vec6 b;
  for (int k = 0; k < 6; ++k) b[k] = act.B() / act.r[k];
  return b;
}

namespace {

struct LinkState {
  std::array<Mat4, 7> T;
  std::array<Vec3, 6> pc;  // CoM positions in base
};

LinkState link_state(const Vec6& q, const DynamicsModel& m) {
  LinkState s;
  s.T = joint_frames(q, m.geo);
  for (int i = 0; i < 6; ++i)
    s.pc[i] = (s.T[i + 1] * m.links[i].com.homogeneous()).head<3>();
  return s;
}

}  // namespace

Mat6 inertia_matrix(const Vec6& q, const DynamicsModel& m) {
  LinkState s = link_state(q, m);
  Mat6 D = Mat6::Zero();
  Eigen::Matrix<double, 3, 6> Jv, Jw;
  for (int i = 0; i < 6; ++i) {
    Jv.setZero();
    Jw.setZero();
    for (int j = 0; j <= i; ++j) {
      Vec3 z = s.T[j].block<3, 1>(0, 2);
      Vec3 o = s.T[j].topRightCorner<3, 1>();
      Jv.col(j) = z.cross(s.pc[i] - o);
      Jw.col(j) = z;
    }
    Mat3 R = s.T[i + 1].topLeftCorner<3, 3>();
    Mat3 I = R * m.links[i].inertia_diag.asDiagonal() * R.transpose();
    D += m.links[i].mass * Jv.transpose() * Jv + Jw.transpose() * I * Jw;
  }
  return 0.5 * (D + D.transpose());
}

double potential_energy(const Vec6& q, const DynamicsModel& m) {
  LinkState s = link_state(q, m);
  double V = 0;
  for (int i = 0; i < 6; ++i) V += m.links[i].mass * m.g_hat.dot(s.pc[i]);
  return V;
}

Vec6 gravity_torque(const Vec6& q, const DynamicsModel& m) {
  // sum_i m_i Jv_i^T g_hat, the analytic gradient of the potential
  LinkState s = link_state(q, m);
  Vec6 g = Vec6::Zero();
  for (int j = 0; j < 6; ++j) {
    Vec3 z = s.T[j].block<3, 1>(0, 2);
    Vec3 o = s.T[j].topRightCorner<3, 1>();
    for (int i = j; i < 6; ++i) g[j] += m.links[i].mass * m.g_hat.dot(z.cross(s.pc[i] - o));
  }
  return g;
}

std::array<Mat6, 6> inertia_derivatives(const Vec6& q, const DynamicsModel& m) {
  std::array<Mat6, 6> dD;
  const double h = m.fd_step;
  for (int k = 0; k < 6; ++k) {
    Vec6 qp = q, qm = q;
    qp[k] += h;
    qm[k] -= h;
    dD[k] = (inertia_matrix(qp, m) - inertia_matrix(qm, m)) / (2.0 * h);
  }
  return dD;
}

namespace {

Mat6 christoffel_c(const std::array<Mat6, 6>& dD, const Vec6& qd) {
  // C_kj = sum_i c_ijk qd_i,  c_ijk = 1/2 (dD_kj/dq_i + dD_ki/dq_j - dD_ij/dq_k)
  Mat6 C = Mat6::Zero();
  for (int k = 0; k < 6; ++k)
    for (int j = 0; j < 6; ++j) {
      double acc = 0;
      for (int i = 0; i < 6; ++i)
        acc += 0.5 * (dD[i](k, j) + dD[j](k, i) - dD[k](i, j)) * qd[i];
      C(k, j) = acc;
    }
  return C;
}

}  // namespace

Mat6 coriolis_matrix(const Vec6& q, const Vec6& qd, const DynamicsModel& m) {
  return christoffel_c(inertia_derivatives(q, m), qd);
}

DynamicsTerms dynamics_terms(const Vec6& q, const Vec6& qd, const DynamicsModel& m) {
  DynamicsTerms t;
  t.D = inertia_matrix(q, m);
  t.C = coriolis_matrix(q, qd, m);
  t.g = gravity_torque(q, m);
  return t;
}

Vec6 full_dynamics_rhs(const Vec6& q, const Vec6& qd, const Vec6& u, const DynamicsModel& m) {
  DynamicsTerms t = dynamics_terms(q, qd, m);
  Mat6 M = t.D;
  M.diagonal() += m.reflected_inertia();
  Vec6 h = t.C * qd + m.reflected_damping().cwiseProduct(qd) + t.g;
  return M.ldlt().solve(u - h);
}

Vec6 feedback_linearize(const Vec6& q, const Vec6& qd, const Vec6& v, const DynamicsModel& m) {
  DynamicsTerms t = dynamics_terms(q, qd, m);
  Mat6 M = t.D;
  M.diagonal() += m.reflected_inertia();
  return M * v + t.C * qd + m.reflected_damping().cwiseProduct(qd) + t.g;
}

}  // namespace vservo
