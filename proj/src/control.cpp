#include "vservo/control.hpp"

#include <algorithm>
#include <cmath>

namespace vservo {

void ControllerGains::validate() const {
  if (!(tau_in > 0 && omega_n > 0 && zeta > 0) || tau_ext < 0 || tau_forward < 0)
    throw Error(ErrorKind::Parse, "controller gains must be positive");
}

static Poly cube_lag(double tau) {  // (tau s + 1)^3
  return Poly{1.0, 3 * tau, 3 * tau * tau, tau * tau * tau};
}

InnerLoop youla_inner(double tau) {
  InnerLoop L;
  Poly den = cube_lag(tau);
  L.T = RationalTF(Poly{1.0, 3 * tau}, den);
  // 1 - T, the constant and linear terms cancel exactly
  L.S = RationalTF(Poly{0.0, 0.0, 3 * tau * tau, tau * tau * tau}, den);
  L.Y = RationalTF(Poly{0.0, 0.0, 1.0, 3 * tau}, den);
  // Y/S with the s^2 and (tau s+1)^3 factors cancelled by hand
  L.Gc = RationalTF(Poly{1.0, 3 * tau}, Poly{3 * tau * tau, tau * tau * tau});
  return L;
}

RationalTF feedforward_inverse(const RationalTF& T_inner, double tf) {
  Poly lag{1.0, 2 * tf, tf * tf};
  return RationalTF(T_inner.den(), T_inner.num() * lag);
}

SisoVisualLin siso_visual_linearization(double phi, double F) {
  double c = std::cos(phi);
  return {F / (c * c), F * std::tan(phi)};
}

double tool_A(double th, double L, double Lt) {
  double c = std::cos(th);
  return Lt * (L * c - Lt) / (Lt * Lt + L * L - 2 * Lt * L * c);
}

double tool_B(double th, double L, double Lt) {
  double c = std::cos(th), s = std::sin(th);
  double N = Lt * (L * c - Lt);
  double D = Lt * Lt + L * L - 2 * Lt * L * c;
  // d/dth of N/D
  return (-Lt * L * s * D - N * 2 * Lt * L * s) / (D * D);
}

double siso_tool_K1(double qV, double L_VT, double Lt, double F) {
  double t = std::tan(qV);
  return F * (1 + t * t) * (L_VT * Lt - Lt * Lt) / ((L_VT - Lt) * (L_VT - Lt));
}

double siso_tool_K2(double qV, double F) { return F * std::tan(qV); }

RationalTF siso_outer_model_lin(double gain, const ControllerGains& g) {
  if (std::abs(gain) < 1e-15) throw Error(ErrorKind::ZeroLinearizationGain, "gain is zero");
  double w = g.omega_n, z = g.zeta, tau = g.tau_in;
  Poly num = (w * w / gain) * cube_lag(tau);
  Poly den = Poly{1.0, 3 * tau} * Poly{0.0, 2 * z * w, 1.0};
  return RationalTF(num, den);
}

RationalTF siso_outer_feedback_lin(const ControllerGains& g) {
  double w = g.omega_n, z = g.zeta, te = g.ext();
  return RationalTF(Poly{w * w, w * w * te + 2 * z * w}, Poly{2 * z * w * te + 1, te});
}

// ---- one-DoF image maps ----

double SisoOutputMap::sigma(double th) const {
  return std::atan2(Lt * std::sin(th), L_VT - Lt * std::cos(th));
}

double SisoOutputMap::h(double th) const {
  if (kind == Kind::CameraOnRobot) return F * std::tan(phi + th);
  return F * std::tan(sigma(th) + qV);
}

double SisoOutputMap::dh(double th) const {
  if (kind == Kind::CameraOnRobot) {
    double c = std::cos(phi + th);
    return F / (c * c);
  }
  double c = std::cos(sigma(th) + qV);
  return F / (c * c) * tool_A(th, L_VT, Lt);
}

double SisoOutputMap::ddh(double th) const {
  if (kind == Kind::CameraOnRobot) {
    double a = phi + th, c = std::cos(a);
    return 2 * F * std::tan(a) / (c * c);
  }
  double a = sigma(th) + qV, c = std::cos(a);
  double A = tool_A(th, L_VT, Lt);
  return 2 * F * std::tan(a) / (c * c) * A * A + F / (c * c) * tool_B(th, L_VT, Lt);
}

double SisoOutputMap::inverse(double v) const {
  if (kind == Kind::CameraOnRobot) return std::atan(v / F) - phi;
  return siso_inverse_camera_tool(v, *this);
}

double siso_inverse_camera_tool(double v, const SisoOutputMap& m) {
  double s = std::atan(v / m.F) - m.qV;
  double arg = m.L_VT / m.Lt * std::sin(s);
  if (std::abs(arg) > 1.0 + 1e-12) throw Error(ErrorKind::OutOfImage, "no tool angle for this v");
  arg = std::clamp(arg, -1.0, 1.0);
  return std::asin(arg) - s;
}

FbLinTerms siso_fblin_terms(const SisoOutputMap& map, double W, double Wd, double Wdd,
                            double tau) {
  // inner loop as seen from W: q = 3 tau Wd + W, q_dot = 3 tau Wdd + Wd
  double q = 3 * tau * Wd + W;
  double qd = 3 * tau * Wdd + Wd;
  double h1 = map.dh(q), h2 = map.ddh(q);
  FbLinTerms t;
  t.R = h2 * qd * qd + h1 * (-8 * Wdd - 9 * Wd / tau - 3 * W / (tau * tau));
  t.G = 3 * h1 / (tau * tau);
  return t;
}

// ---- MIMO ----

double dls_lambda(double s, const DlsParams& p) {
  if (s >= p.sigma_th + p.delta) return 0.0;
  if (s <= p.sigma_th) return p.lambda_max;
  return p.lambda_max * (1.0 - (s - p.sigma_th) / p.delta);
}

double dls_invert(double s, const DlsParams& p) {
  double l = dls_lambda(s, p);
  double den = s * s + l * l;
  return den > 0 ? s / den : 0.0;
}

RationalTF MimoControllerBundle::channel_T(int i) const {
  if (i >= static_cast<int>(inv.size()) || inv(i) == 0.0) return RationalTF::gain(0.0);
  RationalTF L = (sigma(i) * inv(i)) * (channel * plant_channel);
  return unity_feedback(L).minreal();
}

Eigen::MatrixXcd MimoControllerBundle::sensitivity(std::complex<double> s) const {
  const int m = static_cast<int>(U.rows());
  Eigen::VectorXcd Td = Eigen::VectorXcd::Zero(m);
  for (int i = 0; i < static_cast<int>(inv.size()); ++i) {
    if (inv(i) == 0.0) continue;
    std::complex<double> L = sigma(i) * inv(i) * channel(s) * plant_channel(s);
    Td(i) = L / (1.0 + L);
  }
  Eigen::MatrixXcd Uc = U.cast<std::complex<double>>();
  return Eigen::MatrixXcd::Identity(m, m) - Uc * Td.asDiagonal() * Uc.adjoint();
}

MimoControllerBundle smith_mcmillan_controller(const MatX& J, const ControllerGains& g,
                                               const DlsParams& dls, double rank_tol) {
  MimoControllerBundle b;
  Eigen::JacobiSVD<MatX> svd(J, Eigen::ComputeFullU | Eigen::ComputeFullV);
  b.U = svd.matrixU();
  b.V = svd.matrixV();
  b.sigma = svd.singularValues();
  const int k = static_cast<int>(b.sigma.size());
  const double smax = k > 0 ? b.sigma(0) : 0.0;
  b.inv = VecX::Zero(k);
  double smin = smax;
  for (int i = 0; i < k; ++i) {
    if (b.sigma(i) <= rank_tol * smax || b.sigma(i) == 0.0) continue;
    b.inv(i) = dls_invert(b.sigma(i), dls);
    smin = b.sigma(i);
    ++b.rank;
  }
  b.lambda = dls_lambda(smin, dls);
  b.pinv = MatX::Zero(J.cols(), J.rows());
  for (int i = 0; i < k; ++i)
    if (b.inv(i) != 0.0) b.pinv += b.inv(i) * b.V.col(i) * b.U.col(i).transpose();

  double w = g.omega_n, z = g.zeta, tau = g.tau_in;
  b.channel = RationalTF((w * w) * cube_lag(tau), Poly{1.0, 3 * tau} * Poly{0.0, 2 * z * w, 1.0});
  b.butterworth = RationalTF(Poly{w * w}, Poly{w * w, 2 * z * w, 1.0});
  b.plant_channel = youla_inner(tau).T;
  return b;
}

Linearization mimo_linearize(const VectorMap& f, const Vec6& q0, double h) {
  Linearization L;
  L.offset = f(q0);
  L.J = MatX::Zero(L.offset.size(), 6);
  for (int j = 0; j < 6; ++j) {
    Vec6 qp = q0, qm = q0;
    qp(j) += h;
    qm(j) -= h;
    L.J.col(j) = (f(qp) - f(qm)) / (2 * h);
  }
  return L;
}

// ---- damping ----

double lyapunov_lambda_max(double z, double w) {
  double a = z * z * w * w;
  return 0.5 * (1 + 2 * a + std::sqrt(1 + 4 * a * a));
}

double beta_est(double z, double phi, double w) {
  double c2 = std::cos(phi) * std::cos(phi);
  double num = std::min(z * w * c2 * w * w, z * w);
  return num / (lyapunov_lambda_max(z, w) + 1.71 * c2 * w * w);
}

double zeta_opt_estimate(double phi, double w) {
  if (std::abs(phi) >= deg2rad(76.8))
    throw Error(ErrorKind::PhiOutOfLemmaRange, "|phi| must stay below 76.8 deg");
  // coarse scan then golden refinement around the best cell
  double best = 0.05, bv = -1;
  const int n = 600;
  for (int i = 0; i <= n; ++i) {
    double z = 0.05 + (3.0 - 0.05) * i / n;
    double v = beta_est(z, phi, w);
    if (v > bv) bv = v, best = z;
  }
  double step = (3.0 - 0.05) / n;
  double lo = std::max(0.05, best - step), hi = std::min(3.0, best + step);
  const double gr = 0.5 * (std::sqrt(5.0) - 1);
  for (int it = 0; it < 60; ++it) {
    double a = hi - gr * (hi - lo), c = lo + gr * (hi - lo);
    if (beta_est(a, phi, w) > beta_est(c, phi, w)) hi = c; else lo = a;
  }
  return 0.5 * (lo + hi);
}

}  // namespace vservo
