#pragma once

#include <functional>
#include <vector>

#include "vservo/tf.hpp"

namespace vservo {

struct ControllerGains {
  double tau_in = 0.01;
  double omega_n = 10.0;
  double zeta = 1.5;
  double tau_ext = 0.0;      // 0 -> 0.1 / omega_n
  double tau_forward = 0.0;  // 0 -> 0.1 * tau_in

  double ext() const { return tau_ext > 0 ? tau_ext : 0.1 / omega_n; }
  double fwd() const { return tau_forward > 0 ? tau_forward : 0.1 * tau_in; }
  void validate() const;
};

struct InnerLoop {
  RationalTF T, S, Y, Gc;
};

/// Youla design for Gp = 1/s^2 with T = (3 tau s + 1)/(tau s + 1)^3.
InnerLoop youla_inner(double tau_in);

/// T_inner^-1 / (tau_f s + 1)^2
RationalTF feedforward_inverse(const RationalTF& T_inner, double tau_forward);

// ---- SISO outer loops -------------------------------------------------------

struct SisoVisualLin {
  double C1, C2;
};
SisoVisualLin siso_visual_linearization(double phi, double F);

/// K1 for the one-link camera-and-tool model, linearised at q_T = 0.
double siso_tool_K1(double qV, double L_VT, double Lt, double F);
double siso_tool_K2(double qV, double F);

/// (1/gain) (tau s + 1)^3 / (3 tau s + 1) * wn^2 / (s^2 + 2 zeta wn s)
RationalTF siso_outer_model_lin(double gain, const ControllerGains& g);

/// Double-integrator outer controller used after the feedback-linearising
/// transform; the closed loop is (tau_e s + 1)(s^2 + 2 zeta wn s + wn^2).
RationalTF siso_outer_feedback_lin(const ControllerGains& g);

/// Scalar image map y = h(theta) of the one-DoF models, with derivatives.
struct SisoOutputMap {
  enum class Kind { CameraOnRobot, CameraAndTool } kind = Kind::CameraOnRobot;
  double F = 2.8;
  double phi = 0.0;    // camera-on-robot: initial image angle
  double qV = 0.0;     // camera-and-tool: frozen camera angle
  double L_VT = 1.0;
  double Lt = 0.135;

  double sigma(double th) const;  // tool: apparent angle of the interest point
  double h(double th) const;
  double dh(double th) const;
  double ddh(double th) const;
  // principal-branch inverse of h
  double inverse(double v) const;
};

/// R and G of ydd = R + G q_ref, inner-loop states (W, Wd, Wdd).
struct FbLinTerms {
  double R, G;
};
FbLinTerms siso_fblin_terms(const SisoOutputMap& map, double W, double Wd, double Wdd,
                            double tau_in);

/// tool A and B factors (first and second derivative of sigma)
double tool_A(double th, double L_VT, double Lt);
double tool_B(double th, double L_VT, double Lt);

/// q_T = asin((L_VT / Lt) sin s) - s,  s = atan(v / F) - qV
double siso_inverse_camera_tool(double v, const SisoOutputMap& map);

// ---- MIMO -------------------------------------------------------------------

struct DlsParams {
  double lambda_max = 0.01;
  double delta = 0.01;
  double sigma_th = 0.01;
};

double dls_lambda(double sigma_min, const DlsParams& p);
/// sigma / (sigma^2 + lambda(sigma)^2)
double dls_invert(double sigma, const DlsParams& p);

struct MimoControllerBundle {
  MatX U;        // m x m, left
  VecX sigma;    // min(m, 6) singular values, descending
  MatX V;        // 6 x 6, right
  VecX inv;      // regularised inverse gains, zero on uncontrollable channels
  double lambda = 0;
  int rank = 0;
  MatX pinv;     // V diag(inv) U^T, 6 x m
  RationalTF channel;  // common outer filter wn^2 (tau s+1)^3 / ((3 tau s+1)(s^2+2 zeta wn s))
  RationalTF butterworth;
  RationalTF plant_channel;  // (3 tau s + 1)/(tau s + 1)^3

  /// closed-loop transfer of output channel i (0 on uncontrollable ones)
  RationalTF channel_T(int i) const;
  /// output sensitivity matrix at s
  Eigen::MatrixXcd sensitivity(std::complex<double> s) const;
};

MimoControllerBundle smith_mcmillan_controller(const MatX& J, const ControllerGains& g,
                                               const DlsParams& dls, double rank_tol = 1e-8);

using VectorMap = std::function<VecX(const Vec6&)>;

struct Linearization {
  MatX J;
  VecX offset;
};
/// central differences of f around q0
Linearization mimo_linearize(const VectorMap& f, const Vec6& q0, double h = 1e-6);

// ---- damping selection -------------------------------------------------------

double lyapunov_lambda_max(double zeta, double omega_n);
double beta_est(double zeta, double phi, double omega_n);
/// argmax of beta_est over zeta in [0.05, 3]
double zeta_opt_estimate(double phi, double omega_n);

}  // namespace vservo
