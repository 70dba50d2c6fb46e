#pragma once

#include <complex>
#include <vector>

#include "vservo/common.hpp"

namespace vservo {

/// Real polynomial in s, coefficients in ascending powers.
class Poly {
 public:
  Poly() : c_{0.0} {}
  Poly(std::initializer_list<double> c) : c_(c) { trim(); }
  explicit Poly(std::vector<double> c) : c_(std::move(c)) { trim(); }

  static Poly from_roots(const std::vector<std::complex<double>>& roots, double lead = 1.0);

  int degree() const { return static_cast<int>(c_.size()) - 1; }
  double operator[](int i) const { return i < static_cast<int>(c_.size()) ? c_[i] : 0.0; }
  double lead() const { return c_.back(); }
  const std::vector<double>& coeffs() const { return c_; }
  bool is_zero() const { return c_.size() == 1 && c_[0] == 0.0; }

  std::complex<double> operator()(std::complex<double> s) const;
  double operator()(double s) const;
  Poly derivative() const;
  std::vector<std::complex<double>> roots() const;

  friend Poly operator+(const Poly& a, const Poly& b);
  friend Poly operator-(const Poly& a, const Poly& b);
  friend Poly operator*(const Poly& a, const Poly& b);
  friend Poly operator*(double k, const Poly& a);

 private:
  void trim();
  std::vector<double> c_;
};

class RationalTF {
 public:
  RationalTF() : num_{0.0}, den_{1.0} {}
  RationalTF(Poly num, Poly den);
  static RationalTF gain(double k) { return RationalTF(Poly{k}, Poly{1.0}); }
  static RationalTF s() { return RationalTF(Poly{0.0, 1.0}, Poly{1.0}); }

  const Poly& num() const { return num_; }
  const Poly& den() const { return den_; }

  std::complex<double> operator()(std::complex<double> s) const;
  double dc_gain() const;
  // dT/ds at s = 0 from the coefficients
  double dc_slope() const;
  int relative_degree() const { return den_.degree() - num_.degree(); }
  bool is_proper() const { return relative_degree() >= 0; }
  std::vector<std::complex<double>> poles() const { return den_.roots(); }
  std::vector<std::complex<double>> zeros() const { return num_.roots(); }
  bool is_stable(double tol = 1e-9) const;

  // strip root pairs shared by num and den (within tol), den made monic
  RationalTF minreal(double tol = 1e-7) const;
  RationalTF inverse() const { return RationalTF(den_, num_); }

  friend RationalTF operator*(const RationalTF& a, const RationalTF& b);
  friend RationalTF operator+(const RationalTF& a, const RationalTF& b);
  friend RationalTF operator-(const RationalTF& a, const RationalTF& b);
  friend RationalTF operator*(double k, const RationalTF& a);

 private:
  Poly num_, den_;
};

/// feedback(G) = G / (1 + G)
RationalTF unity_feedback(const RationalTF& L);

/// SISO realisation, controllable canonical form.
struct StateSpace {
  MatX A;
  VecX B;
  Eigen::RowVectorXd C;
  double D = 0;

  static StateSpace from_tf(const RationalTF& tf);
  int order() const { return static_cast<int>(A.rows()); }
  VecX deriv(const VecX& x, double u) const { return A * x + B * u; }
  double output(const VecX& x, double u) const { return (C * x)(0) + D * u; }
  // state that holds output y with zero input and zero state velocity
  // (needs an integrator, i.e. A singular); falls back to DC equilibrium
  VecX hold_state(double y) const;
  // equilibrium for constant input u
  VecX equilibrium(double u) const;
};

/// Fixed-step RK4 response to u(t).
std::vector<double> simulate_tf(const RationalTF& tf, const std::vector<double>& u, double dt);
std::vector<double> step_response(const RationalTF& tf, double t_end, double dt);

}  // namespace vservo
