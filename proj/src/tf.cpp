#include "vservo/tf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace vservo {

void Poly::trim() {
  while (c_.size() > 1 && c_.back() == 0.0) c_.pop_back();
  if (c_.empty()) c_.push_back(0.0);
}

Poly Poly::from_roots(const std::vector<std::complex<double>>& roots, double lead) {
  std::vector<std::complex<double>> c{1.0};
  for (const auto& r : roots) {
    std::vector<std::complex<double>> n(c.size() + 1, 0.0);
    for (size_t i = 0; i < c.size(); ++i) {
      n[i + 1] += c[i];
      n[i] -= r * c[i];
    }
    c = std::move(n);
  }
  std::vector<double> out(c.size());
  for (size_t i = 0; i < c.size(); ++i) out[i] = lead * c[i].real();
  return Poly(out);
}

std::complex<double> Poly::operator()(std::complex<double> s) const {
  std::complex<double> acc = 0.0;
  for (int i = degree(); i >= 0; --i) acc = acc * s + c_[i];
  return acc;
}

double Poly::operator()(double s) const {
  double acc = 0.0;
  for (int i = degree(); i >= 0; --i) acc = acc * s + c_[i];
  return acc;
}

Poly Poly::derivative() const {
  if (degree() == 0) return Poly{0.0};
  std::vector<double> d(c_.size() - 1);
  for (size_t i = 1; i < c_.size(); ++i) d[i - 1] = c_[i] * static_cast<double>(i);
  return Poly(d);
}

std::vector<std::complex<double>> Poly::roots() const {
  const int n = degree();
  std::vector<std::complex<double>> out;
  if (n < 1) return out;
  // zero roots first, they make the companion matrix needlessly ill-conditioned
  int z = 0;
  while (z < n && c_[z] == 0.0) {
    out.emplace_back(0.0, 0.0);
    ++z;
  }
  const int m = n - z;
  if (m == 0) return out;
  MatX comp = MatX::Zero(m, m);
  for (int i = 1; i < m; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < m; ++i) comp(i, m - 1) = -c_[z + i] / c_[n];
  Eigen::EigenSolver<MatX> es(comp, false);
  for (int i = 0; i < m; ++i) out.push_back(es.eigenvalues()[i]);
  return out;
}

Poly operator+(const Poly& a, const Poly& b) {
  std::vector<double> c(std::max(a.c_.size(), b.c_.size()), 0.0);
  for (size_t i = 0; i < c.size(); ++i) c[i] = a[static_cast<int>(i)] + b[static_cast<int>(i)];
  return Poly(c);
}

Poly operator-(const Poly& a, const Poly& b) { return a + (-1.0) * b; }

Poly operator*(const Poly& a, const Poly& b) {
  std::vector<double> c(a.c_.size() + b.c_.size() - 1, 0.0);
  for (size_t i = 0; i < a.c_.size(); ++i)
    for (size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
  return Poly(c);
}

Poly operator*(double k, const Poly& a) {
  std::vector<double> c = a.c_;
  for (auto& x : c) x *= k;
  return Poly(c);
}

RationalTF::RationalTF(Poly num, Poly den) : num_(std::move(num)), den_(std::move(den)) {
  if (den_.is_zero()) throw std::invalid_argument("zero denominator");
}

std::complex<double> RationalTF::operator()(std::complex<double> s) const {
  return num_(s) / den_(s);
}

double RationalTF::dc_gain() const { return num_[0] / den_[0]; }

double RationalTF::dc_slope() const {
  double n0 = num_[0], n1 = num_[1], d0 = den_[0], d1 = den_[1];
  return (n1 * d0 - n0 * d1) / (d0 * d0);
}

bool RationalTF::is_stable(double tol) const {
  for (const auto& p : poles())
    if (p.real() >= -tol) return false;
  return true;
}

RationalTF RationalTF::minreal(double tol) const {
  auto zs = zeros();
  auto ps = poles();
  std::vector<bool> zused(zs.size(), false), pused(ps.size(), false);
  for (size_t i = 0; i < zs.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    size_t bj = ps.size();
    for (size_t j = 0; j < ps.size(); ++j) {
      if (pused[j]) continue;
      double d = std::abs(zs[i] - ps[j]);
      if (d < best) {
        best = d;
        bj = j;
      }
    }
    if (bj < ps.size() && best <= tol * std::max(1.0, std::abs(ps[bj]))) {
      zused[i] = true;
      pused[bj] = true;
    }
  }
  std::vector<std::complex<double>> zk, pk;
  for (size_t i = 0; i < zs.size(); ++i)
    if (!zused[i]) zk.push_back(zs[i]);
  for (size_t j = 0; j < ps.size(); ++j)
    if (!pused[j]) pk.push_back(ps[j]);
  return RationalTF(Poly::from_roots(zk, num_.lead() / den_.lead()), Poly::from_roots(pk, 1.0));
}

RationalTF operator*(const RationalTF& a, const RationalTF& b) {
  return RationalTF(a.num_ * b.num_, a.den_ * b.den_);
}

RationalTF operator+(const RationalTF& a, const RationalTF& b) {
  return RationalTF(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
}

RationalTF operator-(const RationalTF& a, const RationalTF& b) { return a + (-1.0) * b; }

RationalTF operator*(double k, const RationalTF& a) { return RationalTF(k * a.num_, a.den_); }

RationalTF unity_feedback(const RationalTF& L) {
  return RationalTF(L.num(), L.den() + L.num());
}

StateSpace StateSpace::from_tf(const RationalTF& tf) {
  if (!tf.is_proper()) throw std::invalid_argument("improper transfer function");
  const int n = tf.den().degree();
  const double lead = tf.den().lead();
  StateSpace ss;
  ss.A = MatX::Zero(n, n);
  ss.B = VecX::Zero(n);
  ss.C = Eigen::RowVectorXd::Zero(n);
  ss.D = tf.num()[n] / lead;
  if (n == 0) return ss;
  for (int i = 0; i + 1 < n; ++i) ss.A(i, i + 1) = 1.0;
  for (int i = 0; i < n; ++i) {
    double ai = tf.den()[i] / lead;
    ss.A(n - 1, i) = -ai;
    ss.C(i) = tf.num()[i] / lead - ss.D * ai;
  }
  ss.B(n - 1) = 1.0;
  return ss;
}

VecX StateSpace::hold_state(double y) const {
  const int n = order();
  if (n == 0) return VecX();
  // integrator present: a0 == 0, first state is the integral
  if (A(n - 1, 0) == 0.0 && C(0) != 0.0) {
    VecX x = VecX::Zero(n);
    x(0) = y / C(0);
    return x;
  }
  double g = (C * (-A).fullPivLu().solve(B))(0) + D;
  return equilibrium(g != 0 ? y / g : 0.0);
}

VecX StateSpace::equilibrium(double u) const {
  if (order() == 0) return VecX();
  return (-A).fullPivLu().solve(B * u);
}

std::vector<double> simulate_tf(const RationalTF& tf, const std::vector<double>& u, double dt) {
  StateSpace ss = StateSpace::from_tf(tf);
  VecX x = VecX::Zero(ss.order());
  std::vector<double> y(u.size());
  for (size_t k = 0; k < u.size(); ++k) {
    y[k] = ss.output(x, u[k]);
    if (k + 1 == u.size()) break;
    // input linearly interpolated over the step
    double u0 = u[k], u1 = u[k + 1], um = 0.5 * (u0 + u1);
    VecX k1 = ss.deriv(x, u0);
    VecX k2 = ss.deriv(x + 0.5 * dt * k1, um);
    VecX k3 = ss.deriv(x + 0.5 * dt * k2, um);
    VecX k4 = ss.deriv(x + dt * k3, u1);
    x += dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return y;
}

std::vector<double> step_response(const RationalTF& tf, double t_end, double dt) {
  size_t n = static_cast<size_t>(std::llround(t_end / dt)) + 1;
  std::vector<double> u(n, 1.0);
  return simulate_tf(tf, u, dt);
}

}  // namespace vservo
