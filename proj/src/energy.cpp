#include "vservo/energy.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include "vservo/control.hpp"

namespace vservo {

namespace {

UnitEnergy compute_unit_energy(double tau_d, const EnergyModel& m) {
  RationalTF T = youla_inner(m.tau_in).T;
  if (tau_d > 0) T = T * RationalTF(Poly{1.0}, Poly{1.0, tau_d});
  StateSpace ss = StateSpace::from_tf(T);
  const MatX& A = ss.A;
  const VecX& B = ss.B;
  const Eigen::RowVectorXd C = ss.C;
  const Eigen::RowVectorXd CA = C * A;
  const int n = ss.order();

  const auto& act = m.act;
  const double kv = act.r[0] * act.R / act.Km;  // volts per N m
  const double kb = act.Km / act.r[0];          // back emf on the joint rate
  const double Me = m.M_eff(), He = m.H_eff();

  // state: x (n), I, E
  auto f = [&](const VecX& s) {
    VecX d(n + 2);
    VecX x = s.head(n);
    VecX xd = A * x + B;  // unit step input
    double qd = C * xd;
    double v = CA * xd;
    double V = kv * (Me * v + He * qd);
    double I = s(n);
    d.head(n) = xd;
    d(n) = (V - act.R * I - kb * qd) / act.L;
    d(n + 1) = V * I;
    return d;
  };

  const double horizon = 10.0 * std::max(tau_d, m.tau_in) + 0.2;
  const long steps = std::lround(horizon / m.dt);
  VecX s = VecX::Zero(n + 2);
  double last_out = 0;
  for (long k = 0; k < steps; ++k) {
    double q = C * s.head(n);
    if (std::abs(q - 1.0) > m.band) last_out = (k + 1) * m.dt;
    const double h = m.dt;
    VecX k1 = f(s), k2 = f(s + 0.5 * h * k1), k3 = f(s + 0.5 * h * k2), k4 = f(s + h * k3);
    s += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return {s(n + 1), last_out};
}

std::mutex cache_mu;
std::map<std::tuple<double, double, double, double, double, double>, UnitEnergy> cache;

}  // namespace

UnitEnergy unit_energy(double tau_d, const EnergyModel& m) {
  if (tau_d < 0) throw Error(ErrorKind::DegenerateDelay, "negative delay constant");
  if (std::abs(tau_d - m.tau_in) < 1e-9)
    throw Error(ErrorKind::DegenerateDelay, "delay constant equals the inner-loop time constant");
  auto key = std::make_tuple(tau_d, m.tau_in, m.M_eff(), m.H_eff(), m.dt, m.band);
  {
    std::lock_guard<std::mutex> lk(cache_mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  UnitEnergy u = compute_unit_energy(tau_d, m);
  std::lock_guard<std::mutex> lk(cache_mu);
  cache[key] = u;
  return u;
}

EnergyResult energy_cost(const Vec6& a, const Vec6& b, double tau_d, const EnergyModel& m) {
  UnitEnergy u = unit_energy(tau_d, m);
  double d2 = (b - a).squaredNorm();
  return {u.e * d2, d2 > 0 ? u.settling : 0.0};
}

Vec6 energy_reference_pose(const Vec3& p, const RobotGeometry& geo) {
  Pose pose;
  pose.R << 1, 0, 0, 0, -1, 0, 0, 0, -1;
  pose.d = p;
  return select_joint_solution(inverse_kinematics(pose, geo), geo, std::nullopt, SelectMode::TargetGen);
}

}  // namespace vservo
