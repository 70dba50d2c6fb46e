#include <gtest/gtest.h>

#include <cmath>

#include "vservo/siso.hpp"

using namespace vservo;

namespace {

// closed form unit step of wn^2 / (s^2 + 2 zeta wn s + wn^2)
double second_order_step(double t, double z, double w) {
  if (std::abs(z - 1.0) < 1e-12) return 1.0 - std::exp(-w * t) * (1.0 + w * t);
  double wd = w * std::sqrt(1 - z * z);
  return 1.0 - std::exp(-z * w * t) * (std::cos(wd * t) + z * w / wd * std::sin(wd * t));
}

void sample_step(double z, double w, std::vector<double>& t, std::vector<VecX>& y) {
  for (int k = 0; k <= 30000; ++k) {
    t.push_back(k * 1e-4);
    VecX v(1);
    v(0) = second_order_step(t.back(), z, w);
    y.push_back(v);
  }
}

Vec6 deg(std::initializer_list<double> l) {
  Vec6 q;
  int i = 0;
  for (double d : l) q[i++] = deg2rad(d);
  return q;
}

ScenarioConfig tool_case() {
  ScenarioConfig c;
  c.scene = tool_scene_default();
  Pose tgt;
  tgt.R << 0, -1, 0, -1, 0, 0, 0, 0, -1;
  tgt.d << -1, 0.2, 0.3;
  c.target_pose = tgt;
  c.q0 = deg({9.09, 10.43, 8.55, 9.70, 8.63, 8.79});
  c.duration = 1.0;
  return c;
}

}  // namespace

TEST(Sim, MetricsOfCriticallyDampedStep) {
  std::vector<double> t;
  std::vector<VecX> y;
  sample_step(1.0, 10.0, t, y);
  VecX target = VecX::Ones(1);
  ResponseMetrics m = response_metrics(t, y, target);
  // 2% settling of (1 + wt) e^{-wt} = 0.02 is wt = 5.834
  EXPECT_NEAR(m.settling, 0.5834, 2e-3);
  // 90% rise: (1 + wt) e^{-wt} = 0.1 at wt = 3.890
  EXPECT_NEAR(m.rise, 0.3890, 2e-3);
  EXPECT_NEAR(m.overshoot, 0.0, 1e-9);
  EXPECT_LT(m.max_sse, 1e-9);
  EXPECT_TRUE(m.settled);
}

TEST(Sim, MetricsOfUnderdampedStep) {
  std::vector<double> t;
  std::vector<VecX> y;
  sample_step(0.5, 10.0, t, y);
  ResponseMetrics m = response_metrics(t, y, VecX::Ones(1));
  EXPECT_NEAR(m.overshoot, 100.0 * std::exp(-0.5 * kPi / std::sqrt(0.75)), 0.05);
  EXPECT_NEAR(m.overshoot, 16.3, 0.1);
}

TEST(Sim, MetricsFlagUnsettledRuns) {
  std::vector<double> t;
  std::vector<VecX> y;
  for (int k = 0; k < 1000; ++k) {
    t.push_back(k * 1e-3);
    VecX v(1);
    v(0) = std::sin(20.0 * t.back());
    y.push_back(v);
  }
  ResponseMetrics m = response_metrics(t, y, VecX::Zero(1));
  EXPECT_FALSE(m.settled);
}

TEST(Sim, ToolScenarioFeedforwardSettlesFast) {
  ScenarioResult r = integrate_scenario(tool_case());
  EXPECT_FALSE(r.diverged);
  EXPECT_TRUE(r.metrics.settled);
  EXPECT_LT(r.metrics.settling, 0.3);
  EXPECT_LT(r.metrics.max_sse, 1e-6);
  // flange reaches the commanded position
  EXPECT_LT((r.trace.out.back() - r.trace.target_out).norm(), 1e-6);
}

TEST(Sim, IdealPlantAgreesWithFullPlant) {
  ScenarioConfig c = tool_case();
  c.duration = 0.5;
  ScenarioResult full = integrate_scenario(c);
  c.plant = PlantKind::Ideal;
  ScenarioResult ideal = integrate_scenario(c);
  EXPECT_LT((full.trace.out.back() - ideal.trace.out.back()).norm(), 1e-4);
}

TEST(Sim, RunsAreDeterministic) {
  ScenarioConfig c = tool_case();
  c.duration = 0.2;
  ScenarioResult a = integrate_scenario(c), b = integrate_scenario(c);
  ASSERT_EQ(a.trace.q.size(), b.trace.q.size());
  for (size_t k = 0; k < a.trace.q.size(); ++k) EXPECT_EQ((a.trace.q[k] - b.trace.q[k]).norm(), 0.0);
}

TEST(Sim, TraceIsDecimated) {
  ScenarioConfig c = tool_case();
  c.duration = 0.1;
  c.record_every = 10;
  ScenarioResult r = integrate_scenario(c);
  EXPECT_NEAR(r.trace.t[1] - r.trace.t[0], 10 * c.dt, 1e-12);
  EXPECT_EQ(r.trace.t.size(), r.trace.out.size());
  EXPECT_EQ(r.trace.t.size(), r.trace.fade.size());
}

TEST(Sim, SisoVisualFeedforwardConverges) {
  ScenarioConfig c;
  c.system = SystemKind::SisoVisual;
  c.gains.zeta = 1.0;
  c.duration = 2.0;
  ScenarioResult r = integrate_scenario(c);
  EXPECT_FALSE(r.diverged);
  EXPECT_LT(std::abs(r.trace.out.back()(0) - r.trace.target_out(0)), 1e-3 * std::abs(c.siso.phi));
}

TEST(Sim, LyapunovFunctionDecreasesOnReducedModel) {
  for (double phi : {deg2rad(20), deg2rad(60)})
    for (double z : {0.3, 1.0, 1.5}) {
      ReducedRun run = simulate_reduced_visual(phi, 10.0, z, 3.0);
      LyapunovTrace L = lyapunov_trace(run.x1, run.x2, phi, 10.0, z);
      EXPECT_TRUE(L.monotone) << phi << " " << z << " " << L.max_increase;
      EXPECT_LT(L.V.back(), 1e-2 * L.V.front());
    }
}

TEST(Sim, LyapunovValueIsZeroAtRest) {
  EXPECT_NEAR(lyapunov_value(0, 0, 0.3, 10, 1), 0.0, 1e-15);
  EXPECT_GT(lyapunov_value(0.1, 0, 0.3, 10, 1), 0.0);
  EXPECT_GT(lyapunov_value(0, 0.1, 0.3, 10, 1), 0.0);
}

TEST(Sim, BruteForceDampingPicksFastestNonOvershootingRun) {
  ZetaScan s = brute_force_zeta(deg2rad(20), 10.0, 0.5, 1.2, 0.05);
  ASSERT_FALSE(s.zeta.empty());
  double best = 1e9;
  for (size_t i = 0; i < s.zeta.size(); ++i)
    if (s.overshoot[i] < 1e-3) best = std::min(best, s.settling[i]);
  for (size_t i = 0; i < s.zeta.size(); ++i)
    if (s.zeta[i] == s.best) EXPECT_DOUBLE_EQ(s.settling[i], best);
}
