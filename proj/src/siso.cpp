#include "vservo/siso.hpp"

#include <algorithm>
#include <cmath>

namespace vservo {

SisoOutputMap siso_map(const ScenarioConfig& cfg) {
  SisoOutputMap m;
  m.F = cfg.scene.cam.F;
  if (cfg.system == SystemKind::SisoVisual) {
    m.kind = SisoOutputMap::Kind::CameraOnRobot;
    m.phi = cfg.siso.phi;
  } else {
    m.kind = SisoOutputMap::Kind::CameraAndTool;
    m.qV = cfg.siso.qV;
    m.L_VT = cfg.siso.L_VT;
    m.Lt = cfg.siso.Lt;
  }
  return m;
}

namespace {

struct SisoLoop {
  const ScenarioConfig& cfg;
  SisoOutputMap map;
  bool visual;
  double vstar = 0, qbar = 0;
  StateSpace inner, outer, ffw, model;
  // state: q, qd, inner, outer, ff, model, W chain (3)
  int o_in = 2, o_out = 0, o_ff = 0, o_m = 0, o_w = 0;
  VecX x;
  bool in_view = true;
  double fade = 1, y_hold = 0;

  explicit SisoLoop(const ScenarioConfig& c) : cfg(c), map(siso_map(c)) {
    visual = cfg.system == SystemKind::SisoVisual;
    const auto& g = cfg.gains;
    const auto& S = cfg.siso;
    if (visual) {
      vstar = 0.0;
    } else {
      vstar = map.h(S.q_target);
    }
    qbar = map.inverse(vstar);

    InnerLoop il = youla_inner(g.tau_in);
    inner = StateSpace::from_tf(il.Gc);
    if (cfg.controller == ControllerKind::FbLin) {
      outer = StateSpace::from_tf(siso_outer_feedback_lin(g));
    } else {
      double gain = visual ? siso_visual_linearization(S.phi, map.F).C1
                           : siso_tool_K1(S.qV, S.L_VT, S.Lt, map.F);
      outer = StateSpace::from_tf(siso_outer_model_lin(gain, g));
    }
    ffw = StateSpace::from_tf(feedforward_inverse(il.T, g.fwd()));
    double tf = g.fwd();
    model = StateSpace::from_tf(RationalTF(Poly{1.0}, Poly{1.0, 2 * tf, tf * tf}));

    o_out = o_in + inner.order();
    o_ff = o_out + outer.order();
    o_m = o_ff + ffw.order();
    o_w = o_m + model.order();
    x = VecX::Zero(o_w + 3);
    x(0) = S.q0;
    if (cfg.controller == ControllerKind::FbOnly) x.segment(o_out, outer.order()) = outer.hold_state(S.q0);
    x.segment(o_ff, ffw.order()) = ffw.equilibrium(S.q0);
    x.segment(o_m, model.order()) = model.equilibrium(S.q0);
    x(o_w) = S.q0;
  }

  bool visible(double th) const {
    if (visual) return std::abs(cfg.siso.phi + th) < deg2rad(cfg.scene.cam.alpha / 2);
    return siso_tool_in_view(th, map, cfg.siso.half_view);
  }

  VecX deriv(const VecX& s, double* qref_out = nullptr) const {
    VecX ds = VecX::Zero(s.size());
    double q = s(0), qd = s(1);
    double th = q + cfg.siso.d;
    double ym = in_view ? map.h(th) : y_hold;
    double yfb = fade * ym + (1 - fade) * map.h(q);

    VecX xm = s.segment(o_m, model.order());
    double qm = model.output(xm, qbar);
    ds.segment(o_m, model.order()) = model.deriv(xm, qbar);
    VecX xf = s.segment(o_ff, ffw.order());
    double qff = 0;
    if (cfg.controller == ControllerKind::FfFb) {
      qff = ffw.output(xf, qbar);
      ds.segment(o_ff, ffw.order()) = ffw.deriv(xf, qbar);
    }

    double qref;
    VecX xo = s.segment(o_out, outer.order());
    const double tau = cfg.gains.tau_in;
    if (cfg.controller == ControllerKind::FbLin) {
      double e = vstar - yfb;
      double U = outer.output(xo, e);
      ds.segment(o_out, outer.order()) = outer.deriv(xo, e);
      double W = s(o_w), Wd = s(o_w + 1), Wdd = s(o_w + 2);
      FbLinTerms T = siso_fblin_terms(map, W, Wd, Wdd, tau);
      qref = (U - T.R) / T.G;
      ds(o_w) = Wd;
      ds(o_w + 1) = Wdd;
      ds(o_w + 2) = (qref - 3 * tau * tau * Wdd - 3 * tau * Wd - W) / (tau * tau * tau);
    } else {
      double ref = cfg.controller == ControllerKind::FfFb ? map.h(qm) : vstar;
      double e = ref - yfb;
      qref = qff + outer.output(xo, e);
      ds.segment(o_out, outer.order()) = outer.deriv(xo, e);
    }
    VecX xi = s.segment(o_in, inner.order());
    double v = inner.output(xi, qref - q);
    ds.segment(o_in, inner.order()) = inner.deriv(xi, qref - q);
    ds(0) = qd;
    ds(1) = v;
    if (qref_out) *qref_out = qref;
    return ds;
  }

  ScenarioResult run() {
    ScenarioResult res;
    auto& tr = res.trace;
    const double dt = cfg.dt;
    const long steps = std::lround(cfg.duration / dt);
    double th0 = x(0) + cfg.siso.d;
    in_view = visible(th0);
    fade = in_view ? 1 : 0;
    y_hold = in_view ? map.h(th0) : map.h(x(0));
    tr.target_out = VecX::Constant(1, qbar);
    tr.target_y = VecX::Constant(1, vstar);
    tr.q_target = Vec6::Zero();
    tr.q_target(0) = qbar;
    long n_fov = 0, n_rec = 0;
    for (long k = 0; k <= steps; ++k) {
      double th = x(0) + cfg.siso.d;
      in_view = visible(th);
      if (in_view) y_hold = map.h(th);
      if (k > 0) {
        double target = in_view ? 1.0 : 0.0, w = dt / cfg.crossfade;
        fade = fade < target ? std::min(target, fade + w) : std::max(target, fade - w);
      }
      if (k % cfg.record_every == 0 || k == steps) {
        double qref = 0;
        deriv(x, &qref);
        tr.t.push_back(k * dt);
        tr.q.push_back((VecX(2) << th, x(1)).finished());
        tr.q_ref.push_back(VecX::Constant(1, qref));
        tr.y.push_back(VecX::Constant(1, map.h(th)));
        tr.out.push_back(VecX::Constant(1, th));
        tr.in_fov.push_back(in_view);
        tr.fade.push_back(fade);
        n_fov += in_view;
        ++n_rec;
      }
      if (k == steps) break;
      VecX k1 = deriv(x);
      VecX k2 = deriv(x + 0.5 * dt * k1);
      VecX k3 = deriv(x + 0.5 * dt * k2);
      VecX k4 = deriv(x + dt * k3);
      x += dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
      if (!x.allFinite() || x.cwiseAbs().maxCoeff() > 1e6) {
        res.diverged = true;
        break;
      }
    }
    res.metrics = response_metrics(tr.t, tr.out, tr.target_out);
    res.metrics.fov_fraction = n_rec ? static_cast<double>(n_fov) / n_rec : 0.0;
    if (res.diverged) res.metrics.settled = false;
    return res;
  }
};

}  // namespace

ScenarioResult integrate_siso(const ScenarioConfig& cfg) {
  SisoLoop loop(cfg);
  return loop.run();
}

ReducedRun simulate_reduced_visual(double phi, double w, double z, double duration, double dt) {
  ReducedRun r;
  const double k = std::cos(phi) * std::cos(phi) * w * w;
  auto f = [&](const Eigen::Vector2d& s) {
    return Eigen::Vector2d(s(1), -2 * z * w * s(1) - k * std::tan(s(0)));
  };
  Eigen::Vector2d s(phi, 0.0);
  const long n = std::lround(duration / dt);
  for (long i = 0; i <= n; ++i) {
    r.t.push_back(i * dt);
    r.x1.push_back(s(0));
    r.x2.push_back(s(1));
    Eigen::Vector2d k1 = f(s), k2 = f(s + 0.5 * dt * k1), k3 = f(s + 0.5 * dt * k2), k4 = f(s + dt * k3);
    s += dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return r;
}

ZetaScan brute_force_zeta(double phi, double w, double lo, double hi, double step,
                          double max_os, double duration, double dt) {
  ZetaScan z;
  double best_t = 1e300, best_any = 1e300, z_any = lo;
  const int n = static_cast<int>(std::lround((hi - lo) / step));
  for (int i = 0; i <= n; ++i) {
    double zeta = lo + i * step;
    ReducedRun r = simulate_reduced_visual(phi, w, zeta, duration, dt);
    std::vector<VecX> y;
    y.reserve(r.x1.size());
    for (double v : r.x1) y.push_back(VecX::Constant(1, v));
    ResponseMetrics m = response_metrics(r.t, y, VecX::Zero(1));
    z.zeta.push_back(zeta);
    z.settling.push_back(m.settling);
    z.overshoot.push_back(m.overshoot);
    if (m.overshoot < max_os && m.settling < best_t) best_t = m.settling, z.best = zeta;
    if (m.settling < best_any) best_any = m.settling, z_any = zeta;
  }
  if (best_t == 1e300) z.best = z_any;
  return z;
}

}  // namespace vservo
