#include "vservo/sim.hpp"

#include <algorithm>
#include <cmath>

#include "vservo/siso.hpp"

namespace vservo {

const char* to_string(SystemKind k) {
  switch (k) {
    case SystemKind::Visual: return "visual";
    case SystemKind::Tool: return "tool";
    case SystemKind::SisoVisual: return "siso-visual";
    case SystemKind::SisoTool: return "siso-tool";
  }
  return "?";
}

const char* to_string(ControllerKind k) {
  switch (k) {
    case ControllerKind::FbOnly: return "fb-only";
    case ControllerKind::FfFb: return "ff+fb";
    case ControllerKind::FbLin: return "fb-lin";
  }
  return "?";
}

const char* to_string(PlantKind k) { return k == PlantKind::Full ? "full" : "ideal"; }

ResponseMetrics response_metrics(const std::vector<double>& t, const std::vector<VecX>& y,
                                  const VecX& target, double band_frac) {
  ResponseMetrics m;
  const size_t N = y.size();
  const long k = target.size();
  m.sse = VecX::Zero(k);
  if (N == 0) return m;
  const VecX& y0 = y.front();
  const VecX& yf = y.back();
  VecX delta = target - y0;
  double scale = delta.cwiseAbs().maxCoeff();
  double band = band_frac * scale;

  size_t last_out = N;  // last sample outside the band
  for (size_t i = N; i-- > 0;) {
    if (((y[i] - yf).cwiseAbs().array() > band).any()) {
      last_out = i;
      break;
    }
  }
  m.settling = last_out == N ? 0.0 : t[std::min(last_out + 1, N - 1)] - t.front();
  m.settled = (t.back() - t.front()) <= 0 || m.settling <= 0.9 * (t.back() - t.front());

  m.rise = 0;
  for (long c = 0; c < k; ++c) {
    if (std::abs(delta(c)) <= band || scale == 0) continue;
    double tr = t.back() - t.front();
    for (size_t i = 0; i < N; ++i)
      if ((y[i](c) - y0(c)) / delta(c) >= 0.9) {
        tr = t[i] - t.front();
        break;
      }
    m.rise = std::max(m.rise, tr);
    double os = 0;
    for (size_t i = 0; i < N; ++i)
      os = std::max(os, (y[i](c) - target(c)) * (delta(c) > 0 ? 1 : -1) / scale);
    m.overshoot = std::max(m.overshoot, 100.0 * os);
  }

  size_t from = N - std::max<size_t>(1, N / 10);
  VecX mean = VecX::Zero(k);
  for (size_t i = from; i < N; ++i) mean += y[i];
  mean /= static_cast<double>(N - from);
  m.sse = (mean - target).cwiseAbs();
  m.max_sse = m.sse.maxCoeff();
  return m;
}

double lyapunov_value(double x1, double x2, double phi, double w, double z) {
  if (std::abs(x1) >= kPi / 2) throw Error(ErrorKind::StateOutOfDomain, "|x1| must stay below pi/2");
  double c2 = std::cos(phi) * std::cos(phi);
  double quad = 2 * z * z * w * w * x1 * x1 + 2 * z * w * x1 * x2 + x2 * x2;
  return 0.5 * quad + c2 * w * w * std::log(1.0 / std::abs(std::cos(x1)));
}

LyapunovTrace lyapunov_trace(const std::vector<double>& x1, const std::vector<double>& x2,
                             double phi, double w, double z) {
  LyapunovTrace L;
  for (size_t i = 0; i < x1.size(); ++i) L.V.push_back(lyapunov_value(x1[i], x2[i], phi, w, z));
  if (L.V.empty()) return L;
  for (size_t i = 1; i < L.V.size(); ++i) L.max_increase = std::max(L.max_increase, L.V[i] - L.V[i - 1]);
  L.monotone = L.max_increase < 1e-9 * std::max(L.V.front(), 1e-300);
  return L;
}

// ---------------------------------------------------------------------------

namespace {

struct Realizations {
  StateSpace inner, fb, ff, model;
};

class MimoLoop {
 public:
  explicit MimoLoop(const ScenarioConfig& c) : cfg(c), sc(c.scene) {
    tool = cfg.system == SystemKind::Tool;
    plant_geo = cfg.plant_geo ? *cfg.plant_geo : sc.geo;
    ff = cfg.controller == ControllerKind::FfFb;
    if (cfg.controller == ControllerKind::FbLin)
      throw Error(ErrorKind::Parse, "feedback linearisation is only defined for the one DoF systems");

    if (cfg.target_q) {
      qbar = *cfg.target_q;
    } else if (cfg.target_pose) {
      qbar = select_joint_solution(inverse_kinematics(*cfg.target_pose, sc.geo), sc.geo,
                                   std::nullopt, SelectMode::TargetGen);
    } else {
      throw Error(ErrorKind::Parse, "scenario needs target_q or target_pose");
    }
    y_target = nominal(qbar);
    if (tool)
      target_out = cfg.target_pose ? cfg.target_pose->d : forward_kinematics(qbar, sc.geo).d;
    else
      target_out = y_target;
    m = y_target.size();

    const auto& g = cfg.gains;
    InnerLoop il = youla_inner(g.tau_in);
    rz.inner = StateSpace::from_tf(il.Gc);
    MimoControllerBundle b0 = smith_mcmillan_controller(MatX::Identity(m, 6), g, cfg.dls);
    rz.fb = StateSpace::from_tf(b0.channel);
    rz.ff = StateSpace::from_tf(feedforward_inverse(il.T, g.fwd()));
    double tf = g.fwd();
    rz.model = StateSpace::from_tf(RationalTF(Poly{1.0}, Poly{1.0, 2 * tf, tf * tf}));
    ni = rz.inner.order();
    nf = rz.fb.order();
    nff = rz.ff.order();
    nm = rz.model.order();
    o_in = 12;
    o_fb = o_in + 6 * ni;
    o_ff = o_fb + 6 * nf;
    o_m = o_ff + 6 * nff;
    x = VecX::Zero(o_m + 6 * nm);
    x.segment<6>(0) = cfg.q0;
    for (int j = 0; j < 6; ++j) {
      if (!ff) x.segment(o_fb + j * nf, nf) = rz.fb.hold_state(cfg.q0(j));
      x.segment(o_ff + j * nff, nff) = rz.ff.equilibrium(cfg.q0(j));
      x.segment(o_m + j * nm, nm) = rz.model.equilibrium(cfg.q0(j));
    }
  }

  VecX nominal(const Vec6& q) const {
    return tool ? camera_and_tool_map(q, sc).y : camera_on_robot_map(q, sc).y;
  }

  // returns false when the features are not usable
  bool measure(const Vec6& qout, VecX& y) const {
    try {
      MapResult r = tool ? camera_and_tool_map(qout, sc, plant_geo) : camera_on_robot_map(qout, sc, plant_geo);
      y = r.y;
      return r.in_fov;
    } catch (const Error&) {
      return false;
    }
  }

  Vec3 flange(const Vec6& qout) const { return forward_kinematics(qout, plant_geo).d; }

  void resynthesize() {
    Vec6 q = x.segment<6>(0);
    Linearization lin = mimo_linearize([this](const Vec6& qq) { return nominal(qq); }, q);
    MimoControllerBundle b = smith_mcmillan_controller(lin.J, cfg.gains, cfg.dls);
    pinv = b.pinv;
    max_gain = std::max(max_gain, pinv.cwiseAbs().maxCoeff());
    for (int i = 0; i < b.sigma.size(); ++i)
      if (b.inv(i) != 0) min_sigma = std::min(min_sigma, b.sigma(i));
  }

  VecX deriv(const VecX& s, VecX* qref_out = nullptr) const {
    VecX ds = VecX::Zero(s.size());
    Vec6 q = s.segment<6>(0), qd = s.segment<6>(6);
    Vec6 qout = q + cfg.d_q;
    VecX ym = y_hold;
    if (in_view) {
      VecX tmp;
      measure(qout, tmp);
      if (tmp.size() == ym.size()) ym = tmp;
    }
    VecX yest = nominal(q);
    VecX yfb = fade * ym + (1 - fade) * yest;

    Vec6 qm, qff = Vec6::Zero();
    for (int j = 0; j < 6; ++j) {
      VecX xm = s.segment(o_m + j * nm, nm);
      qm(j) = rz.model.output(xm, qbar(j));
      ds.segment(o_m + j * nm, nm) = rz.model.deriv(xm, qbar(j));
      if (ff) {
        VecX xf = s.segment(o_ff + j * nff, nff);
        qff(j) = rz.ff.output(xf, qbar(j));
        ds.segment(o_ff + j * nff, nff) = rz.ff.deriv(xf, qbar(j));
      }
    }
    VecX yref = ff ? nominal(qm) : y_target;
    VecX w = pinv * (yref - yfb);

    Vec6 qref, v;
    for (int j = 0; j < 6; ++j) {
      VecX xf = s.segment(o_fb + j * nf, nf);
      qref(j) = qff(j) + rz.fb.output(xf, w(j));
      ds.segment(o_fb + j * nf, nf) = rz.fb.deriv(xf, w(j));
    }
    for (int j = 0; j < 6; ++j) {
      VecX xi = s.segment(o_in + j * ni, ni);
      double e = qref(j) - q(j);
      v(j) = rz.inner.output(xi, e);
      ds.segment(o_in + j * ni, ni) = rz.inner.deriv(xi, e);
    }
    Vec6 qdd = v;
    if (cfg.plant == PlantKind::Full) {
      // the plant's own model supplies the compensation, so this is exact up to round-off
      DynamicsTerms T = dynamics_terms(q, qd, cfg.dyn);
      Mat6 M = T.D;
      M.diagonal() += cfg.dyn.reflected_inertia();
      Vec6 h = T.C * qd + cfg.dyn.reflected_damping().cwiseProduct(qd) + T.g;
      Vec6 u = M * v + h;
      qdd = M.ldlt().solve(u - h);
    }
    ds.segment<6>(0) = qd;
    ds.segment<6>(6) = qdd;
    if (qref_out) *qref_out = qref;
    return ds;
  }

  ScenarioResult run() {
    ScenarioResult res;
    auto& tr = res.trace;
    tr.q_target = qbar;
    tr.target_out = target_out;
    tr.target_y = y_target;
    const double dt = cfg.dt;
    const long steps = std::lround(cfg.duration / dt);
    const long every = std::max<long>(1, std::lround(cfg.resynth / dt));

    Vec6 qout0 = cfg.q0 + cfg.d_q;
    VecX y0;
    in_view = measure(qout0, y0);
    fade = in_view ? 1.0 : 0.0;
    y_hold = in_view ? y0 : nominal(cfg.q0);
    long n_fov = 0, n_rec = 0;

    for (long k = 0; k <= steps; ++k) {
      double t = k * dt;
      Vec6 qout = x.segment<6>(0) + cfg.d_q;
      VecX ynow;
      in_view = measure(qout, ynow);
      if (in_view) y_hold = ynow;
      if (k > 0) {
        double target = in_view ? 1.0 : 0.0;
        double stepw = dt / cfg.crossfade;
        fade = fade < target ? std::min(target, fade + stepw) : std::max(target, fade - stepw);
      }
      if (k % every == 0) resynthesize();

      if (k % cfg.record_every == 0 || k == steps) {
        VecX qref;
        deriv(x, &qref);
        VecX yt;
        measure(qout, yt);
        if (yt.size() == 0) yt = y_hold;
        tr.t.push_back(t);
        tr.q.push_back(qout);
        tr.q_ref.push_back(qref);
        tr.y.push_back(yt);
        tr.out.push_back(tool ? VecX(flange(qout)) : yt);
        tr.in_fov.push_back(in_view ? 1 : 0);
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
    tr.max_gain = max_gain;
    tr.min_sigma = min_sigma;
    res.metrics = response_metrics(tr.t, tr.out, tr.target_out);
    res.metrics.fov_fraction = n_rec ? static_cast<double>(n_fov) / n_rec : 0.0;
    if (res.diverged) res.metrics.settled = false;
    return res;
  }

  const ScenarioConfig& cfg;
  const SceneConfig& sc;
  RobotGeometry plant_geo;
  bool tool = true, ff = true;
  Vec6 qbar;
  VecX y_target, target_out;
  long m = 0;
  Realizations rz;
  int ni = 0, nf = 0, nff = 0, nm = 0;
  int o_in = 0, o_fb = 0, o_ff = 0, o_m = 0;
  VecX x;
  MatX pinv;
  bool in_view = true;
  double fade = 1.0;
  VecX y_hold;
  double max_gain = 0, min_sigma = 1e300;
};

}  // namespace

ScenarioResult integrate_scenario(const ScenarioConfig& cfg) {
  if (!(cfg.dt > 0) || !(cfg.duration > 0)) throw Error(ErrorKind::Parse, "dt and duration must be positive");
  cfg.gains.validate();
  if (cfg.system == SystemKind::SisoVisual || cfg.system == SystemKind::SisoTool) return integrate_siso(cfg);
  MimoLoop loop(cfg);
  return loop.run();
}

}  // namespace vservo
