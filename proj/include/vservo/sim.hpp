#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vservo/dynamics.hpp"
#include "vservo/scene.hpp"

namespace vservo {

enum class SystemKind { Visual, Tool, SisoVisual, SisoTool };
enum class ControllerKind { FbOnly, FfFb, FbLin };
enum class PlantKind { Full, Ideal };

const char* to_string(SystemKind k);
const char* to_string(ControllerKind k);
const char* to_string(PlantKind k);

/// One DoF experiments.
struct SisoSetup {
  double phi = deg2rad(20);  // visual: initial image angle
  double qV = deg2rad(-65);  // tool: frozen camera angle
  double L_VT = 1.0;
  double Lt = 0.135;
  double half_view = deg2rad(60);  // tool view cone
  double q0 = 0.0;
  double q_target = deg2rad(50);  // tool target angle; visual target is v = 0
  double d = 0.0;                 // output disturbance, rad
};

struct ScenarioConfig {
  std::string name = "scenario";
  SystemKind system = SystemKind::Tool;
  ControllerKind controller = ControllerKind::FfFb;
  PlantKind plant = PlantKind::Full;
  Vec6 q0 = Vec6::Zero();
  std::optional<Pose> target_pose;
  std::optional<Vec6> target_q;
  Vec6 d_q = Vec6::Zero();
  ControllerGains gains;
  DlsParams dls;
  double duration = 3.0;
  double dt = 1e-4;
  double resynth = 1e-3;
  double crossfade = 0.05;
  int record_every = 10;
  std::uint64_t seed = 1;
  SceneConfig scene;
  std::optional<RobotGeometry> plant_geo;  // perturbed kinematics of the real robot
  DynamicsModel dyn;
  SisoSetup siso;
};

struct ResponseMetrics {
  double settling = 0;   // s, 2% band around the final value
  double rise = 0;       // s, 90% of the commanded change
  double overshoot = 0;  // %
  VecX sse;              // |mean(y) - target| over the last 10%, per channel
  double max_sse = 0;
  bool settled = true;
  double fov_fraction = 1;  // share of samples with the features on the sensor
};

struct ScenarioTrace {
  std::vector<double> t;
  std::vector<VecX> q;       // joint output incl. disturbance
  std::vector<VecX> q_ref;
  std::vector<VecX> y;       // true features (or v for SISO)
  std::vector<VecX> out;     // metric channels: flange position / features / angle
  std::vector<int> in_fov;
  std::vector<double> fade;  // weight of the measured features
  VecX target_out;
  VecX target_y;
  Vec6 q_target = Vec6::Zero();
  double max_gain = 0;       // largest |pinv| entry seen by the MIMO controller
  double min_sigma = 1e300;
};

struct ScenarioResult {
  ScenarioTrace trace;
  ResponseMetrics metrics;
  bool diverged = false;
};

/// Channels are columns; target one entry per channel.
ResponseMetrics response_metrics(const std::vector<double>& t, const std::vector<VecX>& y,
                                 const VecX& target, double band = 0.02);

ScenarioResult integrate_scenario(const ScenarioConfig& cfg);

struct LyapunovTrace {
  std::vector<double> V;
  bool monotone = true;
  double max_increase = 0;
};

/// V = x'Px/2 + cos^2(phi) wn^2 ln|1/cos x1| on x1 = image angle, x2 = its rate.
double lyapunov_value(double x1, double x2, double phi, double omega_n, double zeta);
LyapunovTrace lyapunov_trace(const std::vector<double>& x1, const std::vector<double>& x2,
                             double phi, double omega_n, double zeta);

}  // namespace vservo
