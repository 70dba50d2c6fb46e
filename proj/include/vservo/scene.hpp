#pragma once

#include <optional>
#include <vector>

#include "vservo/camera.hpp"
#include "vservo/control.hpp"
#include "vservo/kinematics.hpp"

namespace vservo {

/// Geometry shared by the two-robot cell. In the visual system only `geo`
/// and `ref_points` matter; in the tool system `geo` is the tool robot and
/// the camera robot sits frozen at `qV_bar`.
struct SceneConfig {
  RobotGeometry geo;         // robot whose joints are controlled
  RobotGeometry geo_camera;  // camera robot (tool system only)
  CameraParams cam;
  std::vector<Vec3> ref_points;  // visual base frame, m
  double L_CE = 0.05;            // flange to camera optical centre, along -a
  double L_VT = 4.2;             // tool base sits at +L_VT on the visual x axis
  double L_tool = 0.127;
  Vec6 qV_bar = Vec6::Zero();

  // interest points in the tool flange frame
  Vec3 interest(int i) const { return i == 0 ? Vec3::Zero() : Vec3(0, 0, 0.5 * L_tool); }
};

// camera coordinates of a point given in the flange frame
Mat4 camera_from_flange(double L_CE);

/// Flange pose that puts the optical centre at `c` looking along `dir`,
/// image x axis as close to `x_hint` as possible.
Pose camera_pose_look(const Vec3& c, const Vec3& dir, const Vec3& x_hint, double L_CE);

// stacked (ul, ur, v) per point
VecX stack_features(const std::vector<StereoFeature>& f);
std::vector<StereoFeature> unstack_features(const VecX& y);

struct MapResult {
  VecX y;
  bool in_fov = true;
};

/// Psi: 9 stereo coordinates of the reference points seen from q.
MapResult camera_on_robot_map(const Vec6& q, const SceneConfig& sc);
/// same, but with an explicit robot geometry (used for perturbed plants)
MapResult camera_on_robot_map(const Vec6& q, const SceneConfig& sc, const RobotGeometry& g);

/// Flange pose of the camera robot recovered from three stereo observations.
Pose recover_camera_flange(const VecX& y, const SceneConfig& sc);
Vec6 inverse_camera_on_robot(const VecX& y, const SceneConfig& sc, const std::optional<Vec6>& prev);

/// H: 6 stereo coordinates of the two tool interest points.
MapResult camera_and_tool_map(const Vec6& qT, const SceneConfig& sc);
MapResult camera_and_tool_map(const Vec6& qT, const SceneConfig& sc, const RobotGeometry& g);

/// Tool flange pose in the tool base frame. Roll about the tool axis is not
/// observable from two points on that axis, it is taken from `prev_roll`.
Pose recover_tool_flange(const VecX& y, const SceneConfig& sc, const std::optional<Pose>& prev);
Vec6 inverse_camera_and_tool(const VecX& y, const SceneConfig& sc, const std::optional<Vec6>& prev);

/// Analytic d(features)/dq by the chain rule through the manipulator Jacobian.
MatX camera_on_robot_jacobian(const Vec6& q, const SceneConfig& sc);
MatX camera_and_tool_jacobian(const Vec6& qT, const SceneConfig& sc);

/// Tool point in the visual base frame.
Vec3 tool_to_visual(const Vec3& p, const SceneConfig& sc);

// ---- one DoF models ----
/// v = F tan(phi + q), errors when outside half the horizontal view angle
double siso_camera_on_robot(double phi, double q, const CameraParams& cam);
/// v of the tool tip, errors when |sigma + qV| exceeds `half_view`
double siso_camera_and_tool(double q, const SisoOutputMap& m, double half_view);
bool siso_tool_in_view(double q, const SisoOutputMap& m, double half_view);

// ---- bundled scenes ----
SceneConfig visual_scene_default();
SceneConfig tool_scene_default();

}  // namespace vservo
