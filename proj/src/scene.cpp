#include "vservo/scene.hpp"

#include <cmath>

namespace vservo {

Mat4 camera_from_flange(double L_CE) {
  Mat4 T = Mat4::Identity();
  T(2, 3) = L_CE;
  return T;
}

Pose camera_pose_look(const Vec3& c, const Vec3& dir, const Vec3& x_hint, double L_CE) {
  Vec3 a = dir.normalized();
  Vec3 n = x_hint - x_hint.dot(a) * a;
  if (n.norm() < 1e-9) throw Error(ErrorKind::DegenerateFeatures, "x hint parallel to view axis");
  n.normalize();
  Pose p;
  p.R.col(0) = n;
  p.R.col(1) = a.cross(n);
  p.R.col(2) = a;
  p.d = c + L_CE * a;
  return p;
}

VecX stack_features(const std::vector<StereoFeature>& f) {
  VecX y(3 * f.size());
  for (size_t i = 0; i < f.size(); ++i) y.segment<3>(3 * i) << f[i].ul, f[i].ur, f[i].v;
  return y;
}

std::vector<StereoFeature> unstack_features(const VecX& y) {
  if (y.size() % 3 != 0) throw Error(ErrorKind::DimensionMismatch, "feature vector length not a multiple of 3");
  std::vector<StereoFeature> f(y.size() / 3);
  for (size_t i = 0; i < f.size(); ++i) f[i] = {y(3 * i), y(3 * i + 1), y(3 * i + 2)};
  return f;
}

static StereoFeature project_checked(const Vec3& Pc, const CameraParams& cam, bool& fov) {
  if (Pc.z() <= 0) throw Error(ErrorKind::PointBehindCamera, "reference point behind the camera");
  StereoFeature f = project_stereo(Pc, cam);
  fov = fov && on_sensor(f, cam);
  return f;
}

MapResult camera_on_robot_map(const Vec6& q, const SceneConfig& sc) {
  return camera_on_robot_map(q, sc, sc.geo);
}

MapResult camera_on_robot_map(const Vec6& q, const SceneConfig& sc, const RobotGeometry& g) {
  Mat4 T = camera_from_flange(sc.L_CE) * rigid_inverse(forward_kinematics(q, g).matrix());
  MapResult r;
  std::vector<StereoFeature> f;
  for (const auto& P : sc.ref_points) f.push_back(project_checked((T * P.homogeneous()).head<3>(), sc.cam, r.in_fov));
  r.y = stack_features(f);
  return r;
}

static void check_spread(const std::vector<Vec3>& pts, const char* what) {
  Vec3 c = Vec3::Zero();
  for (const auto& p : pts) c += p;
  c /= static_cast<double>(pts.size());
  MatX M(3, pts.size());
  for (size_t i = 0; i < pts.size(); ++i) M.col(i) = pts[i] - c;
  Eigen::JacobiSVD<MatX> svd(M);
  const auto& s = svd.singularValues();
  if (s.size() < 2 || s(1) <= 1e-9 * std::max(1.0, s(0)))
    throw Error(ErrorKind::CollinearPoints, what);
}

// R, t with b = R a + t in the least-squares sense
static std::pair<Mat3, Vec3> kabsch(const std::vector<Vec3>& A, const std::vector<Vec3>& B) {
  Vec3 ca = Vec3::Zero(), cb = Vec3::Zero();
  for (size_t i = 0; i < A.size(); ++i) ca += A[i], cb += B[i];
  ca /= static_cast<double>(A.size());
  cb /= static_cast<double>(B.size());
  Mat3 H = Mat3::Zero();
  for (size_t i = 0; i < A.size(); ++i) H += (A[i] - ca) * (B[i] - cb).transpose();
  Eigen::JacobiSVD<Mat3> svd(H, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 U = svd.matrixU(), V = svd.matrixV();
  Mat3 S = Mat3::Identity();
  S(2, 2) = (V * U.transpose()).determinant() < 0 ? -1.0 : 1.0;
  Mat3 R = V * S * U.transpose();
  return {R, cb - R * ca};
}

Pose recover_camera_flange(const VecX& y, const SceneConfig& sc) {
  if (y.size() != 3 * static_cast<long>(sc.ref_points.size()))
    throw Error(ErrorKind::DimensionMismatch, "feature count does not match reference points");
  check_spread(sc.ref_points, "reference points are collinear");
  auto f = unstack_features(y);
  std::vector<Vec3> PE;
  for (const auto& fi : f) PE.push_back(back_project_stereo(fi, sc.cam) - Vec3(0, 0, sc.L_CE));
  check_spread(PE, "observed points are collinear");
  auto [R, t] = kabsch(sc.ref_points, PE);
  // R, t is the base-to-flange map, invert it
  Pose p;
  p.R = R.transpose();
  p.d = -R.transpose() * t;
  return p;
}

static Vec6 ik_estimate(const Pose& p, const RobotGeometry& g, const std::optional<Vec6>& prev) {
  IkSolutionSet set = inverse_kinematics(p, g);
  return select_joint_solution(set, g, prev, prev ? SelectMode::Estimation : SelectMode::TargetGen);
}

Vec6 inverse_camera_on_robot(const VecX& y, const SceneConfig& sc, const std::optional<Vec6>& prev) {
  return ik_estimate(recover_camera_flange(y, sc), sc.geo, prev);
}

namespace {

Mat3 skew(const Vec3& v) {
  Mat3 S;
  S << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return S;
}

// rows (ul, ur, v) of one feature w.r.t. the camera-frame point, metres in, mm out
Eigen::Matrix3d projection_jacobian(const Vec3& P, const CameraParams& cam) {
  if (!(P.z() > 0)) throw Error(ErrorKind::NonPositiveDepth, "Z <= 0");
  StereoFeature f = project_stereo(P, cam);
  const double k = cam.F / P.z();
  Eigen::Matrix3d D;
  D << k, 0, -f.ul / P.z(),
       k, 0, -f.ur / P.z(),
       0, k, -f.v / P.z();
  return D;
}

}  // namespace

MatX camera_on_robot_jacobian(const Vec6& q, const SceneConfig& sc) {
  const Pose fl = forward_kinematics(q, sc.geo);
  const Mat6 J = manipulator_jacobian(q, sc.geo);
  const Mat4 T = camera_from_flange(sc.L_CE) * rigid_inverse(fl.matrix());
  MatX out(3 * sc.ref_points.size(), 6);
  for (size_t i = 0; i < sc.ref_points.size(); ++i) {
    const Vec3& P = sc.ref_points[i];
    Vec3 Pc = (T * P.homogeneous()).head<3>();
    // the point is fixed, the camera moves: dPc = R^T ((P - d) x w - v)
    Eigen::Matrix<double, 3, 6> dP = fl.R.transpose() * (skew(P - fl.d) * J.bottomRows<3>() - J.topRows<3>());
    out.block(3 * i, 0, 3, 6) = projection_jacobian(Pc, sc.cam) * dP;
  }
  return out;
}

MatX camera_and_tool_jacobian(const Vec6& qT, const SceneConfig& sc) {
  const Mat4 Tc = camera_from_flange(sc.L_CE) *
                  rigid_inverse(forward_kinematics(sc.qV_bar, sc.geo_camera).matrix());
  const Pose fl = forward_kinematics(qT, sc.geo);
  const Mat6 J = manipulator_jacobian(qT, sc.geo);
  MatX out(6, 6);
  for (int i = 0; i < 2; ++i) {
    Vec3 r = fl.R * sc.interest(i);
    Vec3 pv = tool_to_visual(fl.d + r, sc);
    Vec3 Pc = (Tc * pv.homogeneous()).head<3>();
    Eigen::Matrix<double, 3, 6> dP = Tc.topLeftCorner<3, 3>() * (J.topRows<3>() - skew(r) * J.bottomRows<3>());
    out.block(3 * i, 0, 3, 6) = projection_jacobian(Pc, sc.cam) * dP;
  }
  return out;
}

Vec3 tool_to_visual(const Vec3& p, const SceneConfig& sc) { return p + Vec3(sc.L_VT, 0, 0); }

MapResult camera_and_tool_map(const Vec6& qT, const SceneConfig& sc) {
  return camera_and_tool_map(qT, sc, sc.geo);
}

MapResult camera_and_tool_map(const Vec6& qT, const SceneConfig& sc, const RobotGeometry& g) {
  Mat4 Tc = camera_from_flange(sc.L_CE) *
            rigid_inverse(forward_kinematics(sc.qV_bar, sc.geo_camera).matrix());
  Mat4 Tt = forward_kinematics(qT, g).matrix();
  MapResult r;
  std::vector<StereoFeature> f;
  for (int i = 0; i < 2; ++i) {
    Vec3 pv = tool_to_visual((Tt * sc.interest(i).homogeneous()).head<3>(), sc);
    f.push_back(project_checked((Tc * pv.homogeneous()).head<3>(), sc.cam, r.in_fov));
  }
  r.y = stack_features(f);
  return r;
}

Pose recover_tool_flange(const VecX& y, const SceneConfig& sc, const std::optional<Pose>& prev) {
  if (y.size() != 6) throw Error(ErrorKind::DimensionMismatch, "tool features need 6 entries");
  if ((y.head<3>() - y.tail<3>()).norm() < 1e-12)
    throw Error(ErrorKind::DegenerateFeatures, "the two interest points coincide");
  Mat4 Tcam = forward_kinematics(sc.qV_bar, sc.geo_camera).matrix();
  auto f = unstack_features(y);
  Vec3 P[2];
  for (int i = 0; i < 2; ++i) {
    Vec3 pe = back_project_stereo(f[i], sc.cam) - Vec3(0, 0, sc.L_CE);
    P[i] = (Tcam * pe.homogeneous()).head<3>() - Vec3(sc.L_VT, 0, 0);
  }
  Vec3 ax = P[1] - P[0];
  if (ax.norm() < 1e-9) throw Error(ErrorKind::DegenerateFeatures, "the two interest points coincide");
  Pose p;
  Vec3 a = ax.normalized();
  Vec3 hint = prev ? prev->n() : Vec3::UnitX();
  if (std::abs(hint.dot(a)) > 0.999) hint = prev ? prev->s() : Vec3::UnitY();
  Vec3 n = (hint - hint.dot(a) * a).normalized();
  p.R.col(0) = n;
  p.R.col(1) = a.cross(n);
  p.R.col(2) = a;
  p.d = P[0];
  return p;
}

Vec6 inverse_camera_and_tool(const VecX& y, const SceneConfig& sc, const std::optional<Vec6>& prev) {
  std::optional<Pose> pp;
  if (prev) pp = forward_kinematics(*prev, sc.geo);
  return ik_estimate(recover_tool_flange(y, sc, pp), sc.geo, prev);
}

double siso_camera_on_robot(double phi, double q, const CameraParams& cam) {
  if (std::abs(phi + q) >= deg2rad(cam.alpha / 2))
    throw Error(ErrorKind::OutOfFieldOfView, "image angle outside half the view angle");
  return cam.F * std::tan(phi + q);
}

bool siso_tool_in_view(double q, const SisoOutputMap& m, double half_view) {
  return std::abs(m.sigma(q) + m.qV) <= half_view;
}

double siso_camera_and_tool(double q, const SisoOutputMap& m, double half_view) {
  if (!siso_tool_in_view(q, m, half_view))
    throw Error(ErrorKind::OutOfFieldOfView, "tool outside the view cone");
  return m.h(q);
}

SceneConfig visual_scene_default() {
  SceneConfig sc;
  sc.ref_points = {Vec3(3.5, 0.4, 1.5), Vec3(4.0, 0.4, 2.0), Vec3(6.0, -1.6, 1.5)};
  return sc;
}

SceneConfig tool_scene_default() {
  SceneConfig sc;
  const double pitch = deg2rad(-29.7);
  Vec3 dir(std::cos(pitch), 0, std::sin(pitch));
  Pose p = camera_pose_look(Vec3(1.5, 0.2, 1.5), dir, Vec3(0, 1, 0), sc.L_CE);
  sc.qV_bar = select_joint_solution(inverse_kinematics(p, sc.geo_camera), sc.geo_camera,
                                    std::nullopt, SelectMode::TargetGen);
  return sc;
}

}  // namespace vservo
