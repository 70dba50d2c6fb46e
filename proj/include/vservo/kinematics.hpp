#pragma once

#include <array>
#include <optional>
#include <utility>
#include <vector>

#include "vservo/common.hpp"

namespace vservo {

/// Elbow manipulator with spherical wrist (IRB-4600 class).
struct RobotGeometry {
  double a1 = 0.175;
  double L1 = 0.495;
  double L2 = 0.9;
  double L3 = 0.175;
  double L4 = 0.96;
  double Lt = 0.135;
  std::array<std::pair<double, double>, 6> limits = default_limits();

  static std::array<std::pair<double, double>, 6> default_limits();
  bool within_limits(const Vec6& q) const;
  // forearm length and its angle offset
  double D() const;
  double gamma() const;
};

struct Pose {
  Mat3 R = Mat3::Identity();  // columns n, s, a
  Vec3 d = Vec3::Zero();

  Vec3 n() const { return R.col(0); }
  Vec3 s() const { return R.col(1); }
  Vec3 a() const { return R.col(2); }
  Mat4 matrix() const { return make_transform(R, d); }
  static Pose from_matrix(const Mat4& T);
};

Mat4 dh_transform(double a, double alpha, double d, double theta);

/// T_0^i for i = 0..6 (index 0 is identity).
std::array<Mat4, 7> joint_frames(const Vec6& q, const RobotGeometry& geo);

Pose forward_kinematics(const Vec6& q, const RobotGeometry& geo);
Vec3 wrist_center(const Pose& pose, const RobotGeometry& geo);
Mat6 manipulator_jacobian(const Vec6& q, const RobotGeometry& geo);

enum class Arm { Right, Left };
enum class ElbowBranch { Above, Down };
enum class WristSet { Set1, Set2 };  // Set1: q5 > 0
enum class SingularityTag { None, Elbow, Wrist, Shoulder };

const char* to_string(Arm a);
const char* to_string(ElbowBranch e);
const char* to_string(WristSet w);
const char* to_string(SingularityTag t);

struct SingularityKind {
  SingularityTag tag = SingularityTag::None;
  double residual = 0.0;
};

struct SingularityTolerances {
  double wrist = 1e-6;     // |sin q5|
  double shoulder = 1e-6;  // sqrt(Px^2+Py^2), m
  double elbow = 1e-9;     // reach residual, m^2
};

struct IkCandidate {
  Vec6 q = Vec6::Zero();
  Arm arm = Arm::Right;
  ElbowBranch elbow = ElbowBranch::Above;
  WristSet wrist = WristSet::Set1;
};

/// Family descriptor at a wrist singularity: q4 + q6 (or q4 - q6 when q5 = pi)
/// is fixed, the split is free.
struct WristFamily {
  bool flipped = false;  // q5 == pi
  double delta = 0.0;
};

struct IkSolutionSet {
  std::vector<IkCandidate> candidates;
  bool wrist_singular = false;
  bool shoulder_singular = false;
  WristFamily wrist_family;
  Pose target;
};

struct IkOptions {
  double q1_hint = 0.0;  // used only when the wrist center is on the base axis
  double cos_clamp = 1e-9;
  SingularityTolerances tol;
};

IkSolutionSet inverse_kinematics(const Pose& pose, const RobotGeometry& geo,
                                 const IkOptions& opt = {});

SingularityKind classify_singularity(const Vec6& q, const RobotGeometry& geo,
                                     const SingularityTolerances& tol = {});

enum class SelectMode { TargetGen, Estimation };

/// Right-above, q5 > 0 branch with the singular-case rules.
Vec6 select_joint_solution(const IkSolutionSet& set, const RobotGeometry& geo,
                           const std::optional<Vec6>& prev, SelectMode mode,
                           const IkOptions& opt = {});

/// Drop candidates outside the joint limits.
std::vector<IkCandidate> physical_candidates(const IkSolutionSet& set,
                                             const RobotGeometry& geo);

}  // namespace vservo
