#include "vservo/kinematics.hpp"

#include <cmath>
#include <limits>

namespace vservo {

std::array<std::pair<double, double>, 6> RobotGeometry::default_limits() {
  return {{{deg2rad(-180), deg2rad(180)},
           {deg2rad(-90), deg2rad(150)},
           {deg2rad(-180), deg2rad(75)},
           {deg2rad(-400), deg2rad(400)},
           {deg2rad(-125), deg2rad(120)},
           {deg2rad(-400), deg2rad(400)}}};
}

bool RobotGeometry::within_limits(const Vec6& q) const {
  for (int i = 0; i < 6; ++i)
    if (q[i] < limits[i].first - 1e-12 || q[i] > limits[i].second + 1e-12) return false;
  return true;
}

double RobotGeometry::D() const { return std::hypot(L3, L4); }
double RobotGeometry::gamma() const { return std::atan2(L4, L3); }

Pose Pose::from_matrix(const Mat4& T) {
  Pose p;
  p.R = T.topLeftCorner<3, 3>();
  p.d = T.topRightCorner<3, 1>();
  return p;
}

const char* to_string(Arm a) { return a == Arm::Right ? "right" : "left"; }
const char* to_string(ElbowBranch e) { return e == ElbowBranch::Above ? "above" : "down"; }
const char* to_string(WristSet w) { return w == WristSet::Set1 ? "set1" : "set2"; }
const char* to_string(SingularityTag t) {
  switch (t) {
    case SingularityTag::None: return "none";
    case SingularityTag::Elbow: return "elbow";
    case SingularityTag::Wrist: return "wrist";
    case SingularityTag::Shoulder: return "shoulder";
  }
  return "none";
}

// A = Rz(theta) Tz(d) Tx(a) Rx(alpha)
Mat4 dh_transform(double a, double alpha, double d, double theta) {
  double ct = std::cos(theta), st = std::sin(theta);
  double ca = std::cos(alpha), sa = std::sin(alpha);
  Mat4 A;
  A << ct, -st * ca, st * sa, a * ct,
       st, ct * ca, -ct * sa, a * st,
       0, sa, ca, d,
       0, 0, 0, 1;
  return A;
}

namespace {

// rows (a, alpha, d, theta offset)
struct DhRow {
  double a, alpha, d, offset;
};

std::array<DhRow, 6> dh_table(const RobotGeometry& g) {
  return {{{g.a1, -kPi / 2, g.L1, 0.0},
           {g.L2, 0.0, 0.0, -kPi / 2},
           {g.L3, -kPi / 2, 0.0, 0.0},
           {0.0, kPi / 2, g.L4, 0.0},
           {0.0, -kPi / 2, 0.0, 0.0},
           {0.0, 0.0, g.Lt, kPi}}};
}

Mat3 r03(double q1, double q2, double q3, const RobotGeometry& g) {
  auto t = dh_table(g);
  Mat4 T = dh_transform(t[0].a, t[0].alpha, t[0].d, q1 + t[0].offset) *
           dh_transform(t[1].a, t[1].alpha, t[1].d, q2 + t[1].offset) *
           dh_transform(t[2].a, t[2].alpha, t[2].d, q3 + t[2].offset);
  return T.topLeftCorner<3, 3>();
}

// pick the 2*pi shift of a that lands closest to ref
double unwrap_near(double a, double ref) { return ref + angle_diff(a, ref); }

}  // namespace

std::array<Mat4, 7> joint_frames(const Vec6& q, const RobotGeometry& geo) {
  auto t = dh_table(geo);
  std::array<Mat4, 7> T;
  T[0] = Mat4::Identity();
  for (int i = 0; i < 6; ++i)
    T[i + 1] = T[i] * dh_transform(t[i].a, t[i].alpha, t[i].d, q[i] + t[i].offset);
  return T;
}

Pose forward_kinematics(const Vec6& q, const RobotGeometry& geo) {
  return Pose::from_matrix(joint_frames(q, geo)[6]);
}

Vec3 wrist_center(const Pose& pose, const RobotGeometry& geo) {
  return pose.d - geo.Lt * pose.a();
}

Mat6 manipulator_jacobian(const Vec6& q, const RobotGeometry& geo) {
  auto T = joint_frames(q, geo);
  Vec3 pe = T[6].topRightCorner<3, 1>();
  Mat6 J;
  for (int i = 0; i < 6; ++i) {
    Vec3 z = T[i].block<3, 1>(0, 2);
    Vec3 o = T[i].topRightCorner<3, 1>();
    J.block<3, 1>(0, i) = z.cross(pe - o);
    J.block<3, 1>(3, i) = z;
  }
  return J;
}

IkSolutionSet inverse_kinematics(const Pose& pose, const RobotGeometry& geo,
                                 const IkOptions& opt) {
  IkSolutionSet out;
  out.target = pose;
  const Vec3 P = wrist_center(pose, geo);
  const double rho = std::hypot(P.x(), P.y());
  const double Dl = geo.D();
  const double gam = geo.gamma();
  out.shoulder_singular = rho < opt.tol.shoulder;

  double q1_right = out.shoulder_singular ? opt.q1_hint : std::atan2(P.y(), P.x());
  bool any_reach = false;

  for (Arm arm : {Arm::Right, Arm::Left}) {
    double q1 = arm == Arm::Right ? q1_right : wrap_angle(q1_right - kPi);
    double r = std::cos(q1) * P.x() + std::sin(q1) * P.y() - geo.a1;
    double Z = P.z() - geo.L1;
    double c3 = (r * r + Z * Z - geo.L2 * geo.L2 - Dl * Dl) / (2.0 * geo.L2 * Dl);
    if (std::abs(c3) > 1.0 + opt.cos_clamp) continue;
    c3 = std::clamp(c3, -1.0, 1.0);
    any_reach = true;
    for (ElbowBranch eb : {ElbowBranch::Above, ElbowBranch::Down}) {
      double t = (eb == ElbowBranch::Above ? 1.0 : -1.0) * std::acos(c3);
      double q3 = wrap_angle(t - gam);
      double q2 = wrap_angle(std::atan2(r, Z) -
                             std::atan2(Dl * std::sin(t), geo.L2 + Dl * std::cos(t)));
      Mat3 R36 = r03(q1, q2, q3, geo).transpose() * pose.R;
      double c5 = std::clamp(R36(2, 2), -1.0, 1.0);
      double s5abs = std::sqrt(std::max(0.0, 1.0 - c5 * c5));
      if (s5abs < opt.tol.wrist) {
        out.wrist_singular = true;
        IkCandidate c;
        c.arm = arm;
        c.elbow = eb;
        c.wrist = WristSet::Set1;
        if (c5 > 0) {
          // R36 = Rz(q4 + q6 + pi)
          double delta = wrap_angle(std::atan2(R36(1, 0), R36(0, 0)) - kPi);
          out.wrist_family = {false, delta};
          c.q << q1, q2, q3, 0.0, 0.0, delta;
        } else {
          // R36 * Ry(pi) = Rz(q4 - q6 - pi)
          Mat3 M = R36 * rot_y(kPi);
          double psi = std::atan2(M(1, 0), M(0, 0));
          out.wrist_family = {true, wrap_angle(psi + kPi)};  // q4 - q6
          c.q << q1, q2, q3, 0.0, kPi, wrap_angle(-psi - kPi);
        }
        out.candidates.push_back(c);
        continue;
      }
      for (WristSet ws : {WristSet::Set1, WristSet::Set2}) {
        double q5 = (ws == WristSet::Set1 ? 1.0 : -1.0) * std::acos(c5);
        double sg = q5 > 0 ? 1.0 : -1.0;
        double q4 = std::atan2(-R36(1, 2) * sg, -R36(0, 2) * sg);
        double q6 = std::atan2(R36(2, 1) * sg, -R36(2, 0) * sg);
        IkCandidate c;
        c.arm = arm;
        c.elbow = eb;
        c.wrist = ws;
        c.q << q1, q2, q3, q4, q5, q6;
        out.candidates.push_back(c);
      }
    }
  }
  if (!any_reach) throw Error(ErrorKind::Unreachable, "wrist center outside the reachable shell");
  return out;
}

SingularityKind classify_singularity(const Vec6& q, const RobotGeometry& geo,
                                     const SingularityTolerances& tol) {
  // fully extended: |wc - shoulder|^2 = (L2 + D)^2
  double Dl = geo.D();
  double elbow_res = 2.0 * geo.L2 * Dl * (1.0 - std::cos(q[2] + geo.gamma()));
  if (elbow_res < tol.elbow) return {SingularityTag::Elbow, elbow_res};
  double wrist_res = std::abs(std::sin(q[4]));
  if (wrist_res < tol.wrist) return {SingularityTag::Wrist, wrist_res};
  Vec3 P = wrist_center(forward_kinematics(q, geo), geo);
  double sh = std::hypot(P.x(), P.y());
  if (sh < tol.shoulder) return {SingularityTag::Shoulder, sh};
  return {SingularityTag::None, std::min({elbow_res, wrist_res, sh})};
}

Vec6 select_joint_solution(const IkSolutionSet& set, const RobotGeometry& geo,
                           const std::optional<Vec6>& prev, SelectMode mode,
                           const IkOptions& opt) {
  const bool singular = set.wrist_singular || set.shoulder_singular;
  if (mode == SelectMode::Estimation && singular && !prev)
    throw Error(ErrorKind::MissingPrev, "estimation at a singular pose needs the previous joints");

  // shoulder: re-solve with q1 pinned
  if (set.shoulder_singular) {
    IkOptions o = opt;
    o.q1_hint = (mode == SelectMode::Estimation) ? (*prev)[0] : 0.0;
    IkSolutionSet again = inverse_kinematics(set.target, geo, o);
    again.shoulder_singular = false;
    return select_joint_solution(again, geo, prev, mode, o);
  }

  if (set.candidates.empty()) throw Error(ErrorKind::Unreachable, "no candidates");

  if (mode == SelectMode::Estimation && prev && !set.wrist_singular) {
    // continuity: nearest candidate, angles unwrapped onto prev
    const IkCandidate* best = nullptr;
    double bestd = std::numeric_limits<double>::infinity();
    for (const auto& c : set.candidates) {
      double d = 0;
      for (int i = 0; i < 6; ++i) d += std::pow(angle_diff(c.q[i], (*prev)[i]), 2);
      if (d < bestd) {
        bestd = d;
        best = &c;
      }
    }
    Vec6 q;
    for (int i = 0; i < 6; ++i) q[i] = unwrap_near(best->q[i], (*prev)[i]);
    return q;
  }

  const IkCandidate* pick = nullptr;
  for (const auto& c : set.candidates)
    if (c.arm == Arm::Right && c.elbow == ElbowBranch::Above && c.wrist == WristSet::Set1) {
      pick = &c;
      break;
    }
  if (!pick) {
    for (const auto& c : set.candidates)
      if (c.arm == Arm::Right && c.wrist == WristSet::Set1) {
        pick = &c;
        break;
      }
  }
  if (!pick) pick = &set.candidates.front();
  Vec6 q = pick->q;

  if (set.wrist_singular) {
    const WristFamily& f = set.wrist_family;
    if (mode == SelectMode::TargetGen) {
      q[3] = 0.0;
      q[5] = f.flipped ? -f.delta : f.delta;
    } else {
      // keep q4, put the rest of the family angle on q6
      q[3] = (*prev)[3];
      q[5] = f.flipped ? q[3] - f.delta : f.delta - q[3];
      q[5] = unwrap_near(q[5], (*prev)[5]);
      for (int i : {0, 1, 2, 4}) q[i] = unwrap_near(q[i], (*prev)[i]);
    }
  }
  return q;
}

std::vector<IkCandidate> physical_candidates(const IkSolutionSet& set,
                                             const RobotGeometry& geo) {
  std::vector<IkCandidate> out;
  for (const auto& c : set.candidates)
    if (geo.within_limits(c.q)) out.push_back(c);
  return out;
}

}  // namespace vservo
