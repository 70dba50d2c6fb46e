#include "vservo/common.hpp"

#include <cmath>

namespace vservo {

double wrap_angle(double a) {
  double r = std::remainder(a, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

Vec6 wrap_angles(const Vec6& q) {
  Vec6 out;
  for (int i = 0; i < 6; ++i) out[i] = wrap_angle(q[i]);
  return out;
}

double angle_diff(double a, double b) { return wrap_angle(a - b); }

const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::Unreachable: return "Unreachable";
    case ErrorKind::NearSingularAmbiguous: return "NearSingularAmbiguous";
    case ErrorKind::MissingPrev: return "MissingPrev";
    case ErrorKind::NonPositiveDepth: return "NonPositiveDepth";
    case ErrorKind::ZeroDisparity: return "ZeroDisparity";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::TooSmallImage: return "TooSmallImage";
    case ErrorKind::NonPositiveSigma: return "NonPositiveSigma";
    case ErrorKind::ZeroLinearizationGain: return "ZeroLinearizationGain";
    case ErrorKind::OutOfImage: return "OutOfImage";
    case ErrorKind::PointBehindCamera: return "PointBehindCamera";
    case ErrorKind::PhiOutOfLemmaRange: return "PhiOutOfLemmaRange";
    case ErrorKind::InfeasibleGeometry: return "InfeasibleGeometry";
    case ErrorKind::DegenerateGrid: return "DegenerateGrid";
    case ErrorKind::EmptyExploredSet: return "EmptyExploredSet";
    case ErrorKind::DegenerateDelay: return "DegenerateDelay";
    case ErrorKind::CollinearPoints: return "CollinearPoints";
    case ErrorKind::DegenerateFeatures: return "DegenerateFeatures";
    case ErrorKind::OutOfFieldOfView: return "OutOfFieldOfView";
    case ErrorKind::StateOutOfDomain: return "StateOutOfDomain";
    case ErrorKind::Diverged: return "Diverged";
    case ErrorKind::Parse: return "Parse";
  }
  return "Unknown";
}

double Rng::uniform() {
  // 53 random bits, shifted off zero
  return (static_cast<double>(eng_() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
}

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double th = 2.0 * kPi * u2;
  spare_ = r * std::sin(th);
  have_spare_ = true;
  return r * std::cos(th);
}

Mat4 make_transform(const Mat3& R, const Vec3& p) {
  Mat4 T = Mat4::Identity();
  T.topLeftCorner<3, 3>() = R;
  T.topRightCorner<3, 1>() = p;
  return T;
}

Mat4 rigid_inverse(const Mat4& T) {
  Mat3 Rt = T.topLeftCorner<3, 3>().transpose();
  return make_transform(Rt, -Rt * T.topRightCorner<3, 1>());
}

Mat3 rot_x(double a) {
  double c = std::cos(a), s = std::sin(a);
  Mat3 R;
  R << 1, 0, 0, 0, c, -s, 0, s, c;
  return R;
}

Mat3 rot_y(double a) {
  double c = std::cos(a), s = std::sin(a);
  Mat3 R;
  R << c, 0, s, 0, 1, 0, -s, 0, c;
  return R;
}

Mat3 rot_z(double a) {
  double c = std::cos(a), s = std::sin(a);
  Mat3 R;
  R << c, -s, 0, s, c, 0, 0, 0, 1;
  return R;
}

Mat3 nearest_rotation(const Mat3& M) {
  Eigen::JacobiSVD<Mat3> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 U = svd.matrixU(), V = svd.matrixV();
  Mat3 D = Mat3::Identity();
  if ((U * V.transpose()).determinant() < 0) D(2, 2) = -1.0;
  return U * D * V.transpose();
}

double rotation_distance(const Mat3& Ra, const Mat3& Rb) {
  Mat3 Rd = Ra.transpose() * Rb;
  // atan2 form keeps precision near zero
  Vec3 w(Rd(2, 1) - Rd(1, 2), Rd(0, 2) - Rd(2, 0), Rd(1, 0) - Rd(0, 1));
  return std::atan2(0.5 * w.norm(), 0.5 * (Rd.trace() - 1.0));
}

}  // namespace vservo
