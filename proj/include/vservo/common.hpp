#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace vservo {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

constexpr double kPi = std::numbers::pi;

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

// wrap to (-pi, pi]
double wrap_angle(double a);
Vec6 wrap_angles(const Vec6& q);
// smallest signed difference a-b on the circle
double angle_diff(double a, double b);

enum class ErrorKind {
  Unreachable,
  NearSingularAmbiguous,
  MissingPrev,
  NonPositiveDepth,
  ZeroDisparity,
  DimensionMismatch,
  TooSmallImage,
  NonPositiveSigma,
  ZeroLinearizationGain,
  OutOfImage,
  PointBehindCamera,
  PhiOutOfLemmaRange,
  InfeasibleGeometry,
  DegenerateGrid,
  EmptyExploredSet,
  DegenerateDelay,
  CollinearPoints,
  DegenerateFeatures,
  OutOfFieldOfView,
  StateOutOfDomain,
  Diverged,
  Parse,
};

const char* to_string(ErrorKind k);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind k, const std::string& what)
      : std::runtime_error(std::string(to_string(k)) + ": " + what), kind_(k) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

/// Seedable generator. mt19937_64 for the bits, our own Box-Muller so the
/// normal draws do not depend on the standard library's distribution code.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  // uniform in (0,1), 53 bits
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  double normal(double mu, double sigma) { return mu + sigma * normal(); }
  std::uint64_t bits() { return eng_(); }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

Mat4 make_transform(const Mat3& R, const Vec3& p);
Mat4 rigid_inverse(const Mat4& T);
Mat3 rot_x(double a);
Mat3 rot_y(double a);
Mat3 rot_z(double a);
// nearest rotation (polar factor), det +1
Mat3 nearest_rotation(const Mat3& M);
// angle of R_a^T R_b
double rotation_distance(const Mat3& Ra, const Mat3& Rb);

}  // namespace vservo
