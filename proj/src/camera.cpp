#include "vservo/camera.hpp"

#include <algorithm>
#include <cmath>

namespace vservo {

StereoFeature project_stereo(const Vec3& P, const CameraParams& cam) {
  if (!(P.z() > 0)) throw Error(ErrorKind::NonPositiveDepth, "Z <= 0");
  // metres -> mm so the baseline and focal length share units
  const double X = P.x() * 1000.0, Y = P.y() * 1000.0, Z = P.z() * 1000.0;
  StereoFeature f;
  f.ul = (2.0 * X - cam.b) * cam.F / (2.0 * Z);
  f.ur = (2.0 * X + cam.b) * cam.F / (2.0 * Z);
  f.v = Y * cam.F / Z;
  return f;
}

Vec3 back_project_stereo(const StereoFeature& f, const CameraParams& cam) {
  const double disp = f.ur - f.ul;
  if (!(disp > cam.eps_disparity)) throw Error(ErrorKind::ZeroDisparity, "parallel rays");
  Vec3 P((f.ul + f.ur) * cam.b / (2.0 * disp), f.v * cam.b / disp, cam.b * cam.F / disp);
  return P / 1000.0;
}

Eigen::Vector2d project_monocular(const Vec3& P, const CameraParams& cam) {
  if (!(P.z() > 0)) throw Error(ErrorKind::NonPositiveDepth, "Z <= 0");
  return {cam.F * P.x() / P.z(), cam.F * P.y() / P.z()};
}

bool on_sensor(const StereoFeature& f, const CameraParams& cam) {
  const double hw = 0.5 * cam.sensor_w + 1e-12, hh = 0.5 * cam.sensor_h + 1e-12;
  return std::abs(f.ul) <= hw && std::abs(f.ur) <= hw && std::abs(f.v) <= hh;
}

bool on_sensor(const Eigen::Vector2d& uv, const CameraParams& cam) {
  return std::abs(uv.x()) <= 0.5 * cam.sensor_w + 1e-12 &&
         std::abs(uv.y()) <= 0.5 * cam.sensor_h + 1e-12;
}

Image average_images(const std::vector<Image>& stack) {
  if (stack.empty()) throw Error(ErrorKind::DimensionMismatch, "empty stack");
  Image acc = Image::Zero(stack[0].rows(), stack[0].cols());
  for (const auto& im : stack) {
    if (im.rows() != acc.rows() || im.cols() != acc.cols())
      throw Error(ErrorKind::DimensionMismatch, "frame sizes differ");
    acc += im;
  }
  return acc / static_cast<double>(stack.size());
}

NoiseEstimate estimate_noise_level(const Image& img, int d) {
  if (d < 2) throw Error(ErrorKind::TooSmallImage, "patch size must be >= 2");
  const int M = static_cast<int>(img.rows()), N = static_cast<int>(img.cols());
  if (M < d || N < d) throw Error(ErrorKind::TooSmallImage, "image smaller than patch");

  const int r = d * d;
  const long s = static_cast<long>(M - d + 1) * (N - d + 1);
  MatX C = MatX::Zero(r, r);
  VecX mean = VecX::Zero(r);

  // accumulate in blocks of patches; column j of X is one vectorised patch
  const int block = 4096;
  MatX X(r, block);
  int filled = 0;
  auto flush = [&]() {
    if (filled == 0) return;
    auto Xb = X.leftCols(filled);
    mean += Xb.rowwise().sum();
    C.selfadjointView<Eigen::Lower>().rankUpdate(Xb);
    filled = 0;
  };
  for (int j = 0; j + d <= N; ++j) {
    for (int i = 0; i + d <= M; ++i) {
      for (int c = 0; c < d; ++c)
        X.col(filled).segment(c * d, d) = img.block(i, j + c, d, 1);
      if (++filled == block) flush();
    }
  }
  flush();
  mean /= static_cast<double>(s);
  MatX cov = C.selfadjointView<Eigen::Lower>();
  cov = cov / static_cast<double>(s) - mean * mean.transpose();

  Eigen::SelfAdjointEigenSolver<MatX> es(cov, Eigen::EigenvaluesOnly);
  std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + r);
  for (auto& e : ev) e = std::max(e, 0.0);
  std::sort(ev.begin(), ev.end());  // ascending

  NoiseEstimate out;
  out.patch = d;
  const double scale = ev.back();
  if (scale <= 1e-20) return out;

  // Drop the largest eigenvalue until the tail mean splits the tail evenly,
  // i.e. the mean is a median of what is left.
  double tau = 0;
  for (int cc = r; cc >= 1; --cc) {
    double sum = 0;
    for (int k = 0; k < cc; ++k) sum += ev[k];
    tau = sum / cc;
    int above = 0, below = 0;
    for (int k = 0; k < cc; ++k) {
      if (ev[k] > tau) ++above;
      else if (ev[k] < tau) ++below;
    }
    if (above == below) break;
  }
  out.sigma = std::sqrt(tau);
  return out;
}

int pictures_required(double sigma_a, double sigma_target) {
  if (!(sigma_a > 0) || !(sigma_target > 0))
    throw Error(ErrorKind::NonPositiveSigma, "sigmas must be positive");
  double ratio = sigma_a / sigma_target;
  // guard the ceil against 4.0000000001 style noise
  double n = std::ceil(ratio * ratio - 1e-9);
  return std::max(1, static_cast<int>(n));
}

Image synth_noisy_image(const Image& base, double sigma, std::uint64_t seed) {
  Image out = base;
  if (sigma <= 0) return out;
  Rng rng(seed);
  for (Eigen::Index j = 0; j < out.cols(); ++j)
    for (Eigen::Index i = 0; i < out.rows(); ++i) out(i, j) += sigma * rng.normal();
  return out;
}

Image textured_base(int rows, int cols, double mean, double amp) {
  Image img(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) {
      double x = static_cast<double>(j) / cols, y = static_cast<double>(i) / rows;
      img(i, j) = mean + 0.5 * amp * (x - 0.5) +
                  0.5 * amp * std::sin(2 * kPi * 3 * x) * std::cos(2 * kPi * 2 * y);
    }
  return img;
}

}  // namespace vservo
