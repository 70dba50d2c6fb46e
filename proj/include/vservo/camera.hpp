#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vservo/common.hpp"

namespace vservo {

/// Zed-2 class stereo head. Lengths on the sensor in mm.
struct CameraParams {
  double F = 2.8;      // focal length, mm
  double b = 120.0;    // baseline, mm
  double f_u = 1028;   // pixels
  double f_v = 1028;
  double sensor_w = 5.23;
  double sensor_h = 2.94;
  double alpha = 86.09;  // horizontal angle of view, deg
  double beta = 55.35;   // vertical, deg
  double eps_disparity = 1e-12;
};

struct StereoFeature {
  double ul = 0, ur = 0, v = 0;  // mm
};

/// P in metres, camera frame.
StereoFeature project_stereo(const Vec3& P, const CameraParams& cam);
Vec3 back_project_stereo(const StereoFeature& f, const CameraParams& cam);
Eigen::Vector2d project_monocular(const Vec3& P, const CameraParams& cam);

bool on_sensor(const StereoFeature& f, const CameraParams& cam);
bool on_sensor(const Eigen::Vector2d& uv, const CameraParams& cam);

using Image = Eigen::MatrixXd;

Image average_images(const std::vector<Image>& stack);

struct NoiseEstimate {
  double sigma = 0;
  int patch = 7;
};

NoiseEstimate estimate_noise_level(const Image& img, int d = 7);

int pictures_required(double sigma_a, double sigma_target);

Image synth_noisy_image(const Image& base, double sigma, std::uint64_t seed);

/// Smooth sinusoid/gradient texture used for the estimator fixtures.
Image textured_base(int rows, int cols, double mean = 128.0, double amp = 40.0);

// 8-bit binary PGM
Image read_pgm(const std::string& path);
void write_pgm(const std::string& path, const Image& img);

}  // namespace vservo
