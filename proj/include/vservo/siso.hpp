#pragma once

#include <vector>

#include "vservo/sim.hpp"

namespace vservo {

SisoOutputMap siso_map(const ScenarioConfig& cfg);

/// One DoF closed loop with inner joint loop, selected outer loop and the
/// out-of-view estimate for the tool case.
ScenarioResult integrate_siso(const ScenarioConfig& cfg);

/// Closed loop of the model-linearised camera-on-robot system with an ideal
/// inner loop: x'' + 2 zeta wn x' = -cos^2(phi) wn^2 tan x, x(0) = phi.
struct ReducedRun {
  std::vector<double> t, x1, x2;
};
ReducedRun simulate_reduced_visual(double phi, double omega_n, double zeta, double duration,
                                   double dt = 1e-4);

struct ZetaScan {
  std::vector<double> zeta, settling, overshoot;
  double best = 0;
};
/// fastest 2% settling among runs whose overshoot stays below `max_overshoot` percent
ZetaScan brute_force_zeta(double phi, double omega_n, double lo = 0.1, double hi = 1.0,
                          double step = 0.01, double max_overshoot = 1e-3,
                          double duration = 5.0, double dt = 1e-3);

}  // namespace vservo
