#pragma once

#include "vservo/dynamics.hpp"

namespace vservo {

/// Per-joint decoupled energy model: the inner loop closes on 1/s^2, the
/// torque is M v + H qdot, voltage and current follow the armature circuit.
struct EnergyModel {
  double tau_in = 0.01;
  // effective inertia / damping per joint. Defaults reproduce the reference
  // energy table; `physical` swaps in Jm/r and B/r from the actuator data.
  double M = 6.756e-6;
  double H = 2.5467e-4;
  bool physical = false;
  ActuatorParams act;
  double dt = 1e-5;
  double band = 0.03;  // settling band, fraction of the step

  double M_eff() const { return physical ? act.Jm() / act.r[0] : M; }
  double H_eff() const { return physical ? act.B() / act.r[0] : H; }
};

struct UnitEnergy {
  double e = 0;         // W s per rad^2 of joint travel
  double settling = 0;  // s
};

/// Energy of a unit joint step with delayed reference (1 - exp(-t/tau_delay)).
/// Results are cached per tau_delay.
UnitEnergy unit_energy(double tau_delay, const EnergyModel& m = {});

struct EnergyResult {
  double E = 0;
  double settling = 0;
};

EnergyResult energy_cost(const Vec6& q_from, const Vec6& q_to, double tau_delay,
                         const EnergyModel& m = {});

/// Joint targets of the reference energy experiment (camera down, right-above).
Vec6 energy_reference_pose(const Vec3& p, const RobotGeometry& geo = {});

}  // namespace vservo
