#pragma once

#include <functional>
#include <map>
#include <vector>

#include "vservo/camera.hpp"
#include "vservo/energy.hpp"
#include "vservo/kinematics.hpp"

namespace vservo {

struct WorkspaceParams {
  double r_V = 1.716, r_T = 1.606;    // dexterous radii
  double r_Vr = 2.044, r_Tr = 2.138;  // reachable radii
  double L_VT = 4.2;
  double L_M = 2.83;                  // marker distance
  double d = 0.064;                   // cone vertex offset behind the lens
  double Z_max = 2.47;
  double resolution = 0.02;
  double alpha = 86.09, beta = 55.35;  // view angles, deg
  double L_CE = 0.05;                  // lens centre above the flange when looking down

  double theta1(const RobotGeometry& g) const;  // rad
  double theta2(const RobotGeometry& g) const;
  // admissible marker range [lo, hi)
  std::pair<double, double> marker_range(const RobotGeometry& g) const;
  void validate(const RobotGeometry& g) const;
};

/// Roots of the sphere / cone-edge intersection in Z.
std::pair<double, double> z_bounds(const WorkspaceParams& w, const RobotGeometry& g);

bool in_sphere(const Vec3& p, const WorkspaceParams& w, const RobotGeometry& g, double tol = 1e-12);
bool in_cone(const Vec3& p, const WorkspaceParams& w, double tol = 1e-12);

/// Camera looking straight down.
Pose camera_down_flange_pose(const Vec3& camera_centre, const WorkspaceParams& w);

struct NodeGrid {
  std::vector<Vec3> pos;
  std::vector<Vec6> q;                    // joint solution used for costing
  std::vector<std::array<int, 3>> cell;   // integer lattice coordinates
  std::size_t ideal_count = 0;            // before joint-limit pruning
  double resolution = 0.02;

  std::size_t size() const { return pos.size(); }
  bool is_boundary(int i) const;
  int find(const std::array<int, 3>& c) const;  // -1 if absent

  std::map<std::array<int, 3>, int> index;
};

NodeGrid build_operational_space(const WorkspaceParams& w, const RobotGeometry& geo = {});

/// Box lattice without IK pruning, handy for tests.
NodeGrid box_grid(int nx, int ny, int nz, double res, const Vec3& origin = Vec3::Zero());

std::array<int, 4> select_initial_nodes(const NodeGrid& grid, double perp_tol = 0.05);

using ExploredMap = std::map<int, double>;  // node -> pictures

double estimate_pictures(int target, const NodeGrid& grid, const ExploredMap& explored,
                         double K_est);

/// E[min(Z, c)] with Z ~ N(mu, sd^2).
double censored_normal_mean(double mu, double sd, double c);

double stochastic_modified_estimate(double mu, double ed_min, double n_exp_min, double K_sd);

double min_distance_to_explored(int node, const NodeGrid& grid, const ExploredMap& explored);

using CostFn = std::function<double(int, int)>;

CostFn grid_energy_cost(const NodeGrid& grid, double tau_delay = 0.0, const EnergyModel& m = {});

struct ExplorationState {
  ExploredMap explored;
  int current = -1;
  double E_bound = 20.0;
  double E_T = 2.0;
  double K_est = 5.0;
  double K_sd = 50.0;
};

/// Best explored node among those reachable from the current node.
/// Falls back to the global explored minimum if none is affordable.
int exp_min_node(const ExplorationState& s, const CostFn& cost);

std::vector<int> explorable_set(const ExplorationState& s, const NodeGrid& grid,
                                const CostFn& cost);

/// Returns the current node when it wins (termination) and exp_min when the
/// explorable set is empty.
int next_target(const ExplorationState& s, const NodeGrid& grid, const CostFn& cost);

/// Synthetic environment: constant level with Gaussian wells.
struct NoiseWell {
  Vec3 centre = Vec3::Zero();
  double depth = 0;  // gray levels
  double width = 0.1;
};

struct NoiseField {
  double base = 12.0;
  double floor = 0.5;
  std::vector<NoiseWell> wells;
  double sigma(const Vec3& p) const;
};

/// Two wells: a broad shallow one and a narrow deeper one.
NoiseField two_minima_field();

struct SearchParams {
  double E_bound = 20.0;
  double E_T = 2.0;
  double K_est = 5.0;
  double K_sd = 50.0;
  double tau_delay = 0.0;
  double sigma_target = 1.0;
  bool perfect_sensing = false;
  int image_size = 128;
  std::uint64_t seed = 1;
  int max_iterations = 5000;
  EnergyModel energy;
};

struct SearchStep {
  int iteration = 0;
  int node = -1;
  Vec3 pos = Vec3::Zero();
  double N = 0;
  double E_remaining = 0;
  bool new_node = false;
  bool conservative = false;  // E_bound <= E_T at selection time
  bool safe = true;           // return to exp_min still affordable
};

struct SearchResult {
  std::vector<SearchStep> trajectory;
  std::array<int, 4> initial{};
  int final_node = -1;
  int exp_min = -1;
  double final_N = 0;
  double best_possible_N = 0;  // true minimum over the grid
  bool reached_global = false;
  double avg_dis_new = 0;
  int iterations = 0;
  int safety_violations = 0;     // in conservative mode
  bool forced_retreat = false;
};

/// Pictures a node needs under the field, either exact or through the estimator.
double sense_pictures(int node, const NodeGrid& grid, const NoiseField& field,
                      const SearchParams& p);

SearchResult run_search(const NodeGrid& grid, const NoiseField& field, const SearchParams& p,
                        const CostFn& cost);
SearchResult run_search(const NodeGrid& grid, const NoiseField& field, const SearchParams& p);

}  // namespace vservo
