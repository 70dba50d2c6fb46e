#include "vservo/placement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace vservo {

double WorkspaceParams::theta1(const RobotGeometry& g) const { return std::asin(g.L1 / r_V); }
double WorkspaceParams::theta2(const RobotGeometry& g) const { return std::asin(g.L1 / r_T); }

std::pair<double, double> WorkspaceParams::marker_range(const RobotGeometry& g) const {
  const double ha = deg2rad(alpha / 2);
  // the lower bound uses the smallest admissible robot spacing
  double lo = g.a1 + (r_Vr + r_Tr) - r_T * std::cos(theta2(g));
  double hi = r_V / std::cos(ha) + (g.L1 - d) * std::tan(ha) + g.a1;
  return {lo, hi};
}

void WorkspaceParams::validate(const RobotGeometry& g) const {
  if (L_VT < r_Vr + r_Tr - 1e-9)
    throw Error(ErrorKind::InfeasibleGeometry, "robots too close, reachable spheres overlap");
  auto [lo, hi] = marker_range(g);
  if (L_M < lo - 5e-4 || L_M >= hi)
    throw Error(ErrorKind::InfeasibleGeometry, "marker distance outside admissible range");
  if (!(resolution > 0)) throw Error(ErrorKind::InfeasibleGeometry, "resolution must be positive");
}

std::pair<double, double> z_bounds(const WorkspaceParams& w, const RobotGeometry& g) {
  const double t = std::tan(deg2rad(w.alpha / 2));
  const double m = w.L_M - g.a1;
  const double A = 1 + t * t;
  const double B = -2 * (t * t * w.d + t * m + g.L1);
  const double C = g.L1 * g.L1 + t * t * w.d * w.d + 2 * t * w.d * m + m * m - w.r_V * w.r_V;
  const double disc = B * B - 4 * A * C;
  if (disc < 0) throw Error(ErrorKind::InfeasibleGeometry, "sphere and view cone do not meet");
  const double s = std::sqrt(disc);
  return {(-B - s) / (2 * A), (-B + s) / (2 * A)};
}

bool in_sphere(const Vec3& p, const WorkspaceParams& w, const RobotGeometry& g, double tol) {
  double lhs = std::pow(p.x() - g.a1, 2) + p.y() * p.y();
  return lhs <= w.r_V * w.r_V - std::pow(p.z() - g.L1, 2) + tol;
}

bool in_cone(const Vec3& p, const WorkspaceParams& w, double tol) {
  const double ta = std::tan(deg2rad(w.alpha / 2)), tb = std::tan(deg2rad(w.beta / 2));
  double lhs = std::pow(p.x() - w.L_M, 2) / (ta * ta) + p.y() * p.y() / (tb * tb);
  return lhs <= std::pow(p.z() - w.d, 2) + tol;
}

Pose camera_down_flange_pose(const Vec3& c, const WorkspaceParams& w) {
  Pose p;
  p.R << 1, 0, 0, 0, -1, 0, 0, 0, -1;
  // lens sits L_CE behind the flange along the approach axis
  p.d = c + w.L_CE * p.a();
  return p;
}

bool NodeGrid::is_boundary(int i) const {
  static const int nb[6][3] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  for (const auto& o : nb) {
    std::array<int, 3> c{cell[i][0] + o[0], cell[i][1] + o[1], cell[i][2] + o[2]};
    if (find(c) < 0) return true;
  }
  return false;
}

int NodeGrid::find(const std::array<int, 3>& c) const {
  auto it = index.find(c);
  return it == index.end() ? -1 : it->second;
}

namespace {

void add_node(NodeGrid& g, const std::array<int, 3>& c, const Vec3& p, const Vec6& q) {
  g.index[c] = static_cast<int>(g.pos.size());
  g.pos.push_back(p);
  g.q.push_back(q);
  g.cell.push_back(c);
}

}  // namespace

NodeGrid build_operational_space(const WorkspaceParams& w, const RobotGeometry& geo) {
  w.validate(geo);
  auto [zlo, zhi] = z_bounds(w, geo);
  zhi = std::min(zhi, w.Z_max);
  const double res = w.resolution;
  NodeGrid g;
  g.resolution = res;
  const int k0 = static_cast<int>(std::ceil(zlo / res - 1e-9));
  const int k1 = static_cast<int>(std::floor(zhi / res + 1e-9));
  const int i0 = static_cast<int>(std::floor((geo.a1 - w.r_V) / res));
  const int i1 = static_cast<int>(std::ceil((geo.a1 + w.r_V) / res));
  const int j1 = static_cast<int>(std::ceil(w.r_V / res));
  for (int k = k0; k <= k1; ++k)
    for (int j = -j1; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) {
        Vec3 p(i * res, j * res, k * res);
        if (!in_sphere(p, w, geo) || !in_cone(p, w)) continue;
        ++g.ideal_count;
        try {
          auto set = inverse_kinematics(camera_down_flange_pose(p, w), geo);
          Vec6 q = select_joint_solution(set, geo, std::nullopt, SelectMode::TargetGen);
          // keep the unbounded wrist joints on one sheet so costs see real travel
          q[3] = angle_diff(q[3], 0.0);
          q[5] = kPi + angle_diff(q[5], kPi);
          if (!geo.within_limits(q)) continue;
          add_node(g, {i, j, k}, p, q);
        } catch (const Error&) {
          // unreachable in the camera-down orientation
        }
      }
  return g;
}

NodeGrid box_grid(int nx, int ny, int nz, double res, const Vec3& origin) {
  NodeGrid g;
  g.resolution = res;
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) add_node(g, {i, j, k}, origin + res * Vec3(i, j, k), Vec6::Zero());
  g.ideal_count = g.size();
  return g;
}

std::array<int, 4> select_initial_nodes(const NodeGrid& grid, double perp_tol) {
  if (grid.size() < 4) throw Error(ErrorKind::DegenerateGrid, "fewer than four nodes");
  std::vector<int> bnd;
  for (int i = 0; i < static_cast<int>(grid.size()); ++i)
    if (grid.is_boundary(i)) bnd.push_back(i);
  if (bnd.size() < 4) throw Error(ErrorKind::DegenerateGrid, "fewer than four boundary nodes");

  int a = -1, b = -1;
  double best = -1;
  for (std::size_t x = 0; x < bnd.size(); ++x)
    for (std::size_t y = x + 1; y < bnd.size(); ++y) {
      double d = (grid.pos[bnd[x]] - grid.pos[bnd[y]]).squaredNorm();
      if (d > best + 1e-12) best = d, a = bnd[x], b = bnd[y];
    }
  const Vec3 u = (grid.pos[b] - grid.pos[a]).normalized();

  int c = -1, e = -1;
  best = -1;
  for (std::size_t x = 0; x < bnd.size(); ++x) {
    if (bnd[x] == a || bnd[x] == b) continue;
    for (std::size_t y = x + 1; y < bnd.size(); ++y) {
      if (bnd[y] == a || bnd[y] == b) continue;
      Vec3 v = grid.pos[bnd[y]] - grid.pos[bnd[x]];
      double n2 = v.squaredNorm();
      if (n2 <= best + 1e-12) continue;
      if (std::abs(u.dot(v)) >= perp_tol * std::sqrt(n2)) continue;
      best = n2, c = bnd[x], e = bnd[y];
    }
  }
  if (c < 0) throw Error(ErrorKind::DegenerateGrid, "no perpendicular boundary pair");
  return {a, b, c, e};
}

double estimate_pictures(int target, const NodeGrid& grid, const ExploredMap& explored,
                         double K_est) {
  if (explored.empty()) throw Error(ErrorKind::EmptyExploredSet, "nothing explored yet");
  if (auto it = explored.find(target); it != explored.end()) return it->second;
  const Vec3& p = grid.pos[target];
  // work in log space so large exponents do not underflow
  double lmax = -std::numeric_limits<double>::infinity();
  std::vector<double> lw;
  lw.reserve(explored.size());
  for (const auto& [i, n] : explored) {
    double dist = (grid.pos[i] - p).norm();
    if (dist == 0) return n;  // co-located with an explored node
    lw.push_back(-K_est * std::log(dist));
    lmax = std::max(lmax, lw.back());
  }
  double num = 0, den = 0;
  std::size_t k = 0;
  for (const auto& [i, n] : explored) {
    double wgt = std::exp(lw[k++] - lmax);
    num += wgt * n;
    den += wgt;
  }
  return num / den;
}

double censored_normal_mean(double mu, double sd, double c) {
  if (!(sd > 0)) return std::min(mu, c);
  const double k = (c - mu) / sd;
  const double pdf = std::exp(-0.5 * k * k) / std::sqrt(2 * kPi);
  const double cdf = 0.5 * std::erfc(-k / std::sqrt(2.0));
  return mu * cdf - sd * pdf + c * (1 - cdf);
}

double stochastic_modified_estimate(double mu, double ed_min, double n_exp_min, double K_sd) {
  return censored_normal_mean(mu, K_sd * ed_min, n_exp_min);
}

double min_distance_to_explored(int node, const NodeGrid& grid, const ExploredMap& explored) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& [i, n] : explored) m = std::min(m, (grid.pos[i] - grid.pos[node]).norm());
  return m;
}

CostFn grid_energy_cost(const NodeGrid& grid, double tau_delay, const EnergyModel& m) {
  const double e = unit_energy(tau_delay, m).e;
  const NodeGrid* g = &grid;
  return [g, e](int a, int b) { return e * (g->q[b] - g->q[a]).squaredNorm(); };
}

int exp_min_node(const ExplorationState& s, const CostFn& cost) {
  // best explored overall when the way back is affordable, otherwise the best
  // explored node inside the feasible range
  int glob = -1, feas = -1;
  for (const auto& [i, n] : s.explored) {
    if (glob < 0 || n < s.explored.at(glob)) glob = i;
    if (cost(s.current, i) <= s.E_bound && (feas < 0 || n < s.explored.at(feas))) feas = i;
  }
  if (glob >= 0 && cost(s.current, glob) <= s.E_bound) return glob;
  return feas >= 0 ? feas : glob;
}

std::vector<int> explorable_set(const ExplorationState& s, const NodeGrid& grid,
                                const CostFn& cost) {
  std::vector<int> out;
  const int n = static_cast<int>(grid.size());
  if (s.E_bound > s.E_T) {
    for (int i = 0; i < n; ++i)
      if (cost(s.current, i) <= s.E_bound) out.push_back(i);
    return out;
  }
  const int em = exp_min_node(s, cost);
  for (int i = 0; i < n; ++i)
    if (cost(s.current, i) + cost(i, em) <= s.E_bound) out.push_back(i);
  return out;
}

namespace {

int pick_next(const ExplorationState& s, const NodeGrid& grid, const std::vector<int>& ex, int em) {
  const double c = s.explored.at(em);
  int best = -1;
  double bv = std::numeric_limits<double>::infinity();
  for (int i : ex) {
    double mu = estimate_pictures(i, grid, s.explored, s.K_est);
    double v = s.explored.count(i)
                   ? mu
                   : stochastic_modified_estimate(mu, min_distance_to_explored(i, grid, s.explored),
                                                  c, s.K_sd);
    if (v < bv - 1e-12) bv = v, best = i;  // ex is ascending, so ties keep the lowest index
  }
  return best;
}

}  // namespace

int next_target(const ExplorationState& s, const NodeGrid& grid, const CostFn& cost) {
  const int em = exp_min_node(s, cost);
  auto ex = explorable_set(s, grid, cost);
  if (ex.empty()) return em;
  return pick_next(s, grid, ex, em);
}

double NoiseField::sigma(const Vec3& p) const {
  double s = base;
  for (const auto& w : wells)
    s -= w.depth * std::exp(-(p - w.centre).squaredNorm() / (2 * w.width * w.width));
  return std::max(s, floor);
}

NoiseField two_minima_field() {
  NoiseField f;
  f.base = 10.0;
  // broad local basin near the middle, narrow deeper one up in a corner
  f.wells = {{Vec3(1.4, 0.0, 1.6), 4.0, 0.25}, {Vec3(1.2, -0.16, 1.84), 6.0, 0.06}};
  return f;
}

namespace {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

double sense_pictures(int node, const NodeGrid& grid, const NoiseField& field,
                      const SearchParams& p) {
  double s = field.sigma(grid.pos[node]);
  if (!p.perfect_sensing) {
    Image base = textured_base(p.image_size, p.image_size);
    Image img = synth_noisy_image(base, s, mix(p.seed * 1000003ULL + node));
    s = std::max(estimate_noise_level(img).sigma, 1e-6);
  }
  return pictures_required(s, p.sigma_target);
}

SearchResult run_search(const NodeGrid& grid, const NoiseField& field, const SearchParams& p) {
  return run_search(grid, field, p, grid_energy_cost(grid, p.tau_delay, p.energy));
}

SearchResult run_search(const NodeGrid& grid, const NoiseField& field, const SearchParams& p,
                        const CostFn& cost) {
  SearchResult r;
  r.initial = select_initial_nodes(grid);

  ExplorationState s;
  s.E_bound = p.E_bound;
  s.E_T = p.E_T;
  s.K_est = p.K_est;
  s.K_sd = p.K_sd;
  // the survey tour is not charged; the camera parks at the best of the four
  for (int i : r.initial) s.explored[i] = sense_pictures(i, grid, field, p);
  s.current = r.initial[0];
  for (int i : r.initial)
    if (s.explored[i] < s.explored[s.current]) s.current = i;

  double best_true = std::numeric_limits<double>::infinity();
  for (int i = 0; i < static_cast<int>(grid.size()); ++i)
    best_true = std::min(best_true,
                         static_cast<double>(pictures_required(field.sigma(grid.pos[i]), p.sigma_target)));
  r.best_possible_N = best_true;

  double dist_sum = 0;
  int n_new = 0;
  for (int it = 1; it <= p.max_iterations; ++it) {
    const bool conservative = s.E_bound <= s.E_T;
    int em = exp_min_node(s, cost);
    if (conservative && cost(s.current, em) > s.E_bound + 1e-12) ++r.safety_violations;

    auto ex = explorable_set(s, grid, cost);
    int nxt = ex.empty() ? em : pick_next(s, grid, ex, em);
    if (nxt == s.current) break;
    double c = cost(s.current, nxt);
    if (c > s.E_bound + 1e-12) break;  // nothing affordable, not even the way back
    if (ex.empty()) r.forced_retreat = true;
    s.E_bound = std::max(0.0, s.E_bound - c);
    s.current = nxt;

    SearchStep st;
    st.iteration = it;
    st.node = nxt;
    st.pos = grid.pos[nxt];
    st.conservative = conservative;
    if (!s.explored.count(nxt)) {
      dist_sum += min_distance_to_explored(nxt, grid, s.explored);
      ++n_new;
      s.explored[nxt] = sense_pictures(nxt, grid, field, p);
      st.new_node = true;
    }
    st.N = s.explored.at(nxt);
    st.E_remaining = s.E_bound;
    st.safe = cost(nxt, exp_min_node(s, cost)) <= s.E_bound + 1e-12;
    r.trajectory.push_back(st);
    r.iterations = it;
  }
  r.final_node = s.current;
  r.exp_min = exp_min_node(s, cost);
  r.final_N = pictures_required(field.sigma(grid.pos[r.final_node]), p.sigma_target);
  r.reached_global = r.final_N <= best_true;
  r.avg_dis_new = n_new ? dist_sum / n_new : 0.0;
  return r;
}

}  // namespace vservo
