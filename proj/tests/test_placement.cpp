#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "vservo/placement.hpp"

using namespace vservo;

namespace {

const NodeGrid& space() {
  static const NodeGrid g = build_operational_space(WorkspaceParams{});
  return g;
}

// Euclidean distance in lattice steps, cheap to reason about by hand
CostFn distance_cost(const NodeGrid& g) {
  return [&g](int a, int b) { return (g.pos[a] - g.pos[b]).norm() / g.resolution; };
}

}  // namespace

TEST(Placement, ZBoundsLieOnSphereAndConeEdge) {
  WorkspaceParams w;
  RobotGeometry geo;
  auto [lo, hi] = z_bounds(w, geo);
  EXPECT_NEAR(lo, 1.2644, 1e-4);
  EXPECT_NEAR(hi, 1.97281, 1e-4);
  const double t = std::tan(deg2rad(w.alpha / 2));
  for (double z : {lo, hi}) {
    double x = w.L_M - t * (z - w.d);  // inner edge of the view cone, y = 0
    EXPECT_NEAR(std::hypot(x - geo.a1, z - geo.L1), w.r_V, 1e-9);
  }
}

TEST(Placement, MarkerRangeAndValidation) {
  WorkspaceParams w;
  RobotGeometry geo;
  auto [lo, hi] = w.marker_range(geo);
  EXPECT_NEAR(lo, 2.82919, 1e-4);
  EXPECT_NEAR(hi, 2.9256, 1e-4);
  EXPECT_NO_THROW(w.validate(geo));
  WorkspaceParams close = w;
  close.L_VT = 4.0;
  EXPECT_THROW(close.validate(geo), Error);
  WorkspaceParams far = w;
  far.L_M = 3.0;
  try {
    far.validate(geo);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InfeasibleGeometry);
  }
}

TEST(Placement, GridNodesSatisfyRegionTests) {
  const NodeGrid& g = space();
  WorkspaceParams w;
  RobotGeometry geo;
  const double ta = std::tan(deg2rad(w.alpha / 2)), tb = std::tan(deg2rad(w.beta / 2));
  ASSERT_GT(g.size(), 100u);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec3& p = g.pos[i];
    EXPECT_LE((p - Vec3(geo.a1, 0, geo.L1)).norm(), w.r_V + 1e-9);
    double h = p.z() - w.d;
    EXPECT_LE(std::hypot((p.x() - w.L_M) / ta, p.y() / tb), h + 1e-9);
    EXPECT_TRUE(geo.within_limits(g.q[i]));
    // the stored joints really put the lens at the node
    Pose fl = forward_kinematics(g.q[i], geo);
    EXPECT_LT((fl.d - w.L_CE * fl.a() - p).norm(), 1e-9);
    EXPECT_LT((fl.a() - Vec3(0, 0, -1)).norm(), 1e-9);
  }
}

TEST(Placement, GridCountsAndPruning) {
  const NodeGrid& g = space();
  EXPECT_EQ(g.ideal_count, 1682u);
  EXPECT_EQ(g.size(), 1656u);
  EXPECT_GT(g.ideal_count, g.size());
}

TEST(Placement, InfeasibleConeThrows) {
  WorkspaceParams w;
  w.r_V = 0.5;
  w.L_VT = 5.0;
  EXPECT_THROW(z_bounds(w, RobotGeometry{}), Error);
}

TEST(Placement, BoxGridCornersAndBoundary) {
  NodeGrid g = box_grid(3, 3, 3, 0.1);
  ASSERT_EQ(g.size(), 27u);
  int centre = g.find({1, 1, 1});
  EXPECT_FALSE(g.is_boundary(centre));
  int boundary = 0;
  for (int i = 0; i < 27; ++i) boundary += g.is_boundary(i);
  EXPECT_EQ(boundary, 26);
  auto init = select_initial_nodes(g);
  // the farthest pair is a body diagonal
  EXPECT_NEAR((g.pos[init[0]] - g.pos[init[1]]).norm(), 0.2 * std::sqrt(3.0), 1e-12);
  Vec3 u = g.pos[init[1]] - g.pos[init[0]], v = g.pos[init[3]] - g.pos[init[2]];
  EXPECT_LT(std::abs(u.normalized().dot(v.normalized())), 0.05);
  EXPECT_THROW(select_initial_nodes(box_grid(1, 1, 3, 0.1)), Error);
}

TEST(Placement, InitialNodesOnTheOperationalSpace) {
  auto init = select_initial_nodes(space());
  EXPECT_EQ(init[0], 0);
  EXPECT_EQ(init[1], 1655);
  for (int i : init) EXPECT_TRUE(space().is_boundary(i));
}

TEST(Placement, InverseDistanceWeighting) {
  NodeGrid g = box_grid(3, 1, 1, 1.0);
  ExploredMap ex{{0, 10.0}, {2, 20.0}};
  // node 1 is equidistant
  EXPECT_NEAR(estimate_pictures(1, g, ex, 5.0), 15.0, 1e-12);
  NodeGrid h = box_grid(4, 1, 1, 1.0);
  ExploredMap ex2{{0, 10.0}, {3, 20.0}};
  // distances 1 and 2
  EXPECT_NEAR(estimate_pictures(1, h, ex2, 1.0), (10.0 + 0.5 * 20.0) / 1.5, 1e-12);
  EXPECT_NEAR(estimate_pictures(1, h, ex2, 2.0), (10.0 + 0.25 * 20.0) / 1.25, 1e-12);
  // huge exponents tend to the nearest neighbour without underflow
  EXPECT_NEAR(estimate_pictures(1, h, ex2, 2000.0), 10.0, 1e-9);
  EXPECT_EQ(estimate_pictures(0, h, ex2, 1.0), 10.0);
  EXPECT_THROW(estimate_pictures(1, h, ExploredMap{}, 1.0), Error);
}

TEST(Placement, CensoredNormalMatchesMonteCarlo) {
  std::mt19937_64 rng(31);
  for (auto [mu, sd, c] : {std::tuple{10.0, 3.0, 9.0}, {5.0, 1.0, 8.0}, {20.0, 10.0, 12.0}}) {
    std::normal_distribution<double> n(mu, sd);
    double acc = 0;
    const int draws = 1000000;
    for (int k = 0; k < draws; ++k) acc += std::min(n(rng), c);
    EXPECT_NEAR(censored_normal_mean(mu, sd, c), acc / draws, 0.01 * std::max(1.0, sd));
  }
  EXPECT_EQ(censored_normal_mean(4.0, 0.0, 3.0), 3.0);
  // the modified estimate only shrinks the expectation
  EXPECT_LE(stochastic_modified_estimate(10.0, 0.1, 12.0, 50.0), 10.0);
}

TEST(Placement, ExplorableSetInvariants) {
  NodeGrid g = box_grid(6, 6, 1, 1.0);
  CostFn cost = distance_cost(g);
  ExplorationState s;
  s.explored = {{0, 30.0}, {35, 10.0}};
  s.current = 14;
  s.E_bound = 3.0;
  s.E_T = 1.0;
  auto ex = explorable_set(s, g, cost);
  for (int i = 0; i < static_cast<int>(g.size()); ++i) {
    bool in = std::find(ex.begin(), ex.end(), i) != ex.end();
    EXPECT_EQ(in, cost(s.current, i) <= s.E_bound) << i;
  }
  // conservative mode keeps the way back to the explored minimum
  s.E_T = 5.0;
  int em = exp_min_node(s, cost);
  ex = explorable_set(s, g, cost);
  for (int i = 0; i < static_cast<int>(g.size()); ++i) {
    bool in = std::find(ex.begin(), ex.end(), i) != ex.end();
    EXPECT_EQ(in, cost(s.current, i) + cost(i, em) <= s.E_bound) << i;
  }
}

TEST(Placement, ExplorationMinimumPrefersAffordableBest) {
  NodeGrid g = box_grid(10, 1, 1, 1.0);
  CostFn cost = distance_cost(g);
  ExplorationState s;
  s.explored = {{0, 5.0}, {8, 3.0}, {9, 1.0}};
  s.current = 0;
  s.E_bound = 100;
  EXPECT_EQ(exp_min_node(s, cost), 9);
  s.E_bound = 8.5;  // node 9 out of reach
  EXPECT_EQ(exp_min_node(s, cost), 8);
}

TEST(Placement, TiesGoToLowestIndex) {
  NodeGrid g = box_grid(5, 1, 1, 1.0);
  CostFn cost = [](int, int) { return 0.0; };
  ExplorationState s;
  s.explored = {{0, 10.0}, {4, 10.0}};
  s.current = 0;
  s.E_bound = 10;
  s.E_T = 1;
  s.K_sd = 0.0;
  // nodes 0..4 all estimate 10: the lowest index (the current node) wins
  EXPECT_EQ(next_target(s, g, cost), 0);
}

TEST(Placement, ZeroBudgetStopsImmediately) {
  SearchParams p;
  p.E_bound = 0;
  p.perfect_sensing = true;
  SearchResult r = run_search(space(), two_minima_field(), p);
  EXPECT_EQ(r.iterations, 0);
  EXPECT_TRUE(r.trajectory.empty());
  bool is_initial = false;
  for (int i : r.initial) is_initial |= i == r.final_node;
  EXPECT_TRUE(is_initial);
}

TEST(Placement, BudgetIsNeverOverspent) {
  SearchParams p;
  p.perfect_sensing = true;
  p.E_T = 10;
  SearchResult r = run_search(space(), two_minima_field(), p);
  double prev = p.E_bound;
  for (const auto& st : r.trajectory) {
    EXPECT_GE(st.E_remaining, 0.0);
    EXPECT_LE(st.E_remaining, prev);
    prev = st.E_remaining;
    if (st.conservative) EXPECT_TRUE(st.safe);
  }
  EXPECT_EQ(r.safety_violations, 0);
}

TEST(Placement, SearchIsDeterministic) {
  SearchParams p;
  p.seed = 5;
  SearchResult a = run_search(space(), two_minima_field(), p);
  SearchResult b = run_search(space(), two_minima_field(), p);
  ASSERT_EQ(a.trajectory.size(), b.trajectory.size());
  for (size_t k = 0; k < a.trajectory.size(); ++k) {
    EXPECT_EQ(a.trajectory[k].node, b.trajectory[k].node);
    EXPECT_EQ(a.trajectory[k].N, b.trajectory[k].N);
  }
}

TEST(Placement, NoiseFieldShape) {
  NoiseField f = two_minima_field();
  EXPECT_NEAR(f.sigma(Vec3(100, 0, 0)), f.base, 1e-12);
  for (const auto& w : f.wells) EXPECT_LT(f.sigma(w.centre), f.base - 0.9 * w.depth);
  NoiseField deep;
  deep.wells = {{Vec3::Zero(), 100.0, 1.0}};
  EXPECT_EQ(deep.sigma(Vec3::Zero()), deep.floor);
}

TEST(Placement, SensedPicturesTrackTheField) {
  const NodeGrid& g = space();
  NoiseField f = two_minima_field();
  SearchParams exact;
  exact.perfect_sensing = true;
  SearchParams est;
  for (int node : {0, 500, 1200}) {
    double truth = pictures_required(f.sigma(g.pos[node]), 1.0);
    EXPECT_EQ(sense_pictures(node, g, f, exact), truth);
    EXPECT_NEAR(sense_pictures(node, g, f, est), truth, 0.25 * truth + 2);
  }
}

TEST(Placement, EnergyOfNoMotionIsZero) {
  Vec6 q = Vec6::Constant(0.3);
  EnergyResult e = energy_cost(q, q, 0.0);
  EXPECT_EQ(e.E, 0.0);
  EXPECT_EQ(e.settling, 0.0);
}

TEST(Placement, EnergyScalesWithSquaredTravel) {
  Vec6 a = Vec6::Zero(), b = Vec6::Zero();
  b[1] = 0.1;
  Vec6 c = 2 * b;
  EXPECT_NEAR(energy_cost(a, c, 0.0).E, 4 * energy_cost(a, b, 0.0).E, 1e-12);
}

TEST(Placement, EnergyTrendsInDelay) {
  double prevE = 1e300, prevT = -1;
  for (double td : {0.0, 0.05, 0.1, 0.5, 1.0}) {
    UnitEnergy u = unit_energy(td);
    EXPECT_LT(u.e, prevE) << td;
    EXPECT_GT(u.settling, prevT) << td;
    prevE = u.e;
    prevT = u.settling;
  }
}

TEST(Placement, DegenerateDelayIsRejected) {
  EnergyModel m;
  for (double td : {m.tau_in, -0.1}) {
    try {
      unit_energy(td, m);
      FAIL() << td;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::DegenerateDelay);
    }
  }
}

TEST(Placement, EnergyCostOnGridIsSymmetricAndZeroOnDiagonal) {
  const NodeGrid& g = space();
  CostFn cost = grid_energy_cost(g);
  EXPECT_EQ(cost(10, 10), 0.0);
  EXPECT_NEAR(cost(10, 900), cost(900, 10), 1e-12);
  EXPECT_GT(cost(10, 900), 0.0);
}
