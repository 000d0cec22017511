#include "uavmec/baselines.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace uavmec;

namespace {

// Source -> a -> b -> sink for one TD, plus a second TD with a single node.
TaskGraph two_chains() {
  TaskGraph g;
  g.num_layers = 4;
  TaskDag t;
  t.nodes = {{0.0, 0}, {1e6, 1}, {0.9e6, 2}, {0.0, 3}};
  t.edges = {{0, 1, 2e6}, {1, 2, 0.15e6}, {2, 3, 0.1e6}};
  t.deadline_s = 100;
  g.tasks.push_back(t);
  TaskDag s;
  s.nodes = {{0.0, 0}, {0.8e6, 1}, {0.0, 3}};
  s.edges = {{0, 1, 1.5e6}, {1, 2, 0.1e6}};
  s.deadline_s = 100;
  g.tasks.push_back(s);
  return g;
}

Scenario line_scenario(int uavs, int tds, int slots) {
  Scenario s = default_scenario(uavs, tds, slots);
  for (int u = 0; u < tds; ++u) s.td_positions[static_cast<size_t>(u)] = Vec2(40.0 * u, 0.0);
  for (int m = 0; m < uavs; ++m) s.uav_start[static_cast<size_t>(m)] = Vec2(40.0 * m, 30.0);
  const int nd = uavs + tds;
  s.energy_budget_com.assign(static_cast<size_t>(nd), 1e6);
  s.energy_budget_prop.assign(static_cast<size_t>(uavs), 1e7);
  s.validate();
  return s;
}

struct Instance {
  Scenario scn;
  TaskGraph g;
};
Instance generated(std::uint64_t seed, int layers = 5) {
  Instance in;
  GraphParams gp;
  gp.layers = layers;
  in.g = generate_graph(4, gp, seed);
  in.scn = default_scenario(3, 4, layers);
  place_devices(in.scn, seed);
  apply_default_budgets(in.scn, in.g);
  return in;
}

void expect_structurally_valid(const Scenario& s, const TaskGraph& g, const Decision& d) {
  const Residuals r = system_cost(s, g, d).residuals;
  EXPECT_LE(r.assignment, 1e-12);
  EXPECT_LE(r.binary, 1e-12);
  EXPECT_LE(r.td_cpu, 1e-9);
  EXPECT_LE(r.uav_cpu, 1e-9);
  EXPECT_LE(r.return_home, 1e-12);
  EXPECT_LE(r.motion, 1e-9);
  EXPECT_LE(r.coverage, 1e-9);
}

}  // namespace

TEST(Baselines, NearestBreaksTiesTowardLowerIndex) {
  Scenario s = line_scenario(2, 1, 4);
  s.td_positions = {Vec2(20, 0)};  // equidistant from both UAVs
  TaskGraph g = two_chains();
  g.tasks.pop_back();
  const Decision d = heuristic_nearest(s, g);
  EXPECT_EQ(d.x[0][1], (std::vector<double>{0, 1, 0}));
  EXPECT_EQ(d.x[0][2], (std::vector<double>{0, 1, 0}));
}

TEST(Baselines, NearestKeepsTaskOnOneUav) {
  const Scenario s = line_scenario(2, 2, 4);
  const TaskGraph g = two_chains();
  const Decision d = heuristic_nearest(s, g);
  // TD 0 sits under UAV 0, TD 1 under UAV 1.
  EXPECT_EQ(genome_of(g, d), (Genome{1, 1, 2}));  // RBFS order: (0,1), (0,2), (1,1)
  // a -> b stays on UAV 0, so slot 1 only carries TD 1's result home.
  const auto m = comm_time_matrix(s, g, d, 1);
  EXPECT_EQ(m[0][0], 0.0);
  EXPECT_EQ(m[0][2], 0.0);
  EXPECT_GT(m[1][3], 0.0);
  expect_structurally_valid(s, g, d);
}

TEST(Baselines, NearestSplitsCpuEqually) {
  Scenario s = line_scenario(1, 2, 4);
  const TaskGraph g = two_chains();
  const Decision d = heuristic_nearest(s, g);
  // Both slot-1 sub-tasks run on the only UAV.
  EXPECT_DOUBLE_EQ(d.f[0][1][1], s.uav_cpu_max_hz / 2);
  EXPECT_DOUBLE_EQ(d.f[1][1][1], s.uav_cpu_max_hz / 2);
  EXPECT_DOUBLE_EQ(d.f[0][2][1], s.uav_cpu_max_hz);
}

TEST(Baselines, FixedResourceDealsRoundRobin) {
  const Scenario s = line_scenario(3, 4, 3);
  TaskGraph g;
  g.num_layers = 3;
  for (int u = 0; u < 4; ++u) {
    TaskDag t;
    t.nodes = {{0.0, 0}, {1e6, 1}, {0.0, 2}};
    t.edges = {{0, 1, 2e6}, {1, 2, 0.1e6}};
    t.deadline_s = 100;
    g.tasks.push_back(t);
  }
  const Decision d = fixed_resource(s, g);
  std::vector<int> count(3, 0);
  for (int u = 0; u < 4; ++u) {
    const auto& x = d.x[static_cast<size_t>(u)][1];
    ++count[static_cast<size_t>(std::max_element(x.begin() + 1, x.end()) - x.begin() - 1)];
    EXPECT_EQ(x[0], 0.0);
  }
  EXPECT_EQ(count, (std::vector<int>{2, 1, 1}));
  EXPECT_DOUBLE_EQ(d.f[0][1][1], s.uav_cpu_max_hz / 2);
  EXPECT_DOUBLE_EQ(d.f[1][1][2], s.uav_cpu_max_hz);
  expect_structurally_valid(s, g, d);
}

TEST(Baselines, FixedTimeInvertsComputationTime) {
  Scenario s = line_scenario(1, 1, 3);
  TaskGraph g;
  g.num_layers = 3;
  TaskDag t;
  t.nodes = {{0.0, 0}, {1e6, 1}, {0.0, 2}};
  t.edges = {{0, 1, 2e6}, {1, 2, 0.1e6}};
  t.deadline_s = 100;
  g.tasks.push_back(t);
  BaselineConfig cfg;
  cfg.tau_comp = {0.0, 1.0, 0.0};
  cfg.tau_comm = {2.0, 0.5, 0.0};
  const FixedTimeResult r = fixed_time(s, g, cfg);
  EXPECT_DOUBLE_EQ(r.decision.f[0][1][1], 1e9);
  EXPECT_EQ(r.decision.f[0][0], (std::vector<double>{0, 0}));
  EXPECT_EQ(r.decision.f[0][2], (std::vector<double>{0, 0}));
  EXPECT_TRUE(r.within_caps);

  cfg.tau_comp = {0.0, 0.05, 0.0};  // needs 20 GHz
  EXPECT_FALSE(fixed_time(s, g, cfg).within_caps);
}

TEST(Baselines, FixedTimeUsesFixedResourceUnitsWithinCaps) {
  const Instance in = generated(7);
  const Decision fr = fixed_resource(in.scn, in.g);
  const FixedTimeResult ft = fixed_time(in.scn, in.g);
  EXPECT_TRUE(ft.within_caps);
  EXPECT_EQ(ft.decision.x, fr.x);
  EXPECT_EQ(ft.decision.tau_comp, fr.tau_comp);
  const MetricsReport a = system_cost(in.scn, in.g, fr), b = system_cost(in.scn, in.g, ft.decision);
  EXPECT_LE(b.residuals.uav_cpu, 0.0);
  EXPECT_LE(b.residuals.coverage, 1e-9);
  EXPECT_NEAR(b.total_delay_s, a.total_delay_s, 1e-12);
  EXPECT_LE(b.uav_comp_energy(in.scn.num_uavs), a.uav_comp_energy(in.scn.num_uavs) + 1e-12);
}

TEST(Baselines, AllShareTheCirclePath) {
  const Instance in = generated(3);
  const Decision a = heuristic_nearest(in.scn, in.g);
  const Decision b = fixed_resource(in.scn, in.g);
  const Decision c = fixed_time(in.scn, in.g).decision;
  BaselineConfig small;
  small.population = 6;
  small.generations = 3;
  const Decision e = evolutionary(in.scn, in.g, small, 1).decision;
  EXPECT_EQ(a.traj, b.traj);
  EXPECT_EQ(a.traj, c.traj);
  EXPECT_EQ(a.traj, e.traj);
  for (const Decision* d : {&a, &b, &c, &e}) expect_structurally_valid(in.scn, in.g, *d);
}

TEST(Baselines, GenomeRoundTrip) {
  const Instance in = generated(2);
  const Decision d = fixed_resource(in.scn, in.g);
  const Genome gm = genome_of(in.g, d);
  EXPECT_EQ(gm.size(), interior_order(in.g).size());
  EXPECT_EQ(decode_genome(in.scn, in.g, gm).x, d.x);
  EXPECT_THROW(decode_genome(in.scn, in.g, Genome(gm.size() + 1, 0)), ModelError);
}

TEST(Baselines, EvolutionNeverLosesItsSeed) {
  const Instance in = generated(5);
  const Decision h = heuristic_nearest(in.scn, in.g);
  const MetricsReport hm = system_cost(in.scn, in.g, h);
  BaselineConfig cfg;
  cfg.population = 10;
  cfg.generations = 15;
  const EvolutionResult r = evolutionary(in.scn, in.g, cfg, 11, {genome_of(in.g, h)});
  if (hm.feasible(1e-6)) {
    EXPECT_TRUE(r.feasible);
    EXPECT_LE(r.cost, hm.total_cost + 1e-12);
  } else if (!r.feasible) {
    EXPECT_LE(r.violation, hm.residuals.max() + 1e-12);
  }
  if (r.feasible) {
    for (size_t i = 1; i < r.best_cost.size(); ++i) EXPECT_LE(r.best_cost[i], r.best_cost[i - 1] + 1e-12);
  }
  EXPECT_NEAR(system_cost(in.scn, in.g, r.decision).total_cost, r.cost, 1e-12);
}

TEST(Baselines, EvolutionIsDeterministic) {
  const Instance in = generated(6);
  BaselineConfig cfg;
  cfg.population = 8;
  cfg.generations = 5;
  const EvolutionResult a = evolutionary(in.scn, in.g, cfg, 42);
  const EvolutionResult b = evolutionary(in.scn, in.g, cfg, 42);
  EXPECT_EQ(a.genome, b.genome);
  EXPECT_EQ(a.best_cost, b.best_cost);
  cfg.population = 1;
  EXPECT_THROW(evolutionary(in.scn, in.g, cfg, 1), ModelError);
}
