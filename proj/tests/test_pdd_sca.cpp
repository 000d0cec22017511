#include "uavmec/pdd_sca.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace uavmec;

namespace {

TaskGraph chain(double deadline = 100.0) {
  TaskGraph g;
  g.num_layers = 3;
  TaskDag t;
  t.nodes = {{0.0, 0}, {1e6, 1}, {0.0, 2}};
  t.edges = {{0, 1, 2e6}, {1, 2, 0.1e6}};
  t.deadline_s = deadline;
  g.tasks.push_back(t);
  return g;
}

Scenario single() {
  Scenario s = default_scenario(1, 1, 3);
  s.td_positions = {Vec2(0, 0)};
  s.uav_start = {Vec2(20, 0)};
  s.energy_budget_com.assign(2, 1e6);
  s.energy_budget_prop.assign(1, 1e7);
  s.validate();
  return s;
}

struct Instance {
  Scenario scn;
  TaskGraph g;
};
Instance generated(std::uint64_t seed, int layers) {
  Instance in;
  GraphParams gp;
  gp.layers = layers;
  in.g = generate_graph(4, gp, seed);
  in.scn = default_scenario(3, 4, layers);
  place_devices(in.scn, seed);
  apply_default_budgets(in.scn, in.g);
  return in;
}

// One interior sub-task with the given fractions, for the pointwise helpers.
Decision with_fractions(const Scenario& s, const TaskGraph& g, std::vector<double> x) {
  Decision d = empty_decision(s, g);
  d.x[0][1] = std::move(x);
  return d;
}

}  // namespace

TEST(PddSca, AuxiliaryClosedForm) {
  EXPECT_DOUBLE_EQ(auxiliary_value(1.0, 0.1, 0.0, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(auxiliary_value(0.0, 0.1, 5.0, 0.0), 0.0);
  EXPECT_NEAR(auxiliary_value(0.5, 0.1, 0.0, 0.0), 0.6, 1e-12);
  // Clamped into [0, 1].
  EXPECT_EQ(auxiliary_value(0.9, 1.0, 0.0, 5.0), 1.0);
  EXPECT_EQ(auxiliary_value(0.1, 1.0, 0.0, -5.0), 0.0);
}

TEST(PddSca, AuxiliaryMinimisesPenalty) {
  // x~ minimises (x(x~-1) + rho l1)^2 + (x - x~ + rho l2)^2 over [0,1].
  const double x = 0.37, rho = 0.2, l1 = 0.4, l2 = -0.3;
  auto psi = [&](double xt) {
    const double a = x * (xt - 1) + rho * l1, b = x - xt + rho * l2;
    return a * a + b * b;
  };
  const double best = auxiliary_value(x, rho, l1, l2);
  for (int i = 0; i <= 1000; ++i) EXPECT_LE(psi(best), psi(i / 1000.0) + 1e-12);
}

TEST(PddSca, ViolationIndicatorHandValues) {
  const Scenario s = single();
  const TaskGraph g = chain();
  PddState st;
  Decision d = with_fractions(s, g, {0.5, 0.5});
  st.aux = d.x;
  EXPECT_NEAR(violation_indicator(g, d, st), 0.0625, 1e-15);
  d = with_fractions(s, g, {1.0, 0.0});
  st.aux = d.x;
  EXPECT_EQ(violation_indicator(g, d, st), 0.0);
  st.aux[0][1] = {0.0, 1.0};
  EXPECT_EQ(violation_indicator(g, d, st), 1.0);
}

TEST(PddSca, RoundingPicksLargestFirstOnTies) {
  const Scenario s = default_scenario(3, 1, 3);
  const TaskGraph g = chain();
  Decision d = with_fractions(s, g, {0.001, 0.999, 0.0, 0.0});
  RoundResult r = round_binaries(g, d);
  EXPECT_EQ(d.x[0][1], (std::vector<double>{0, 1, 0, 0}));
  EXPECT_FALSE(r.warning);
  EXPECT_NEAR(r.max_change, 0.001, 1e-15);

  d = with_fractions(s, g, {0.5, 0.5, 0.0, 0.0});
  r = round_binaries(g, d);
  EXPECT_EQ(d.x[0][1], (std::vector<double>{1, 0, 0, 0}));
  EXPECT_FALSE(r.warning);

  d = with_fractions(s, g, {0.0, 0.0, 1.0, 0.0});
  r = round_binaries(g, d);
  EXPECT_EQ(d.x[0][1], (std::vector<double>{0, 0, 1, 0}));
  EXPECT_EQ(r.max_change, 0.0);

  d = with_fractions(s, g, {0.4, 0.3, 0.3, 0.0});
  EXPECT_TRUE(round_binaries(g, d).warning);
}

TEST(PddSca, PenaltyDecaysWhenViolationStaysLarge) {
  const Scenario s = single();
  const TaskGraph g = chain();
  const Decision d = with_fractions(s, g, {0.5, 0.5});
  PddState st = initial_state(s, g, d);
  st.eta = 1e-3;
  st.aux = d.x;  // h = 0.0625 > eta
  outer_step(st, g, d);
  outer_step(st, g, d);
  EXPECT_NEAR(st.rho, 0.81 * 0.1, 1e-15);
  EXPECT_NEAR(st.eta, 0.7 * 0.0625, 1e-15);
  EXPECT_EQ(st.lam1[0][1][0], 0.0);
  EXPECT_EQ(st.h_history.size(), 2u);
}

TEST(PddSca, MultiplierStepWhenViolationSmall) {
  const Scenario s = single();
  const TaskGraph g = chain();
  Decision d = with_fractions(s, g, {0.99, 0.01});
  PddState st = initial_state(s, g, d);
  st.eta = 1e-3;
  st.aux[0][1] = {1.0, 0.0};
  const double h = outer_step(st, g, d);  // max(0, 1e-4) <= 1e-3
  EXPECT_NEAR(h, 1e-4, 1e-15);
  EXPECT_EQ(st.rho, 0.1);
  EXPECT_NEAR(st.lam1[0][1][0], 0.0, 1e-15);
  EXPECT_NEAR(st.lam2[0][1][0], -0.01 / 0.1, 1e-12);
  EXPECT_NEAR(st.lam1[0][1][1], -0.01 / 0.1, 1e-12);
  EXPECT_NEAR(st.lam2[0][1][1], 0.01 / 0.1, 1e-12);

  // Binary and consistent: nothing moves.
  d = with_fractions(s, g, {1.0, 0.0});
  st = initial_state(s, g, d);
  outer_step(st, g, d);
  EXPECT_EQ(st.lam1[0][1], (std::vector<double>{0, 0}));
  EXPECT_EQ(st.lam2[0][1], (std::vector<double>{0, 0}));
}

TEST(PddSca, InitialDecisionIsUniformAndWithinCaps) {
  const Instance in = generated(4, 6);
  const Decision d = initial_decision(in.scn, in.g);
  for (size_t u = 0; u < d.x.size(); ++u)
    for (int k = 1; k < in.g.tasks[u].sink(); ++k)
      for (double x : d.x[u][static_cast<size_t>(k)]) EXPECT_EQ(x, 0.25);
  const Residuals r = system_cost(in.scn, in.g, d).residuals;
  EXPECT_LE(r.assignment, 1e-9);
  EXPECT_LE(r.td_cpu, 1e-9);
  EXPECT_LE(r.uav_cpu, 1e-9);
  EXPECT_LE(r.coverage, 1e-9);
  EXPECT_LE(r.motion, 1e-9);
  EXPECT_LE(r.return_home, 1e-9);

  const Decision again = initial_decision(in.scn, in.g);
  EXPECT_EQ(d.x, again.x);
  EXPECT_EQ(d.f, again.f);
  EXPECT_EQ(d.tau_comm, again.tau_comm);
}

TEST(PddSca, CirclePathHasRequestedRadius) {
  const Instance in = generated(2, 6);
  Decision d = empty_decision(in.scn, in.g);
  set_circle_path(in.scn, d, 5.0);
  for (int m = 0; m < in.scn.num_uavs; ++m) {
    const Vec2 s = in.scn.uav_start[static_cast<size_t>(m)];
    const Vec2 c = s - Vec2(0, 5);
    const auto& q = d.traj[static_cast<size_t>(m)];
    EXPECT_EQ(q.front(), s);
    EXPECT_EQ(q.back(), s);
    for (const Vec2& p : q) EXPECT_NEAR((p - c).norm(), 5.0, 1e-12);
  }
}

TEST(PddSca, InnerLoopDescendsAndRecordsTrace) {
  const Instance in = generated(5, 4);
  PddOptions o;
  Decision d = initial_decision(in.scn, in.g, o);
  PddState st = initial_state(in.scn, in.g, d, o);
  std::vector<TraceRow> trace;
  for (st.outer = 0; st.outer < 2; ++st.outer) {
    ASSERT_TRUE(inner_loop(in.scn, in.g, d, st, o, trace));
    outer_step(st, in.g, d, o.eta_factor);
    EXPECT_LE(st.inner, o.max_inner);
  }
  ASSERT_FALSE(trace.empty());
  for (size_t i = 0; i < trace.size(); ++i) {
    const TraceRow& r = trace[i];
    if (r.accepted) EXPECT_LE(r.candidate, r.previous + o.descent_tol) << r.block << " row " << i;
    if (i > 0 && trace[i - 1].outer == r.outer)
      EXPECT_LE(r.al_objective, trace[i - 1].al_objective + o.descent_tol) << r.block << " row " << i;
  }
}

TEST(PddSca, SmallChainConvergesToIntegralFeasiblePlan) {
  const Scenario s = single();
  const TaskGraph g = chain();
  const PddResult r = run_pdd_sca(s, g);
  EXPECT_TRUE(r.converged);
  EXPECT_LT(r.h_history.back(), 1e-10);
  EXPECT_LT(r.max_rounding_change, 1e-4);
  EXPECT_FALSE(r.rounding_warning);
  EXPECT_LE(r.metrics.residuals.max(), 1e-6) << r.metrics.residuals.worst();
  for (size_t i = 1; i < r.rho_history.size(); ++i) EXPECT_LE(r.rho_history[i], r.rho_history[i - 1]);
  // Integral: exactly one-hot after the repair.
  const auto& x = r.decision.x[0][1];
  EXPECT_EQ(x[0] + x[1], 1.0);
  EXPECT_TRUE(x[0] == 0.0 || x[0] == 1.0);
}

TEST(PddSca, RepairRestoresCoverageAfterRounding) {
  const Instance in = generated(3, 4);
  Decision d = initial_decision(in.scn, in.g);
  round_binaries(in.g, d);  // uniform x: durations no longer cover the rounded work
  const Decision fixed = integral_repair(in.scn, in.g, d, PddOptions{});
  const Residuals r = system_cost(in.scn, in.g, fixed).residuals;
  EXPECT_LE(r.coverage, 1e-6);
  EXPECT_LE(r.uav_cpu, 1e-6);
  EXPECT_LE(r.motion, 1e-6);
  EXPECT_EQ(fixed.x, d.x);
}

TEST(PddSca, FirstThresholdIsTheStartingViolation) {
  const Scenario s = single();
  const TaskGraph g = chain();
  const Decision d = with_fractions(s, g, {0.5, 0.5});
  const PddState st = initial_state(s, g, d);
  EXPECT_DOUBLE_EQ(st.eta, 0.0625);  // (x (x~ - 1))^2 with x~ = x = 0.5
  PddOptions o;
  o.eta0 = 3e-3;
  EXPECT_EQ(initial_state(s, g, d, o).eta, 3e-3);
}
