#pragma once

#include "uavmec/baselines.hpp"
#include "uavmec/scenario.hpp"
#include "uavmec/subproblems.hpp"
#include "uavmec/task_graph.hpp"

#include <cstdint>
#include <vector>

namespace uavmec {

enum class OraclePath { Circle, Hover };

struct OracleOptions {
  OraclePath path = OraclePath::Circle;
  double circle_radius_m = 5.0;
  long long budget = 100000;  // most assignments we agree to enumerate
  int max_sca = 30;           // frozen-X re-solves on a moving path
  double sca_tol = 1e-9;      // relative objective change ending them
  double feas_tol = 1e-6;
  BlockOptions block;
};

// One enumerated assignment. `pruned` rows were never solved: a per-slot
// lower bound on the schedule already breaks a cap or the deadline.
struct OracleRow {
  Genome genome;  // device choice per sub-task, in interior_order()
  bool pruned = false;
  bool feasible = false;
  double cost = 0.0;
};

struct OracleResult {
  bool feasible = false;  // some assignment admits a feasible continuous part
  Decision decision;
  Genome genome;
  double cost = 0.0;
  long long evaluated = 0;  // continuous problems actually solved
  std::vector<OracleRow> table;
};

struct TinyInstance {
  Scenario scn;
  TaskGraph g;
  OraclePath path = OraclePath::Circle;
};

// Two UAVs, one TD, three layers (so one interior layer of 2..4 sub-tasks).
// The UAVs come from place_devices; the TD sits midway between them, since
// the three-region layout means little for a single device.
TinyInstance tiny_instance(std::uint64_t seed, OraclePath path = OraclePath::Circle);

// (M+1)^L for L interior sub-tasks, saturating just above `cap`.
long long assignment_count(const Scenario& scn, const TaskGraph& g, long long cap);

// Exact continuous part for a fixed assignment on the fixed path. Returns the
// best decision found; check feasibility with system_cost.
Decision solve_fixed_assignment(const Scenario& scn, const TaskGraph& g, const Genome& genome,
                                const OracleOptions& opts = {});

// True when the assignment cannot meet the communication-unit cap or the
// deadline no matter how frequencies and durations are chosen.
bool provably_infeasible(const Scenario& scn, const TaskGraph& g, const Decision& assigned);

// Exhaustive search over integral offloading. Ties go to the
// lexicographically smallest genome. Throws ModelError beyond the budget.
OracleResult enumerate_optimum(const Scenario& scn, const TaskGraph& g, const OracleOptions& opts = {});

}  // namespace uavmec
