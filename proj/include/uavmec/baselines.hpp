#pragma once

#include "uavmec/scenario.hpp"
#include "uavmec/task_graph.hpp"

#include <cstdint>
#include <vector>

namespace uavmec {

struct BaselineConfig {
  double circle_radius_m = 5.0;
  double tau_floor_s = 1e-4;
  int population = 40;
  int generations = 100;
  double mutation_rate = 0.05;
  int tournament_size = 2;
  // Fixed unit lengths for fixed_time; empty means "take them from
  // fixed_resource on the same instance".
  std::vector<double> tau_comp;
  std::vector<double> tau_comm;
};

// Device choice z per interior sub-task, in the order of interior_order().
using Genome = std::vector<int>;

// Interior sub-tasks in RBFS priority order.
std::vector<TaskRef> interior_order(const TaskGraph& g);

// One-hot X from a genome; every device splits its CPU cap equally over the
// sub-tasks it runs in a slot; circle path; durations from the workload.
Decision decode_genome(const Scenario& scn, const TaskGraph& g, const Genome& genome, const BaselineConfig& cfg = {});
Genome genome_of(const TaskGraph& g, const Decision& d);

// Every sub-task of a TD goes to the UAV nearest its start position (lowest
// index on ties).
Decision heuristic_nearest(const Scenario& scn, const TaskGraph& g, const BaselineConfig& cfg = {});

// Sub-tasks of each slot dealt round-robin over the UAVs, lowest index first.
Decision fixed_resource(const Scenario& scn, const TaskGraph& g, const BaselineConfig& cfg = {});

// fixed_resource's assignment with preset unit lengths; every sub-task gets
// exactly the frequency that finishes it within its computation unit.
struct FixedTimeResult {
  Decision decision;
  bool within_caps = true;  // false when a preset unit needs more than a device's cap
};
FixedTimeResult fixed_time(const Scenario& scn, const TaskGraph& g, const BaselineConfig& cfg = {});

struct EvolutionResult {
  Decision decision;
  Genome genome;
  bool feasible = false;          // best genome meets every constraint
  double cost = 0.0;
  double violation = 0.0;         // largest residual of the best genome
  std::vector<double> best_cost;  // per generation
};

// Genetic search over device assignments. Feasible genomes rank before
// infeasible ones; feasible by cost, infeasible by largest residual. The best
// genome survives every generation. `initial` seeds the population (cycled
// when shorter); random genomes otherwise.
EvolutionResult evolutionary(const Scenario& scn, const TaskGraph& g, const BaselineConfig& cfg, std::uint64_t seed,
                             const std::vector<Genome>& initial = {});

}  // namespace uavmec
