#pragma once

#include "uavmec/baselines.hpp"
#include "uavmec/oracle.hpp"
#include "uavmec/pdd_sca.hpp"
#include "uavmec/scenario.hpp"
#include "uavmec/task_graph.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace uavmec {

enum class Algorithm { Pdd, Heuristic, FixedResource, FixedTime, Evolutionary, Oracle };
std::string to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& s);  // "pdd-sca", "heuristic", ...
std::vector<Algorithm> all_planners();                  // everything but the oracle

enum class SweepAxis { None, Workload, EdgeBits, DependencyRate, TdCount, Weights };
std::string to_string(SweepAxis a);
SweepAxis axis_from_string(const std::string& s);

// Scenario overrides (the scenario JSON keys) plus generator settings. A
// grid value means, per axis:
//   workload         upper end of the sub-task workload range in Mbit (range width 0.2)
//   edge-bits        upper end of the edge volume range in Mbit (range width 0.1)
//   dependency-rate  successor rate of the DAG generator
//   td-count         number of TDs
//   weights          factor on every energy weight (communication/computation and flight)
struct InstanceConfig {
  nlohmann::json scenario = nlohmann::json::object();
  GraphParams graph;
};

// Top-level keys go to the scenario; an optional "graph" object holds
// min_per_layer, max_per_layer, workload_mbits [lo, hi], edge_mbits [lo, hi],
// input_mbits [lo, hi], dependency_rate and deadline_ref_hz.
InstanceConfig instance_config_from_json(const nlohmann::json& j);
InstanceConfig load_instance_config(const std::string& path);
void check_grid_value(SweepAxis axis, double value);  // throws ModelError

struct Instance {
  Scenario scn;
  TaskGraph g;
};
// Positions come from place_devices(seed) unless the config fixes them;
// budgets from apply_default_budgets unless the config sets them.
Instance make_instance(const InstanceConfig& cfg, SweepAxis axis, double value, std::uint64_t seed);

struct ExperimentSpec {
  std::string config_path;  // echoed in the manifest only
  InstanceConfig config;
  std::vector<Algorithm> algorithms{Algorithm::Pdd};
  std::vector<std::uint64_t> seeds;
  SweepAxis axis = SweepAxis::None;
  std::vector<double> grid;  // ignored when axis is None
  std::string out_dir = "results";
  int jobs = 1;
  PddOptions pdd;
  BaselineConfig baseline;
  OracleOptions oracle;

  void validate() const;  // throws ModelError
};

// One (grid point, seed, algorithm) run. Metrics are always recomputed with
// system_cost on the final decision.
struct RunRecord {
  SweepAxis axis = SweepAxis::None;
  double value = 0.0;
  std::uint64_t seed = 0;
  Algorithm algorithm = Algorithm::Pdd;
  std::string status;  // ok | infeasible | budget_exceeded | error: <what>
  bool has_metrics = false;
  MetricsReport metrics;
  int num_uavs = 0;
  Decision decision;
  bool converged = false;  // PDD-SCA only
  int outer_iterations = 0;
  double model_objective = 0.0;  // solver's own objective; NaN when it has none
  double runtime_s = 0.0;        // not written to CSV, which stays reproducible
  std::optional<PddResult> pdd;  // full solver output when details are kept

  double cost() const { return metrics.total_cost; }
  double uav_comp_energy() const { return metrics.uav_comp_energy(num_uavs); }
  double uav_com_energy() const { return metrics.uav_com_energy(num_uavs); }
};

RunRecord run_one(const ExperimentSpec& spec, Algorithm algo, const Instance& in, double value, std::uint64_t seed,
                  bool keep_detail = false);

// Every (grid point, seed, algorithm), ordered that way. Instances are
// shared across algorithms at the same grid point and seed.
std::vector<RunRecord> run_experiment(const ExperimentSpec& spec, bool keep_detail = false);

// Column order: axis,value,seed,algorithm,status,feasible,converged,
// outer_iterations,total_cost,delay_s,td_energy_j,uav_comp_energy_j,
// uav_com_energy_j,prop_energy_j,balance_factor_j,max_residual,
// worst_residual,model_gap
void write_csv(std::ostream& os, const std::vector<RunRecord>& rows);
nlohmann::json manifest(const ExperimentSpec& spec, size_t rows);

// run + results.csv + manifest.json in spec.out_dir.
std::vector<RunRecord> run(const ExperimentSpec& spec);

// Metric names: cost, delay, td_energy, uav_comp_energy, uav_com_energy,
// prop_energy, balance.
double metric_value(const RunRecord& r, const std::string& metric);
struct Summary {
  double mean = 0.0;
  double std = 0.0;  // population
  int count = 0;
};
// Over seeds, skipping runs without metrics.
Summary summarize(const std::vector<RunRecord>& rows, Algorithm algo, double value, const std::string& metric);

// Plot data, one file per figure: convergence (seed,outer,h,rho),
// trajectory (seed,uav,t,x,y), and sweeps (x,series,metric,mean,std) for
// workload, edge-bits, dependency-rate, weights and balance (td-count).
// `only` selects figures by those names; empty means all. A sweep uses the
// ExperimentSpec's grid when it sweeps the same axis, a built-in grid otherwise.
std::vector<std::string> replicate_figures(const ExperimentSpec& spec, const std::vector<std::string>& only = {});

struct OracleCheckRow {
  std::uint64_t seed = 0;
  int interior = 0;
  bool oracle_feasible = false;
  double oracle_cost = 0.0;
  bool pdd_feasible = false;
  double pdd_cost = 0.0;
  double gap = 0.0;  // pdd / oracle - 1
};
// PDD-SCA with the path held fixed against enumerate_optimum on
// tiny_instance(seed). Writes oracle_check.csv and one assignment table per
// seed when `out_dir` is non-empty.
std::vector<OracleCheckRow> oracle_check(const std::vector<std::uint64_t>& seeds, const PddOptions& pdd,
                                         const OracleOptions& oracle, const std::string& out_dir = "");

}  // namespace uavmec
