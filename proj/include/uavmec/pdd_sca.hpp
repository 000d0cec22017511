#pragma once

#include "uavmec/scenario.hpp"
#include "uavmec/subproblems.hpp"
#include "uavmec/task_graph.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace uavmec {

struct PddState {
  Tensor3 aux;   // x tilde
  Tensor3 lam1;  // multiplier of x (x~ - 1) = 0
  Tensor3 lam2;  // multiplier of x - x~ = 0
  double rho = 0.1;
  double eta = 1e-3;
  double decay = 0.9;
  int outer = 0;
  int inner = 0;
  std::vector<double> h_history;

  AlTerms al_terms() const { return AlTerms{&aux, &lam1, &lam2, rho}; }
};

struct PddOptions {
  int max_inner = 20;
  int max_outer = 50;
  double inner_tol = 1e-3;  // |change of AL objective| between sweeps
  double h_tol = 1e-10;
  double rho0 = 0.1;
  double rho_decay = 0.9;
  double eta0 = 0.0;  // <= 0: the violation of the starting point (x~ = x)
  double eta_factor = 0.7;
  double circle_radius_m = 5.0;
  bool optimize_trajectory = true;  // false keeps the initial path throughout
  bool hover_start = false;         // start from hovering UAVs instead of the circle
  double descent_tol = 1e-6;
  int max_repair = 20;
  double repair_tol = 1e-7;  // relative cost change ending the integral repair
  BlockOptions block;
};

// One block update of the inner loop. `candidate` is the AL objective of the
// block's raw output; an update that fails to descend is rejected and the
// iterate kept, so `al_objective` is the accepted value.
struct TraceRow {
  int outer = 0;
  int inner = 0;
  std::string block;  // "aux", "offload", "trajectory"
  double previous = 0.0;
  double candidate = 0.0;
  double al_objective = 0.0;
  double cost = 0.0;
  double h = 0.0;
  double rho = 0.0;
  double residual = 0.0;
  bool accepted = true;
  SolveStatus status = SolveStatus::Optimal;
};

struct PddResult {
  Decision decision;       // integral, after the frozen re-solve
  MetricsReport metrics;
  Decision relaxed;        // last iterate before rounding
  double relaxed_cost = 0.0;
  double rounded_cost = 0.0;  // rounded X with the relaxed F, tau, Q
  double max_rounding_change = 0.0;
  double model_objective = 0.0;  // block objective behind the final decision
  bool converged = false;   // h < h_tol within the outer budget
  bool rounding_warning = false;
  bool start_feasible = true;
  bool stalled = false;     // every block failed in some inner sweep
  int outer_iterations = 0;
  std::vector<TraceRow> trace;
  std::vector<double> h_history;
  std::vector<double> rho_history;
};

// Circular path of the given radius through each UAV's start: waypoints 0..2
// and 2N-2..2N at the start, the rest evenly spaced on the circle.
void set_circle_path(const Scenario& scn, Decision& d, double radius_m);

// Uniform fractions, equal frequency split per device and slot, circle path,
// fitted durations.
Decision initial_decision(const Scenario& scn, const TaskGraph& g, const PddOptions& opts = {});
PddState initial_state(const Scenario& scn, const TaskGraph& g, const Decision& d, const PddOptions& opts = {});

// Closed-form minimiser of the AL term over x~ (clamped to [0,1]).
double auxiliary_value(double x, double rho, double lam1, double lam2);
void update_auxiliary(PddState& st, const TaskGraph& g, const Decision& d);

double violation_indicator(const TaskGraph& g, const Decision& d, const PddState& st);

struct RoundResult {
  bool warning = false;       // some sub-task had no fraction >= 0.5
  double max_change = 0.0;
};
RoundResult round_binaries(const TaskGraph& g, Decision& d);

// Multiplier step when h <= eta, penalty decay otherwise; then eta = factor*h.
// Returns h and appends it to the state's history.
double outer_step(PddState& st, const TaskGraph& g, const Decision& d, double eta_factor = 0.7);

// Runs inner sweeps at fixed (rho, lambda); appends to trace. Returns false
// when a whole sweep failed.
bool inner_loop(const Scenario& scn, const TaskGraph& g, Decision& d, PddState& st, const PddOptions& opts,
                std::vector<TraceRow>& trace);

// Alternating exact blocks with X frozen at integral values. The last
// accepted block's own objective goes to `model_objective` (NaN if none).
Decision integral_repair(const Scenario& scn, const TaskGraph& g, const Decision& d, const PddOptions& opts,
                         double* model_objective = nullptr);

PddResult run_pdd_sca(const Scenario& scn, const TaskGraph& g, const PddOptions& opts = {});

}  // namespace uavmec
