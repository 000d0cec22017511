#pragma once

#include "uavmec/convex_program.hpp"
#include "uavmec/scenario.hpp"
#include "uavmec/task_graph.hpp"

#include <vector>

namespace uavmec {

using Tensor3 = std::vector<std::vector<std::vector<double>>>;

// Augmented-Lagrangian data of the binary relaxation, shaped like Decision::x.
struct AlTerms {
  const Tensor3* aux = nullptr;   // x tilde
  const Tensor3* lam1 = nullptr;  // multiplier of x (x~ - 1) = 0
  const Tensor3* lam2 = nullptr;  // multiplier of x - x~ = 0
  double rho = 0.1;
};

struct BlockOptions {
  double slack_weight = 1e3;  // elastic deadline / budget slacks
  double f_floor_ghz = 1e-3;
  double tau_floor_s = 1e-4;
  // Rescales f-hat and f-check inside the x*f surrogates (see bilinear_surrogate).
  double inv_freq_scale = 1.0;
  double sq_freq_scale = 1.0;
  SolveOptions solve;
};

struct BlockResult {
  SolveStatus status = SolveStatus::NumericalFailure;
  Decision decision;
  double model_objective = 0.0;  // surrogate objective at the block optimum
  int iterations = 0;
  int num_variables = 0;
};

// Offloading / frequency / unit-duration block with the trajectory fixed.
// With `al` set, x is a variable and every bilinear term goes through its
// surrogate at the current decision; with `al` null, x is frozen at the
// current values and the block is the exact convex problem in (F, tau) except
// for the induced-power term of moving UAVs, which stays linearised.
BlockResult solve_offload_freq(const Scenario& scn, const TaskGraph& g, const Decision& cur, const AlTerms* al,
                               const BlockOptions& opts = {});

// Trajectory / communication-unit block with X, F and tau_comp fixed.
BlockResult solve_trajectory(const Scenario& scn, const TaskGraph& g, const Decision& cur,
                             const BlockOptions& opts = {});

// Penalised objective the blocks descend on: exact cost, elastic penalties on
// the deadline and energy budgets, and the AL term when `al` is set.
struct AlObjective {
  double cost = 0.0;
  double slack_penalty = 0.0;
  double al_penalty = 0.0;
  double total() const { return cost + slack_penalty + al_penalty; }
};
AlObjective al_objective(const Scenario& scn, const TaskGraph& g, const Decision& d, const AlTerms* al,
                         double slack_weight = 1e3);

// Units that carry no work by construction: slot-0 computation and the whole
// sink slot. Their durations are pinned to zero.
bool unit_is_pinned(int unit, int num_slots);

// Sets tau_comp / tau_comm to the smallest values covering computation,
// transfers, the motion limit and the numerical floors.
void fit_unit_durations(const Scenario& scn, const TaskGraph& g, Decision& d, double tau_floor_s = 1e-4);

}  // namespace uavmec
