#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <string>
#include <vector>

namespace uavmec {

// Standard-form conic program
//   minimize c'x  s.t.  A x = b,  G x + s = h,  s in K
// with K = R+^num_linear x Q^{soc_dims[0]} x Q^{soc_dims[1]} x ...
// A second-order cone Q^d = {(t, u) in R x R^{d-1} : ||u|| <= t}.
struct ConeProblem {
  Eigen::VectorXd c;
  Eigen::SparseMatrix<double> A;
  Eigen::VectorXd b;
  Eigen::SparseMatrix<double> G;
  Eigen::VectorXd h;
  int num_linear = 0;
  std::vector<int> soc_dims;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, MaxIterations, NumericalFailure };

std::string to_string(SolveStatus s);

struct IpmSettings {
  double feas_tol = 1e-8;
  double abs_tol = 1e-8;
  double rel_tol = 1e-8;
  int max_iterations = 200;
  double step_fraction = 0.99;
  double static_reg = 1e-10;
  int refinement_steps = 10;
  // A stalled run whose best iterate has max(primal res, dual res, gap)
  // below this is still reported optimal (reduced accuracy).
  double inaccurate_tol = 1e-4;
  int stall_iterations = 20;  // iterations without halving the merit
  int equilibration_passes = 15;  // Ruiz passes; 0 disables
};

struct ConeSolution {
  SolveStatus status = SolveStatus::NumericalFailure;
  Eigen::VectorXd x, y, z, s;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
  int iterations = 0;
};

// Homogeneous self-dual interior point method with Nesterov-Todd scaling.
// Throws std::invalid_argument on inconsistent dimensions.
ConeSolution solve_cone_problem(const ConeProblem& prob, const IpmSettings& settings = {});

}  // namespace uavmec
