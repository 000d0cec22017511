#pragma once

#include "uavmec/conic_solver.hpp"

#include <iosfwd>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace uavmec {

class ProgramError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Var {
  int id = -1;
};

// Sparse affine expression sum_i a_i x_i + constant. Duplicate ids are allowed
// and summed when the program is assembled.
class Affine {
 public:
  Affine() = default;
  Affine(double c) : constant_(c) {}  // NOLINT(implicit)
  Affine(Var v) { terms_.emplace_back(v.id, 1.0); }  // NOLINT(implicit)

  const std::vector<std::pair<int, double>>& terms() const { return terms_; }
  double constant() const { return constant_; }

  Affine& add_term(int id, double coef) {
    if (coef != 0.0) terms_.emplace_back(id, coef);
    return *this;
  }
  Affine& operator+=(const Affine& o);
  Affine& operator-=(const Affine& o);
  Affine& operator*=(double k);

  double evaluate(const std::vector<double>& x) const;

 private:
  std::vector<std::pair<int, double>> terms_;
  double constant_ = 0.0;
};

Affine operator+(Affine a, const Affine& b);
Affine operator-(Affine a, const Affine& b);
Affine operator-(Affine a);
Affine operator*(double k, Affine a);
Affine operator*(Affine a, double k);

struct SolveOptions {
  IpmSettings ipm;
  // A claimed optimum whose normalised constraint residuals exceed this is
  // reported as a numerical failure instead.
  double residual_tol = 1e-6;
};

struct ProgramSolution {
  SolveStatus status = SolveStatus::NumericalFailure;
  std::vector<double> values;  // indexed by Var::id (auxiliaries included)
  double objective = 0.0;
  std::vector<double> residuals;  // one per user constraint, normalised
  double max_residual = 0.0;
  int iterations = 0;

  bool optimal() const { return status == SolveStatus::Optimal; }
  double operator[](Var v) const { return values.at(static_cast<size_t>(v.id)); }
  double value(const Affine& a) const { return a.evaluate(values); }
};

// Convex program assembled from a fixed set of SOC-representable atoms.
// Every atom is lowered to second-order cones as soon as it is added.
class ConvexProgram {
 public:
  static constexpr double kInf = std::numeric_limits<double>::infinity();

  Var add_variable(std::string name, double lb = -kInf, double ub = kInf);
  int num_variables() const { return static_cast<int>(names_.size()); }
  const std::string& name(Var v) const { return names_.at(static_cast<size_t>(v.id)); }

  void add_equality(const Affine& lhs, const Affine& rhs = 0.0);
  void add_le(const Affine& lhs, const Affine& rhs);
  void add_ge(const Affine& lhs, const Affine& rhs) { add_le(rhs, lhs); }

  // ||xs|| <= t
  void add_norm_le(const std::vector<Affine>& xs, const Affine& t);
  // ||xs||^2 / y <= t   (y > 0)
  void add_quad_over_lin_le(const std::vector<Affine>& xs, const Affine& y, const Affine& t);
  // x^2 <= t
  void add_square_le(const Affine& x, const Affine& t);
  // 1/x <= t   (x > 0)
  void add_inverse_le(const Affine& x, const Affine& t);
  // x^3 / y^2 <= t   (x >= 0, y > 0)
  void add_power_ratio_le(const Affine& x, const Affine& y, const Affine& t);
  // x^4 <= t
  void add_fourth_power_le(const Affine& x, const Affine& t);

  // Generic entry point by atom name; rejects unknown and non-convex atoms.
  void add_atom(const std::string& atom, const std::vector<std::vector<Affine>>& args);

  void minimize(const Affine& objective) { objective_ = objective; }
  const Affine& objective() const { return objective_; }

  int num_constraints() const { return static_cast<int>(records_.size()); }

  ProgramSolution solve(const SolveOptions& opts = {}) const;

  // Conic Benchmark Format dump for debugging with external solvers.
  void write_cbf(std::ostream& os) const;

  // {"variables":[...], "objective":expr, "constraints":[...]}; see README.
  static ConvexProgram from_json(const nlohmann::json& j);
  Var variable(const std::string& name) const;

 private:
  enum class RecordKind { Eq, Le, Cone };
  struct Record {
    RecordKind kind;
    int first_row;
    int first_cone;  // cone records only
    int cone_count;
  };

  void push_cone(const std::vector<Affine>& rows);
  Affine check(const Affine& a) const;

  std::vector<std::string> names_;
  std::vector<Affine> eq_rows_;
  std::vector<Affine> le_rows_;  // row <= 0
  std::vector<Affine> cone_rows_;
  std::vector<int> cone_dims_;
  std::vector<Record> records_;
  Affine objective_;
};

}  // namespace uavmec
