#include "uavmec/convex_program.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <tuple>
#include <unordered_map>

namespace uavmec {

Affine& Affine::operator+=(const Affine& o) {
  terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
  constant_ += o.constant_;
  return *this;
}

Affine& Affine::operator-=(const Affine& o) {
  for (auto [id, c] : o.terms_) terms_.emplace_back(id, -c);
  constant_ -= o.constant_;
  return *this;
}

Affine& Affine::operator*=(double k) {
  for (auto& t : terms_) t.second *= k;
  constant_ *= k;
  return *this;
}

double Affine::evaluate(const std::vector<double>& x) const {
  double v = constant_;
  for (auto [id, c] : terms_) v += c * x.at(static_cast<size_t>(id));
  return v;
}

Affine operator+(Affine a, const Affine& b) { return a += b; }
Affine operator-(Affine a, const Affine& b) { return a -= b; }
Affine operator-(Affine a) { return a *= -1.0; }
Affine operator*(double k, Affine a) { return a *= k; }
Affine operator*(Affine a, double k) { return a *= k; }

Var ConvexProgram::add_variable(std::string name, double lb, double ub) {
  if (lb > ub) throw ProgramError("variable '" + name + "' has lb > ub");
  Var v{static_cast<int>(names_.size())};
  names_.push_back(std::move(name));
  if (std::isfinite(lb)) add_le(Affine(lb), v);
  if (std::isfinite(ub)) add_le(v, Affine(ub));
  return v;
}

Var ConvexProgram::variable(const std::string& name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw ProgramError("unknown variable '" + name + "'");
  return Var{static_cast<int>(it - names_.begin())};
}

Affine ConvexProgram::check(const Affine& a) const {
  for (auto [id, c] : a.terms()) {
    if (id < 0 || id >= num_variables()) throw ProgramError("expression references an unknown variable");
    if (!std::isfinite(c)) throw ProgramError("non-finite coefficient");
  }
  if (!std::isfinite(a.constant())) throw ProgramError("non-finite constant");
  return a;
}

void ConvexProgram::add_equality(const Affine& lhs, const Affine& rhs) {
  records_.push_back({RecordKind::Eq, static_cast<int>(eq_rows_.size()), 0, 0});
  eq_rows_.push_back(check(lhs - rhs));
}

void ConvexProgram::add_le(const Affine& lhs, const Affine& rhs) {
  records_.push_back({RecordKind::Le, static_cast<int>(le_rows_.size()), 0, 0});
  le_rows_.push_back(check(lhs - rhs));
}

void ConvexProgram::push_cone(const std::vector<Affine>& rows) {
  for (const auto& r : rows) cone_rows_.push_back(check(r));
  cone_dims_.push_back(static_cast<int>(rows.size()));
}

void ConvexProgram::add_norm_le(const std::vector<Affine>& xs, const Affine& t) {
  const int first = static_cast<int>(cone_dims_.size());
  std::vector<Affine> rows{t};
  rows.insert(rows.end(), xs.begin(), xs.end());
  push_cone(rows);
  records_.push_back({RecordKind::Cone, 0, first, 1});
}

void ConvexProgram::add_quad_over_lin_le(const std::vector<Affine>& xs, const Affine& y, const Affine& t) {
  // ||x||^2 <= y t  <=>  ||(2x, y - t)|| <= y + t
  const int first = static_cast<int>(cone_dims_.size());
  std::vector<Affine> rows{y + t};
  for (const auto& x : xs) rows.push_back(2.0 * x);
  rows.push_back(y - t);
  push_cone(rows);
  records_.push_back({RecordKind::Cone, 0, first, 1});
}

void ConvexProgram::add_square_le(const Affine& x, const Affine& t) { add_quad_over_lin_le({x}, 1.0, t); }

void ConvexProgram::add_inverse_le(const Affine& x, const Affine& t) { add_quad_over_lin_le({1.0}, x, t); }

void ConvexProgram::add_power_ratio_le(const Affine& x, const Affine& y, const Affine& t) {
  // x^3/y^2 <= t  via  x^2/y <= w,  w^2/x <= t
  const int first = static_cast<int>(cone_dims_.size());
  const Var w = add_variable("_aux" + std::to_string(num_variables()));
  push_cone({y + w, 2.0 * x, y - Affine(w)});
  push_cone({x + t, 2.0 * Affine(w), x - t});
  records_.push_back({RecordKind::Cone, 0, first, 2});
}

void ConvexProgram::add_fourth_power_le(const Affine& x, const Affine& t) {
  const int first = static_cast<int>(cone_dims_.size());
  const Var s = add_variable("_aux" + std::to_string(num_variables()));
  push_cone({1.0 + Affine(s), 2.0 * x, 1.0 - Affine(s)});
  push_cone({1.0 + t, 2.0 * Affine(s), 1.0 - t});
  records_.push_back({RecordKind::Cone, 0, first, 2});
}

void ConvexProgram::add_atom(const std::string& atom, const std::vector<std::vector<Affine>>& args) {
  auto scalar = [&](size_t i) -> const Affine& {
    if (args.at(i).size() != 1) throw ProgramError("atom '" + atom + "': argument " + std::to_string(i) + " must be scalar");
    return args[i][0];
  };
  auto arity = [&](size_t n) {
    if (args.size() != n)
      throw ProgramError("atom '" + atom + "' expects " + std::to_string(n) + " arguments, got " +
                         std::to_string(args.size()));
  };
  if (atom == "bilinear" || atom == "product")
    throw ProgramError("atom '" + atom + "' (x*y) is not convex; use a convex surrogate");
  if (atom == "eq") {
    arity(2);
    add_equality(scalar(0), scalar(1));
  } else if (atom == "le") {
    arity(2);
    add_le(scalar(0), scalar(1));
  } else if (atom == "norm") {
    arity(2);
    if (args[0].empty()) throw ProgramError("atom 'norm' needs a non-empty vector");
    add_norm_le(args[0], scalar(1));
  } else if (atom == "quad_over_lin") {
    arity(3);
    if (args[0].empty()) throw ProgramError("atom 'quad_over_lin' needs a non-empty vector");
    add_quad_over_lin_le(args[0], scalar(1), scalar(2));
  } else if (atom == "square") {
    arity(2);
    add_square_le(scalar(0), scalar(1));
  } else if (atom == "inverse") {
    arity(2);
    add_inverse_le(scalar(0), scalar(1));
  } else if (atom == "power_ratio") {
    arity(3);
    add_power_ratio_le(scalar(0), scalar(1), scalar(2));
  } else if (atom == "fourth_power") {
    arity(2);
    add_fourth_power_le(scalar(0), scalar(1));
  } else {
    throw ProgramError("unknown atom '" + atom + "'");
  }
}

namespace {

void append_row(std::vector<Eigen::Triplet<double>>& t, int row, const Affine& a, double sign) {
  for (auto [id, c] : a.terms()) t.emplace_back(row, id, sign * c);
}

double abs_scale(const Affine& a, const std::vector<double>& x) {
  double s = 1.0 + std::abs(a.constant());
  for (auto [id, c] : a.terms()) s += std::abs(c * x[static_cast<size_t>(id)]);
  return s;
}

}  // namespace

ProgramSolution ConvexProgram::solve(const SolveOptions& opts) const {
  const int n = num_variables();
  const int p = static_cast<int>(eq_rows_.size());
  const int l = static_cast<int>(le_rows_.size());
  const int q = static_cast<int>(cone_rows_.size());

  ConeProblem prob;
  prob.c = Eigen::VectorXd::Zero(n);
  const Affine obj = check(objective_);
  for (auto [id, c] : obj.terms()) prob.c[id] += c;

  std::vector<Eigen::Triplet<double>> ta, tg;
  prob.b.resize(p);
  for (int i = 0; i < p; ++i) {
    append_row(ta, i, eq_rows_[i], 1.0);
    prob.b[i] = -eq_rows_[i].constant();
  }
  prob.h.resize(l + q);
  for (int i = 0; i < l; ++i) {
    append_row(tg, i, le_rows_[i], 1.0);
    prob.h[i] = -le_rows_[i].constant();
  }
  for (int i = 0; i < q; ++i) {
    append_row(tg, l + i, cone_rows_[i], -1.0);
    prob.h[l + i] = cone_rows_[i].constant();
  }
  prob.A.resize(p, n);
  prob.A.setFromTriplets(ta.begin(), ta.end());
  prob.G.resize(l + q, n);
  prob.G.setFromTriplets(tg.begin(), tg.end());
  prob.num_linear = l;
  prob.soc_dims = cone_dims_;

  const ConeSolution cs = solve_cone_problem(prob, opts.ipm);
  ProgramSolution out;
  out.status = cs.status;
  out.iterations = cs.iterations;
  if (cs.status != SolveStatus::Optimal && cs.status != SolveStatus::MaxIterations &&
      cs.status != SolveStatus::NumericalFailure)
    return out;
  if (cs.x.size() != n || !cs.x.allFinite()) {
    out.status = SolveStatus::NumericalFailure;
    return out;
  }
  out.values.assign(cs.x.data(), cs.x.data() + n);
  out.objective = objective_.evaluate(out.values);

  std::vector<int> cone_start(cone_dims_.size() + 1, 0);
  for (size_t k = 0; k < cone_dims_.size(); ++k) cone_start[k + 1] = cone_start[k] + cone_dims_[k];
  out.residuals.reserve(records_.size());
  for (const auto& r : records_) {
    double res = 0.0;
    if (r.kind == RecordKind::Eq) {
      const Affine& a = eq_rows_[static_cast<size_t>(r.first_row)];
      res = std::abs(a.evaluate(out.values)) / abs_scale(a, out.values);
    } else if (r.kind == RecordKind::Le) {
      const Affine& a = le_rows_[static_cast<size_t>(r.first_row)];
      res = std::max(0.0, a.evaluate(out.values)) / abs_scale(a, out.values);
    } else {
      for (int k = r.first_cone; k < r.first_cone + r.cone_count; ++k) {
        const int s = cone_start[static_cast<size_t>(k)];
        const double t = cone_rows_[static_cast<size_t>(s)].evaluate(out.values);
        double nrm = 0.0;
        double scale = 1.0 + std::abs(t);
        for (int i = s + 1; i < cone_start[static_cast<size_t>(k) + 1]; ++i) {
          const double v = cone_rows_[static_cast<size_t>(i)].evaluate(out.values);
          nrm += v * v;
          scale = std::max(scale, 1.0 + std::abs(v));
        }
        res = std::max(res, std::max(0.0, std::sqrt(nrm) - t) / scale);
      }
    }
    out.residuals.push_back(res);
    out.max_residual = std::max(out.max_residual, res);
  }
  if (out.status == SolveStatus::Optimal && !(out.max_residual <= opts.residual_tol))
    out.status = SolveStatus::NumericalFailure;
  return out;
}

void ConvexProgram::write_cbf(std::ostream& os) const {
  const int n = num_variables();
  const int p = static_cast<int>(eq_rows_.size());
  const int l = static_cast<int>(le_rows_.size());
  const int q = static_cast<int>(cone_rows_.size());
  os.precision(17);
  os << "VER\n3\n\nOBJSENSE\nMIN\n\nVAR\n" << n << " 1\nF " << n << "\n\n";
  // Rows: equalities (L=), linear a'x + c <= 0 written as -a'x - c in L+,
  // then cone rows in Q.
  int blocks = (p > 0) + (l > 0) + static_cast<int>(cone_dims_.size());
  os << "CON\n" << (p + l + q) << ' ' << blocks << '\n';
  if (p) os << "L= " << p << '\n';
  if (l) os << "L+ " << l << '\n';
  for (int d : cone_dims_) os << "Q " << d << '\n';
  os << '\n';
  std::vector<std::tuple<int, int, double>> acoord;
  std::vector<std::pair<int, double>> bcoord;
  int row = 0;
  auto emit = [&](const Affine& a, double sign) {
    std::unordered_map<int, double> merged;
    for (auto [id, c] : a.terms()) merged[id] += sign * c;
    for (auto [id, c] : merged)
      if (c != 0.0) acoord.emplace_back(row, id, c);
    if (a.constant() != 0.0) bcoord.emplace_back(row, sign * a.constant());
    ++row;
  };
  for (const auto& a : eq_rows_) emit(a, 1.0);
  for (const auto& a : le_rows_) emit(a, -1.0);
  for (const auto& a : cone_rows_) emit(a, 1.0);
  std::unordered_map<int, double> obj;
  for (auto [id, c] : objective_.terms()) obj[id] += c;
  os << "OBJACOORD\n" << obj.size() << '\n';
  for (auto [id, c] : obj) os << id << ' ' << c << '\n';
  if (objective_.constant() != 0.0) os << "\nOBJBCOORD\n" << objective_.constant() << '\n';
  os << "\nACOORD\n" << acoord.size() << '\n';
  for (auto& [r, c, v] : acoord) os << r << ' ' << c << ' ' << v << '\n';
  os << "\nBCOORD\n" << bcoord.size() << '\n';
  for (auto& [r, v] : bcoord) os << r << ' ' << v << '\n';
}

namespace {

Affine parse_expr(const nlohmann::json& j, const ConvexProgram& prog) {
  if (j.is_number()) return Affine(j.get<double>());
  if (j.is_string()) return Affine(prog.variable(j.get<std::string>()));
  if (!j.is_object()) throw ProgramError("expression must be a number, a variable name or an object");
  Affine a(j.value("const", 0.0));
  if (j.contains("terms")) {
    for (auto it = j["terms"].begin(); it != j["terms"].end(); ++it) {
      if (!it.value().is_number()) throw ProgramError("term coefficient must be numeric");
      a.add_term(prog.variable(it.key()).id, it.value().get<double>());
    }
  }
  return a;
}

std::vector<Affine> parse_vector(const nlohmann::json& j, const ConvexProgram& prog) {
  std::vector<Affine> out;
  if (j.is_array())
    for (const auto& e : j) out.push_back(parse_expr(e, prog));
  else
    out.push_back(parse_expr(j, prog));
  return out;
}

}  // namespace

ConvexProgram ConvexProgram::from_json(const nlohmann::json& j) {
  ConvexProgram prog;
  if (!j.contains("variables") || !j["variables"].is_array()) throw ProgramError("missing 'variables' array");
  for (const auto& v : j["variables"]) {
    const std::string name = v.at("name").get<std::string>();
    const int dim = v.value("dim", 1);
    if (dim < 1) throw ProgramError("variable '" + name + "' has non-positive dimension");
    const double lb = v.contains("lb") && !v["lb"].is_null() ? v["lb"].get<double>() : -kInf;
    const double ub = v.contains("ub") && !v["ub"].is_null() ? v["ub"].get<double>() : kInf;
    if (dim == 1)
      prog.add_variable(name, lb, ub);
    else
      for (int i = 0; i < dim; ++i) prog.add_variable(name + "[" + std::to_string(i) + "]", lb, ub);
  }
  if (j.contains("constraints")) {
    for (const auto& c : j["constraints"]) {
      const std::string atom = c.at("atom").get<std::string>();
      std::vector<std::vector<Affine>> args;
      auto arg = [&](const char* key) {
        if (!c.contains(key)) throw ProgramError("atom '" + atom + "' missing field '" + key + "'");
        return parse_vector(c[key], prog);
      };
      if (atom == "eq" || atom == "le") {
        args = {arg("lhs"), arg("rhs")};
      } else if (atom == "norm" || atom == "square" || atom == "inverse" || atom == "fourth_power") {
        args = {arg("x"), arg("t")};
      } else if (atom == "quad_over_lin" || atom == "power_ratio") {
        args = {arg("x"), arg("y"), arg("t")};
      } else if (atom == "bilinear" || atom == "product") {
        args = {arg("x"), arg("y")};
      }
      prog.add_atom(atom, args);
    }
  }
  if (j.contains("minimize")) prog.minimize(parse_expr(j["minimize"], prog));
  return prog;
}

}  // namespace uavmec
