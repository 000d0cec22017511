#include "uavmec/subproblems.hpp"

#include "uavmec/surrogates.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

namespace uavmec {

namespace {

constexpr double kGiga = 1e9;
constexpr double kMega = 1e6;
constexpr double kAreaUnit = 1e3;  // squared distances in units of 1000 m^2

int num_units(int N) { return 2 * N; }

struct UnitVars {
  std::vector<Affine> tau1, tau2;
  Affine of(int unit) const { return unit % 2 == 0 ? tau1[static_cast<size_t>(unit / 2)] : tau2[static_cast<size_t>(unit / 2)]; }
};

// Shared bookkeeping: energy expressions per device / UAV, slack variables and
// the objective pieces that both blocks assemble the same way.
struct Accumulator {
  std::vector<Affine> energy_com;   // per device (comm + comp), J
  std::vector<Affine> energy_prop;  // per UAV, J
  Affine delay;

  Accumulator(int D, int M) : energy_com(static_cast<size_t>(D)), energy_prop(static_cast<size_t>(M)) {}

  // Budgets, deadline and objective (without AL); returns the objective.
  Affine finish(ConvexProgram& P, const Scenario& scn, const TaskGraph& g, const BlockOptions& o) const {
    Affine obj = scn.weight_delay * delay;
    const double W = o.slack_weight;
    const Var sd = P.add_variable("slack_deadline", 0.0);
    P.add_le(delay, g.min_deadline() + Affine(sd));
    obj += W * Affine(sd);
    for (size_t z = 0; z < energy_com.size(); ++z) {
      obj += scn.weight_com[z] * energy_com[z];
      const Var s = P.add_variable("slack_energy", 0.0);
      P.add_le(energy_com[z], scn.energy_budget_com[z] + Affine(s));
      obj += W * Affine(s);
    }
    for (size_t m = 0; m < energy_prop.size(); ++m) {
      obj += scn.weight_fly[m] * energy_prop[m];
      const Var s = P.add_variable("slack_prop", 0.0);
      P.add_le(energy_prop[m], scn.energy_budget_prop[m] + Affine(s));
      obj += W * Affine(s);
    }
    return obj;
  }
};

// Slot of every node, and edges leaving each slot.
struct EdgeRef {
  int u;
  const Edge* e;
};
std::vector<std::vector<EdgeRef>> edges_by_slot(const TaskGraph& g) {
  std::vector<std::vector<EdgeRef>> out(static_cast<size_t>(g.num_layers));
  for (int u = 0; u < g.num_tds(); ++u) {
    const auto& t = g.tasks[static_cast<size_t>(u)];
    for (const auto& e : t.edges) out[static_cast<size_t>(t.nodes[static_cast<size_t>(e.from)].layer)].push_back({u, &e});
  }
  return out;
}

double clampd(double v, double lo, double hi) { return std::min(hi, std::max(lo, v)); }

// Duration variables; pinned units are the constant zero.
UnitVars make_unit_vars(ConvexProgram& P, const Scenario& scn, int N, const BlockOptions& o, bool tau1_fixed,
                        const Decision& cur) {
  UnitVars uv;
  for (int n = 0; n < N; ++n) {
    const int u1 = 2 * n, u2 = 2 * n + 1;
    if (unit_is_pinned(u1, N))
      uv.tau1.emplace_back(0.0);
    else if (tau1_fixed)
      uv.tau1.emplace_back(cur.tau_comp[static_cast<size_t>(n)]);
    else
      uv.tau1.emplace_back(P.add_variable("tau1", o.tau_floor_s));
    if (unit_is_pinned(u2, N)) {
      uv.tau2.emplace_back(0.0);
    } else {
      const double ub = n >= 1 ? scn.max_comm_unit_s : ConvexProgram::kInf;
      uv.tau2.emplace_back(P.add_variable("tau2", o.tau_floor_s, ub));
    }
  }
  return uv;
}

bool is_constant(const Affine& a) { return a.terms().empty(); }

}  // namespace

bool unit_is_pinned(int unit, int N) { return unit == 0 || unit >= 2 * N - 2; }

void fit_unit_durations(const Scenario& scn, const TaskGraph& g, Decision& d, double floor) {
  const int N = g.num_layers;
  for (int n = 0; n < N; ++n) {
    const auto comp = comp_times(scn, g, d, n);
    const auto comm = comm_times(scn, g, d, n);
    double t1 = *std::max_element(comp.begin(), comp.end());
    double t2 = *std::max_element(comm.begin(), comm.end());
    for (int m = 0; m < scn.num_uavs; ++m) {
      const auto& q = d.traj[static_cast<size_t>(m)];
      t1 = std::max(t1, (q[static_cast<size_t>(2 * n + 1)] - q[static_cast<size_t>(2 * n)]).norm() / scn.max_speed);
      t2 = std::max(t2, (q[static_cast<size_t>(2 * n + 2)] - q[static_cast<size_t>(2 * n + 1)]).norm() / scn.max_speed);
    }
    d.tau_comp[static_cast<size_t>(n)] = unit_is_pinned(2 * n, N) ? t1 : std::max(t1, floor);
    d.tau_comm[static_cast<size_t>(n)] = unit_is_pinned(2 * n + 1, N) ? t2 : std::max(t2, floor);
  }
}

AlObjective al_objective(const Scenario& scn, const TaskGraph& g, const Decision& d, const AlTerms* al,
                         double W) {
  AlObjective r;
  const MetricsReport m = system_cost(scn, g, d);
  r.cost = m.total_cost;
  double s = std::max(0.0, m.total_delay_s - g.min_deadline());
  for (int z = 0; z < scn.num_devices(); ++z)
    s += std::max(0.0, m.comm_energy_j[static_cast<size_t>(z)] + m.comp_energy_j[static_cast<size_t>(z)] -
                           scn.energy_budget_com[static_cast<size_t>(z)]);
  for (int k = 0; k < scn.num_uavs; ++k)
    s += std::max(0.0, m.prop_energy_j[static_cast<size_t>(k)] - scn.energy_budget_prop[static_cast<size_t>(k)]);
  r.slack_penalty = W * s;
  if (al) {
    double psi = 0.0;
    for (int u = 0; u < g.num_tds(); ++u) {
      const auto& t = g.tasks[static_cast<size_t>(u)];
      for (int k = 1; k < t.sink(); ++k)
        for (int z = 0; z < scn.num_choices(); ++z) {
          const double x = d.x[static_cast<size_t>(u)][static_cast<size_t>(k)][static_cast<size_t>(z)];
          const double xt = (*al->aux)[static_cast<size_t>(u)][static_cast<size_t>(k)][static_cast<size_t>(z)];
          const double l1 = (*al->lam1)[static_cast<size_t>(u)][static_cast<size_t>(k)][static_cast<size_t>(z)];
          const double l2 = (*al->lam2)[static_cast<size_t>(u)][static_cast<size_t>(k)][static_cast<size_t>(z)];
          const double a = x * (xt - 1) + al->rho * l1, b = x - xt + al->rho * l2;
          psi += a * a + b * b;
        }
    }
    r.al_penalty = psi / (2 * al->rho);
  }
  return r;
}

BlockResult solve_offload_freq(const Scenario& scn, const TaskGraph& g, const Decision& cur, const AlTerms* al,
                               const BlockOptions& o) {
  const int M = scn.num_uavs, N = g.num_layers, Z = scn.num_choices(), D = scn.num_devices();
  const bool relaxed = al != nullptr;
  ConvexProgram P;
  const UnitVars uv = make_unit_vars(P, scn, N, o, false, cur);
  Accumulator acc(D, M);

  // x as affine (variables for interior nodes in relaxed mode), f per entry.
  std::vector<std::vector<std::vector<Affine>>> X(g.tasks.size());
  std::vector<std::vector<std::vector<int>>> fvar(g.tasks.size());
  std::vector<std::vector<Affine>> cap_load(static_cast<size_t>(D), std::vector<Affine>(static_cast<size_t>(N)));
  std::vector<Affine> al_rows;
  for (int u = 0; u < g.num_tds(); ++u) {
    const auto& t = g.tasks[static_cast<size_t>(u)];
    X[static_cast<size_t>(u)].resize(t.nodes.size());
    fvar[static_cast<size_t>(u)].assign(t.nodes.size(), std::vector<int>(static_cast<size_t>(Z), -1));
    for (int k = 0; k < static_cast<int>(t.nodes.size()); ++k) {
      auto& xs = X[static_cast<size_t>(u)][static_cast<size_t>(k)];
      const auto& xc = cur.x[static_cast<size_t>(u)][static_cast<size_t>(k)];
      const bool var = relaxed && t.is_interior(k);
      Affine sum;
      for (int z = 0; z < Z; ++z) {
        if (var) {
          const Var v = P.add_variable("x", 0.0, 1.0);
          xs.emplace_back(v);
          sum += Affine(v);
        } else {
          xs.emplace_back(xc[static_cast<size_t>(z)]);
        }
      }
      if (var) P.add_equality(sum, 1.0);
      if (!t.is_interior(k)) continue;

      const int layer = t.nodes[static_cast<size_t>(k)].layer;
      const double mbits = t.nodes[static_cast<size_t>(k)].compute_bits / kMega;
      for (int z = 0; z < Z; ++z) {
        const double xj = clampd(xc[static_cast<size_t>(z)], 0.0, 1.0);
        if (!var && xj <= 0.0) continue;
        const int dev = scn.device_of(u, z);
        const double cap = scn.cpu_max(dev) / kGiga;
        const double cpb = scn.cycles_per_bit[static_cast<size_t>(dev)];
        const double a = mbits * cpb * 1e-3;  // Gcycles
        const double ecoef = mbits * kMega * cpb * scn.capacitance[static_cast<size_t>(dev)] * 1e18;
        const double fj = clampd(cur.f[static_cast<size_t>(u)][static_cast<size_t>(k)][static_cast<size_t>(z)] / kGiga,
                                 o.f_floor_ghz, cap);
        const Var f = P.add_variable("f", o.f_floor_ghz, cap);
        fvar[static_cast<size_t>(u)][static_cast<size_t>(k)][static_cast<size_t>(z)] = f.id;
        const Var fh = P.add_variable("f_inv");
        const Var fs = P.add_variable("f_sq");
        P.add_inverse_le(f, fh);
        P.add_square_le(f, fs);
        cap_load[static_cast<size_t>(dev)][static_cast<size_t>(layer)] += Affine(f);
        Affine time, energy;
        if (var) {
          const double s_inv = o.inv_freq_scale, s_sq = o.sq_freq_scale;
          time = a * add_bilinear_surrogate(P, xs[static_cast<size_t>(z)], fh, xj, 1.0 / fj, s_inv);
          energy = ecoef * add_bilinear_surrogate(P, xs[static_cast<size_t>(z)], fs, xj, fj * fj, s_sq);
          const auto& xt = (*al->aux)[static_cast<size_t>(u)][static_cast<size_t>(k)][static_cast<size_t>(z)];
          const auto& l1 = (*al->lam1)[static_cast<size_t>(u)][static_cast<size_t>(k)][static_cast<size_t>(z)];
          const auto& l2 = (*al->lam2)[static_cast<size_t>(u)][static_cast<size_t>(k)][static_cast<size_t>(z)];
          al_rows.push_back((xt - 1.0) * xs[static_cast<size_t>(z)] + al->rho * l1);
          al_rows.push_back(xs[static_cast<size_t>(z)] - xt + al->rho * l2);
        } else {
          time = (a * xj) * Affine(fh);
          energy = (ecoef * xj) * Affine(fs);
        }
        P.add_le(time, uv.tau1[static_cast<size_t>(layer)]);
        acc.energy_com[static_cast<size_t>(dev)] += energy;
      }
    }
  }
  for (int dev = 0; dev < D; ++dev)
    for (int n = 0; n < N; ++n)
      if (!cap_load[static_cast<size_t>(dev)][static_cast<size_t>(n)].terms().empty())
        P.add_le(cap_load[static_cast<size_t>(dev)][static_cast<size_t>(n)], scn.cpu_max(dev) / kGiga);

  // Transfers with rates from the fixed trajectory.
  const auto by_slot = edges_by_slot(g);
  for (int n = 0; n < N; ++n) {
    std::map<std::pair<int, int>, Affine> omega;  // Mbit per (sender, receiver)
    for (const auto& er : by_slot[static_cast<size_t>(n)]) {
      const auto& xs = X[static_cast<size_t>(er.u)][static_cast<size_t>(er.e->from)];
      const auto& xr = X[static_cast<size_t>(er.u)][static_cast<size_t>(er.e->to)];
      const auto& xsj = cur.x[static_cast<size_t>(er.u)][static_cast<size_t>(er.e->from)];
      const auto& xrj = cur.x[static_cast<size_t>(er.u)][static_cast<size_t>(er.e->to)];
      const double o_mb = er.e->bits / kMega;
      for (int z = 0; z < Z; ++z)
        for (int z2 = 0; z2 < Z; ++z2) {
          const int a = scn.device_of(er.u, z), b = scn.device_of(er.u, z2);
          if (a == b) continue;
          const Affine& p = xs[static_cast<size_t>(z)];
          const Affine& q = xr[static_cast<size_t>(z2)];
          Affine prod;
          if (is_constant(p) && is_constant(q)) {
            const double c = p.constant() * q.constant();
            if (c == 0.0) continue;
            prod = c;
          } else if (is_constant(p)) {
            if (p.constant() == 0.0) continue;
            prod = p.constant() * q;
          } else if (is_constant(q)) {
            if (q.constant() == 0.0) continue;
            prod = q.constant() * p;
          } else {
            prod = add_bilinear_surrogate(P, p, q, clampd(xsj[static_cast<size_t>(z)], 0, 1),
                                          clampd(xrj[static_cast<size_t>(z2)], 0, 1));
          }
          omega[{a, b}] += o_mb * prod;
        }
    }
    for (const auto& [ab, w] : omega) {
      const double rate = link_rate_at(scn, cur, ab.first, ab.second, 2 * n + 1) / kMega;
      if (!(rate > 0)) throw InvalidLinkError("zero-rate link in offloading block");
      const Affine t = w * (1.0 / rate);
      P.add_le(t, uv.tau2[static_cast<size_t>(n)]);
      acc.energy_com[static_cast<size_t>(ab.first)] += scn.tx_power(ab.first) * t;
    }
  }

  // Flight energy along the fixed trajectory.
  const Propulsion& pr = scn.propulsion;
  const double v0 = pr.induced_velocity;
  for (int m = 0; m < M; ++m) {
    const auto& q = cur.traj[static_cast<size_t>(m)];
    for (int i = 0; i < num_units(N); ++i) {
      if (unit_is_pinned(i, N)) continue;
      const Affine tau = uv.of(i);
      const double d = (q[static_cast<size_t>(i + 1)] - q[static_cast<size_t>(i)]).norm();
      Affine e = pr.blade_power_w * tau;
      if (d > 0) {
        P.add_ge(tau, d / scn.max_speed);
        const Var gi = P.add_variable("inv_tau");
        P.add_inverse_le(tau, gi);
        const Var hi = P.add_variable("inv_tau_sq");
        P.add_square_le(gi, hi);
        e += (3 * pr.blade_power_w * d * d / (pr.tip_speed * pr.tip_speed)) * Affine(gi);
        e += (pr.parasite_coef() * d * d * d) * Affine(hi);
        const double tj = std::max(cur.unit_duration(i), o.tau_floor_s);
        const double uj = induced_slack_exact(tj, d, v0);
        const Var uvar = P.add_variable("u_ind", 0.0);
        const double k = d * d / (v0 * v0);
        const Affine rhs = (4 * uj * uj * uj + 2 * k * uj) * (Affine(uvar) - uj) + (k * uj * uj + uj * uj * uj * uj);
        P.add_fourth_power_le(tau, rhs);
        e += pr.induced_power_w * Affine(uvar);
      } else {
        e += pr.induced_power_w * tau;
      }
      acc.energy_prop[static_cast<size_t>(m)] += e;
    }
  }

  for (int n = 0; n < N; ++n) acc.delay += uv.tau1[static_cast<size_t>(n)] + uv.tau2[static_cast<size_t>(n)];
  Affine obj = acc.finish(P, scn, g, o);
  if (relaxed && !al_rows.empty()) {
    // One small cone per entry keeps the KKT system sparse.
    Affine psi;
    for (const Affine& r : al_rows) {
      const Var t = P.add_variable("al");
      P.add_square_le(r, t);
      psi += Affine(t);
    }
    obj += (1.0 / (2 * al->rho)) * psi;
  }
  P.minimize(obj);

  BlockResult res;
  res.num_variables = P.num_variables();
  const ProgramSolution sol = P.solve(o.solve);
  res.status = sol.status;
  res.iterations = sol.iterations;
  res.decision = cur;
  if (!sol.optimal()) return res;
  res.model_objective = sol.objective;
  Decision& d = res.decision;
  for (int u = 0; u < g.num_tds(); ++u) {
    const auto& t = g.tasks[static_cast<size_t>(u)];
    for (int k = 0; k < static_cast<int>(t.nodes.size()); ++k)
      for (int z = 0; z < Z; ++z) {
        const Affine& xa = X[static_cast<size_t>(u)][static_cast<size_t>(k)][static_cast<size_t>(z)];
        d.x[static_cast<size_t>(u)][static_cast<size_t>(k)][static_cast<size_t>(z)] =
            clampd(sol.value(xa), 0.0, 1.0);
        const int fv = fvar[static_cast<size_t>(u)][static_cast<size_t>(k)][static_cast<size_t>(z)];
        d.f[static_cast<size_t>(u)][static_cast<size_t>(k)][static_cast<size_t>(z)] =
            fv >= 0 ? sol.values[static_cast<size_t>(fv)] * kGiga : 0.0;
      }
  }
  for (int n = 0; n < N; ++n) {
    d.tau_comp[static_cast<size_t>(n)] = std::max(0.0, sol.value(uv.tau1[static_cast<size_t>(n)]));
    d.tau_comm[static_cast<size_t>(n)] = std::max(0.0, sol.value(uv.tau2[static_cast<size_t>(n)]));
  }
  return res;
}

BlockResult solve_trajectory(const Scenario& scn, const TaskGraph& g, const Decision& cur, const BlockOptions& o) {
  const int M = scn.num_uavs, N = g.num_layers, Z = scn.num_choices(), D = scn.num_devices();
  ConvexProgram P;
  const UnitVars uv = make_unit_vars(P, scn, N, o, true, cur);
  Accumulator acc(D, M);
  const Propulsion& pr = scn.propulsion;
  const double v0 = pr.induced_velocity;

  // Waypoints: first three and last three are pinned to the start.
  auto is_free = [&](int i) { return i >= 3 && i <= 2 * N - 3; };
  std::vector<std::vector<std::array<Affine, 2>>> Q(static_cast<size_t>(M));
  for (int m = 0; m < M; ++m)
    for (int i = 0; i <= 2 * N; ++i) {
      if (is_free(i)) {
        const Var a = P.add_variable("qx"), b = P.add_variable("qy");
        Q[static_cast<size_t>(m)].push_back({Affine(a), Affine(b)});
      } else {
        const Vec2& s = scn.uav_start[static_cast<size_t>(m)];
        Q[static_cast<size_t>(m)].push_back({Affine(s.x()), Affine(s.y())});
      }
    }
  auto diff = [](const std::array<Affine, 2>& p, const std::array<Affine, 2>& q) {
    return std::array<Affine, 2>{p[0] - q[0], p[1] - q[1]};
  };
  // Affine minorizer of ||p||^2 around pj, with p affine.
  auto sq_lin = [](const std::array<Affine, 2>& p, const Vec2& pj) {
    return 2 * pj.x() * p[0] + 2 * pj.y() * p[1] - pj.squaredNorm();
  };

  // Flight energy.
  for (int m = 0; m < M; ++m) {
    const auto& qj = cur.traj[static_cast<size_t>(m)];
    for (int i = 0; i < num_units(N); ++i) {
      if (unit_is_pinned(i, N)) continue;
      const Affine tau = uv.of(i);
      Affine e = pr.blade_power_w * tau;
      if (!is_free(i) && !is_free(i + 1)) {
        e += pr.induced_power_w * tau;  // hover between pinned waypoints
        acc.energy_prop[static_cast<size_t>(m)] += e;
        continue;
      }
      const auto dq = diff(Q[static_cast<size_t>(m)][static_cast<size_t>(i + 1)], Q[static_cast<size_t>(m)][static_cast<size_t>(i)]);
      const Vec2 dqj = qj[static_cast<size_t>(i + 1)] - qj[static_cast<size_t>(i)];
      const Var d = P.add_variable("dist", 0.0);
      P.add_norm_le({dq[0], dq[1]}, d);
      P.add_le(Affine(d), scn.max_speed * tau);
      const Var e1 = P.add_variable("e_blade");
      P.add_quad_over_lin_le({Affine(d)}, tau, e1);
      const Var e2 = P.add_variable("e_parasite");
      P.add_power_ratio_le(d, tau, e2);
      e += (3 * pr.blade_power_w / (pr.tip_speed * pr.tip_speed)) * Affine(e1) + pr.parasite_coef() * Affine(e2);
      const double tj = std::max(cur.unit_duration(i), o.tau_floor_s);
      const double uj = induced_slack_exact(tj, dqj.norm(), v0);
      const Var uvar = P.add_variable("u_ind", 0.0);
      const Var s = P.add_variable("u_aux");
      P.add_quad_over_lin_le({tau}, uvar, s);
      const Var w = P.add_variable("u_aux2");
      P.add_square_le(s, w);
      P.add_le(Affine(w), 2 * uj * Affine(uvar) - uj * uj + (1.0 / (v0 * v0)) * sq_lin(dq, dqj));
      e += pr.induced_power_w * Affine(uvar);
      acc.energy_prop[static_cast<size_t>(m)] += e;
    }
  }

  // Separation, linearised around the current waypoints.
  if (scn.min_separation > 0)
    for (int i = 0; i <= 2 * N; ++i) {
      if (!is_free(i)) continue;
      for (int a = 0; a < M; ++a)
        for (int b = a + 1; b < M; ++b) {
          const auto dq = diff(Q[static_cast<size_t>(a)][static_cast<size_t>(i)], Q[static_cast<size_t>(b)][static_cast<size_t>(i)]);
          const Vec2 dj = cur.traj[static_cast<size_t>(a)][static_cast<size_t>(i)] - cur.traj[static_cast<size_t>(b)][static_cast<size_t>(i)];
          P.add_ge(sq_lin(dq, dj), scn.min_separation * scn.min_separation);
        }
    }

  // Computation energy is constant here.
  for (int n = 0; n < N; ++n) {
    for (const auto& r : g.layer_members(n)) {
      const double bits = g.tasks[static_cast<size_t>(r.td)].nodes[static_cast<size_t>(r.node)].compute_bits;
      for (int z = 0; z < Z; ++z) {
        const int dev = scn.device_of(r.td, z);
        const double x = cur.x[static_cast<size_t>(r.td)][static_cast<size_t>(r.node)][static_cast<size_t>(z)];
        const double f = cur.f[static_cast<size_t>(r.td)][static_cast<size_t>(r.node)][static_cast<size_t>(z)];
        acc.energy_com[static_cast<size_t>(dev)] +=
            x * bits * scn.cycles_per_bit[static_cast<size_t>(dev)] * scn.capacitance[static_cast<size_t>(dev)] * f * f;
      }
    }
  }

  // Transfers: y >= squared distance, pi <= linearised spectral efficiency.
  const auto by_slot = edges_by_slot(g);
  const double bw_mhz = scn.link_bandwidth() / kMega;
  for (int n = 0; n < N; ++n) {
    std::map<std::pair<int, int>, double> omega;
    for (const auto& er : by_slot[static_cast<size_t>(n)]) {
      const auto& xs = cur.x[static_cast<size_t>(er.u)][static_cast<size_t>(er.e->from)];
      const auto& xr = cur.x[static_cast<size_t>(er.u)][static_cast<size_t>(er.e->to)];
      for (int z = 0; z < Z; ++z)
        for (int z2 = 0; z2 < Z; ++z2) {
          const int a = scn.device_of(er.u, z), b = scn.device_of(er.u, z2);
          const double w = xs[static_cast<size_t>(z)] * xr[static_cast<size_t>(z2)] * er.e->bits / kMega;
          if (a != b && w > 0) omega[{a, b}] += w;
        }
    }
    const int wp = 2 * n + 1;
    for (const auto& [ab, w] : omega) {
      const int a = ab.first, b = ab.second;
      const bool free_a = scn.is_uav(a) && is_free(wp), free_b = scn.is_uav(b) && is_free(wp);
      Affine t;
      if (!free_a && !free_b) {
        const double rate = link_rate_at(scn, cur, a, b, wp) / kMega;
        t = w / rate;
      } else {
        auto pos = [&](int dev) -> std::array<Affine, 2> {
          if (scn.is_uav(dev)) return Q[static_cast<size_t>(dev)][static_cast<size_t>(wp)];
          const Vec2& p = scn.td_positions[static_cast<size_t>(dev - M)];
          return {Affine(p.x()), Affine(p.y())};
        };
        const bool air_ground = scn.is_uav(a) != scn.is_uav(b);
        const double h2 = air_ground ? scn.altitude_m * scn.altitude_m : 0.0;
        const auto dq = diff(pos(a), pos(b));
        const Var y = P.add_variable("sqdist", 1e-9);
        P.add_quad_over_lin_le({dq[0], dq[1]}, kAreaUnit, Affine(y) - h2 / kAreaUnit);
        const Vec2 pa = device_position(scn, cur, a, wp), pb = device_position(scn, cur, b, wp);
        const double yj = std::max(((pa - pb).squaredNorm() + h2) / kAreaUnit, 1e-9);
        const double alpha = scn.tx_power(a) * scn.ref_gain / (scn.link_bandwidth() * scn.noise_psd) / kAreaUnit;
        const Var pi = P.add_variable("spec_eff");
        const double c0 = std::log2(1 + alpha / yj), c1 = alpha / (yj * (alpha + yj) * std::log(2.0));
        P.add_le(Affine(pi), c0 - c1 * (Affine(y) - yj));
        const Var inv = P.add_variable("inv_spec_eff");
        P.add_inverse_le(pi, inv);
        t = (w / bw_mhz) * Affine(inv);
      }
      P.add_le(t, uv.tau2[static_cast<size_t>(n)]);
      acc.energy_com[static_cast<size_t>(a)] += scn.tx_power(a) * t;
    }
  }

  for (int n = 0; n < N; ++n) acc.delay += uv.tau1[static_cast<size_t>(n)] + uv.tau2[static_cast<size_t>(n)];
  P.minimize(acc.finish(P, scn, g, o));

  BlockResult res;
  res.num_variables = P.num_variables();
  const ProgramSolution sol = P.solve(o.solve);
  res.status = sol.status;
  res.iterations = sol.iterations;
  res.decision = cur;
  if (!sol.optimal()) return res;
  res.model_objective = sol.objective;
  Decision& d = res.decision;
  for (int m = 0; m < M; ++m)
    for (int i = 0; i <= 2 * N; ++i)
      if (is_free(i)) {
        const auto& p = Q[static_cast<size_t>(m)][static_cast<size_t>(i)];
        d.traj[static_cast<size_t>(m)][static_cast<size_t>(i)] = Vec2(sol.value(p[0]), sol.value(p[1]));
      }
  for (int n = 0; n < N; ++n) d.tau_comm[static_cast<size_t>(n)] = std::max(0.0, sol.value(uv.tau2[static_cast<size_t>(n)]));
  return res;
}

}  // namespace uavmec
