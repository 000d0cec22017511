#include "uavmec/pdd_sca.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace uavmec {

namespace {

template <class F>
void for_interior(const TaskGraph& g, int Z, F&& fn) {
  for (int u = 0; u < g.num_tds(); ++u) {
    const auto& t = g.tasks[static_cast<size_t>(u)];
    for (int k = 1; k < t.sink(); ++k)
      for (int z = 0; z < Z; ++z) fn(static_cast<size_t>(u), static_cast<size_t>(k), static_cast<size_t>(z));
  }
}

int num_choices(const Decision& d) { return static_cast<int>(d.x.at(0).at(0).size()); }

double hard_residual(const Residuals& r) {
  return std::max({r.comm_unit, r.motion, r.separation, r.assignment, r.binary, r.td_cpu, r.uav_cpu, r.coverage,
                   r.return_home, r.domain});
}

}  // namespace

void set_circle_path(const Scenario& scn, Decision& d, double r) {
  const int N = static_cast<int>(d.tau_comp.size());
  const int laps = 2 * N - 4;  // waypoints 2 .. 2N-2 cover one revolution
  for (int m = 0; m < scn.num_uavs; ++m) {
    const Vec2 s = scn.uav_start[static_cast<size_t>(m)];
    const Vec2 c = s - Vec2(0.0, r);
    auto& q = d.traj[static_cast<size_t>(m)];
    for (int i = 0; i <= 2 * N; ++i) {
      if (i <= 2 || i >= 2 * N - 2 || laps <= 0) {
        q[static_cast<size_t>(i)] = s;
        continue;
      }
      const double th = 2 * std::numbers::pi * (i - 2) / laps;
      q[static_cast<size_t>(i)] = c + r * Vec2(std::sin(th), std::cos(th));
    }
  }
}

Decision initial_decision(const Scenario& scn, const TaskGraph& g, const PddOptions& o) {
  Decision d = empty_decision(scn, g);
  const int Z = scn.num_choices(), N = g.num_layers;
  for_interior(g, Z, [&](size_t u, size_t k, size_t z) { d.x[u][k][z] = 1.0 / Z; });
  // Equal split of each device's cap over the entries it may run in a slot.
  std::vector<std::vector<int>> load(static_cast<size_t>(scn.num_devices()), std::vector<int>(static_cast<size_t>(N), 0));
  for_interior(g, Z, [&](size_t u, size_t k, size_t z) {
    const int dev = scn.device_of(static_cast<int>(u), static_cast<int>(z));
    ++load[static_cast<size_t>(dev)][static_cast<size_t>(g.tasks[u].nodes[k].layer)];
  });
  for_interior(g, Z, [&](size_t u, size_t k, size_t z) {
    const int dev = scn.device_of(static_cast<int>(u), static_cast<int>(z));
    d.f[u][k][z] = scn.cpu_max(dev) / load[static_cast<size_t>(dev)][static_cast<size_t>(g.tasks[u].nodes[k].layer)];
  });
  if (!o.hover_start) set_circle_path(scn, d, o.circle_radius_m);
  fit_unit_durations(scn, g, d, o.block.tau_floor_s);
  return d;
}

PddState initial_state(const Scenario& scn, const TaskGraph& g, const Decision& d, const PddOptions& o) {
  (void)scn;
  PddState st;
  st.aux = d.x;
  st.lam1 = d.x;
  st.lam2 = d.x;
  for (auto* t : {&st.lam1, &st.lam2})
    for (auto& a : *t)
      for (auto& b : a) std::fill(b.begin(), b.end(), 0.0);
  st.rho = o.rho0;
  st.eta = o.eta0 > 0.0 ? o.eta0 : violation_indicator(g, d, st);
  st.decay = o.rho_decay;
  return st;
}

double auxiliary_value(double x, double rho, double l1, double l2) {
  const double v = (x * x + x - rho * l1 * x + rho * l2) / (x * x + 1.0);
  return std::clamp(v, 0.0, 1.0);
}

void update_auxiliary(PddState& st, const TaskGraph& g, const Decision& d) {
  for_interior(g, num_choices(d), [&](size_t u, size_t k, size_t z) {
    st.aux[u][k][z] = auxiliary_value(d.x[u][k][z], st.rho, st.lam1[u][k][z], st.lam2[u][k][z]);
  });
}

double violation_indicator(const TaskGraph& g, const Decision& d, const PddState& st) {
  double h = 0.0;
  for_interior(g, num_choices(d), [&](size_t u, size_t k, size_t z) {
    const double x = d.x[u][k][z], xt = st.aux[u][k][z];
    const double a = x * (xt - 1.0), b = x - xt;
    h = std::max({h, a * a, b * b});
  });
  return h;
}

RoundResult round_binaries(const TaskGraph& g, Decision& d) {
  RoundResult r;
  for (size_t u = 0; u < g.tasks.size(); ++u) {
    const auto& t = g.tasks[u];
    for (int k = 1; k < t.sink(); ++k) {
      auto& x = d.x[u][static_cast<size_t>(k)];
      const auto best = static_cast<size_t>(std::max_element(x.begin(), x.end()) - x.begin());  // first max
      if (x[best] < 0.5) r.warning = true;
      for (size_t z = 0; z < x.size(); ++z) {
        const double v = z == best ? 1.0 : 0.0;
        r.max_change = std::max(r.max_change, std::abs(x[z] - v));
        x[z] = v;
        if (v == 0.0) d.f[u][static_cast<size_t>(k)][z] = 0.0;
      }
    }
  }
  return r;
}

double outer_step(PddState& st, const TaskGraph& g, const Decision& d, double eta_factor) {
  const double h = violation_indicator(g, d, st);
  st.h_history.push_back(h);
  if (h <= st.eta) {
    for_interior(g, num_choices(d), [&](size_t u, size_t k, size_t z) {
      const double x = d.x[u][k][z], xt = st.aux[u][k][z];
      st.lam1[u][k][z] += x * (xt - 1.0) / st.rho;
      st.lam2[u][k][z] += (x - xt) / st.rho;
    });
  } else {
    st.rho *= st.decay;
  }
  st.eta = eta_factor * h;
  return h;
}

bool inner_loop(const Scenario& scn, const TaskGraph& g, Decision& d, PddState& st, const PddOptions& o,
                std::vector<TraceRow>& trace) {
  const double W = o.block.slack_weight;
  AlTerms al = st.al_terms();
  double sweep_start = al_objective(scn, g, d, &al, W).total();
  for (st.inner = 0; st.inner < o.max_inner; ++st.inner) {
    auto record = [&](const std::string& name, double prev, double cand, bool ok, SolveStatus status) {
      TraceRow r;
      r.outer = st.outer;
      r.inner = st.inner;
      r.block = name;
      r.previous = prev;
      r.candidate = cand;
      r.accepted = ok;
      r.status = status;
      const MetricsReport m = system_cost(scn, g, d);
      r.al_objective = al_objective(scn, g, d, &al, W).total();
      r.cost = m.total_cost;
      r.h = violation_indicator(g, d, st);
      r.rho = st.rho;
      r.residual = m.residuals.max();
      trace.push_back(r);
    };

    double cur = al_objective(scn, g, d, &al, W).total();
    update_auxiliary(st, g, d);
    const double after_aux = al_objective(scn, g, d, &al, W).total();
    record("aux", cur, after_aux, true, SolveStatus::Optimal);
    cur = after_aux;

    int failures = 0, blocks = 0;
    auto try_block = [&](const std::string& name, const BlockResult& br) {
      ++blocks;
      if (br.status != SolveStatus::Optimal) {
        ++failures;
        record(name, cur, cur, false, br.status);
        return;
      }
      const double prev = cur;
      const double cand = al_objective(scn, g, br.decision, &al, W).total();
      const bool ok = cand <= cur + o.descent_tol;
      if (ok) {
        d = br.decision;
        cur = cand;
      }
      record(name, prev, cand, ok, br.status);
    };
    try_block("offload", solve_offload_freq(scn, g, d, &al, o.block));
    if (o.optimize_trajectory) try_block("trajectory", solve_trajectory(scn, g, d, o.block));
    if (failures == blocks) return false;
    const double change = std::abs(sweep_start - cur);
    sweep_start = cur;
    if (change < o.inner_tol) {
      ++st.inner;
      break;
    }
  }
  return true;
}

Decision integral_repair(const Scenario& scn, const TaskGraph& g, const Decision& start, const PddOptions& o,
                         double* model_objective) {
  Decision d = start;
  double model = std::numeric_limits<double>::quiet_NaN();
  double prev = al_objective(scn, g, d, nullptr, o.block.slack_weight).total();
  // Only the elastic constraints (deadline, budgets) may be violated by an
  // accepted start; anything else makes the objective value meaningless.
  bool have_valid = hard_residual(system_cost(scn, g, d).residuals) <= 1e-6;
  for (int it = 0; it < o.max_repair; ++it) {
    bool moved = false;
    const BlockResult a = solve_offload_freq(scn, g, d, nullptr, o.block);
    if (a.status == SolveStatus::Optimal) {
      const double v = al_objective(scn, g, a.decision, nullptr, o.block.slack_weight).total();
      if (v <= prev + o.descent_tol || !have_valid) {
        d = a.decision;
        prev = v;
        moved = true;
        have_valid = true;
        model = a.model_objective;
      }
    }
    if (o.optimize_trajectory) {
      const BlockResult b = solve_trajectory(scn, g, d, o.block);
      if (b.status == SolveStatus::Optimal) {
        const double v = al_objective(scn, g, b.decision, nullptr, o.block.slack_weight).total();
        if (v <= prev + o.descent_tol) {
          const double rel = std::abs(prev - v) / std::max(1.0, std::abs(prev));
          d = b.decision;
          prev = v;
          moved = true;
          model = b.model_objective;
          if (rel < o.repair_tol) break;
          continue;
        }
      }
    } else {
      break;  // a single exact block is already optimal for the frozen problem
    }
    if (!moved) break;
  }
  if (model_objective) *model_objective = model;
  return d;
}

PddResult run_pdd_sca(const Scenario& scn, const TaskGraph& g, const PddOptions& o) {
  PddResult res;
  Decision d = initial_decision(scn, g, o);
  PddState st = initial_state(scn, g, d, o);
  {
    const MetricsReport m0 = system_cost(scn, g, d);
    res.start_feasible = m0.total_delay_s <= g.min_deadline() + 1e-9;
  }
  for (st.outer = 0; st.outer < o.max_outer; ++st.outer) {
    if (!inner_loop(scn, g, d, st, o, res.trace)) res.stalled = true;
    res.rho_history.push_back(st.rho);
    const double h = outer_step(st, g, d, o.eta_factor);
    if (h < o.h_tol) {
      res.converged = true;
      ++st.outer;
      break;
    }
  }
  res.outer_iterations = st.outer;
  res.h_history = st.h_history;
  res.relaxed = d;
  res.relaxed_cost = system_cost(scn, g, d).total_cost;

  const RoundResult rr = round_binaries(g, d);
  res.rounding_warning = rr.warning;
  res.max_rounding_change = rr.max_change;
  res.rounded_cost = system_cost(scn, g, d).total_cost;
  res.decision = integral_repair(scn, g, d, o, &res.model_objective);
  res.metrics = system_cost(scn, g, res.decision);
  return res;
}

}  // namespace uavmec
