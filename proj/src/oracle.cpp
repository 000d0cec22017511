#include "uavmec/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace uavmec {

TinyInstance tiny_instance(std::uint64_t seed, OraclePath path) {
  TinyInstance in;
  GraphParams gp;
  gp.layers = 3;
  gp.min_per_layer = 2;
  gp.max_per_layer = 4;
  in.g = generate_graph(1, gp, seed);
  in.scn = default_scenario(2, 1, 3);
  place_devices(in.scn, seed);
  in.scn.td_positions = {Vec2((in.scn.uav_start[0] + in.scn.uav_start[1]) / 2.0)};
  apply_default_budgets(in.scn, in.g);
  in.path = path;
  return in;
}

long long assignment_count(const Scenario& scn, const TaskGraph& g, long long cap) {
  long long n = 1;
  for (size_t i = 0; i < interior_order(g).size(); ++i) {
    n *= scn.num_choices();
    if (n > cap) return cap + 1;
  }
  return n;
}

Decision solve_fixed_assignment(const Scenario& scn, const TaskGraph& g, const Genome& genome,
                                const OracleOptions& o) {
  BaselineConfig cfg;
  cfg.circle_radius_m = o.path == OraclePath::Hover ? 0.0 : o.circle_radius_m;
  cfg.tau_floor_s = o.block.tau_floor_s;
  Decision d = decode_genome(scn, g, genome, cfg);
  double prev = 0.0;
  bool have = false;
  // On a moving path the induced-power term is linearised around the current
  // durations, so re-solve until the objective settles. Hovering needs one.
  const int rounds = o.path == OraclePath::Hover ? 1 : o.max_sca;
  for (int it = 0; it < rounds; ++it) {
    const BlockResult r = solve_offload_freq(scn, g, d, nullptr, o.block);
    if (r.status != SolveStatus::Optimal) break;
    const double v = al_objective(scn, g, r.decision, nullptr, o.block.slack_weight).total();
    if (have && v > prev) break;
    const double rel = have ? std::abs(prev - v) / std::max(1.0, std::abs(prev)) : 1.0;
    d = r.decision;
    prev = v;
    have = true;
    if (rel < o.sca_tol) break;
  }
  return d;
}

bool provably_infeasible(const Scenario& scn, const TaskGraph& g, const Decision& d) {
  const int N = static_cast<int>(d.tau_comp.size());
  double bound = 0.0;
  for (int n = 0; n < N; ++n) {
    // Devices sharing a slot can at best split their cap, so a device's
    // sub-tasks need at least (total cycles) / cap.
    std::map<int, double> cycles;
    for (const TaskRef& r : g.layer_members(n)) {
      const auto& t = g.tasks[static_cast<size_t>(r.td)];
      if (!t.is_interior(r.node)) continue;
      const auto& x = d.x[static_cast<size_t>(r.td)][static_cast<size_t>(r.node)];
      for (size_t z = 0; z < x.size(); ++z) {
        if (x[z] <= 0.0) continue;
        const int dev = scn.device_of(r.td, static_cast<int>(z));
        cycles[dev] += x[z] * t.nodes[static_cast<size_t>(r.node)].compute_bits *
                       scn.cycles_per_bit[static_cast<size_t>(dev)];
      }
    }
    double comp = 0.0;
    for (const auto& [dev, c] : cycles) comp = std::max(comp, c / scn.cpu_max(dev));
    double comm = 0.0;
    for (const auto& row : comm_time_matrix(scn, g, d, n))
      for (double v : row) comm = std::max(comm, v);
    if (n > 0 && comm > scn.max_comm_unit_s * (1.0 + 1e-9)) return true;
    bound += comp + comm;
  }
  return bound > g.min_deadline() * (1.0 + 1e-9);
}

OracleResult enumerate_optimum(const Scenario& scn, const TaskGraph& g, const OracleOptions& o) {
  const long long total = assignment_count(scn, g, o.budget);
  if (total > o.budget) throw ModelError("instance exceeds the enumeration budget");
  const size_t L = interior_order(g).size();
  const int Z = scn.num_choices();
  BaselineConfig cfg;
  cfg.circle_radius_m = o.path == OraclePath::Hover ? 0.0 : o.circle_radius_m;
  cfg.tau_floor_s = o.block.tau_floor_s;

  OracleResult res;
  Genome gm(L, 0);
  for (long long i = 0; i < total; ++i) {
    OracleRow row;
    row.genome = gm;
    if (provably_infeasible(scn, g, decode_genome(scn, g, gm, cfg))) {
      row.pruned = true;
    } else {
      const Decision d = solve_fixed_assignment(scn, g, gm, o);
      const MetricsReport m = system_cost(scn, g, d);
      ++res.evaluated;
      row.feasible = m.feasible(o.feas_tol);
      row.cost = m.total_cost;
      // Lexicographic order of enumeration makes strict < the tie-break.
      if (row.feasible && (!res.feasible || row.cost < res.cost)) {
        res.feasible = true;
        res.cost = row.cost;
        res.genome = gm;
        res.decision = d;
      }
    }
    res.table.push_back(std::move(row));
    for (size_t j = L; j-- > 0;) {  // odometer, last gene fastest
      if (++gm[j] < Z) break;
      gm[j] = 0;
    }
  }
  return res;
}

}  // namespace uavmec
