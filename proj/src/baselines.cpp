#include "uavmec/baselines.hpp"

#include "uavmec/pdd_sca.hpp"
#include "uavmec/subproblems.hpp"

#include <algorithm>
#include <map>
#include <random>

namespace uavmec {

namespace {

// Equal share of each device's cap over the sub-tasks it runs in a slot.
void equal_split(const Scenario& scn, const TaskGraph& g, Decision& d) {
  const int Z = scn.num_choices();
  std::map<std::pair<int, int>, int> load;  // (device, layer) -> count
  auto each = [&](auto&& fn) {
    for (size_t u = 0; u < g.tasks.size(); ++u) {
      const auto& t = g.tasks[u];
      for (int k = 1; k < t.sink(); ++k)
        for (int z = 0; z < Z; ++z)
          if (d.x[u][static_cast<size_t>(k)][static_cast<size_t>(z)] > 0.5)
            fn(u, static_cast<size_t>(k), z, scn.device_of(static_cast<int>(u), z), t.nodes[static_cast<size_t>(k)].layer);
    }
  };
  each([&](size_t, size_t, int, int dev, int layer) { ++load[{dev, layer}]; });
  each([&](size_t u, size_t k, int z, int dev, int layer) {
    d.f[u][k][static_cast<size_t>(z)] = scn.cpu_max(dev) / load[{dev, layer}];
  });
}

struct Fitness {
  bool feasible = false;
  double cost = 0.0;
  double violation = 0.0;
};

bool better(const Fitness& a, const Fitness& b) {
  if (a.feasible != b.feasible) return a.feasible;
  if (!a.feasible && a.violation != b.violation) return a.violation < b.violation;
  return a.cost < b.cost;
}

}  // namespace

std::vector<TaskRef> interior_order(const TaskGraph& g) {
  std::vector<TaskRef> out;
  for (const TaskRef& r : rbfs_priority(g))
    if (g.tasks[static_cast<size_t>(r.td)].is_interior(r.node)) out.push_back(r);
  return out;
}

Decision decode_genome(const Scenario& scn, const TaskGraph& g, const Genome& genome, const BaselineConfig& cfg) {
  const auto order = interior_order(g);
  if (genome.size() != order.size()) throw ModelError("genome length does not match the interior sub-tasks");
  Decision d = empty_decision(scn, g);
  for (size_t i = 0; i < order.size(); ++i) {
    const int z = genome[i];
    if (z < 0 || z >= scn.num_choices()) throw ModelError("genome holds an unknown device");
    auto& x = d.x[static_cast<size_t>(order[i].td)][static_cast<size_t>(order[i].node)];
    std::fill(x.begin(), x.end(), 0.0);
    x[static_cast<size_t>(z)] = 1.0;
  }
  equal_split(scn, g, d);
  set_circle_path(scn, d, cfg.circle_radius_m);
  fit_unit_durations(scn, g, d, cfg.tau_floor_s);
  return d;
}

Genome genome_of(const TaskGraph& g, const Decision& d) {
  Genome out;
  for (const TaskRef& r : interior_order(g)) {
    const auto& x = d.x[static_cast<size_t>(r.td)][static_cast<size_t>(r.node)];
    out.push_back(static_cast<int>(std::max_element(x.begin(), x.end()) - x.begin()));
  }
  return out;
}

Decision heuristic_nearest(const Scenario& scn, const TaskGraph& g, const BaselineConfig& cfg) {
  std::vector<int> nearest(static_cast<size_t>(scn.num_tds), 0);
  for (int u = 0; u < scn.num_tds; ++u) {
    double best = -1.0;
    for (int m = 0; m < scn.num_uavs; ++m) {
      const double dist = (scn.td_positions[static_cast<size_t>(u)] - scn.uav_start[static_cast<size_t>(m)]).norm();
      if (best < 0.0 || dist < best) {
        best = dist;
        nearest[static_cast<size_t>(u)] = m;
      }
    }
  }
  Genome genome;
  for (const TaskRef& r : interior_order(g)) genome.push_back(nearest[static_cast<size_t>(r.td)] + 1);
  return decode_genome(scn, g, genome, cfg);
}

Decision fixed_resource(const Scenario& scn, const TaskGraph& g, const BaselineConfig& cfg) {
  const auto order = interior_order(g);
  std::map<std::pair<int, int>, int> slot_of;  // (td, node) -> position in order
  for (size_t i = 0; i < order.size(); ++i) slot_of[{order[i].td, order[i].node}] = static_cast<int>(i);
  Genome genome(order.size(), 1);
  for (int n = 0; n < g.num_layers; ++n) {
    int next = 0;
    for (const TaskRef& r : g.layer_members(n)) {
      if (!g.tasks[static_cast<size_t>(r.td)].is_interior(r.node)) continue;
      genome[static_cast<size_t>(slot_of.at({r.td, r.node}))] = 1 + next % scn.num_uavs;
      ++next;
    }
  }
  return decode_genome(scn, g, genome, cfg);
}

FixedTimeResult fixed_time(const Scenario& scn, const TaskGraph& g, const BaselineConfig& cfg) {
  FixedTimeResult out;
  Decision d = fixed_resource(scn, g, cfg);
  if (!cfg.tau_comp.empty()) {
    if (cfg.tau_comp.size() != d.tau_comp.size() || cfg.tau_comm.size() != d.tau_comm.size())
      throw ModelError("fixed unit lengths must cover every slot");
    for (size_t n = 0; n < d.tau_comp.size(); ++n) {
      const bool pinned_comp = n == 0 || n + 1 == d.tau_comp.size();
      if ((!pinned_comp && !(cfg.tau_comp[n] > 0)) || cfg.tau_comm[n] < 0)
        throw ModelError("fixed unit lengths must be positive");
    }
    d.tau_comp = cfg.tau_comp;
    d.tau_comm = cfg.tau_comm;
  }
  std::map<std::pair<int, int>, double> used;  // (device, layer) -> Hz
  for (size_t u = 0; u < g.tasks.size(); ++u) {
    const auto& t = g.tasks[u];
    for (int k = 1; k < t.sink(); ++k) {
      const int layer = t.nodes[static_cast<size_t>(k)].layer;
      const double bits = t.nodes[static_cast<size_t>(k)].compute_bits;
      auto& f = d.f[u][static_cast<size_t>(k)];
      for (size_t z = 0; z < f.size(); ++z) {
        if (d.x[u][static_cast<size_t>(k)][z] < 0.5) continue;
        const int dev = scn.device_of(static_cast<int>(u), static_cast<int>(z));
        const double tau = d.tau_comp[static_cast<size_t>(layer)];
        f[z] = bits > 0.0 ? bits * scn.cycles_per_bit[static_cast<size_t>(dev)] / tau : 0.0;
        used[{dev, layer}] += f[z];
      }
    }
  }
  for (const auto& [key, hz] : used)
    if (hz > scn.cpu_max(key.first) * (1.0 + 1e-9)) out.within_caps = false;
  out.decision = std::move(d);
  return out;
}

EvolutionResult evolutionary(const Scenario& scn, const TaskGraph& g, const BaselineConfig& cfg, std::uint64_t seed,
                             const std::vector<Genome>& initial) {
  if (cfg.population < 2) throw ModelError("population must be at least 2");
  const size_t L = interior_order(g).size();
  const int Z = scn.num_choices();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> gene(0, Z - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::map<Genome, Fitness> cache;
  auto fitness = [&](const Genome& gm) {
    auto it = cache.find(gm);
    if (it != cache.end()) return it->second;
    const MetricsReport m = system_cost(scn, g, decode_genome(scn, g, gm, cfg));
    Fitness f{m.feasible(1e-6), m.total_cost, m.residuals.max()};
    cache.emplace(gm, f);
    return f;
  };

  std::vector<Genome> pop;
  for (int i = 0; i < cfg.population; ++i) {
    if (!initial.empty()) {
      pop.push_back(initial[static_cast<size_t>(i) % initial.size()]);
    } else {
      Genome gm(L);
      for (int& v : gm) v = gene(rng);
      pop.push_back(std::move(gm));
    }
  }
  auto best_of = [&](const std::vector<Genome>& p) {
    size_t b = 0;
    for (size_t i = 1; i < p.size(); ++i)
      if (better(fitness(p[i]), fitness(p[b]))) b = i;
    return p[b];
  };
  auto tournament = [&](const std::vector<Genome>& p) -> const Genome& {
    std::uniform_int_distribution<size_t> pick(0, p.size() - 1);
    size_t b = pick(rng);
    for (int i = 1; i < cfg.tournament_size; ++i) {
      const size_t c = pick(rng);
      if (better(fitness(p[c]), fitness(p[b]))) b = c;
    }
    return p[b];
  };

  EvolutionResult res;
  Genome elite = best_of(pop);
  for (int gen = 0; gen < cfg.generations; ++gen) {
    std::vector<Genome> next{elite};
    while (static_cast<int>(next.size()) < cfg.population) {
      Genome child = tournament(pop);
      const Genome& other = tournament(pop);
      if (L >= 2) {
        const size_t cut = std::uniform_int_distribution<size_t>(1, L - 1)(rng);
        std::copy(other.begin() + static_cast<std::ptrdiff_t>(cut), other.end(),
                  child.begin() + static_cast<std::ptrdiff_t>(cut));
      }
      for (int& v : child)
        if (unit(rng) < cfg.mutation_rate) v = gene(rng);
      next.push_back(std::move(child));
    }
    pop = std::move(next);
    elite = best_of(pop);
    res.best_cost.push_back(fitness(elite).cost);
  }

  const Fitness f = fitness(elite);
  res.genome = elite;
  res.decision = decode_genome(scn, g, elite, cfg);
  res.feasible = f.feasible;
  res.cost = f.cost;
  res.violation = f.violation;
  return res;
}

}  // namespace uavmec
