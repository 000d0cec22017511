#include "uavmec/task_graph.hpp"

#include "uavmec/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace uavmec {

double TaskDag::total_compute_bits() const {
  double s = 0.0;
  for (const auto& n : nodes) s += n.compute_bits;
  return s;
}

std::vector<TaskRef> TaskGraph::layer_members(int n) const {
  std::vector<TaskRef> out;
  for (int u = 0; u < num_tds(); ++u)
    for (int k = 0; k < static_cast<int>(tasks[u].nodes.size()); ++k)
      if (tasks[u].nodes[k].layer == n) out.push_back({u, k});
  return out;
}

std::vector<std::vector<std::vector<int>>> TaskGraph::out_edges() const {
  std::vector<std::vector<std::vector<int>>> out(tasks.size());
  for (size_t u = 0; u < tasks.size(); ++u) {
    out[u].resize(tasks[u].nodes.size());
    for (size_t e = 0; e < tasks[u].edges.size(); ++e)
      out[u][static_cast<size_t>(tasks[u].edges[e].from)].push_back(static_cast<int>(e));
  }
  return out;
}

double TaskGraph::min_deadline() const {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& t : tasks) d = std::min(d, t.deadline_s);
  return d;
}

int TaskGraph::num_interior() const {
  int s = 0;
  for (const auto& t : tasks) s += t.num_interior();
  return s;
}

TaskGraph generate_graph(int num_tds, const GraphParams& p, std::uint64_t seed) {
  if (num_tds < 1) throw GraphError("need at least one TD");
  if (p.layers < 2) throw GraphError("need at least two layers (source and sink)");
  if (p.min_per_layer < 1 || p.max_per_layer < p.min_per_layer) throw GraphError("empty sub-task count range");
  if (!(p.workload_min_bits > 0) || p.workload_max_bits < p.workload_min_bits)
    throw GraphError("empty workload range");
  if (!(p.edge_min_bits > 0) || p.edge_max_bits < p.edge_min_bits) throw GraphError("empty edge-volume range");
  if (!(p.input_min_bits > 0) || p.input_max_bits < p.input_min_bits) throw GraphError("empty input-volume range");
  if (p.dependency_rate < 0) throw GraphError("negative dependency rate");

  Rng rng(seed);
  TaskGraph g;
  g.num_layers = p.layers;
  const int L = p.layers;
  for (int u = 0; u < num_tds; ++u) {
    TaskDag t;
    t.nodes.push_back({0.0, 0});
    std::vector<std::vector<int>> by_layer(static_cast<size_t>(L));
    by_layer[0].push_back(0);
    for (int l = 1; l <= L - 2; ++l) {
      const int cnt = static_cast<int>(rng.uniform_int(p.min_per_layer, p.max_per_layer));
      for (int i = 0; i < cnt; ++i) {
        by_layer[static_cast<size_t>(l)].push_back(static_cast<int>(t.nodes.size()));
        t.nodes.push_back({rng.uniform(p.workload_min_bits, p.workload_max_bits), l});
      }
    }
    const int sink = static_cast<int>(t.nodes.size());
    t.nodes.push_back({0.0, L - 1});
    by_layer[static_cast<size_t>(L - 1)].push_back(sink);

    const double input = rng.uniform(p.input_min_bits, p.input_max_bits);
    const auto& first = by_layer[1];
    for (int k : first) t.edges.push_back({0, k, input / static_cast<double>(first.size())});

    const int K = sink - 1;
    std::vector<int> has_pred(t.nodes.size(), 0);
    for (int k : first) has_pred[static_cast<size_t>(k)] = 1;
    for (int k = 1; k <= K; ++k) {
      const int layer = t.nodes[static_cast<size_t>(k)].layer;
      std::vector<int> cand;
      for (int j = k + 1; j <= sink; ++j)
        if (t.nodes[static_cast<size_t>(j)].layer > layer) cand.push_back(j);
      const auto hi = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(p.dependency_rate * (K - k))));
      auto cnt = static_cast<size_t>(rng.uniform_int(1, hi));
      cnt = std::min(cnt, cand.size());
      for (size_t i = 0; i < cnt; ++i) {
        const auto j = static_cast<size_t>(rng.uniform_int(static_cast<std::int64_t>(i), static_cast<std::int64_t>(cand.size()) - 1));
        std::swap(cand[i], cand[j]);
        t.edges.push_back({k, cand[i], rng.uniform(p.edge_min_bits, p.edge_max_bits)});
        has_pred[static_cast<size_t>(cand[i])] = 1;
      }
    }
    // Repair: every interior node needs data from the previous layer chain.
    for (int l = 2; l <= L - 2; ++l)
      for (int k : by_layer[static_cast<size_t>(l)])
        if (!has_pred[static_cast<size_t>(k)]) {
          const auto& prev = by_layer[static_cast<size_t>(l - 1)];
          const int from = prev[static_cast<size_t>(rng.uniform_int(0, static_cast<std::int64_t>(prev.size()) - 1))];
          t.edges.push_back({from, k, rng.uniform(p.edge_min_bits, p.edge_max_bits)});
          has_pred[static_cast<size_t>(k)] = 1;
        }
    if (L == 2) t.edges.push_back({0, sink, input});
    std::stable_sort(t.edges.begin(), t.edges.end(),
                     [](const Edge& a, const Edge& b) { return a.from != b.from ? a.from < b.from : a.to < b.to; });
    t.deadline_s = t.total_compute_bits() * p.cycles_per_bit / p.deadline_ref_hz;
    g.tasks.push_back(std::move(t));
  }
  return g;
}

std::vector<std::string> validate(const TaskGraph& g) {
  std::vector<std::string> v;
  auto add = [&](int u, const std::string& what) { v.push_back("td " + std::to_string(u) + ": " + what); };
  if (g.num_layers < 2) v.push_back("graph: fewer than two layers");
  for (int u = 0; u < g.num_tds(); ++u) {
    const TaskDag& t = g.tasks[static_cast<size_t>(u)];
    const int n = static_cast<int>(t.nodes.size());
    if (n < 2) {
      add(u, "missing source or sink");
      continue;
    }
    if (t.nodes.front().layer != 0) add(u, "source not in layer 0");
    if (t.nodes.back().layer != g.num_layers - 1) add(u, "sink not in the last layer");
    if (t.nodes.front().compute_bits != 0.0) add(u, "zero-bits: source has nonzero compute bits");
    if (t.nodes.back().compute_bits != 0.0) add(u, "zero-bits: sink has nonzero compute bits");
    std::vector<int> layer_count(static_cast<size_t>(std::max(g.num_layers, 1)), 0);
    for (int k = 1; k < n - 1; ++k) {
      const auto& nd = t.nodes[static_cast<size_t>(k)];
      if (nd.layer < 1 || nd.layer > g.num_layers - 2)
        add(u, "node " + std::to_string(k) + " in layer " + std::to_string(nd.layer) + " outside interior layers");
      else
        ++layer_count[static_cast<size_t>(nd.layer)];
      if (!(nd.compute_bits >= 0.0)) add(u, "node " + std::to_string(k) + " has negative compute bits");
    }
    for (int l = 1; l <= g.num_layers - 2; ++l)
      if (layer_count[static_cast<size_t>(l)] == 0) add(u, "interior layer " + std::to_string(l) + " is empty");
    std::vector<int> indeg(static_cast<size_t>(n), 0), outdeg(static_cast<size_t>(n), 0);
    for (const auto& e : t.edges) {
      if (e.from < 0 || e.from >= n || e.to < 0 || e.to >= n) {
        add(u, "edge references a missing node");
        continue;
      }
      ++indeg[static_cast<size_t>(e.to)];
      ++outdeg[static_cast<size_t>(e.from)];
      if (t.nodes[static_cast<size_t>(e.to)].layer <= t.nodes[static_cast<size_t>(e.from)].layer)
        add(u, "acyclicity: edge " + std::to_string(e.from) + "->" + std::to_string(e.to) +
                   " does not go to a strictly later layer");
      if (!(e.bits >= 0.0)) add(u, "edge " + std::to_string(e.from) + "->" + std::to_string(e.to) + " has negative bits");
    }
    if (indeg[0] != 0) add(u, "source has predecessors");
    if (outdeg[static_cast<size_t>(n - 1)] != 0) add(u, "sink has successors");
    for (int k = 1; k < n - 1; ++k) {
      if (indeg[static_cast<size_t>(k)] == 0) add(u, "node " + std::to_string(k) + " unreachable (no predecessor)");
      if (outdeg[static_cast<size_t>(k)] == 0) add(u, "node " + std::to_string(k) + " cannot reach the sink (no successor)");
    }
  }
  return v;
}

std::vector<TaskRef> rbfs_priority(const TaskGraph& g) {
  struct Item {
    int level, td, node;
  };
  std::vector<Item> items;
  for (int u = 0; u < g.num_tds(); ++u) {
    const TaskDag& t = g.tasks[static_cast<size_t>(u)];
    const size_t n = t.nodes.size();
    std::vector<std::vector<int>> preds(n);
    std::vector<int> pending(n, 0), level(n, 0);
    for (const auto& e : t.edges) {
      preds[static_cast<size_t>(e.to)].push_back(e.from);
      ++pending[static_cast<size_t>(e.from)];
    }
    // Reverse traversal from nodes without successors; a node is emitted once
    // all of its successors are levelled.
    std::vector<int> frontier;
    for (size_t k = 0; k < n; ++k)
      if (pending[k] == 0) frontier.push_back(static_cast<int>(k));
    size_t done = 0;
    while (!frontier.empty()) {
      std::vector<int> next;
      for (int k : frontier) {
        ++done;
        for (int pr : preds[static_cast<size_t>(k)]) {
          level[static_cast<size_t>(pr)] = std::max(level[static_cast<size_t>(pr)], level[static_cast<size_t>(k)] + 1);
          if (--pending[static_cast<size_t>(pr)] == 0) next.push_back(pr);
        }
      }
      frontier.swap(next);
    }
    if (done != n) throw GraphError("cyclic graph for td " + std::to_string(u));
    for (size_t k = 0; k < n; ++k) items.push_back({level[k], u, static_cast<int>(k)});
  }
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
    if (a.level != b.level) return a.level > b.level;
    if (a.td != b.td) return a.td < b.td;
    return a.node < b.node;
  });
  std::vector<TaskRef> out;
  out.reserve(items.size());
  for (const auto& it : items) out.push_back({it.td, it.node});
  return out;
}

namespace {
std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace

void save_graph(const TaskGraph& g, std::ostream& os) {
  os << "uavmec-taskgraph 1\n";
  os << "layers " << g.num_layers << "\n";
  os << "tasks " << g.num_tds() << "\n";
  for (int u = 0; u < g.num_tds(); ++u) {
    const TaskDag& t = g.tasks[static_cast<size_t>(u)];
    os << "task " << u << " deadline " << fmt_double(t.deadline_s) << " nodes " << t.nodes.size() << " edges "
       << t.edges.size() << "\n";
    for (size_t k = 0; k < t.nodes.size(); ++k)
      os << "node " << k << ' ' << t.nodes[k].layer << ' ' << fmt_double(t.nodes[k].compute_bits) << "\n";
    for (const auto& e : t.edges) os << "edge " << e.from << ' ' << e.to << ' ' << fmt_double(e.bits) << "\n";
  }
}

TaskGraph load_graph(std::istream& is) {
  auto expect = [&](const std::string& word) {
    std::string w;
    if (!(is >> w) || w != word) throw GraphError("graph file: expected '" + word + "', got '" + w + "'");
  };
  expect("uavmec-taskgraph");
  int version = 0;
  if (!(is >> version) || version != 1) throw GraphError("graph file: unsupported version");
  TaskGraph g;
  int ntasks = 0;
  expect("layers");
  is >> g.num_layers;
  expect("tasks");
  is >> ntasks;
  if (!is || ntasks < 0) throw GraphError("graph file: bad header");
  for (int u = 0; u < ntasks; ++u) {
    TaskDag t;
    int idx = 0;
    size_t nn = 0, ne = 0;
    expect("task");
    is >> idx;
    expect("deadline");
    is >> t.deadline_s;
    expect("nodes");
    is >> nn;
    expect("edges");
    is >> ne;
    if (!is || idx != u) throw GraphError("graph file: bad task header");
    t.nodes.resize(nn);
    for (size_t k = 0; k < nn; ++k) {
      size_t id = 0;
      expect("node");
      is >> id >> t.nodes[k].layer >> t.nodes[k].compute_bits;
      if (!is || id != k) throw GraphError("graph file: bad node record");
    }
    t.edges.resize(ne);
    for (size_t e = 0; e < ne; ++e) {
      expect("edge");
      is >> t.edges[e].from >> t.edges[e].to >> t.edges[e].bits;
      if (!is) throw GraphError("graph file: bad edge record");
    }
    g.tasks.push_back(std::move(t));
  }
  return g;
}

}  // namespace uavmec
