#include "uavmec/task_graph.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <sstream>

using namespace uavmec;

namespace {

TaskGraph single(std::vector<SubTask> nodes, std::vector<Edge> edges, int layers) {
  TaskGraph g;
  g.num_layers = layers;
  TaskDag t;
  t.nodes = std::move(nodes);
  t.edges = std::move(edges);
  g.tasks.push_back(t);
  return g;
}

std::string serialize(const TaskGraph& g) {
  std::ostringstream os;
  save_graph(g, os);
  return os.str();
}

bool is_topological(const TaskGraph& g, const std::vector<TaskRef>& order) {
  std::map<std::pair<int, int>, size_t> pos;
  for (size_t i = 0; i < order.size(); ++i) pos[{order[i].td, order[i].node}] = i;
  for (int u = 0; u < g.num_tds(); ++u)
    for (const auto& e : g.tasks[u].edges)
      if (pos.at({u, e.from}) >= pos.at({u, e.to})) return false;
  return true;
}

}  // namespace

TEST(TaskGraph, GeneratedGraphsAreValid) {
  GraphParams p;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    p.layers = 2 + static_cast<int>(seed % 19);
    const TaskGraph g = generate_graph(1 + static_cast<int>(seed % 4), p, seed);
    const auto v = validate(g);
    ASSERT_TRUE(v.empty()) << "seed " << seed << ": " << v.front();
    for (const auto& t : g.tasks)
      for (const auto& e : t.edges) ASSERT_LT(t.nodes[e.from].layer, t.nodes[e.to].layer);
    ASSERT_NO_THROW(rbfs_priority(g));
  }
}

TEST(TaskGraph, MeanWorkloadAtTwentyLayers) {
  GraphParams p;
  p.layers = 20;
  double sum = 0;
  const int seeds = 200;
  for (int s = 0; s < seeds; ++s) sum += generate_graph(1, p, 1000 + s).tasks[0].total_compute_bits();
  const double mean = sum / seeds;
  EXPECT_NEAR(mean, 32.4e6, 0.1 * 32.4e6);
}

TEST(TaskGraph, Deterministic) {
  GraphParams p;
  p.layers = 12;
  EXPECT_EQ(serialize(generate_graph(4, p, 42)), serialize(generate_graph(4, p, 42)));
  EXPECT_NE(serialize(generate_graph(4, p, 42)), serialize(generate_graph(4, p, 43)));
}

TEST(TaskGraph, LastInteriorNodeFeedsSink) {
  GraphParams p;
  p.layers = 8;
  const TaskGraph g = generate_graph(3, p, 5);
  for (const auto& t : g.tasks) {
    const int last = t.sink() - 1;
    std::vector<Edge> out;
    for (const auto& e : t.edges)
      if (e.from == last) out.push_back(e);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].to, t.sink());
  }
}

TEST(TaskGraph, GeneratedVolumesAndDeadline) {
  GraphParams p;
  p.layers = 10;
  const TaskGraph g = generate_graph(2, p, 9);
  for (const auto& t : g.tasks) {
    EXPECT_EQ(t.nodes.front().compute_bits, 0.0);
    EXPECT_EQ(t.nodes.back().compute_bits, 0.0);
    double input = 0;
    for (const auto& e : t.edges) {
      if (e.from == 0) {
        input += e.bits;
        continue;
      }
      EXPECT_GE(e.bits, 0.1e6);
      EXPECT_LE(e.bits, 0.2e6);
    }
    EXPECT_GE(input, 1.5e6);
    EXPECT_LE(input, 3.0e6);
    for (int k = 1; k < t.sink(); ++k) {
      EXPECT_GE(t.nodes[k].compute_bits, 0.8e6);
      EXPECT_LE(t.nodes[k].compute_bits, 1.0e6);
    }
    EXPECT_NEAR(t.deadline_s, t.total_compute_bits() * 1e3 / 1.5e9, 1e-12);
  }
}

TEST(TaskGraph, BadParameters) {
  GraphParams p;
  p.layers = 1;
  EXPECT_THROW(generate_graph(1, p, 0), GraphError);
  p = GraphParams{};
  p.min_per_layer = 3;
  p.max_per_layer = 2;
  EXPECT_THROW(generate_graph(1, p, 0), GraphError);
  p = GraphParams{};
  p.edge_min_bits = 0;
  EXPECT_THROW(generate_graph(1, p, 0), GraphError);
  EXPECT_THROW(generate_graph(0, GraphParams{}, 0), GraphError);
}

TEST(TaskGraph, BackEdgeIsOneAcyclicityViolation) {
  auto g = single({{0, 0}, {1e6, 1}, {1e6, 2}, {0, 3}}, {{0, 1, 1}, {1, 2, 1}, {2, 3, 1}, {2, 1, 1}}, 4);
  const auto v = validate(g);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_NE(v[0].find("acyclicity"), std::string::npos);
  EXPECT_THROW(rbfs_priority(g), GraphError);
}

TEST(TaskGraph, SinkBitsIsOneZeroBitsViolation) {
  auto g = single({{0, 0}, {1e6, 1}, {5, 2}}, {{0, 1, 1}, {1, 2, 1}}, 3);
  const auto v = validate(g);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_NE(v[0].find("zero-bits"), std::string::npos);
}

TEST(TaskGraph, ChainPriority) {
  auto g = single({{0, 0}, {1e6, 1}, {0, 2}}, {{0, 1, 1}, {1, 2, 1}}, 3);
  const auto o = rbfs_priority(g);
  ASSERT_EQ(o.size(), 3u);
  EXPECT_EQ(o[0], (TaskRef{0, 0}));
  EXPECT_EQ(o[1], (TaskRef{0, 1}));
  EXPECT_EQ(o[2], (TaskRef{0, 2}));
}

TEST(TaskGraph, DiamondPriority) {
  auto g = single({{0, 0}, {1e6, 1}, {1e6, 1}, {0, 2}}, {{0, 2, 1}, {0, 1, 1}, {2, 3, 1}, {1, 3, 1}}, 3);
  const auto o = rbfs_priority(g);
  const std::vector<TaskRef> want = {{0, 0}, {0, 1}, {0, 2}, {0, 3}};
  EXPECT_EQ(o, want);
}

// Levels by hand: both chains have source 2, middle 1, sink 0, so equal
// levels interleave by TD index.
TEST(TaskGraph, TwoTdInterleaving) {
  TaskGraph g;
  g.num_layers = 3;
  TaskDag t;
  t.nodes = {{0, 0}, {1e6, 1}, {0, 2}};
  t.edges = {{0, 1, 1}, {1, 2, 1}};
  g.tasks = {t, t};
  const std::vector<TaskRef> want = {{0, 0}, {1, 0}, {0, 1}, {1, 1}, {0, 2}, {1, 2}};
  EXPECT_EQ(rbfs_priority(g), want);

  // A layer-skipping edge raises node 1 of TD 1 above TD 0's node 1.
  TaskDag t2;
  t2.nodes = {{0, 0}, {1e6, 1}, {1e6, 2}, {0, 3}};
  t2.edges = {{0, 1, 1}, {1, 2, 1}, {1, 3, 1}, {2, 3, 1}};
  t.nodes = {{0, 0}, {1e6, 1}, {1e6, 2}, {0, 3}};
  t.edges = {{0, 1, 1}, {0, 2, 1}, {1, 3, 1}, {2, 3, 1}};
  g.num_layers = 4;
  g.tasks = {t, t2};
  const auto o = rbfs_priority(g);
  const std::vector<TaskRef> want2 = {{1, 0}, {0, 0}, {1, 1}, {0, 1}, {0, 2}, {1, 2}, {0, 3}, {1, 3}};
  EXPECT_EQ(o, want2);
  EXPECT_TRUE(is_topological(g, o));
}

TEST(TaskGraph, PriorityIsTopologicalOnGeneratedGraphs) {
  GraphParams p;
  p.layers = 15;
  p.dependency_rate = 0.2;  // denser, more layer skips
  for (std::uint64_t s = 0; s < 200; ++s) {
    const TaskGraph g = generate_graph(3, p, s);
    const auto o = rbfs_priority(g);
    size_t n = 0;
    for (const auto& t : g.tasks) n += t.nodes.size();
    ASSERT_EQ(o.size(), n);
    ASSERT_TRUE(is_topological(g, o)) << s;
  }
}

TEST(TaskGraph, SaveLoadRoundTrip) {
  GraphParams p;
  p.layers = 9;
  const TaskGraph g = generate_graph(3, p, 77);
  const std::string text = serialize(g);
  std::istringstream is(text);
  const TaskGraph h = load_graph(is);
  EXPECT_EQ(serialize(h), text);
  EXPECT_TRUE(validate(h).empty());
  std::istringstream bad("uavmec-taskgraph 2\n");
  EXPECT_THROW(load_graph(bad), GraphError);
  std::istringstream trunc(text.substr(0, text.size() / 2));
  EXPECT_THROW(load_graph(trunc), GraphError);
}

TEST(TaskGraph, LayerMembers) {
  GraphParams p;
  p.layers = 6;
  const TaskGraph g = generate_graph(2, p, 3);
  size_t total = 0;
  for (int n = 0; n < 6; ++n) {
    for (const auto& r : g.layer_members(n)) EXPECT_EQ(g.tasks[r.td].nodes[r.node].layer, n);
    total += g.layer_members(n).size();
  }
  EXPECT_EQ(total, g.tasks[0].nodes.size() + g.tasks[1].nodes.size());
  EXPECT_EQ(g.layer_members(0).size(), 2u);
}
