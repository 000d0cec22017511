#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace uavmec {

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GraphParams {
  int layers = 6;  // total layers including source (layer 0) and sink (last)
  int min_per_layer = 1;
  int max_per_layer = 3;
  double workload_min_bits = 0.8e6;
  double workload_max_bits = 1.0e6;
  double edge_min_bits = 0.1e6;
  double edge_max_bits = 0.2e6;
  double input_min_bits = 1.5e6;
  double input_max_bits = 3.0e6;
  double dependency_rate = 0.02;
  double deadline_ref_hz = 1.5e9;
  double cycles_per_bit = 1e3;
};

struct SubTask {
  double compute_bits = 0.0;
  int layer = 0;
};

struct Edge {
  int from = 0;
  int to = 0;
  double bits = 0.0;
};

// One TD's task. Node 0 is the source, the last node is the sink; interior
// nodes are numbered layer by layer.
struct TaskDag {
  std::vector<SubTask> nodes;
  std::vector<Edge> edges;
  double deadline_s = 0.0;

  int source() const { return 0; }
  int sink() const { return static_cast<int>(nodes.size()) - 1; }
  int num_interior() const { return static_cast<int>(nodes.size()) - 2; }
  bool is_interior(int k) const { return k > 0 && k < sink(); }
  double total_compute_bits() const;
};

struct TaskRef {
  int td = 0;
  int node = 0;
  bool operator==(const TaskRef&) const = default;
};

struct TaskGraph {
  int num_layers = 0;  // equals the number of slots
  std::vector<TaskDag> tasks;

  int num_tds() const { return static_cast<int>(tasks.size()); }
  // Sub-tasks executing in slot n.
  std::vector<TaskRef> layer_members(int n) const;
  // Outgoing edge indices per node, per TD.
  std::vector<std::vector<std::vector<int>>> out_edges() const;
  double min_deadline() const;
  int num_interior() const;
};

TaskGraph generate_graph(int num_tds, const GraphParams& params, std::uint64_t seed);

// Empty iff every structural invariant holds.
std::vector<std::string> validate(const TaskGraph& g);

// Topological order: longest-path level from the sink descending, ties by
// (TD index, node index). Throws GraphError on a cycle.
std::vector<TaskRef> rbfs_priority(const TaskGraph& g);

void save_graph(const TaskGraph& g, std::ostream& os);
TaskGraph load_graph(std::istream& is);

}  // namespace uavmec
