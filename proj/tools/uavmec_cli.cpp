#include "uavmec/harness.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace uavmec;

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, sep);)
    if (!item.empty()) out.push_back(item);
  return out;
}

// "1,2,5-8"
std::vector<std::uint64_t> parse_seeds(const std::string& s) {
  std::vector<std::uint64_t> out;
  for (const std::string& part : split(s, ',')) {
    const auto dash = part.find('-');
    if (dash == std::string::npos) {
      out.push_back(std::stoull(part));
      continue;
    }
    const std::uint64_t a = std::stoull(part.substr(0, dash)), b = std::stoull(part.substr(dash + 1));
    if (b < a) throw ModelError("bad seed range " + part);
    for (std::uint64_t v = a; v <= b; ++v) out.push_back(v);
  }
  return out;
}

// "workload=0.8,1.0,1.2"
void parse_sweep(const std::string& s, ExperimentSpec& spec) {
  const auto eq = s.find('=');
  if (eq == std::string::npos) throw ModelError("--sweep expects <axis>=<v1,v2,...>");
  spec.axis = axis_from_string(s.substr(0, eq));
  spec.grid.clear();
  for (const std::string& v : split(s.substr(eq + 1), ',')) spec.grid.push_back(std::stod(v));
}

struct Common {
  std::string config;
  std::string algo = "pdd-sca";
  std::string seeds = "1-10";
  std::string sweep;
  std::string out = "results";
  int slots = 0;
  int jobs = 1;
};

void add_common(CLI::App* cmd, Common& c, bool with_algo) {
  cmd->add_option("--config", c.config, "Scenario config (JSON)");
  if (with_algo)
    cmd->add_option("--algo", c.algo,
                    "pdd-sca, heuristic, fixed-resource, fixed-time, evolutionary, oracle, or a comma list; 'all' for "
                    "every planner");
  cmd->add_option("--seeds", c.seeds, "Seeds, e.g. 1,2,3 or 1-10");
  cmd->add_option("--sweep", c.sweep, "<axis>=<v1,v2,...>; axes: workload, edge-bits, dependency-rate, td-count, weights");
  cmd->add_option("--out", c.out, "Output directory");
  cmd->add_option("--slots", c.slots, "Number of slots N (overrides the config)");
  cmd->add_option("--jobs", c.jobs, "Parallel runs")->check(CLI::PositiveNumber);
}

ExperimentSpec build_spec(const Common& c) {
  ExperimentSpec spec;
  spec.config_path = c.config;
  if (!c.config.empty()) spec.config = load_instance_config(c.config);
  if (c.slots > 0) spec.config.scenario["num_slots"] = c.slots;
  spec.seeds = parse_seeds(c.seeds);
  if (c.algo == "all") {
    spec.algorithms = all_planners();
  } else {
    spec.algorithms.clear();
    for (const std::string& a : split(c.algo, ',')) spec.algorithms.push_back(algorithm_from_string(a));
  }
  if (!c.sweep.empty()) parse_sweep(c.sweep, spec);
  spec.out_dir = c.out;
  spec.jobs = c.jobs;
  spec.validate();
  return spec;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-UAV edge computing planner: PDD-SCA, baselines, oracle and experiment sweeps"};
  app.require_subcommand(1);

  Common run_opts;
  CLI::App* run_cmd = app.add_subcommand("run", "Run algorithms over seeds and a sweep grid; writes results.csv");
  add_common(run_cmd, run_opts, true);

  Common fig_opts;
  fig_opts.algo = "all";
  std::string only;
  CLI::App* fig_cmd = app.add_subcommand("figures", "Write plot data for the convergence, trajectory and sweep figures");
  add_common(fig_cmd, fig_opts, true);
  fig_cmd->add_option("--only", only,
                      "Comma list of: convergence, trajectory, workload, edge-bits, dependency-rate, weights, balance");

  Common orc_opts;
  orc_opts.seeds = "1-5";
  CLI::App* orc_cmd = app.add_subcommand("oracle-check", "Compare PDD-SCA with brute force on tiny instances");
  orc_cmd->add_option("--seeds", orc_opts.seeds, "Seeds, e.g. 1,2,3 or 1-5");
  orc_cmd->add_option("--out", orc_opts.out, "Output directory");
  bool hover = false;
  orc_cmd->add_flag("--hover", hover, "Hold the UAVs at their start instead of circling");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      const ExperimentSpec spec = build_spec(run_opts);
      const auto rows = run(spec);
      int ok = 0;
      for (const auto& r : rows) ok += r.status == "ok";
      std::printf("%zu runs, %d feasible; results in %s/results.csv\n", rows.size(), ok, spec.out_dir.c_str());
    } else if (*fig_cmd) {
      const ExperimentSpec spec = build_spec(fig_opts);
      for (const std::string& f : replicate_figures(spec, split(only, ',')))
        std::printf("%s/%s\n", spec.out_dir.c_str(), f.c_str());
    } else if (*orc_cmd) {
      OracleOptions oo;
      oo.path = hover ? OraclePath::Hover : OraclePath::Circle;
      int within = 0;
      const auto rows = oracle_check(parse_seeds(orc_opts.seeds), PddOptions{}, oo, orc_opts.out);
      std::printf("seed interior oracle pdd gap\n");
      for (const auto& r : rows) {
        std::printf("%4llu %8d %9.5f %9.5f %+.3f%%\n", static_cast<unsigned long long>(r.seed), r.interior,
                    r.oracle_cost, r.pdd_cost, 100.0 * r.gap);
        within += r.oracle_feasible && r.pdd_feasible && r.gap <= 0.05;
      }
      std::printf("%d/%zu within 5%%\n", within, rows.size());
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
