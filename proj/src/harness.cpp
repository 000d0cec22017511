#include "uavmec/harness.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

namespace uavmec {

namespace {

constexpr const char* kVersion = "0.1.0";

const std::map<Algorithm, std::string>& algorithm_names() {
  static const std::map<Algorithm, std::string> names = {
      {Algorithm::Pdd, "pdd-sca"},           {Algorithm::Heuristic, "heuristic"},
      {Algorithm::FixedResource, "fixed-resource"}, {Algorithm::FixedTime, "fixed-time"},
      {Algorithm::Evolutionary, "evolutionary"},    {Algorithm::Oracle, "oracle"}};
  return names;
}

const std::map<SweepAxis, std::string>& axis_names() {
  static const std::map<SweepAxis, std::string> names = {
      {SweepAxis::None, "none"},          {SweepAxis::Workload, "workload"},
      {SweepAxis::EdgeBits, "edge-bits"}, {SweepAxis::DependencyRate, "dependency-rate"},
      {SweepAxis::TdCount, "td-count"},   {SweepAxis::Weights, "weights"}};
  return names;
}

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::pair<double, double> read_range(const nlohmann::json& j, const char* key, std::pair<double, double> dflt) {
  if (!j.contains(key)) return dflt;
  const auto& v = j.at(key);
  if (!v.is_array() || v.size() != 2) throw ModelError(std::string(key) + " must be [lo, hi]");
  return {v[0].get<double>() * 1e6, v[1].get<double>() * 1e6};
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p);
  if (!f) throw ModelError("cannot write " + p.string());
  f << text;
}

std::string csv_safe(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

}  // namespace

std::string to_string(Algorithm a) { return algorithm_names().at(a); }

Algorithm algorithm_from_string(const std::string& s) {
  for (const auto& [a, name] : algorithm_names())
    if (name == s) return a;
  throw ModelError("unknown algorithm '" + s + "'");
}

std::vector<Algorithm> all_planners() {
  return {Algorithm::Pdd, Algorithm::Heuristic, Algorithm::FixedResource, Algorithm::FixedTime,
          Algorithm::Evolutionary};
}

std::string to_string(SweepAxis a) { return axis_names().at(a); }

SweepAxis axis_from_string(const std::string& s) {
  for (const auto& [a, name] : axis_names())
    if (name == s) return a;
  throw ModelError("unknown sweep axis '" + s + "'");
}

InstanceConfig instance_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ModelError("config must be a JSON object");
  InstanceConfig c;
  c.scenario = j;
  c.scenario.erase("graph");
  if (j.contains("graph")) {
    const auto& gj = j.at("graph");
    GraphParams& gp = c.graph;
    gp.min_per_layer = gj.value("min_per_layer", gp.min_per_layer);
    gp.max_per_layer = gj.value("max_per_layer", gp.max_per_layer);
    std::tie(gp.workload_min_bits, gp.workload_max_bits) =
        read_range(gj, "workload_mbits", {gp.workload_min_bits, gp.workload_max_bits});
    std::tie(gp.edge_min_bits, gp.edge_max_bits) = read_range(gj, "edge_mbits", {gp.edge_min_bits, gp.edge_max_bits});
    std::tie(gp.input_min_bits, gp.input_max_bits) =
        read_range(gj, "input_mbits", {gp.input_min_bits, gp.input_max_bits});
    gp.dependency_rate = gj.value("dependency_rate", gp.dependency_rate);
    gp.deadline_ref_hz = gj.value("deadline_ref_hz", gp.deadline_ref_hz);
  }
  scenario_from_json(c.scenario);  // fail early on bad scenario fields
  return c;
}

InstanceConfig load_instance_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ModelError("cannot open config " + path);
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ModelError("config " + path + ": " + e.what());
  }
  return instance_config_from_json(j);
}

void check_grid_value(SweepAxis axis, double v) {
  auto bad = [&](const char* why) {
    throw ModelError(to_string(axis) + " value " + num(v) + " " + why);
  };
  if (!std::isfinite(v)) bad("is not finite");
  switch (axis) {
    case SweepAxis::None: break;
    case SweepAxis::Workload:
      if (v <= 0.2 || v > 10.0) bad("outside (0.2, 10] Mbit");
      break;
    case SweepAxis::EdgeBits:
      if (v <= 0.1 || v > 10.0) bad("outside (0.1, 10] Mbit");
      break;
    case SweepAxis::DependencyRate:
      if (v < 0.0 || v > 1.0) bad("outside [0, 1]");
      break;
    case SweepAxis::TdCount:
      if (v < 1.0 || v > 12.0 || v != std::floor(v)) bad("is not an integer in [1, 12]");
      break;
    case SweepAxis::Weights:
      if (v <= 0.0 || v > 1e4) bad("outside (0, 1e4]");
      break;
  }
}

Instance make_instance(const InstanceConfig& cfg, SweepAxis axis, double value, std::uint64_t seed) {
  check_grid_value(axis, value);
  nlohmann::json j = cfg.scenario;
  GraphParams gp = cfg.graph;
  switch (axis) {
    case SweepAxis::Workload:
      gp.workload_max_bits = value * 1e6;
      gp.workload_min_bits = (value - 0.2) * 1e6;
      break;
    case SweepAxis::EdgeBits:
      gp.edge_max_bits = value * 1e6;
      gp.edge_min_bits = (value - 0.1) * 1e6;
      break;
    case SweepAxis::DependencyRate: gp.dependency_rate = value; break;
    case SweepAxis::TdCount:
      j["num_tds"] = static_cast<int>(value);
      j.erase("td_positions");
      break;
    default: break;
  }
  Instance in;
  in.scn = scenario_from_json(j);
  const bool fixed_tds = j.contains("td_positions"), fixed_uavs = j.contains("uav_start");
  if (!fixed_tds || !fixed_uavs) {
    const auto tds = in.scn.td_positions, uavs = in.scn.uav_start;
    place_devices(in.scn, seed);
    if (fixed_tds) in.scn.td_positions = tds;
    if (fixed_uavs) in.scn.uav_start = uavs;
  }
  gp.layers = in.scn.num_slots;
  in.g = generate_graph(in.scn.num_tds, gp, seed);
  if (!j.contains("energy_budget_com_j") && !j.contains("energy_budget_prop_j")) apply_default_budgets(in.scn, in.g);
  if (axis == SweepAxis::Weights) {
    for (double& w : in.scn.weight_com) w *= value;
    for (double& w : in.scn.weight_fly) w *= value;
  }
  in.scn.validate();
  return in;
}

void ExperimentSpec::validate() const {
  if (seeds.empty()) throw ModelError("no seeds given");
  if (algorithms.empty()) throw ModelError("no algorithm given");
  if (axis != SweepAxis::None && grid.empty()) throw ModelError("sweep axis without values");
  for (double v : grid) check_grid_value(axis, v);
  if (jobs < 1) throw ModelError("jobs must be at least 1");
}

RunRecord run_one(const ExperimentSpec& spec, Algorithm algo, const Instance& in, double value, std::uint64_t seed,
                  bool keep_detail) {
  RunRecord r;
  r.axis = spec.axis;
  r.value = value;
  r.seed = seed;
  r.algorithm = algo;
  r.num_uavs = in.scn.num_uavs;
  r.model_objective = std::numeric_limits<double>::quiet_NaN();
  const auto t0 = std::chrono::steady_clock::now();
  try {
    switch (algo) {
      case Algorithm::Pdd: {
        PddResult p = run_pdd_sca(in.scn, in.g, spec.pdd);
        r.decision = p.decision;
        r.converged = p.converged;
        r.outer_iterations = p.outer_iterations;
        r.model_objective = p.model_objective;
        if (keep_detail) r.pdd = std::move(p);
        break;
      }
      case Algorithm::Heuristic: r.decision = heuristic_nearest(in.scn, in.g, spec.baseline); break;
      case Algorithm::FixedResource: r.decision = fixed_resource(in.scn, in.g, spec.baseline); break;
      case Algorithm::FixedTime: r.decision = fixed_time(in.scn, in.g, spec.baseline).decision; break;
      case Algorithm::Evolutionary: {
        const EvolutionResult e = evolutionary(in.scn, in.g, spec.baseline, seed);
        r.decision = e.decision;
        r.model_objective = e.cost;
        break;
      }
      case Algorithm::Oracle: {
        if (assignment_count(in.scn, in.g, spec.oracle.budget) > spec.oracle.budget) {
          r.status = "budget_exceeded";
          r.runtime_s = seconds_since(t0);
          return r;
        }
        const OracleResult o = enumerate_optimum(in.scn, in.g, spec.oracle);
        if (!o.feasible) {
          r.status = "infeasible";
          r.runtime_s = seconds_since(t0);
          return r;
        }
        r.decision = o.decision;
        r.model_objective = o.cost;
        break;
      }
    }
    r.metrics = system_cost(in.scn, in.g, r.decision);
    r.has_metrics = true;
    r.status = r.metrics.feasible(1e-6) ? "ok" : "infeasible";
  } catch (const std::exception& e) {
    r.status = "error: " + csv_safe(e.what());
    r.has_metrics = false;
  }
  r.runtime_s = seconds_since(t0);
  return r;
}

std::vector<RunRecord> run_experiment(const ExperimentSpec& spec, bool keep_detail) {
  spec.validate();
  const std::vector<double> grid = spec.axis == SweepAxis::None ? std::vector<double>{0.0} : spec.grid;
  struct Job {
    double value;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (double v : grid)
    for (std::uint64_t s : spec.seeds) jobs.push_back({v, s});
  const size_t A = spec.algorithms.size();
  std::vector<RunRecord> out(jobs.size() * A);

  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i; (i = next++) < jobs.size();) {
      const Job& job = jobs[i];
      try {
        const Instance in = make_instance(spec.config, spec.axis, job.value, job.seed);
        for (size_t a = 0; a < A; ++a)
          out[i * A + a] = run_one(spec, spec.algorithms[a], in, job.value, job.seed, keep_detail);
      } catch (const std::exception& e) {
        for (size_t a = 0; a < A; ++a) {
          RunRecord& r = out[i * A + a];
          r.axis = spec.axis;
          r.value = job.value;
          r.seed = job.seed;
          r.algorithm = spec.algorithms[a];
          r.status = "error: " + csv_safe(e.what());
        }
      }
    }
  };
  const int threads = std::min<int>(spec.jobs, static_cast<int>(jobs.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return out;
}

void write_csv(std::ostream& os, const std::vector<RunRecord>& rows) {
  os << "axis,value,seed,algorithm,status,feasible,converged,outer_iterations,total_cost,delay_s,td_energy_j,"
        "uav_comp_energy_j,uav_com_energy_j,prop_energy_j,balance_factor_j,max_residual,worst_residual,model_gap\n";
  for (const RunRecord& r : rows) {
    os << to_string(r.axis) << ',' << num(r.value) << ',' << r.seed << ',' << to_string(r.algorithm) << ','
       << r.status << ',';
    if (!r.has_metrics) {
      os << ",,,,,,,,,,,,\n";
      continue;
    }
    const MetricsReport& m = r.metrics;
    os << (m.feasible(1e-6) ? 1 : 0) << ',' << (r.converged ? 1 : 0) << ',' << r.outer_iterations << ','
       << num(m.total_cost) << ',' << num(m.total_delay_s) << ',' << num(m.td_energy(r.num_uavs)) << ','
       << num(r.uav_comp_energy()) << ',' << num(r.uav_com_energy()) << ',' << num(m.prop_energy()) << ','
       << num(m.balance_factor_j) << ',' << num(m.residuals.max()) << ',' << m.residuals.worst() << ','
       << num(r.model_objective - m.total_cost) << '\n';
  }
}

nlohmann::json manifest(const ExperimentSpec& spec, size_t rows) {
  nlohmann::json j;
  j["config_path"] = spec.config_path;
  j["scenario"] = spec.config.scenario;
  const GraphParams& gp = spec.config.graph;
  j["graph"] = {{"min_per_layer", gp.min_per_layer},
                {"max_per_layer", gp.max_per_layer},
                {"workload_mbits", {gp.workload_min_bits / 1e6, gp.workload_max_bits / 1e6}},
                {"edge_mbits", {gp.edge_min_bits / 1e6, gp.edge_max_bits / 1e6}},
                {"input_mbits", {gp.input_min_bits / 1e6, gp.input_max_bits / 1e6}},
                {"dependency_rate", gp.dependency_rate},
                {"deadline_ref_hz", gp.deadline_ref_hz}};
  auto& algos = j["algorithms"] = nlohmann::json::array();
  for (Algorithm a : spec.algorithms) algos.push_back(to_string(a));
  j["seeds"] = spec.seeds;
  j["axis"] = to_string(spec.axis);
  j["grid"] = spec.grid;
  j["rows"] = rows;
  j["pdd"] = {{"max_outer", spec.pdd.max_outer}, {"max_inner", spec.pdd.max_inner},
              {"h_tol", spec.pdd.h_tol},         {"rho0", spec.pdd.rho0},
              {"slack_weight", spec.pdd.block.slack_weight}};
  j["versions"] = {{"uavmec", kVersion},
                   {"compiler", __VERSION__},
                   {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                 std::to_string(EIGEN_MINOR_VERSION)},
                   {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                         std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                         std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
  j["generated_utc"] = utc_now();
  return j;
}

std::vector<RunRecord> run(const ExperimentSpec& spec) {
  std::vector<RunRecord> rows = run_experiment(spec);
  const std::filesystem::path dir(spec.out_dir);
  std::filesystem::create_directories(dir);
  std::ostringstream csv;
  write_csv(csv, rows);
  write_file(dir / "results.csv", csv.str());
  write_file(dir / "manifest.json", manifest(spec, rows.size()).dump(2) + "\n");
  return rows;
}

double metric_value(const RunRecord& r, const std::string& metric) {
  const MetricsReport& m = r.metrics;
  if (metric == "cost") return m.total_cost;
  if (metric == "delay") return m.total_delay_s;
  if (metric == "td_energy") return m.td_energy(r.num_uavs);
  if (metric == "uav_comp_energy") return r.uav_comp_energy();
  if (metric == "uav_com_energy") return r.uav_com_energy();
  if (metric == "prop_energy") return m.prop_energy();
  if (metric == "balance") return m.balance_factor_j;
  throw ModelError("unknown metric '" + metric + "'");
}

Summary summarize(const std::vector<RunRecord>& rows, Algorithm algo, double value, const std::string& metric) {
  std::vector<double> v;
  for (const RunRecord& r : rows)
    if (r.has_metrics && r.algorithm == algo && r.value == value) v.push_back(metric_value(r, metric));
  Summary s;
  s.count = static_cast<int>(v.size());
  if (v.empty()) return s;
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  for (double x : v) s.std += (x - s.mean) * (x - s.mean);
  s.std = std::sqrt(s.std / static_cast<double>(v.size()));
  return s;
}

std::vector<std::string> replicate_figures(const ExperimentSpec& spec, const std::vector<std::string>& only) {
  auto wanted = [&](const std::string& name) {
    return only.empty() || std::find(only.begin(), only.end(), name) != only.end();
  };
  const std::filesystem::path dir(spec.out_dir);
  std::filesystem::create_directories(dir);
  std::vector<std::string> written;

  if (wanted("convergence") || wanted("trajectory")) {
    ExperimentSpec s = spec;
    s.algorithms = {Algorithm::Pdd};
    s.axis = SweepAxis::None;
    s.grid.clear();
    const std::vector<RunRecord> rows = run_experiment(s, true);
    if (wanted("convergence")) {
      std::ostringstream os;
      os << "seed,outer,h,rho\n";
      for (const RunRecord& r : rows) {
        if (!r.pdd) continue;
        for (size_t l = 0; l < r.pdd->h_history.size(); ++l)
          os << r.seed << ',' << l << ',' << num(r.pdd->h_history[l]) << ',' << num(r.pdd->rho_history[l]) << '\n';
      }
      write_file(dir / "fig3_convergence.csv", os.str());
      written.push_back("fig3_convergence.csv");
    }
    if (wanted("trajectory")) {
      std::ostringstream os;
      os << "seed,uav,t,x,y\n";
      for (const RunRecord& r : rows) {
        if (!r.has_metrics) continue;
        const Decision& d = r.decision;
        for (size_t m = 0; m < d.traj.size(); ++m) {
          double t = 0.0;
          for (size_t i = 0; i < d.traj[m].size(); ++i) {
            os << r.seed << ',' << m << ',' << num(t) << ',' << num(d.traj[m][i].x()) << ','
               << num(d.traj[m][i].y()) << '\n';
            if (i + 1 < d.traj[m].size()) t += d.unit_duration(static_cast<int>(i));
          }
        }
      }
      write_file(dir / "fig4_trajectory.csv", os.str());
      written.push_back("fig4_trajectory.csv");
    }
  }

  struct Sweep {
    const char* name;
    const char* file;
    SweepAxis axis;
    std::vector<double> grid;
  };
  // The weight grid is ours: log-spaced around the default weights.
  const Sweep sweeps[] = {{"workload", "fig5_workload", SweepAxis::Workload, {0.8, 1.0, 1.2}},
                          {"edge-bits", "fig6_edge_bits", SweepAxis::EdgeBits, {0.2, 0.4, 0.6}},
                          {"dependency-rate", "fig7_dependency_rate", SweepAxis::DependencyRate, {0.02, 0.1, 0.2}},
                          {"weights", "fig9_weights", SweepAxis::Weights, {0.1, 1.0, 10.0}},
                          {"balance", "fig10_balance", SweepAxis::TdCount, {4, 5, 6}}};
  const char* metrics[] = {"cost", "delay", "td_energy", "uav_comp_energy", "uav_com_energy", "prop_energy", "balance"};
  for (const Sweep& sw : sweeps) {
    if (!wanted(sw.name)) continue;
    ExperimentSpec s = spec;
    s.axis = sw.axis;
    s.grid = spec.axis == sw.axis && !spec.grid.empty() ? spec.grid : sw.grid;
    const std::vector<RunRecord> rows = run_experiment(s);
    std::ostringstream raw, os;
    write_csv(raw, rows);
    write_file(dir / (std::string(sw.file) + "_runs.csv"), raw.str());
    os << "x,series,metric,mean,std\n";
    for (double v : s.grid)
      for (Algorithm a : s.algorithms)
        for (const char* m : metrics) {
          const Summary su = summarize(rows, a, v, m);
          if (su.count == 0) continue;
          os << num(v) << ',' << to_string(a) << ',' << m << ',' << num(su.mean) << ',' << num(su.std) << '\n';
        }
    write_file(dir / (std::string(sw.file) + ".csv"), os.str());
    written.push_back(std::string(sw.file) + ".csv");
  }
  write_file(dir / "manifest.json", manifest(spec, written.size()).dump(2) + "\n");
  return written;
}

std::vector<OracleCheckRow> oracle_check(const std::vector<std::uint64_t>& seeds, const PddOptions& pdd,
                                         const OracleOptions& oracle, const std::string& out_dir) {
  std::vector<OracleCheckRow> out;
  std::filesystem::path dir;
  if (!out_dir.empty()) {
    dir = out_dir;
    std::filesystem::create_directories(dir);
  }
  PddOptions po = pdd;
  po.optimize_trajectory = false;
  po.circle_radius_m = oracle.circle_radius_m;
  po.hover_start = oracle.path == OraclePath::Hover;
  for (std::uint64_t seed : seeds) {
    const TinyInstance t = tiny_instance(seed, oracle.path);
    OracleOptions oo = oracle;
    oo.path = t.path;
    const OracleResult o = enumerate_optimum(t.scn, t.g, oo);
    const PddResult p = run_pdd_sca(t.scn, t.g, po);
    OracleCheckRow row;
    row.seed = seed;
    row.interior = static_cast<int>(interior_order(t.g).size());
    row.oracle_feasible = o.feasible;
    row.oracle_cost = o.cost;
    row.pdd_feasible = p.metrics.feasible(1e-6);
    row.pdd_cost = p.metrics.total_cost;
    row.gap = o.feasible ? p.metrics.total_cost / o.cost - 1.0 : std::numeric_limits<double>::quiet_NaN();
    out.push_back(row);
    if (!out_dir.empty()) {
      std::ostringstream os;
      os << "assignment,pruned,feasible,cost\n";
      for (const OracleRow& r : o.table) {
        std::string a;
        for (int z : r.genome) a += std::to_string(z);
        os << (a.empty() ? "-" : a) << ',' << (r.pruned ? 1 : 0) << ',' << (r.feasible ? 1 : 0) << ','
           << (r.pruned ? "" : num(r.cost)) << '\n';
      }
      write_file(dir / ("oracle_table_seed" + std::to_string(seed) + ".csv"), os.str());
    }
  }
  if (!out_dir.empty()) {
    std::ostringstream os;
    os << "seed,interior,oracle_feasible,oracle_cost,pdd_feasible,pdd_cost,gap\n";
    for (const OracleCheckRow& r : out)
      os << r.seed << ',' << r.interior << ',' << (r.oracle_feasible ? 1 : 0) << ',' << num(r.oracle_cost) << ','
         << (r.pdd_feasible ? 1 : 0) << ',' << num(r.pdd_cost) << ',' << num(r.gap) << '\n';
    write_file(dir / "oracle_check.csv", os.str());
  }
  return out;
}

}  // namespace uavmec
