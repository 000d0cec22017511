#pragma once

#include "uavmec/task_graph.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace uavmec {

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class InvalidLinkError : public ModelError {
 public:
  using ModelError::ModelError;
};
class DegenerateGeometryError : public ModelError {
 public:
  using ModelError::ModelError;
};

using Vec2 = Eigen::Vector2d;

// Rotary-wing propulsion constants.
struct Propulsion {
  double blade_power_w = 79.86;   // P0
  double induced_power_w = 88.63;  // Pi
  double tip_speed = 120.0;        // U_tip, m/s
  double induced_velocity = 4.03;  // v0, m/s
  double fuselage_drag = 0.6;      // d0
  double air_density = 1.225;      // rho
  double solidity = 0.05;          // s
  double disc_area = 0.503;        // A, m^2

  double parasite_coef() const { return 0.5 * fuselage_drag * air_density * solidity * disc_area; }
};

double propulsion_power(const Propulsion& p, double speed);

// Device ids: 0..M-1 are UAVs, M..M+U-1 are TDs. Offloading choice z = 0
// means local execution on the owning TD, z = m+1 means UAV m.
struct Scenario {
  int num_uavs = 3;
  int num_tds = 4;
  int num_slots = 6;
  std::vector<Vec2> td_positions;
  std::vector<Vec2> uav_start;
  double altitude_m = 50.0;
  double bandwidth_hz = 120e6;
  double ref_gain = 1e-5;
  double noise_psd = 1e-16;  // W/Hz
  double td_power_max_w = 0.19952623149688797;   // 23 dBm
  double uav_power_max_w = 3.1622776601683795;   // 35 dBm
  double td_cpu_max_hz = 0.5e9;
  double uav_cpu_max_hz = 10e9;
  std::vector<double> cycles_per_bit;  // per device
  std::vector<double> capacitance;     // per device, J s^2 / cycle^3
  double max_speed = 35.0;
  double min_separation = 10.0;
  double max_comm_unit_s = 0.5;
  std::vector<double> energy_budget_com;   // per device, J
  std::vector<double> energy_budget_prop;  // per UAV, J
  Propulsion propulsion;
  double weight_delay = 1.0;
  std::vector<double> weight_com;  // per device
  std::vector<double> weight_fly;  // per UAV

  int num_devices() const { return num_uavs + num_tds; }
  bool is_uav(int dev) const { return dev < num_uavs; }
  int td_device(int u) const { return num_uavs + u; }
  int device_of(int u, int z) const { return z == 0 ? num_uavs + u : z - 1; }
  int num_choices() const { return num_uavs + 1; }
  double link_bandwidth() const;  // per-link bandwidth
  double tx_power(int dev) const;
  double cpu_max(int dev) const { return is_uav(dev) ? uav_cpu_max_hz : td_cpu_max_hz; }

  void validate() const;  // throws ModelError
};

// Table-2 defaults with per-device vectors sized; positions left empty.
Scenario default_scenario(int num_uavs, int num_tds, int num_slots);

// TDs uniform in three disc regions on an equilateral triangle, UAVs at the
// pairwise midpoints of the region centres.
void place_devices(Scenario& scn, std::uint64_t seed);

// Budgets that depend on the workload: UAV computing budget from running
// everything at 3 GHz split over UAVs; propulsion from 3 s per slot at 20 m/s.
void apply_default_budgets(Scenario& scn, const TaskGraph& g);

Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const Scenario& scn);

// Offloading fractions and frequencies are indexed [u][k][z].
struct Decision {
  std::vector<std::vector<std::vector<double>>> x;
  std::vector<std::vector<std::vector<double>>> f;  // Hz
  std::vector<double> tau_comp;                     // per slot, s
  std::vector<double> tau_comm;                     // per slot, s
  // Waypoints at unit boundaries: traj[m][i] for i in 0..2N; unit 2n is the
  // computation unit of slot n, unit 2n+1 its communication unit.
  std::vector<std::vector<Vec2>> traj;

  double unit_duration(int unit) const { return unit % 2 == 0 ? tau_comp[static_cast<size_t>(unit / 2)] : tau_comm[static_cast<size_t>(unit / 2)]; }
};

// Zero-initialised decision with the right shapes; source and sink fixed to
// local execution, UAVs hovering at their start.
Decision empty_decision(const Scenario& scn, const TaskGraph& g);

nlohmann::json decision_to_json(const Decision& d);
Decision decision_from_json(const nlohmann::json& j);

Vec2 device_position(const Scenario& scn, const Decision& d, int dev, int waypoint);

double channel_gain(const Scenario& scn, int a, int b, const Vec2& qa, const Vec2& qb);
double link_rate(const Scenario& scn, int a, int b, double gain);
// Rate between devices at a waypoint of the decision's trajectory.
double link_rate_at(const Scenario& scn, const Decision& d, int a, int b, int waypoint);

double comp_time(double x, double bits, double cycles_per_bit, double f_hz);
std::vector<double> comp_times(const Scenario& scn, const TaskGraph& g, const Decision& d, int slot);
// Transmission time matrix [sender][receiver] of a slot (self-pairs zero).
std::vector<std::vector<double>> comm_time_matrix(const Scenario& scn, const TaskGraph& g, const Decision& d, int slot);
std::vector<double> comm_times(const Scenario& scn, const TaskGraph& g, const Decision& d, int slot);
double slot_duration(const std::vector<double>& comp, const std::vector<double>& comm);

struct Residuals {
  double comm_unit = 0;      // tau_comm <= max for slots after the first
  double motion = 0;         // per-unit displacement <= V_max * duration
  double separation = 0;     // pairwise UAV distance >= d_min
  double assignment = 0;     // fractions sum to one
  double binary = 0;         // distance of x from {0,1}
  double td_cpu = 0;         // local frequency cap
  double uav_cpu = 0;        // UAV frequency cap
  double coverage = 0;       // units long enough for computation and transfer
  double deadline = 0;
  double energy_com = 0;
  double energy_prop = 0;
  double return_home = 0;
  double domain = 0;         // negative durations or frequencies

  double max() const;
  std::string worst() const;
};

struct MetricsReport {
  double total_cost = 0;
  double total_delay_s = 0;
  std::vector<double> slot_delay_s;
  std::vector<double> comm_energy_j;  // per device
  std::vector<double> comp_energy_j;  // per device
  std::vector<double> prop_energy_j;  // per UAV
  double balance_factor_j = 0;
  Residuals residuals;

  bool feasible(double tol = 1e-6) const { return residuals.max() <= tol; }
  double uav_comp_energy(int num_uavs) const;
  double uav_com_energy(int num_uavs) const;  // communication + computation
  double td_energy(int num_uavs) const;
  double prop_energy() const;
  // Recombines the breakdown with the scenario weights.
  double recombine(const Scenario& scn) const;
};

double balance_factor(const std::vector<double>& energies);

// Exact evaluation of a decision: delay, energies, cost and constraint
// residuals. Never throws on infeasibility.
MetricsReport system_cost(const Scenario& scn, const TaskGraph& g, const Decision& d);

}  // namespace uavmec
