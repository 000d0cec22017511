#include "uavmec/scenario.hpp"

#include "uavmec/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace uavmec {

namespace {
constexpr double kPi = 3.14159265358979323846;

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
}  // namespace

double propulsion_power(const Propulsion& p, double v) {
  if (!(v >= 0.0)) throw ModelError("speed must be non-negative");
  const double blade = p.blade_power_w * (1.0 + 3.0 * v * v / (p.tip_speed * p.tip_speed));
  // sqrt(1 + a^2) - a written without cancellation.
  const double a = v * v / (2.0 * p.induced_velocity * p.induced_velocity);
  const double induced = p.induced_power_w * std::sqrt(1.0 / (std::sqrt(1.0 + a * a) + a));
  return blade + induced + p.parasite_coef() * v * v * v;
}

double Scenario::link_bandwidth() const {
  const double n = num_devices();
  return 2.0 * bandwidth_hz / (n * (n - 1.0));
}

double Scenario::tx_power(int dev) const {
  return is_uav(dev) ? uav_power_max_w / (num_tds + num_uavs - 1) : td_power_max_w / num_uavs;
}

void Scenario::validate() const {
  if (num_uavs < 1 || num_tds < 1 || num_slots < 1) throw ModelError("need M, U, N >= 1");
  const auto nd = static_cast<size_t>(num_devices());
  if (td_positions.size() != static_cast<size_t>(num_tds)) throw ModelError("td_positions size mismatch");
  if (uav_start.size() != static_cast<size_t>(num_uavs)) throw ModelError("uav_start size mismatch");
  if (cycles_per_bit.size() != nd || capacitance.size() != nd || energy_budget_com.size() != nd ||
      weight_com.size() != nd)
    throw ModelError("per-device vector size mismatch");
  if (energy_budget_prop.size() != static_cast<size_t>(num_uavs) || weight_fly.size() != static_cast<size_t>(num_uavs))
    throw ModelError("per-UAV vector size mismatch");
  auto pos = [](double v, const char* what) {
    if (!(v > 0)) throw ModelError(std::string(what) + " must be strictly positive");
  };
  pos(bandwidth_hz, "bandwidth");
  pos(ref_gain, "reference gain");
  pos(noise_psd, "noise psd");
  pos(td_power_max_w, "TD power");
  pos(uav_power_max_w, "UAV power");
  pos(td_cpu_max_hz, "TD cpu");
  pos(uav_cpu_max_hz, "UAV cpu");
  pos(max_speed, "max speed");
  pos(max_comm_unit_s, "max comm unit");
  for (double v : cycles_per_bit) pos(v, "cycles per bit");
  for (double v : capacitance) pos(v, "capacitance");
  for (double v : energy_budget_com) pos(v, "energy budget");
  for (double v : energy_budget_prop) pos(v, "propulsion budget");
  if (min_separation < 0) throw ModelError("negative separation");
  if (num_devices() < 2) throw ModelError("need at least two devices");
}

Scenario default_scenario(int M, int U, int N) {
  Scenario s;
  s.num_uavs = M;
  s.num_tds = U;
  s.num_slots = N;
  const auto nd = static_cast<size_t>(M + U);
  s.cycles_per_bit.assign(nd, 1e3);
  s.capacitance.assign(nd, 1e-27);
  s.energy_budget_com.assign(nd, 10.0);
  s.energy_budget_prop.assign(static_cast<size_t>(M), 1e9);
  s.weight_com.assign(nd, 0.09);
  for (int m = 0; m < M; ++m) s.weight_com[static_cast<size_t>(m)] = 0.01;
  s.weight_fly.assign(static_cast<size_t>(M), 1e-4);
  s.td_positions.assign(static_cast<size_t>(U), Vec2(100.0, 100.0));
  s.uav_start.assign(static_cast<size_t>(M), Vec2(100.0, 100.0));
  return s;
}

void place_devices(Scenario& s, std::uint64_t seed) {
  const double side = 80.0, radius = 40.0;
  const Vec2 c0(60.0, 70.0), c1(c0.x() + side, c0.y()), c2(c0.x() + side / 2, c0.y() + side * std::sqrt(3.0) / 2);
  const Vec2 centres[3] = {c0, c1, c2};
  Rng rng(seed);
  s.td_positions.resize(static_cast<size_t>(s.num_tds));
  for (int u = 0; u < s.num_tds; ++u) {
    // Area-uniform point in the disc.
    const double r = radius * std::sqrt(rng.uniform01());
    const double th = 2.0 * kPi * rng.uniform01();
    s.td_positions[static_cast<size_t>(u)] = centres[u % 3] + r * Vec2(std::cos(th), std::sin(th));
  }
  const Vec2 mids[3] = {(c0 + c1) / 2, (c1 + c2) / 2, (c2 + c0) / 2};
  const Vec2 centroid = (c0 + c1 + c2) / 3;
  s.uav_start.resize(static_cast<size_t>(s.num_uavs));
  for (int m = 0; m < s.num_uavs; ++m) {
    if (m < 3) {
      s.uav_start[static_cast<size_t>(m)] = mids[m];
    } else {
      const double th = 2.0 * kPi * (m - 3) / std::max(1, s.num_uavs - 3);
      s.uav_start[static_cast<size_t>(m)] = centroid + 15.0 * Vec2(std::cos(th), std::sin(th));
    }
  }
}

void apply_default_budgets(Scenario& s, const TaskGraph& g) {
  double bits = 0.0;
  for (const auto& t : g.tasks) bits += t.total_compute_bits();
  for (int m = 0; m < s.num_uavs; ++m) {
    const auto i = static_cast<size_t>(m);
    s.energy_budget_com[i] = bits * s.cycles_per_bit[i] * s.capacitance[i] * 9e18 / s.num_uavs;
    s.energy_budget_prop[i] = s.num_slots * 3.0 * propulsion_power(s.propulsion, 20.0);
  }
}

namespace {

template <class T>
void read(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

// Scalar or per-entry array.
void read_vec(const nlohmann::json& j, const char* key, std::vector<double>& out, size_t n, double (*conv)(double)) {
  if (!j.contains(key)) return;
  const auto& v = j.at(key);
  if (v.is_array()) {
    if (v.size() != n) throw ModelError(std::string("config field '") + key + "' has wrong length");
    for (size_t i = 0; i < n; ++i) out[i] = conv ? conv(v[i].get<double>()) : v[i].get<double>();
  } else {
    out.assign(n, conv ? conv(v.get<double>()) : v.get<double>());
  }
}

std::vector<Vec2> read_points(const nlohmann::json& v) {
  std::vector<Vec2> pts;
  for (const auto& p : v) {
    if (!p.is_array() || p.size() != 2) throw ModelError("positions must be [x, y] pairs");
    pts.emplace_back(p[0].get<double>(), p[1].get<double>());
  }
  return pts;
}

}  // namespace

Scenario scenario_from_json(const nlohmann::json& j) {
  const int M = j.value("num_uavs", 3), U = j.value("num_tds", 4), N = j.value("num_slots", 6);
  if (M < 1 || U < 1 || N < 1) throw ModelError("need M, U, N >= 1");
  Scenario s = default_scenario(M, U, N);
  read(j, "altitude_m", s.altitude_m);
  read(j, "bandwidth_hz", s.bandwidth_hz);
  if (j.contains("ref_gain_db")) s.ref_gain = db_to_linear(j["ref_gain_db"].get<double>());
  if (j.contains("noise_psd_dbm")) s.noise_psd = dbm_to_watt(j["noise_psd_dbm"].get<double>());
  if (j.contains("td_power_max_dbm")) s.td_power_max_w = dbm_to_watt(j["td_power_max_dbm"].get<double>());
  if (j.contains("uav_power_max_dbm")) s.uav_power_max_w = dbm_to_watt(j["uav_power_max_dbm"].get<double>());
  read(j, "td_cpu_max_hz", s.td_cpu_max_hz);
  read(j, "uav_cpu_max_hz", s.uav_cpu_max_hz);
  const auto nd = static_cast<size_t>(M + U);
  read_vec(j, "cycles_per_bit", s.cycles_per_bit, nd, nullptr);
  read_vec(j, "capacitance", s.capacitance, nd, nullptr);
  read(j, "max_speed_mps", s.max_speed);
  read(j, "min_separation_m", s.min_separation);
  read(j, "max_comm_unit_s", s.max_comm_unit_s);
  read_vec(j, "energy_budget_com_j", s.energy_budget_com, nd, nullptr);
  read_vec(j, "energy_budget_prop_j", s.energy_budget_prop, static_cast<size_t>(M), nullptr);
  read(j, "weight_delay", s.weight_delay);
  if (j.contains("weight_com_uav")) {
    const double w = j["weight_com_uav"].get<double>();
    for (int m = 0; m < M; ++m) s.weight_com[static_cast<size_t>(m)] = w;
  }
  if (j.contains("weight_com_td")) {
    const double w = j["weight_com_td"].get<double>();
    for (int u = 0; u < U; ++u) s.weight_com[static_cast<size_t>(M + u)] = w;
  }
  read_vec(j, "weight_com", s.weight_com, nd, nullptr);
  read_vec(j, "weight_fly", s.weight_fly, static_cast<size_t>(M), nullptr);
  if (j.contains("propulsion")) {
    const auto& p = j["propulsion"];
    read(p, "blade_power_w", s.propulsion.blade_power_w);
    read(p, "induced_power_w", s.propulsion.induced_power_w);
    read(p, "tip_speed_mps", s.propulsion.tip_speed);
    read(p, "induced_velocity_mps", s.propulsion.induced_velocity);
    read(p, "fuselage_drag", s.propulsion.fuselage_drag);
    read(p, "air_density", s.propulsion.air_density);
    read(p, "solidity", s.propulsion.solidity);
    read(p, "disc_area_m2", s.propulsion.disc_area);
  }
  if (j.contains("td_positions")) s.td_positions = read_points(j["td_positions"]);
  if (j.contains("uav_start")) s.uav_start = read_points(j["uav_start"]);
  return s;
}

nlohmann::json decision_to_json(const Decision& d) {
  nlohmann::json j;
  j["x"] = d.x;
  j["f_hz"] = d.f;
  j["tau_comp_s"] = d.tau_comp;
  j["tau_comm_s"] = d.tau_comm;
  auto& t = j["trajectory_m"] = nlohmann::json::array();
  for (const auto& path : d.traj) {
    auto& jp = t.emplace_back(nlohmann::json::array());
    for (const Vec2& q : path) jp.push_back({q.x(), q.y()});
  }
  return j;
}

Decision decision_from_json(const nlohmann::json& j) {
  Decision d;
  j.at("x").get_to(d.x);
  j.at("f_hz").get_to(d.f);
  j.at("tau_comp_s").get_to(d.tau_comp);
  j.at("tau_comm_s").get_to(d.tau_comm);
  for (const auto& jp : j.at("trajectory_m")) {
    auto& path = d.traj.emplace_back();
    for (const auto& q : jp) path.emplace_back(q.at(0).get<double>(), q.at(1).get<double>());
  }
  return d;
}

nlohmann::json scenario_to_json(const Scenario& s) {
  nlohmann::json j;
  j["num_uavs"] = s.num_uavs;
  j["num_tds"] = s.num_tds;
  j["num_slots"] = s.num_slots;
  j["altitude_m"] = s.altitude_m;
  j["bandwidth_hz"] = s.bandwidth_hz;
  j["ref_gain_db"] = 10.0 * std::log10(s.ref_gain);
  j["noise_psd_dbm"] = 10.0 * std::log10(s.noise_psd) + 30.0;
  j["td_power_max_dbm"] = 10.0 * std::log10(s.td_power_max_w) + 30.0;
  j["uav_power_max_dbm"] = 10.0 * std::log10(s.uav_power_max_w) + 30.0;
  j["td_cpu_max_hz"] = s.td_cpu_max_hz;
  j["uav_cpu_max_hz"] = s.uav_cpu_max_hz;
  j["cycles_per_bit"] = s.cycles_per_bit;
  j["capacitance"] = s.capacitance;
  j["max_speed_mps"] = s.max_speed;
  j["min_separation_m"] = s.min_separation;
  j["max_comm_unit_s"] = s.max_comm_unit_s;
  j["energy_budget_com_j"] = s.energy_budget_com;
  j["energy_budget_prop_j"] = s.energy_budget_prop;
  j["weight_delay"] = s.weight_delay;
  j["weight_com"] = s.weight_com;
  j["weight_fly"] = s.weight_fly;
  const auto& p = s.propulsion;
  j["propulsion"] = {{"blade_power_w", p.blade_power_w},     {"induced_power_w", p.induced_power_w},
                     {"tip_speed_mps", p.tip_speed},         {"induced_velocity_mps", p.induced_velocity},
                     {"fuselage_drag", p.fuselage_drag},     {"air_density", p.air_density},
                     {"solidity", p.solidity},               {"disc_area_m2", p.disc_area}};
  auto pts = [](const std::vector<Vec2>& v) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& q : v) a.push_back({q.x(), q.y()});
    return a;
  };
  j["td_positions"] = pts(s.td_positions);
  j["uav_start"] = pts(s.uav_start);
  return j;
}

Decision empty_decision(const Scenario& scn, const TaskGraph& g) {
  Decision d;
  const auto Z = static_cast<size_t>(scn.num_choices());
  d.x.resize(g.tasks.size());
  d.f.resize(g.tasks.size());
  for (size_t u = 0; u < g.tasks.size(); ++u) {
    const size_t n = g.tasks[u].nodes.size();
    d.x[u].assign(n, std::vector<double>(Z, 0.0));
    d.f[u].assign(n, std::vector<double>(Z, 0.0));
    d.x[u][0][0] = 1.0;
    d.x[u][n - 1][0] = 1.0;
  }
  const auto N = static_cast<size_t>(g.num_layers);
  d.tau_comp.assign(N, 0.0);
  d.tau_comm.assign(N, 0.0);
  d.traj.resize(static_cast<size_t>(scn.num_uavs));
  for (int m = 0; m < scn.num_uavs; ++m)
    d.traj[static_cast<size_t>(m)].assign(2 * N + 1, scn.uav_start[static_cast<size_t>(m)]);
  return d;
}

Vec2 device_position(const Scenario& scn, const Decision& d, int dev, int waypoint) {
  if (scn.is_uav(dev)) return d.traj.at(static_cast<size_t>(dev)).at(static_cast<size_t>(waypoint));
  return scn.td_positions.at(static_cast<size_t>(dev - scn.num_uavs));
}

double channel_gain(const Scenario& scn, int a, int b, const Vec2& qa, const Vec2& qb) {
  if (a == b) throw InvalidLinkError("channel gain of a device with itself");
  const bool ua = scn.is_uav(a), ub = scn.is_uav(b);
  if (!ua && !ub) throw InvalidLinkError("TD-to-TD links do not exist");
  if (!qa.allFinite() || !qb.allFinite()) throw DegenerateGeometryError("non-finite position");
  double d2 = (qa - qb).squaredNorm();
  if (ua != ub) d2 += scn.altitude_m * scn.altitude_m;
  if (d2 == 0.0) throw DegenerateGeometryError("co-located UAVs");
  return scn.ref_gain / d2;
}

double link_rate(const Scenario& scn, int a, int b, double gain) {
  if (a == b) return std::numeric_limits<double>::infinity();
  if (!(gain >= 0.0)) throw ModelError("negative channel gain");
  const double bw = scn.link_bandwidth();
  return bw * std::log2(1.0 + scn.tx_power(a) * gain / (bw * scn.noise_psd));
}

double link_rate_at(const Scenario& scn, const Decision& d, int a, int b, int waypoint) {
  if (a == b) return std::numeric_limits<double>::infinity();
  const Vec2 qa = device_position(scn, d, a, waypoint), qb = device_position(scn, d, b, waypoint);
  return link_rate(scn, a, b, channel_gain(scn, a, b, qa, qb));
}

double comp_time(double x, double bits, double cpb, double f) {
  if (x <= 0.0 || bits <= 0.0) return 0.0;
  if (!(f > 0.0)) throw ModelError("sub-task assigned with zero frequency");
  return x * bits * cpb / f;
}

std::vector<double> comp_times(const Scenario& scn, const TaskGraph& g, const Decision& d, int slot) {
  std::vector<double> t(static_cast<size_t>(scn.num_devices()), 0.0);
  for (const auto& r : g.layer_members(slot)) {
    const double bits = g.tasks[static_cast<size_t>(r.td)].nodes[static_cast<size_t>(r.node)].compute_bits;
    for (int z = 0; z < scn.num_choices(); ++z) {
      const int dev = scn.device_of(r.td, z);
      const auto& xs = d.x[static_cast<size_t>(r.td)][static_cast<size_t>(r.node)];
      const auto& fs = d.f[static_cast<size_t>(r.td)][static_cast<size_t>(r.node)];
      const double v = comp_time(xs[static_cast<size_t>(z)], bits, scn.cycles_per_bit[static_cast<size_t>(dev)],
                                 fs[static_cast<size_t>(z)]);
      t[static_cast<size_t>(dev)] = std::max(t[static_cast<size_t>(dev)], v);
    }
  }
  return t;
}

std::vector<std::vector<double>> comm_time_matrix(const Scenario& scn, const TaskGraph& g, const Decision& d,
                                                  int slot) {
  const auto D = static_cast<size_t>(scn.num_devices());
  std::vector<std::vector<double>> bits(D, std::vector<double>(D, 0.0));
  const int Z = scn.num_choices();
  for (const auto& r : g.layer_members(slot)) {
    const auto& task = g.tasks[static_cast<size_t>(r.td)];
    const auto& xu = d.x[static_cast<size_t>(r.td)];
    for (const auto& e : task.edges) {
      if (e.from != r.node) continue;
      for (int z = 0; z < Z; ++z) {
        const double xa = xu[static_cast<size_t>(e.from)][static_cast<size_t>(z)];
        if (xa <= 0.0) continue;
        for (int z2 = 0; z2 < Z; ++z2) {
          const double xb = xu[static_cast<size_t>(e.to)][static_cast<size_t>(z2)];
          if (xb <= 0.0) continue;
          const int a = scn.device_of(r.td, z), b = scn.device_of(r.td, z2);
          if (a == b) continue;
          bits[static_cast<size_t>(a)][static_cast<size_t>(b)] += xa * xb * e.bits;
        }
      }
    }
  }
  std::vector<std::vector<double>> t(D, std::vector<double>(D, 0.0));
  for (size_t a = 0; a < D; ++a)
    for (size_t b = 0; b < D; ++b) {
      if (bits[a][b] <= 0.0) continue;
      const double rate = link_rate_at(scn, d, static_cast<int>(a), static_cast<int>(b), 2 * slot + 1);
      if (!(rate > 0.0)) throw InvalidLinkError("successor placed behind a zero-rate link");
      t[a][b] = bits[a][b] / rate;
    }
  return t;
}

std::vector<double> comm_times(const Scenario& scn, const TaskGraph& g, const Decision& d, int slot) {
  const auto m = comm_time_matrix(scn, g, d, slot);
  std::vector<double> t(m.size(), 0.0);
  for (size_t a = 0; a < m.size(); ++a) t[a] = *std::max_element(m[a].begin(), m[a].end());
  return t;
}

double slot_duration(const std::vector<double>& comp, const std::vector<double>& comm) {
  const double a = comp.empty() ? 0.0 : *std::max_element(comp.begin(), comp.end());
  const double b = comm.empty() ? 0.0 : *std::max_element(comm.begin(), comm.end());
  return a + b;
}

double Residuals::max() const {
  return std::max({comm_unit, motion, separation, assignment, binary, td_cpu, uav_cpu, coverage, deadline,
                   energy_com, energy_prop, return_home, domain});
}

std::string Residuals::worst() const {
  const std::pair<const char*, double> all[] = {
      {"comm_unit", comm_unit}, {"motion", motion},   {"separation", separation}, {"assignment", assignment},
      {"binary", binary},       {"td_cpu", td_cpu},   {"uav_cpu", uav_cpu},       {"coverage", coverage},
      {"deadline", deadline},   {"energy_com", energy_com}, {"energy_prop", energy_prop},
      {"return_home", return_home}, {"domain", domain}};
  const auto* best = &all[0];
  for (const auto& p : all)
    if (p.second > best->second) best = &p;
  return best->first;
}

double MetricsReport::uav_comp_energy(int M) const {
  return std::accumulate(comp_energy_j.begin(), comp_energy_j.begin() + M, 0.0);
}
double MetricsReport::uav_com_energy(int M) const {
  return uav_comp_energy(M) + std::accumulate(comm_energy_j.begin(), comm_energy_j.begin() + M, 0.0);
}
double MetricsReport::td_energy(int M) const {
  return std::accumulate(comp_energy_j.begin() + M, comp_energy_j.end(), 0.0) +
         std::accumulate(comm_energy_j.begin() + M, comm_energy_j.end(), 0.0);
}
double MetricsReport::prop_energy() const { return std::accumulate(prop_energy_j.begin(), prop_energy_j.end(), 0.0); }

double MetricsReport::recombine(const Scenario& s) const {
  double c = s.weight_delay * total_delay_s;
  for (size_t z = 0; z < comm_energy_j.size(); ++z) c += s.weight_com[z] * (comm_energy_j[z] + comp_energy_j[z]);
  for (size_t m = 0; m < prop_energy_j.size(); ++m) c += s.weight_fly[m] * prop_energy_j[m];
  return c;
}

double balance_factor(const std::vector<double>& e) {
  if (e.empty()) return 0.0;
  const double mean = std::accumulate(e.begin(), e.end(), 0.0) / static_cast<double>(e.size());
  double ss = 0.0;
  for (double v : e) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(e.size()));
}

MetricsReport system_cost(const Scenario& scn, const TaskGraph& g, const Decision& d) {
  const int M = scn.num_uavs, D = scn.num_devices(), N = g.num_layers, Z = scn.num_choices();
  MetricsReport r;
  r.comm_energy_j.assign(static_cast<size_t>(D), 0.0);
  r.comp_energy_j.assign(static_cast<size_t>(D), 0.0);
  r.prop_energy_j.assign(static_cast<size_t>(M), 0.0);
  r.slot_delay_s.assign(static_cast<size_t>(N), 0.0);
  Residuals& res = r.residuals;
  auto bump = [](double& slot, double v) {
    if (std::isnan(v)) v = std::numeric_limits<double>::infinity();
    slot = std::max(slot, v);
  };

  for (int n = 0; n < N; ++n) {
    const double t1 = d.tau_comp[static_cast<size_t>(n)], t2 = d.tau_comm[static_cast<size_t>(n)];
    if (!(t1 >= 0.0) || !(t2 >= 0.0)) bump(res.domain, 1.0);
    r.slot_delay_s[static_cast<size_t>(n)] = t1 + t2;
    if (n >= 1) bump(res.comm_unit, (t2 - scn.max_comm_unit_s) / scn.max_comm_unit_s);

    std::vector<double> comp(static_cast<size_t>(D), 0.0), comm(static_cast<size_t>(D), 0.0);
    std::vector<std::vector<double>> T;
    try {
      comp = comp_times(scn, g, d, n);
      T = comm_time_matrix(scn, g, d, n);
    } catch (const ModelError&) {
      bump(res.domain, std::numeric_limits<double>::infinity());
      T.assign(static_cast<size_t>(D), std::vector<double>(static_cast<size_t>(D), 0.0));
    }
    for (int a = 0; a < D; ++a) {
      double send = 0.0;
      for (int b = 0; b < D; ++b) {
        const double t = T[static_cast<size_t>(a)][static_cast<size_t>(b)];
        send += t;
        comm[static_cast<size_t>(a)] = std::max(comm[static_cast<size_t>(a)], t);
      }
      r.comm_energy_j[static_cast<size_t>(a)] += scn.tx_power(a) * send;
    }
    const double need1 = *std::max_element(comp.begin(), comp.end());
    const double need2 = *std::max_element(comm.begin(), comm.end());
    bump(res.coverage, (need1 - t1) / std::max(1.0, need1));
    bump(res.coverage, (need2 - t2) / std::max(1.0, need2));

    // Frequency caps and computation energy.
    std::vector<double> load(static_cast<size_t>(D), 0.0);
    for (const auto& ref : g.layer_members(n)) {
      const auto& xs = d.x[static_cast<size_t>(ref.td)][static_cast<size_t>(ref.node)];
      const auto& fs = d.f[static_cast<size_t>(ref.td)][static_cast<size_t>(ref.node)];
      const double bits = g.tasks[static_cast<size_t>(ref.td)].nodes[static_cast<size_t>(ref.node)].compute_bits;
      for (int z = 0; z < Z; ++z) {
        const int dev = scn.device_of(ref.td, z);
        const double f = fs[static_cast<size_t>(z)], x = xs[static_cast<size_t>(z)];
        if (!(f >= 0.0) || !(x >= -1e-12) || !(x <= 1.0 + 1e-12)) bump(res.domain, 1.0);
        load[static_cast<size_t>(dev)] += f;
        r.comp_energy_j[static_cast<size_t>(dev)] += x * bits * scn.cycles_per_bit[static_cast<size_t>(dev)] *
                                                     scn.capacitance[static_cast<size_t>(dev)] * f * f;
      }
    }
    for (int dev = 0; dev < D; ++dev) {
      const double cap = scn.cpu_max(dev);
      bump(scn.is_uav(dev) ? res.uav_cpu : res.td_cpu, (load[static_cast<size_t>(dev)] - cap) / cap);
    }
  }

  // Assignment and integrality over every node (source and sink included).
  for (size_t u = 0; u < d.x.size(); ++u)
    for (const auto& xs : d.x[u]) {
      double s = 0.0;
      for (double v : xs) {
        s += v;
        bump(res.binary, std::min(std::abs(v), std::abs(1.0 - v)));
      }
      bump(res.assignment, std::abs(s - 1.0));
    }

  // Flight.
  for (int m = 0; m < M; ++m) {
    const auto& q = d.traj[static_cast<size_t>(m)];
    if (q.size() != static_cast<size_t>(2 * N + 1)) {
      bump(res.domain, std::numeric_limits<double>::infinity());
      continue;
    }
    for (int i = 0; i < 2 * N; ++i) {
      const double dist = (q[static_cast<size_t>(i + 1)] - q[static_cast<size_t>(i)]).norm();
      const double dt = d.unit_duration(i);
      if (i < 2) {
        bump(res.motion, dist);  // hold position through the first slot
      } else {
        bump(res.motion, (dist - scn.max_speed * dt) / std::max(1.0, scn.max_speed * dt));
      }
      if (dt > 0.0) r.prop_energy_j[static_cast<size_t>(m)] += dt * propulsion_power(scn.propulsion, dist / dt);
    }
    bump(res.return_home, (q.back() - q.front()).norm());
    bump(res.return_home, (q.front() - scn.uav_start[static_cast<size_t>(m)]).norm());
  }
  if (scn.min_separation > 0)
    for (int i = 0; i <= 2 * N; ++i)
      for (int a = 0; a < M; ++a)
        for (int b = a + 1; b < M; ++b) {
          const double dist =
              (d.traj[static_cast<size_t>(a)][static_cast<size_t>(i)] - d.traj[static_cast<size_t>(b)][static_cast<size_t>(i)]).norm();
          bump(res.separation, (scn.min_separation - dist) / scn.min_separation);
        }

  r.total_delay_s = std::accumulate(r.slot_delay_s.begin(), r.slot_delay_s.end(), 0.0);
  const double l = g.min_deadline();
  bump(res.deadline, (r.total_delay_s - l) / std::max(1.0, l));
  for (int z = 0; z < D; ++z) {
    const double e = r.comm_energy_j[static_cast<size_t>(z)] + r.comp_energy_j[static_cast<size_t>(z)];
    const double cap = scn.energy_budget_com[static_cast<size_t>(z)];
    bump(res.energy_com, (e - cap) / cap);
  }
  for (int m = 0; m < M; ++m) {
    const double cap = scn.energy_budget_prop[static_cast<size_t>(m)];
    bump(res.energy_prop, (r.prop_energy_j[static_cast<size_t>(m)] - cap) / cap);
  }
  std::vector<double> uav_comp(r.comp_energy_j.begin(), r.comp_energy_j.begin() + M);
  r.balance_factor_j = balance_factor(uav_comp);
  r.total_cost = r.recombine(scn);
  return r;
}

}  // namespace uavmec
