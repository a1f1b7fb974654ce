#pragma once

// Run configuration: physical constants, topology layout, learning and
// harness parameters, plus the JSON schema used by config files and
// `config.resolved`. Unknown keys are rejected.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ranslice/error.hpp"

namespace ranslice {

inline double dbm_per_hz_to_w_per_hz(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

struct PhysConst {
  double bandwidth_hz = 500e3;
  double slot_s = 1e-2;
  double noise_psd_w_per_hz = dbm_per_hz_to_w_per_hz(-174.0);
  double pkt_bits = 3000.0;
  double task_bits = 5000.0;
  double cycles_per_bit = 737.5;
  double cpu_hz = 2e9;
  double switched_cap = 2.5e-28;
  double max_tx_power_w = 3.0;
  int queue_cap = 10;
  int max_tasks = 5;
  double price = 1.0;
  double energy_weight = 3.0;
  double discount = 0.9;
  double pathloss_const = db_to_linear(-40.0);
  double ref_dist_m = 2.0;

  /// Energy budget of one slot at full transmit power.
  double tx_energy_cap() const { return max_tx_power_w * slot_s; }

  void validate() const {
    auto pos = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(name) + " must be > 0");
    };
    pos(bandwidth_hz, "bandwidth_hz");
    pos(slot_s, "slot_s");
    pos(noise_psd_w_per_hz, "noise_psd");
    pos(pkt_bits, "pkt_bits");
    pos(task_bits, "task_bits");
    pos(cycles_per_bit, "cycles_per_bit");
    pos(cpu_hz, "cpu_hz");
    pos(switched_cap, "switched_cap");
    pos(max_tx_power_w, "max_tx_power_w");
    pos(price, "price");
    pos(energy_weight, "energy_weight");
    pos(pathloss_const, "pathloss");
    pos(ref_dist_m, "ref_dist_m");
    if (queue_cap < 1) throw ConfigError("queue_cap must be >= 1");
    if (max_tasks < 1) throw ConfigError("max_tasks must be >= 1");
    if (!(discount >= 0.0 && discount < 1.0)) throw ConfigError("discount must lie in [0, 1)");
  }
};


struct TopologySpec {
  double area_m = 400.0;       // side of the square service region
  int cells_per_side = 8;      // location grid resolution
  int bs_per_side = 2;         // BSs on a regular grid, one per block of cells
  // Explicit BS adjacency; empty means 4-neighbour adjacency on the BS grid
  // (a 4-cycle for the 2x2 layout).
  std::vector<std::pair<int, int>> bs_edges;
};

enum class Scheme { drl, baseline1, baseline2, baseline3 };

inline std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::drl: return "drl";
    case Scheme::baseline1: return "baseline1";
    case Scheme::baseline2: return "baseline2";
    case Scheme::baseline3: return "baseline3";
  }
  return "?";
}

inline Scheme parse_scheme(const std::string& s) {
  if (s == "drl") return Scheme::drl;
  if (s == "baseline1" || s == "channel_aware") return Scheme::baseline1;
  if (s == "baseline2" || s == "queue_aware") return Scheme::baseline2;
  if (s == "baseline3" || s == "random") return Scheme::baseline3;
  throw ConfigError("unknown scheme '" + s + "'");
}

enum class Encoding { features, one_hot };

struct RunConfig {
  TopologySpec topology;
  PhysConst phys;
  std::vector<int> mus_per_sp{2, 2, 2};
  int channels = 5;
  double arrival_rate = 4.0;
  int mobility_radius = 1;
  bool dense_mobility = false;

  int payment_states = 36;
  double payment_cap = 0.0;  // <= 0: derived from the largest possible competitor bids

  int replay_capacity = 5000;
  int batch_size = 64;
  double epsilon = 0.001;
  double epsilon_start = 1.0;
  int epsilon_decay_slots = 2000;
  int target_sync_period = 100;
  std::vector<int> hidden_layers{16, 16};
  Encoding encoding = Encoding::features;
  double adam_step = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;

  double queue_threshold = -1.0;  // < 0: queue_cap / 2
  double gain_threshold = -1.0;   // <= 0: median gain over the grid
  double random_value_max = 1.0;

  std::vector<double> mu_price;          // optional per-MU overrides
  std::vector<double> mu_energy_weight;  // optional per-MU overrides

  int slots = 20000;
  Scheme scheme = Scheme::drl;
  std::uint64_t seed = 1;
  std::string out_dir;

  int num_sps() const { return static_cast<int>(mus_per_sp.size()); }
  int num_mus() const {
    int n = 0;
    for (int c : mus_per_sp) n += c;
    return n;
  }

  /// Exploration rate at 1-based slot k: linear anneal from epsilon_start to
  /// epsilon over epsilon_decay_slots, then flat.
  double epsilon_at(long k) const {
    if (epsilon_decay_slots <= 0 || k > epsilon_decay_slots) return epsilon;
    const double frac = static_cast<double>(k - 1) / epsilon_decay_slots;
    return epsilon_start + (epsilon - epsilon_start) * frac;
  }

  void validate() const {
    phys.validate();
    if (slots < 1) throw ConfigError("slots must be >= 1");
    if (channels < 1) throw ConfigError("channels must be >= 1");
    if (mus_per_sp.empty()) throw ConfigError("need at least one SP");
    if (mus_per_sp.size() > 16) throw ConfigError("at most 16 SPs are supported");
    for (int c : mus_per_sp)
      if (c < 1) throw ConfigError("every SP needs at least one MU");
    if (!(arrival_rate >= 0.0)) throw ConfigError("arrival_rate must be >= 0");
    if (mobility_radius < 0) throw ConfigError("mobility_radius must be >= 0");
    if (payment_states < 2) throw ConfigError("payment_states must be >= 2");
    if (replay_capacity < 1) throw ConfigError("replay_capacity must be >= 1");
    if (batch_size < 1 || batch_size > replay_capacity)
      throw ConfigError("batch_size must lie in [1, replay_capacity]");
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("epsilon must lie in [0, 1]");
    if (!(epsilon_start >= 0.0 && epsilon_start <= 1.0))
      throw ConfigError("epsilon_start must lie in [0, 1]");
    if (target_sync_period < 1) throw ConfigError("target_sync_period must be >= 1");
    if (hidden_layers.empty()) throw ConfigError("need at least one hidden layer");
    for (int h : hidden_layers)
      if (h < 1) throw ConfigError("hidden layer widths must be >= 1");
    if (topology.cells_per_side < 1 || topology.bs_per_side < 1 ||
        topology.bs_per_side > topology.cells_per_side)
      throw ConfigError("need 1 <= bs_per_side <= cells_per_side");
    if (!(topology.area_m > 0.0)) throw ConfigError("area_m must be > 0");
    const int n = num_mus();
    if (!mu_price.empty() && static_cast<int>(mu_price.size()) != n)
      throw ConfigError("mu_price needs one entry per MU");
    if (!mu_energy_weight.empty() && static_cast<int>(mu_energy_weight.size()) != n)
      throw ConfigError("mu_energy_weight needs one entry per MU");
    for (double v : mu_price)
      if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("mu_price entries must be > 0");
    for (double v : mu_energy_weight)
      if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("mu_energy_weight entries must be >= 0");
  }
};

/// Desk-scale defaults: 3 SPs x 2 MUs on an 8x8 grid over 400 m, J = 5, lambda = 4.
inline RunConfig desk_profile() { return RunConfig{}; }

/// The full-size layout: 4 BSs over 2 km, 1600 locations, 3 SPs x 6 MUs, J = 9,
/// lambda = 6, O = 200 and a constant exploration rate of 0.001.
inline RunConfig paper_profile() {
  RunConfig c;
  c.topology.area_m = 2000.0;
  c.topology.cells_per_side = 40;
  c.mus_per_sp = {6, 6, 6};
  c.channels = 9;
  c.arrival_rate = 6.0;
  c.batch_size = 200;
  c.epsilon_start = 0.001;
  c.epsilon_decay_slots = 0;
  c.slots = 50000;
  return c;
}

inline RunConfig profile_by_name(const std::string& name) {
  if (name == "desk") return desk_profile();
  if (name == "paper") return paper_profile();
  throw ConfigError("unknown profile '" + name + "' (expected desk or paper)");
}

namespace detail {

using nlohmann::json;

struct Field {
  std::function<void(const json&, RunConfig&)> read;
  std::function<json(const RunConfig&)> write;  // null: input-only alias
};

template <typename T>
T get_as(const json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("config key '" + key + "': " + e.what());
  }
}

#define RANSLICE_FIELD(key, member)                                                         \
  {                                                                                         \
    key, Field {                                                                            \
      [](const json& j, RunConfig& c) { c.member = get_as<decltype(c.member)>(j, key); },  \
          [](const RunConfig& c) { return json(c.member); }                                 \
    }                                                                                       \
  }

inline const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = {
      RANSLICE_FIELD("area_m", topology.area_m),
      RANSLICE_FIELD("cells_per_side", topology.cells_per_side),
      RANSLICE_FIELD("bs_per_side", topology.bs_per_side),
      RANSLICE_FIELD("bs_edges", topology.bs_edges),
      RANSLICE_FIELD("bandwidth_hz", phys.bandwidth_hz),
      RANSLICE_FIELD("slot_s", phys.slot_s),
      {"noise_psd_dbm_per_hz",
       Field{[](const json& j, RunConfig& c) {
               c.phys.noise_psd_w_per_hz = dbm_per_hz_to_w_per_hz(get_as<double>(j, "noise_psd_dbm_per_hz"));
             },
             nullptr}},
      RANSLICE_FIELD("noise_psd_w_per_hz", phys.noise_psd_w_per_hz),
      RANSLICE_FIELD("pkt_bits", phys.pkt_bits),
      RANSLICE_FIELD("task_bits", phys.task_bits),
      RANSLICE_FIELD("cycles_per_bit", phys.cycles_per_bit),
      RANSLICE_FIELD("cpu_hz", phys.cpu_hz),
      RANSLICE_FIELD("switched_cap", phys.switched_cap),
      RANSLICE_FIELD("max_tx_power_w", phys.max_tx_power_w),
      RANSLICE_FIELD("queue_cap", phys.queue_cap),
      RANSLICE_FIELD("max_tasks", phys.max_tasks),
      RANSLICE_FIELD("price", phys.price),
      RANSLICE_FIELD("energy_weight", phys.energy_weight),
      RANSLICE_FIELD("discount", phys.discount),
      {"pathloss_db",
       Field{[](const json& j, RunConfig& c) {
               c.phys.pathloss_const = db_to_linear(get_as<double>(j, "pathloss_db"));
             },
             nullptr}},
      RANSLICE_FIELD("pathloss_const", phys.pathloss_const),
      RANSLICE_FIELD("ref_dist_m", phys.ref_dist_m),
      {"mus_per_sp",
       Field{[](const json& j, RunConfig& c) {
               if (j.is_number_integer()) {
                 // shorthand: {"num_sps": I} keeps its own key; a bare int
                 // here means "this many MUs for each existing SP"
                 c.mus_per_sp.assign(c.mus_per_sp.size(), j.get<int>());
               } else {
                 c.mus_per_sp = get_as<std::vector<int>>(j, "mus_per_sp");
               }
             },
             [](const RunConfig& c) { return json(c.mus_per_sp); }}},
      {"num_sps",
       Field{[](const json& j, RunConfig& c) {
               const int n = get_as<int>(j, "num_sps");
               if (n < 1) throw ConfigError("num_sps must be >= 1");
               const int per = c.mus_per_sp.empty() ? 1 : c.mus_per_sp.front();
               c.mus_per_sp.assign(static_cast<std::size_t>(n), per);
             },
             [](const RunConfig& c) { return json(c.num_sps()); }}},
      RANSLICE_FIELD("channels", channels),
      RANSLICE_FIELD("arrival_rate", arrival_rate),
      RANSLICE_FIELD("mobility_radius", mobility_radius),
      RANSLICE_FIELD("dense_mobility", dense_mobility),
      RANSLICE_FIELD("payment_states", payment_states),
      RANSLICE_FIELD("payment_cap", payment_cap),
      RANSLICE_FIELD("replay_capacity", replay_capacity),
      RANSLICE_FIELD("batch_size", batch_size),
      RANSLICE_FIELD("epsilon", epsilon),
      RANSLICE_FIELD("epsilon_start", epsilon_start),
      RANSLICE_FIELD("epsilon_decay_slots", epsilon_decay_slots),
      RANSLICE_FIELD("target_sync_period", target_sync_period),
      RANSLICE_FIELD("hidden_layers", hidden_layers),
      {"encoding",
       Field{[](const json& j, RunConfig& c) {
               const auto s = get_as<std::string>(j, "encoding");
               if (s == "features") c.encoding = Encoding::features;
               else if (s == "one_hot") c.encoding = Encoding::one_hot;
               else throw ConfigError("encoding must be features or one_hot");
             },
             [](const RunConfig& c) {
               return json(c.encoding == Encoding::features ? "features" : "one_hot");
             }}},
      RANSLICE_FIELD("adam_step", adam_step),
      RANSLICE_FIELD("adam_beta1", adam_beta1),
      RANSLICE_FIELD("adam_beta2", adam_beta2),
      RANSLICE_FIELD("adam_eps", adam_eps),
      RANSLICE_FIELD("queue_threshold", queue_threshold),
      RANSLICE_FIELD("gain_threshold", gain_threshold),
      RANSLICE_FIELD("random_value_max", random_value_max),
      RANSLICE_FIELD("mu_price", mu_price),
      RANSLICE_FIELD("mu_energy_weight", mu_energy_weight),
      RANSLICE_FIELD("slots", slots),
      {"scheme",
       Field{[](const json& j, RunConfig& c) { c.scheme = parse_scheme(get_as<std::string>(j, "scheme")); },
             [](const RunConfig& c) { return json(to_string(c.scheme)); }}},
      RANSLICE_FIELD("seed", seed),
      RANSLICE_FIELD("out_dir", out_dir),
  };
  return table;
}

#undef RANSLICE_FIELD

}  // namespace detail

/// Applies the keys of `j` on top of `base`. A "profile" key, if present, is
/// applied first and replaces `base`.
inline RunConfig apply_json(RunConfig base, const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  if (auto it = j.find("profile"); it != j.end()) {
    base = profile_by_name(detail::get_as<std::string>(*it, "profile"));
  }
  const auto& table = detail::fields();
  // num_sps before mus_per_sp so that an explicit list wins
  for (const char* first : {"num_sps"}) {
    if (auto it = j.find(first); it != j.end()) table.at(first).read(*it, base);
  }
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() == "profile" || it.key() == "num_sps") continue;
    auto f = table.find(it.key());
    if (f == table.end()) throw ConfigError("unknown config key '" + it.key() + "'");
    f->second.read(it.value(), base);
  }
  return base;
}

inline nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [key, f] : detail::fields()) {
    if (f.write) j[key] = f.write(c);
  }
  return j;
}

inline RunConfig load_config_file(const std::string& path, RunConfig base = desk_profile()) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("cannot parse " + path + ": " + e.what());
  }
  return apply_json(std::move(base), j);
}

}  // namespace ranslice
