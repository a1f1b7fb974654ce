#pragma once

// The physical world: path loss, energy and queue dynamics, per-MU utility,
// Markov mobility/task kernels and the per-slot state transition.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ranslice/config.hpp"
#include "ranslice/error.hpp"
#include "ranslice/rng.hpp"
#include "ranslice/topology.hpp"

namespace ranslice {

/// Row-stochastic matrix, row-major.
struct Kernel {
  int n = 0;
  std::vector<double> p;

  static Kernel identity(int n) {
    Kernel k{n, std::vector<double>(static_cast<std::size_t>(n * n), 0.0)};
    for (int i = 0; i < n; ++i) k.p[static_cast<std::size_t>(i * n + i)] = 1.0;
    return k;
  }
  std::span<const double> row(int i) const {
    return {p.data() + static_cast<std::size_t>(i) * n, static_cast<std::size_t>(n)};
  }
  double at(int i, int j) const { return p[static_cast<std::size_t>(i * n + j)]; }
};

/// Local network state of one MU: location, task arrivals, queue length.
struct LocalState {
  int location = 0;
  int task_arrivals = 0;
  int queue_len = 0;

  friend bool operator==(const LocalState&, const LocalState&) = default;
};

struct MuState {
  int mu_id = 0;
  int sp_id = 0;
  LocalState local;
  Kernel mobility_kernel;
  Kernel task_kernel;
  double pkt_rate = 0.0;
  double price = 1.0;
  double energy_weight = 3.0;
};

struct SlotAction {
  bool granted = false;
  int offload = 0;
  int send = 0;
};

struct SlotOutcome {
  int next_queue = 0;
  int drops = 0;
  double cpu_energy_j = 0.0;
  double tx_energy_j = 0.0;
  double utility = 0.0;
  int pkt_arrivals = 0;
};

struct QueueStep {
  int next_queue = 0;
  int drops = 0;
};

/// Average channel gain H0 * (xi0 / xi)^4 at the centre of `loc`, distance
/// measured to the covering BS and floored at the reference distance.
inline double channel_gain(int loc, const Topology& topo, const PhysConst& pc) {
  if (!topo.valid_location(loc)) throw std::domain_error("invalid location " + std::to_string(loc));
  const auto& cell = topo.cells[static_cast<std::size_t>(loc)];
  const int bs = topo.bs_of_location[static_cast<std::size_t>(loc)];
  const double d = std::max(distance(cell.center, topo.bs_position[static_cast<std::size_t>(bs)]), pc.ref_dist_m);
  const double ratio = pc.ref_dist_m / d;
  return pc.pathloss_const * (ratio * ratio) * (ratio * ratio);
}

/// Energy to reliably push `offload` tasks and `send` packets through one
/// channel within a slot.
inline double tx_energy(double gain, int offload, int send, const PhysConst& pc) {
  require(gain > 0.0, "tx_energy: gain must be positive");
  require(offload >= 0 && send >= 0, "tx_energy: counts must be nonnegative");
  const double bits = pc.task_bits * offload + pc.pkt_bits * send;
  const double per_slot = pc.bandwidth_hz * pc.slot_s;
  return pc.slot_s * pc.bandwidth_hz * pc.noise_psd_w_per_hz / gain * std::expm1(std::log(2.0) * bits / per_slot);
}

/// Energy of processing locally the tasks that are not offloaded.
inline double cpu_energy(int task_arrivals, bool granted, int offload, const PhysConst& pc) {
  require(offload >= 0 && offload <= task_arrivals, "cpu_energy: offload exceeds task arrivals");
  const int local = task_arrivals - (granted ? offload : 0);
  return pc.switched_cap * pc.task_bits * pc.cycles_per_bit * pc.cpu_hz * pc.cpu_hz * local;
}

inline QueueStep step_queue(int queue_len, bool granted, int send, int pkt_arrivals, const PhysConst& pc) {
  require(send >= 0 && send <= queue_len, "step_queue: send exceeds queue length");
  require(pkt_arrivals >= 0, "step_queue: negative arrivals");
  const long raw = static_cast<long>(queue_len) - (granted ? send : 0) + pkt_arrivals;
  QueueStep s;
  s.next_queue = static_cast<int>(std::min<long>(raw, pc.queue_cap));
  s.drops = static_cast<int>(std::max<long>(raw - pc.queue_cap, 0));
  return s;
}

/// Per-slot utility: exp(-W') + exp(-D) + l * (exp(-P_cpu) + exp(-P_tr)).
inline double utility(int next_queue, int drops, double cpu_j, double tx_j, double energy_weight) {
  return std::exp(-static_cast<double>(next_queue)) + std::exp(-static_cast<double>(drops)) +
         energy_weight * (std::exp(-cpu_j) + std::exp(-tx_j));
}

/// Whether `a` may be applied in state `s`; `gain` is only consulted for
/// granted actions (the power cap binds only when something is transmitted).
inline bool action_feasible(const LocalState& s, const SlotAction& a, double gain, const PhysConst& pc) {
  if (a.offload < 0 || a.offload > s.task_arrivals) return false;
  if (a.send < 0 || a.send > s.queue_len) return false;
  if (a.granted && tx_energy(gain, a.offload, a.send, pc) > pc.tx_energy_cap()) return false;
  return true;
}

/// Deterministic part of a slot for one MU once the packet arrivals are known.
inline SlotOutcome slot_outcome(const LocalState& s, const SlotAction& a, int pkt_arrivals, double gain,
                                double energy_weight, const PhysConst& pc) {
  SlotOutcome o;
  const auto q = step_queue(s.queue_len, a.granted, a.send, pkt_arrivals, pc);
  o.next_queue = q.next_queue;
  o.drops = q.drops;
  o.cpu_energy_j = cpu_energy(s.task_arrivals, a.granted, a.offload, pc);
  o.tx_energy_j = a.granted ? tx_energy(gain, a.offload, a.send, pc) : 0.0;
  o.utility = utility(o.next_queue, o.drops, o.cpu_energy_j, o.tx_energy_j, energy_weight);
  o.pkt_arrivals = pkt_arrivals;
  return o;
}

struct MuKernels {
  Kernel mobility;
  Kernel task;
};

/// Random mobility and task-arrival kernels. Mobility rows put mass only on
/// cells within Chebyshev distance `radius` of the current cell (the whole
/// grid when `dense`); task rows are fully random.
inline MuKernels random_kernels(Rng& rng, const Topology& topo, int radius, int max_tasks, bool dense = false) {
  require(radius >= 0, "random_kernels: radius must be >= 0");
  MuKernels k;
  const int n = topo.location_count();
  k.mobility.n = n;
  k.mobility.p.assign(static_cast<std::size_t>(n * n), 0.0);
  for (int from = 0; from < n; ++from) {
    const auto& c = topo.cells[static_cast<std::size_t>(from)];
    double total = 0.0;
    for (int to = 0; to < n; ++to) {
      const auto& d = topo.cells[static_cast<std::size_t>(to)];
      const bool near = std::abs(c.col - d.col) <= radius && std::abs(c.row - d.row) <= radius;
      if (!dense && !near) continue;
      const double w = rng.uniform(0.05, 1.0);
      k.mobility.p[static_cast<std::size_t>(from * n + to)] = w;
      total += w;
    }
    for (int to = 0; to < n; ++to) k.mobility.p[static_cast<std::size_t>(from * n + to)] /= total;
  }
  const int a = max_tasks + 1;
  k.task.n = a;
  k.task.p.assign(static_cast<std::size_t>(a * a), 0.0);
  for (int from = 0; from < a; ++from) {
    double total = 0.0;
    for (int to = 0; to < a; ++to) total += k.task.p[static_cast<std::size_t>(from * a + to)] = rng.uniform(0.05, 1.0);
    for (int to = 0; to < a; ++to) k.task.p[static_cast<std::size_t>(from * a + to)] /= total;
  }
  return k;
}

inline MuKernels random_kernels(std::uint64_t seed, const Topology& topo, int radius, int max_tasks,
                                bool dense = false) {
  Rng rng(seed);
  return random_kernels(rng, topo, radius, max_tasks, dense);
}

/// Random streams that drive one MU's exogenous processes.
struct MuStreams {
  Rng mobility;
  Rng tasks;
  Rng arrivals;

  MuStreams() = default;
  MuStreams(std::uint64_t master, int mu_id)
      : mobility(master, "mu/" + std::to_string(mu_id) + "/mobility"),
        tasks(master, "mu/" + std::to_string(mu_id) + "/tasks"),
        arrivals(master, "mu/" + std::to_string(mu_id) + "/arrivals") {}
};

/// Owner of all MU states. advance() applies one slot of actions, samples the
/// exogenous transitions and returns the realized outcomes.
class Environment {
 public:
  Environment(Topology topo, PhysConst pc, std::vector<MuState> mus, std::uint64_t master_seed)
      : topo_(std::move(topo)), pc_(pc), mus_(std::move(mus)) {
    topo_.validate();
    pc_.validate();
    gains_.reserve(static_cast<std::size_t>(topo_.location_count()));
    for (int l = 0; l < topo_.location_count(); ++l) gains_.push_back(channel_gain(l, topo_, pc_));
    for (const auto& m : mus_) {
      validate_mu(m);
      streams_.emplace_back(master_seed, m.mu_id);
    }
  }

  const Topology& topology() const { return topo_; }
  const PhysConst& phys() const { return pc_; }
  std::span<const MuState> mus() const { return mus_; }
  const MuState& mu(std::size_t n) const { return mus_[n]; }
  double gain_at(int loc) const { return gains_.at(static_cast<std::size_t>(loc)); }
  std::span<const double> gains() const { return gains_; }

  std::vector<MuStreams>& streams() { return streams_; }
  const std::vector<MuStreams>& streams() const { return streams_; }
  void set_local(std::size_t n, const LocalState& s) { mus_[n].local = s; }

  std::vector<SlotOutcome> advance(std::span<const SlotAction> actions) {
    require(actions.size() == mus_.size(), "advance: need one action per MU");
    std::vector<SlotOutcome> out;
    out.reserve(mus_.size());
    for (std::size_t n = 0; n < mus_.size(); ++n) {
      auto& m = mus_[n];
      const auto& a = actions[n];
      const double gain = gains_[static_cast<std::size_t>(m.local.location)];
      if (!action_feasible(m.local, a, gain, pc_)) {
        throw ContractViolation("infeasible action for MU " + std::to_string(m.mu_id) + ": offload=" +
                                std::to_string(a.offload) + " send=" + std::to_string(a.send) +
                                " granted=" + std::to_string(a.granted));
      }
      auto& st = streams_[n];
      const int pkts = st.arrivals.poisson(m.pkt_rate);
      out.push_back(slot_outcome(m.local, a, pkts, gain, m.energy_weight, pc_));
      LocalState next;
      next.location = static_cast<int>(st.mobility.categorical(m.mobility_kernel.row(m.local.location)));
      next.task_arrivals = static_cast<int>(st.tasks.categorical(m.task_kernel.row(m.local.task_arrivals)));
      next.queue_len = out.back().next_queue;
      m.local = next;
    }
    return out;
  }

 private:
  void validate_mu(const MuState& m) const {
    const std::string who = "MU " + std::to_string(m.mu_id);
    require(topo_.valid_location(m.local.location), who + ": invalid location");
    require(m.local.queue_len >= 0 && m.local.queue_len <= pc_.queue_cap, who + ": queue out of range");
    require(m.local.task_arrivals >= 0 && m.local.task_arrivals <= pc_.max_tasks, who + ": tasks out of range");
    require(m.mobility_kernel.n == topo_.location_count(), who + ": mobility kernel size mismatch");
    require(m.task_kernel.n == pc_.max_tasks + 1, who + ": task kernel size mismatch");
    for (const Kernel* k : {&m.mobility_kernel, &m.task_kernel}) {
      for (int i = 0; i < k->n; ++i) {
        double s = 0.0;
        for (double v : k->row(i)) {
          require(v >= 0.0, who + ": negative kernel entry");
          s += v;
        }
        require(std::abs(s - 1.0) <= 1e-12, who + ": kernel row does not sum to 1");
      }
    }
  }

  Topology topo_;
  PhysConst pc_;
  std::vector<MuState> mus_;
  std::vector<double> gains_;
  std::vector<MuStreams> streams_;
};

}  // namespace ranslice
