#pragma once

// Heuristic comparison policies. They report to their SP like learning MUs
// do and share the auction; only the report and the action rule differ.

#include <algorithm>
#include <string>
#include <vector>

#include "ranslice/config.hpp"
#include "ranslice/env.hpp"
#include "ranslice/error.hpp"
#include "ranslice/rng.hpp"
#include "ranslice/sp_agent.hpp"

namespace ranslice {

enum class BaselineKind { channel_aware, queue_aware, random };

struct BaselineParams {
  BaselineKind kind = BaselineKind::random;
  double gain_threshold = 0.0;
  double gain_max = 1.0;
  double queue_threshold = 5.0;
  double value_max = 1.0;
};

inline BaselineKind baseline_kind(Scheme s) {
  switch (s) {
    case Scheme::baseline1: return BaselineKind::channel_aware;
    case Scheme::baseline2: return BaselineKind::queue_aware;
    case Scheme::baseline3: return BaselineKind::random;
    case Scheme::drl: break;
  }
  throw ConfigError("scheme drl has no baseline policy");
}

/// Median over the grid, upper middle element for even counts.
inline double median_gain(std::vector<double> gains) {
  require(!gains.empty(), "median_gain: empty grid");
  const auto mid = gains.begin() + static_cast<std::ptrdiff_t>(gains.size() / 2);
  std::nth_element(gains.begin(), mid, gains.end());
  return *mid;
}

inline BaselineParams baseline_params(const RunConfig& cfg, std::span<const double> grid_gains) {
  BaselineParams p;
  p.kind = baseline_kind(cfg.scheme);
  p.gain_max = *std::max_element(grid_gains.begin(), grid_gains.end());
  p.gain_threshold = cfg.gain_threshold > 0.0 ? cfg.gain_threshold
                                              : median_gain({grid_gains.begin(), grid_gains.end()});
  p.queue_threshold = cfg.queue_threshold >= 0.0 ? cfg.queue_threshold : cfg.phys.queue_cap / 2.0;
  p.value_max = cfg.random_value_max;
  return p;
}

inline MuReport baseline_report(const BaselineParams& p, int mu_id, const LocalState& s, double gain,
                                const PhysConst& pc, Rng& rng) {
  MuReport r;
  r.mu_id = mu_id;
  r.location = s.location;
  switch (p.kind) {
    case BaselineKind::channel_aware:
      r.wants_channel = gain >= p.gain_threshold;
      r.best_q = gain / p.gain_max;
      break;
    case BaselineKind::queue_aware:
      r.wants_channel = s.queue_len >= p.queue_threshold;
      r.best_q = static_cast<double>(s.queue_len) / pc.queue_cap;
      break;
    case BaselineKind::random:
      r.wants_channel = rng.bernoulli(0.5);
      r.best_q = rng.uniform(0.0, p.value_max);
      break;
  }
  return r;
}

/// Offload count drawn uniformly from {0..A}, then the most packets the
/// power cap allows. Without a grant nothing is transmitted.
inline SlotAction baseline_act(const LocalState& s, bool granted, double gain, const PhysConst& pc, Rng& rng) {
  SlotAction a;
  a.granted = granted;
  if (!granted) return a;
  a.offload = static_cast<int>(rng.uniform_int(0, s.task_arrivals));
  const double cap = pc.tx_energy_cap();
  while (a.offload > 0 && tx_energy(gain, a.offload, 0, pc) > cap) --a.offload;
  int send = s.queue_len;
  while (send > 0 && tx_energy(gain, a.offload, send, pc) > cap) --send;
  a.send = send;
  return a;
}

}  // namespace ranslice
