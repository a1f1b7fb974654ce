#pragma once

// Service-provider side: abstract state from the last auction payment,
// transition counts over those states, the learned expected-payment values
// and bid construction from the MUs' reports.
//
// Abstract states are 0-based here: state 0 is the zero-payment interval
// (a lost auction or a free win), state s >= 1 covers (edge[s-1], edge[s]].

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "ranslice/auction.hpp"
#include "ranslice/error.hpp"
#include "ranslice/topology.hpp"

namespace ranslice {

struct AbstractionConfig {
  int num_states = 36;
  double payment_cap = 1.0;
  std::vector<double> edges;  // edges[0] = 0 < edges[1] < ... < edges[S-1] = cap

  /// Uniform edges over (0, cap].
  static AbstractionConfig uniform(int num_states, double payment_cap) {
    require(num_states >= 2, "abstraction needs at least two states");
    require(payment_cap > 0.0, "payment cap must be positive");
    AbstractionConfig c;
    c.num_states = num_states;
    c.payment_cap = payment_cap;
    c.edges.resize(static_cast<std::size_t>(num_states));
    for (int s = 0; s < num_states; ++s) c.edges[static_cast<std::size_t>(s)] = payment_cap * s / (num_states - 1);
    c.edges.back() = payment_cap;
    return c;
  }
};

/// Abstract state of a payment. Payments above the cap land in the top state.
inline int classify_payment(double tau, const AbstractionConfig& cfg) {
  require(tau >= 0.0, "classify_payment: negative payment");
  if (tau == 0.0) return 0;
  const double t = std::min(tau, cfg.payment_cap);
  const auto it = std::lower_bound(cfg.edges.begin() + 1, cfg.edges.end(), t);
  return static_cast<int>(it - cfg.edges.begin());
}

struct MuReport {
  int mu_id = 0;
  double best_q = 0.0;
  bool wants_channel = false;
  int location = 0;
};

class SpLearningState {
 public:
  SpLearningState() = default;
  explicit SpLearningState(AbstractionConfig cfg)
      : cfg_(std::move(cfg)),
        counts_(static_cast<std::size_t>(cfg_.num_states * cfg_.num_states * 2), 1),
        payment_values_(static_cast<std::size_t>(cfg_.num_states), 0.0),
        visits_(static_cast<std::size_t>(cfg_.num_states), 0) {}

  const AbstractionConfig& abstraction() const { return cfg_; }
  int num_states() const { return cfg_.num_states; }
  int current_state() const { return current_; }
  void set_current_state(int s) { current_ = s; }
  std::span<const double> payment_values() const { return payment_values_; }
  std::span<double> payment_values() { return payment_values_; }
  std::span<const std::uint64_t> counts() const { return counts_; }
  std::span<std::uint64_t> counts() { return counts_; }
  std::span<const std::uint64_t> visits() const { return visits_; }
  std::span<std::uint64_t> visits() { return visits_; }
  std::uint64_t clamp_count() const { return clamps_; }
  void set_clamp_count(std::uint64_t c) { clamps_ = c; }

  std::uint64_t count(int s, int s_next, bool won) const { return counts_[index(s, s_next, won)]; }

  void update_counts(int s, int s_next, bool won) {
    check_state(s);
    check_state(s_next);
    ++counts_[index(s, s_next, won)];
  }

  /// Estimated P(s' | s, won), normalized over destination states s'.
  std::vector<double> estimate(int s, bool won) const {
    check_state(s);
    std::vector<double> row(static_cast<std::size_t>(cfg_.num_states));
    double total = 0.0;
    for (int t = 0; t < cfg_.num_states; ++t) total += static_cast<double>(count(s, t, won));
    for (int t = 0; t < cfg_.num_states; ++t)
      row[static_cast<std::size_t>(t)] = static_cast<double>(count(s, t, won)) / total;
    return row;
  }

  /// Expected payment value one step ahead: sum_s' P(s'|s, won) U(s').
  double expected_next_value(int s, bool won) const {
    const auto p = estimate(s, won);
    double v = 0.0;
    for (int t = 0; t < cfg_.num_states; ++t) v += p[static_cast<std::size_t>(t)] * payment_values_[static_cast<std::size_t>(t)];
    return v;
  }

  /// U(s) <- (1 - zeta) U(s) + zeta [(1 - gamma) tau + gamma sum_s' P(s'|s, won) U(s')].
  /// Returns the new value; no other state changes.
  double update_payment_value(int s, bool won, double tau, double zeta, double gamma) {
    require(zeta >= 0.0 && zeta <= 1.0, "update_payment_value: zeta must lie in [0, 1]");
    const double target = (1.0 - gamma) * tau + gamma * expected_next_value(s, won);
    auto& u = payment_values_[static_cast<std::size_t>(s)];
    u = (1.0 - zeta) * u + zeta * target;
    return u;
  }

  /// Full per-slot update after an auction: count the transition out of the
  /// current state, update that state's payment value with a harmonic step
  /// 1 / (1 + visits) and move to the state of the new payment.
  void observe_auction(bool won, double tau, double gamma) {
    if (tau > cfg_.payment_cap) ++clamps_;
    const int next = classify_payment(tau, cfg_);
    const int s = current_;
    update_counts(s, next, won);
    const auto n = ++visits_[static_cast<std::size_t>(s)];
    update_payment_value(s, won, tau, 1.0 / (1.0 + static_cast<double>(n)), gamma);
    current_ = next;
  }

 private:
  std::size_t index(int s, int s_next, bool won) const {
    return (static_cast<std::size_t>(s) * cfg_.num_states + static_cast<std::size_t>(s_next)) * 2 + (won ? 1 : 0);
  }
  void check_state(int s) const { require(s >= 0 && s < cfg_.num_states, "invalid abstract state"); }

  AbstractionConfig cfg_;
  std::vector<std::uint64_t> counts_;
  std::vector<double> payment_values_;
  std::vector<std::uint64_t> visits_;
  int current_ = 0;
  std::uint64_t clamps_ = 0;
};

/// Bid of one SP from its MUs' reports: channel demand per BS from the MUs
/// that want a channel, value = long-run utility of the MUs minus expected
/// future payments (clamped at 0). `prices[k]` belongs to `subscribed[k]`.
inline Bid build_bid(int sp_id, std::span<const MuReport> reports, std::span<const int> subscribed,
                     std::span<const double> prices, const SpLearningState& state, const Topology& topo,
                     double gamma) {
  require(prices.size() == subscribed.size(), "build_bid: one price per subscribed MU");
  const std::set<int> expected(subscribed.begin(), subscribed.end());
  std::set<int> seen;
  for (const auto& r : reports) {
    if (!expected.count(r.mu_id) || !seen.insert(r.mu_id).second)
      throw ContractViolation("build_bid: SP " + std::to_string(sp_id) + " got an unexpected report from MU " +
                              std::to_string(r.mu_id));
  }
  if (seen.size() != expected.size())
    throw ContractViolation("build_bid: SP " + std::to_string(sp_id) + " is missing MU reports");
  require(gamma >= 0.0 && gamma < 1.0, "build_bid: gamma must lie in [0, 1)");

  Bid bid;
  bid.sp_id = sp_id;
  bid.demand.assign(static_cast<std::size_t>(topo.bs_count), 0);
  double utility_sum = 0.0;
  int requested = 0;
  for (const auto& r : reports) {
    require(std::isfinite(r.best_q), "build_bid: non-finite report from MU " + std::to_string(r.mu_id));
    const auto k = static_cast<std::size_t>(std::find(subscribed.begin(), subscribed.end(), r.mu_id) - subscribed.begin());
    utility_sum += prices[k] * r.best_q;
    if (r.wants_channel) {
      ++bid.demand[static_cast<std::size_t>(topo.bs_of_location.at(static_cast<std::size_t>(r.location)))];
      ++requested;
    }
  }
  const double future = gamma > 0.0 ? state.expected_next_value(state.current_state(), requested > 0) : 0.0;
  const double value = utility_sum / (1.0 - gamma) - gamma / (1.0 - gamma) * future;
  bid.value = std::max(0.0, value);
  return bid;
}

}  // namespace ranslice
