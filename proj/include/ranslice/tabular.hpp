#pragma once

// Small enumerated MDPs for oracle checks: value iteration on the per-MU
// Bellman operator and tabular Q-learning.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "ranslice/dqn.hpp"
#include "ranslice/env.hpp"
#include "ranslice/error.hpp"
#include "ranslice/rng.hpp"

namespace ranslice {

struct Transition {
  double prob = 0.0;
  int next = 0;
  double reward = 0.0;
};

struct TabularMdp {
  int num_states = 0;
  int num_actions = 0;
  std::vector<std::uint8_t> feasible;               // states x actions
  std::vector<std::vector<Transition>> outcomes;    // states x actions

  bool is_feasible(int s, int a) const { return feasible[static_cast<std::size_t>(s * num_actions + a)] != 0; }
  const std::vector<Transition>& at(int s, int a) const { return outcomes[static_cast<std::size_t>(s * num_actions + a)]; }
};

struct ValueIterationResult {
  std::vector<double> values;
  std::vector<int> greedy;
  std::vector<double> q;  // states x actions, -inf where infeasible
  std::vector<double> sup_diffs;
};

namespace detail {
inline double backup(const TabularMdp& mdp, std::span<const double> v, int s, int a, double gamma) {
  double x = 0.0;
  for (const auto& t : mdp.at(s, a)) x += t.prob * ((1.0 - gamma) * t.reward + gamma * v[static_cast<std::size_t>(t.next)]);
  return x;
}
}  // namespace detail

/// Iterates V(s) = max_a sum p [(1 - gamma) r + gamma V(s')] until the
/// fixed point is within `tol` in sup norm.
inline ValueIterationResult value_iteration_oracle(const TabularMdp& mdp, double gamma, double tol,
                                                   int max_iterations = 1000000) {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("value iteration needs gamma in [0, 1)");
  require(tol > 0.0, "value iteration needs tol > 0");
  ValueIterationResult r;
  const auto S = static_cast<std::size_t>(mdp.num_states);
  r.values.assign(S, 0.0);
  std::vector<double> next(S);
  // ||V_k+1 - V*|| <= gamma / (1 - gamma) ||V_k+1 - V_k||
  const double stop = gamma > 0.0 ? tol * (1.0 - gamma) / gamma : std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iterations; ++it) {
    double diff = 0.0;
    for (int s = 0; s < mdp.num_states; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < mdp.num_actions; ++a)
        if (mdp.is_feasible(s, a)) best = std::max(best, detail::backup(mdp, r.values, s, a, gamma));
      require(std::isfinite(best), "value iteration: state without feasible action");
      next[static_cast<std::size_t>(s)] = best;
      diff = std::max(diff, std::abs(best - r.values[static_cast<std::size_t>(s)]));
    }
    r.values.swap(next);
    r.sup_diffs.push_back(diff);
    if (diff <= stop) break;
  }
  r.q.assign(S * static_cast<std::size_t>(mdp.num_actions), -std::numeric_limits<double>::infinity());
  r.greedy.assign(S, -1);
  for (int s = 0; s < mdp.num_states; ++s) {
    for (int a = 0; a < mdp.num_actions; ++a) {
      if (!mdp.is_feasible(s, a)) continue;
      const double q = detail::backup(mdp, r.values, s, a, gamma);
      r.q[static_cast<std::size_t>(s * mdp.num_actions + a)] = q;
      auto& g = r.greedy[static_cast<std::size_t>(s)];
      if (g < 0 || q > r.q[static_cast<std::size_t>(s * mdp.num_actions + g)]) g = a;
    }
  }
  return r;
}

/// Q table over an enumerated MDP; infeasible entries are never read.
struct TabularQ {
  int num_states = 0;
  int num_actions = 0;
  std::vector<double> q;
  std::vector<std::uint8_t> feasible;

  explicit TabularQ(const TabularMdp& mdp, double init = 0.0)
      : num_states(mdp.num_states), num_actions(mdp.num_actions),
        q(static_cast<std::size_t>(mdp.num_states * mdp.num_actions), init), feasible(mdp.feasible) {}

  double& at(int s, int a) { return q[static_cast<std::size_t>(s * num_actions + a)]; }
  double at(int s, int a) const { return q[static_cast<std::size_t>(s * num_actions + a)]; }

  double max_feasible(int s) const {
    double best = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < num_actions; ++a)
      if (feasible[static_cast<std::size_t>(s * num_actions + a)]) best = std::max(best, at(s, a));
    return best;
  }
  std::vector<double> values() const {
    std::vector<double> v(static_cast<std::size_t>(num_states));
    for (int s = 0; s < num_states; ++s) v[static_cast<std::size_t>(s)] = max_feasible(s);
    return v;
  }
};

/// Q(s,a) <- Q(s,a) + zeta [(1 - gamma) U + gamma max_a' Q(s',a') - Q(s,a)].
inline void tabular_q_update(TabularQ& table, int s, int a, double utility, int s_next, double zeta, double gamma) {
  const double target = (1.0 - gamma) * utility + gamma * table.max_feasible(s_next);
  auto& q = table.at(s, a);
  q += zeta * (target - q);
}

/// Draws transitions of an enumerated MDP by inversion over each outcome list.
class TabularSampler {
 public:
  explicit TabularSampler(const TabularMdp& mdp) : mdp_(&mdp) {
    cdf_.resize(mdp.outcomes.size());
    for (std::size_t i = 0; i < mdp.outcomes.size(); ++i) {
      double acc = 0.0;
      for (const auto& t : mdp.outcomes[i]) cdf_[i].push_back(acc += t.prob);
    }
  }

  const Transition& sample(int s, int a, Rng& rng) const {
    const auto i = static_cast<std::size_t>(s * mdp_->num_actions + a);
    const auto& c = cdf_[i];
    require(!c.empty(), "TabularSampler: infeasible state-action pair");
    const double u = rng.uniform() * c.back();
    const auto k = static_cast<std::size_t>(std::upper_bound(c.begin(), c.end(), u) - c.begin());
    return mdp_->outcomes[i][std::min(k, c.size() - 1)];
  }

 private:
  const TabularMdp* mdp_;
  std::vector<std::vector<double>> cdf_;
};

/// Synchronous Q-learning with a generative model: every sweep draws one
/// transition for each feasible pair and applies tabular_q_update with step
/// `step(sweep)` (sweep counts from 1).
template <typename StepFn>
TabularQ synchronous_q_learning(const TabularMdp& mdp, double gamma, long sweeps, StepFn step, Rng& rng) {
  TabularQ q(mdp);
  const TabularSampler sampler(mdp);
  for (long n = 1; n <= sweeps; ++n) {
    const double zeta = step(n);
    for (int s = 0; s < mdp.num_states; ++s)
      for (int a = 0; a < mdp.num_actions; ++a) {
        if (!mdp.is_feasible(s, a)) continue;
        const auto& t = sampler.sample(s, a, rng);
        tabular_q_update(q, s, a, t.reward, t.next, zeta, gamma);
      }
  }
  return q;
}

/// One MU in isolation with the grant under its own control (z = grant):
/// state (location, tasks, queue), action (z, offload, send).
class MuMdp {
 public:
  MuMdp(Topology topo, PhysConst pc, MuKernels kernels, double arrival_rate, double energy_weight)
      : topo_(std::move(topo)), pc_(pc), k_(std::move(kernels)), rate_(arrival_rate), weight_(energy_weight),
        space_(pc.max_tasks, pc.queue_cap) {
    for (int l = 0; l < topo_.location_count(); ++l) gains_.push_back(channel_gain(l, topo_, pc_));
  }

  int num_states() const { return topo_.location_count() * (pc_.max_tasks + 1) * (pc_.queue_cap + 1); }
  const ActionSpace& actions() const { return space_; }
  const PhysConst& phys() const { return pc_; }

  int state_index(const LocalState& s) const {
    return (s.location * (pc_.max_tasks + 1) + s.task_arrivals) * (pc_.queue_cap + 1) + s.queue_len;
  }
  LocalState state_of(int i) const {
    LocalState s;
    s.queue_len = i % (pc_.queue_cap + 1);
    i /= pc_.queue_cap + 1;
    s.task_arrivals = i % (pc_.max_tasks + 1);
    s.location = i / (pc_.max_tasks + 1);
    return s;
  }

  ActionMask feasible(int s) const {
    const auto st = state_of(s);
    return mask(st, gains_[static_cast<std::size_t>(st.location)], pc_, space_);
  }

  /// Explicit transition lists. Poisson arrivals are enumerated past the mean
  /// until the remaining tail drops below 1e-15 (or the terms underflow);
  /// that tail is folded into the last term.
  TabularMdp enumerate() const {
    TabularMdp mdp;
    mdp.num_states = num_states();
    mdp.num_actions = space_.size();
    mdp.feasible.assign(static_cast<std::size_t>(mdp.num_states * mdp.num_actions), 0);
    mdp.outcomes.resize(mdp.feasible.size());
    std::vector<double> pk;
    {
      double p = std::exp(-rate_);
      double cdf = 0.0;
      for (int k = 0;; ++k) {
        if (k > 0) p *= rate_ / k;
        pk.push_back(p);
        cdf += p;
        if (rate_ == 0.0 || (k > rate_ && (1.0 - cdf < 1e-15 || p < 1e-20))) break;
      }
      pk.back() += std::max(0.0, 1.0 - cdf);
    }
    for (int s = 0; s < mdp.num_states; ++s) {
      const auto st = state_of(s);
      const auto m = feasible(s);
      for (int a = 0; a < mdp.num_actions; ++a) {
        if (!m[static_cast<std::size_t>(a)]) continue;
        mdp.feasible[static_cast<std::size_t>(s * mdp.num_actions + a)] = 1;
        const auto act = space_.decode(a);
        const SlotAction sa{act.z, act.offload, act.send};
        auto& out = mdp.outcomes[static_cast<std::size_t>(s * mdp.num_actions + a)];
        for (std::size_t k = 0; k < pk.size(); ++k) {
          const auto o = slot_outcome(st, sa, static_cast<int>(k), gains_[static_cast<std::size_t>(st.location)], weight_, pc_);
          for (int l2 = 0; l2 < k_.mobility.n; ++l2) {
            const double pl = k_.mobility.at(st.location, l2);
            if (pl == 0.0) continue;
            for (int t2 = 0; t2 < k_.task.n; ++t2) {
              const double pt = k_.task.at(st.task_arrivals, t2);
              if (pt == 0.0) continue;
              out.push_back({pk[k] * pl * pt, state_index({l2, t2, o.next_queue}), o.utility});
            }
          }
        }
      }
    }
    return mdp;
  }

  /// Draws one transition with the simulator's own samplers.
  Transition sample(int s, int a, Rng& rng) const {
    const auto st = state_of(s);
    const auto act = space_.decode(a);
    const SlotAction sa{act.z, act.offload, act.send};
    const int pkts = rng.poisson(rate_);
    const auto o = slot_outcome(st, sa, pkts, gains_[static_cast<std::size_t>(st.location)], weight_, pc_);
    LocalState nx;
    nx.location = static_cast<int>(rng.categorical(k_.mobility.row(st.location)));
    nx.task_arrivals = static_cast<int>(rng.categorical(k_.task.row(st.task_arrivals)));
    nx.queue_len = o.next_queue;
    return {1.0, state_index(nx), o.utility};
  }

 private:
  Topology topo_;
  PhysConst pc_;
  MuKernels k_;
  double rate_;
  double weight_;
  ActionSpace space_;
  std::vector<double> gains_;
};

}  // namespace ranslice
