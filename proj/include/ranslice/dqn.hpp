#pragma once

// Per-MU double DQN: action space, state encoding, feasibility mask,
// epsilon-greedy selection, replay memory and the training step.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "ranslice/config.hpp"
#include "ranslice/env.hpp"
#include "ranslice/error.hpp"
#include "ranslice/mlp.hpp"
#include "ranslice/rng.hpp"
#include "ranslice/topology.hpp"

namespace ranslice {

struct ActionEntry {
  bool z = false;  // channel requested (or, in stored experience, granted)
  int offload = 0;
  int send = 0;

  friend bool operator==(const ActionEntry&, const ActionEntry&) = default;
};

/// Enumerates (z, offload, send), z-major, then offload, then send.
class ActionSpace {
 public:
  ActionSpace() = default;
  ActionSpace(int max_tasks, int queue_cap) : max_tasks_(max_tasks), queue_cap_(queue_cap) {}

  int size() const { return 2 * (max_tasks_ + 1) * (queue_cap_ + 1); }
  int max_tasks() const { return max_tasks_; }
  int queue_cap() const { return queue_cap_; }

  int index(bool z, int offload, int send) const {
    return ((z ? 1 : 0) * (max_tasks_ + 1) + offload) * (queue_cap_ + 1) + send;
  }
  int index(const ActionEntry& a) const { return index(a.z, a.offload, a.send); }

  ActionEntry decode(int i) const {
    ActionEntry a;
    a.send = i % (queue_cap_ + 1);
    i /= (queue_cap_ + 1);
    a.offload = i % (max_tasks_ + 1);
    a.z = i / (max_tasks_ + 1) == 1;
    return a;
  }

 private:
  int max_tasks_ = 0;
  int queue_cap_ = 0;
};

using ActionMask = std::vector<std::uint8_t>;

/// Feasible actions in state `s`: offload <= tasks and send <= queue always;
/// z = 1 entries must also respect the transmit energy cap.
inline ActionMask mask(const LocalState& s, double gain, const PhysConst& pc, const ActionSpace& space) {
  ActionMask m(static_cast<std::size_t>(space.size()), 0);
  for (int rt = 0; rt <= s.task_arrivals; ++rt) {
    for (int rp = 0; rp <= s.queue_len; ++rp) {
      m[static_cast<std::size_t>(space.index(false, rt, rp))] = 1;
      if (tx_energy(gain, rt, rp, pc) <= pc.tx_energy_cap()) m[static_cast<std::size_t>(space.index(true, rt, rp))] = 1;
    }
  }
  return m;
}

/// Maps a local state to the network input. The feature encoding is
/// [col, row, tasks, queue, log-gain], each scaled into [0, 1]; the one-hot
/// encoding replaces (col, row) by an indicator over locations.
class StateEncoder {
 public:
  StateEncoder() = default;
  StateEncoder(const Topology& topo, const PhysConst& pc, Encoding enc = Encoding::features)
      : enc_(enc), cols_(topo.cols), rows_(topo.rows), max_tasks_(pc.max_tasks), queue_cap_(pc.queue_cap) {
    for (int l = 0; l < topo.location_count(); ++l) {
      gains_.push_back(channel_gain(l, topo, pc));
      col_.push_back(topo.cells[static_cast<std::size_t>(l)].col);
      row_.push_back(topo.cells[static_cast<std::size_t>(l)].row);
    }
    const double gmin = *std::min_element(gains_.begin(), gains_.end());
    log_gain_min_ = std::log10(gmin);
  }

  int dim() const { return enc_ == Encoding::features ? 5 : static_cast<int>(gains_.size()) + 3; }
  double gain(int loc) const { return gains_.at(static_cast<std::size_t>(loc)); }
  std::span<const double> gains() const { return gains_; }

  void encode(const LocalState& s, std::span<double> out) const {
    require(static_cast<int>(out.size()) == dim(), "encode: output size mismatch");
    const auto l = static_cast<std::size_t>(s.location);
    const double lg = log_gain_min_ != 0.0 ? std::log10(gains_.at(l)) / log_gain_min_ : 1.0;
    if (enc_ == Encoding::features) {
      out[0] = cols_ > 1 ? static_cast<double>(col_[l]) / (cols_ - 1) : 0.0;
      out[1] = rows_ > 1 ? static_cast<double>(row_[l]) / (rows_ - 1) : 0.0;
      out[2] = static_cast<double>(s.task_arrivals) / max_tasks_;
      out[3] = static_cast<double>(s.queue_len) / queue_cap_;
      out[4] = lg;
    } else {
      std::fill(out.begin(), out.end(), 0.0);
      out[l] = 1.0;
      const std::size_t n = gains_.size();
      out[n] = static_cast<double>(s.task_arrivals) / max_tasks_;
      out[n + 1] = static_cast<double>(s.queue_len) / queue_cap_;
      out[n + 2] = lg;
    }
  }

  std::vector<double> encode(const LocalState& s) const {
    std::vector<double> v(static_cast<std::size_t>(dim()));
    encode(s, v);
    return v;
  }

 private:
  Encoding enc_ = Encoding::features;
  int cols_ = 1;
  int rows_ = 1;
  int max_tasks_ = 1;
  int queue_cap_ = 1;
  std::vector<double> gains_;
  std::vector<int> col_;
  std::vector<int> row_;
  double log_gain_min_ = 0.0;
};

/// Index of the largest q over feasible entries; ties go to the lowest index.
inline int masked_argmax(std::span<const double> q, const ActionMask& m) {
  int best = -1;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (!m[i]) continue;
    if (best < 0 || q[i] > q[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  }
  require(best >= 0, "no feasible action");
  return best;
}

/// Epsilon-greedy over feasible actions. Consumes one uniform draw for the
/// coin and, when exploring, one more for the action.
inline int select_action(std::span<const double> q, const ActionMask& m, double epsilon, Rng& rng) {
  if (rng.uniform() < epsilon) {
    const auto feasible = std::count(m.begin(), m.end(), std::uint8_t{1});
    require(feasible > 0, "select_action: no feasible action");
    auto k = rng.uniform_int(0, feasible - 1);
    for (std::size_t i = 0; i < m.size(); ++i)
      if (m[i] && k-- == 0) return static_cast<int>(i);
  }
  return masked_argmax(q, m);
}

inline int select_action(const Mlp& net, std::span<const double> features, const ActionMask& m, double epsilon,
                         Rng& rng) {
  const auto q = net.forward(features);
  return select_action(q, m, epsilon, rng);
}

struct Experience {
  LocalState state;
  int action = 0;  // ActionSpace index with z = realized grant
  double utility = 0.0;
  LocalState next;
};

/// Bounded FIFO of experiences; the oldest record is evicted first.
class ReplayMemory {
 public:
  ReplayMemory() = default;
  explicit ReplayMemory(std::size_t capacity) : capacity_(capacity) {
    require(capacity > 0, "replay capacity must be positive");
    buf_.reserve(capacity);
  }

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return buf_.size(); }

  void push(const Experience& e) {
    if (buf_.size() < capacity_) {
      buf_.push_back(e);
    } else {
      buf_[head_] = e;
      head_ = (head_ + 1) % capacity_;
    }
  }

  /// i-th record counting from the oldest.
  const Experience& operator[](std::size_t i) const { return buf_[(head_ + i) % buf_.size()]; }

  /// `count` distinct positions, uniform without replacement (Floyd's algorithm).
  std::vector<std::size_t> sample(std::size_t count, Rng& rng) const {
    require(count <= buf_.size(), "replay sample larger than memory");
    std::vector<std::size_t> out;
    out.reserve(count);
    const std::size_t n = buf_.size();
    for (std::size_t j = n - count; j < n; ++j) {
      const auto t = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(j)));
      if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
      else out.push_back(j);
    }
    return out;
  }

  // raw access for checkpoints
  const std::vector<Experience>& raw() const { return buf_; }
  std::size_t head() const { return head_; }
  void restore(std::vector<Experience> buf, std::size_t head) {
    require(buf.size() <= capacity_ && (buf.empty() ? head == 0 : head < buf.size()), "bad replay snapshot");
    buf_ = std::move(buf);
    buf_.reserve(capacity_);
    head_ = head;
  }

 private:
  std::size_t capacity_ = 1;
  std::vector<Experience> buf_;
  std::size_t head_ = 0;
};

/// Masks of every local state, precomputed once per grid.
class MaskTable {
 public:
  MaskTable() = default;
  MaskTable(const StateEncoder& enc, const PhysConst& pc, const ActionSpace& space)
      : max_tasks_(pc.max_tasks), queue_cap_(pc.queue_cap) {
    const int locations = static_cast<int>(enc.gains().size());
    for (int l = 0; l < locations; ++l)
      for (int a = 0; a <= max_tasks_; ++a)
        for (int w = 0; w <= queue_cap_; ++w) table_.push_back(mask({l, a, w}, enc.gain(l), pc, space));
  }
  bool empty() const { return table_.empty(); }
  const ActionMask& operator()(const LocalState& s) const {
    return table_[static_cast<std::size_t>((s.location * (max_tasks_ + 1) + s.task_arrivals) * (queue_cap_ + 1) +
                                           s.queue_len)];
  }

 private:
  int max_tasks_ = 0;
  int queue_cap_ = 0;
  std::vector<ActionMask> table_;
};

/// Everything the training step needs to turn stored states into inputs and masks.
struct DqnContext {
  const StateEncoder* encoder = nullptr;
  const PhysConst* pc = nullptr;
  ActionSpace space;
  double gamma = 0.9;
  const MaskTable* masks = nullptr;  // optional cache

  const ActionMask& mask_of(const LocalState& s, ActionMask& scratch) const {
    if (masks && !masks->empty()) return (*masks)(s);
    scratch = mask(s, encoder->gain(s.location), *pc, space);
    return scratch;
  }
};

/// Double-DQN target (1 - gamma) U + gamma Q(s', a*; target), a* the feasible
/// argmax of the online network at s'.
inline double td_target(double utility, std::span<const double> online_next, std::span<const double> target_next,
                        const ActionMask& next_mask, double gamma) {
  const int a = masked_argmax(online_next, next_mask);
  return (1.0 - gamma) * utility + gamma * target_next[static_cast<std::size_t>(a)];
}

inline double td_target(const Experience& e, const Mlp& online, const Mlp& target, const DqnContext& ctx) {
  const auto x = ctx.encoder->encode(e.next);
  ActionMask scratch;
  return td_target(e.utility, online.forward(x), target.forward(x), ctx.mask_of(e.next, scratch), ctx.gamma);
}

/// Mean squared TD error over `batch` and its gradient w.r.t. the online
/// parameters (targets held fixed). Returns the loss; `grad` is overwritten.
inline double batch_loss_and_grad(const Mlp& online, const Mlp& target, const ReplayMemory& memory,
                                  std::span<const std::size_t> batch, const DqnContext& ctx, std::span<double> grad,
                                  std::vector<double>* targets_out = nullptr) {
  std::fill(grad.begin(), grad.end(), 0.0);
  Mlp::Cache cur;
  Mlp::Cache nxt_online;
  Mlp::Cache nxt_target;
  std::vector<double> x(static_cast<std::size_t>(ctx.encoder->dim()));
  std::vector<double> q_next;
  ActionMask scratch;
  const double scale = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  if (targets_out) targets_out->clear();
  for (std::size_t idx : batch) {
    const auto& e = memory[idx];
    ctx.encoder->encode(e.next, x);
    online.hidden(x, nxt_online);
    online.outputs(nxt_online, q_next);
    const int a_star = masked_argmax(q_next, ctx.mask_of(e.next, scratch));
    target.hidden(x, nxt_target);
    const double y = (1.0 - ctx.gamma) * e.utility + ctx.gamma * target.output(nxt_target, a_star);
    if (targets_out) targets_out->push_back(y);

    ctx.encoder->encode(e.state, x);
    online.hidden(x, cur);
    const double q = online.output(cur, e.action);
    const double err = y - q;
    loss += err * err * scale;
    online.backward_single(cur, e.action, -2.0 * err * scale, grad);
  }
  return loss;
}

/// Loss of `online` on fixed targets (used by gradient checks).
inline double batch_loss_fixed_targets(const Mlp& online, const ReplayMemory& memory,
                                       std::span<const std::size_t> batch, std::span<const double> targets,
                                       const DqnContext& ctx) {
  Mlp::Cache cur;
  std::vector<double> x(static_cast<std::size_t>(ctx.encoder->dim()));
  double loss = 0.0;
  for (std::size_t k = 0; k < batch.size(); ++k) {
    const auto& e = memory[batch[k]];
    ctx.encoder->encode(e.state, x);
    online.hidden(x, cur);
    const double err = targets[k] - online.output(cur, e.action);
    loss += err * err;
  }
  return loss / static_cast<double>(batch.size());
}

/// One training step: sample a mini-batch uniformly without replacement,
/// apply one Adam update on the mean squared TD error. Returns the
/// pre-update loss, or nullopt (and no change) when the memory holds fewer
/// than `batch_size` records.
inline std::optional<double> train_step(Mlp& online, const Mlp& target, AdamState& adam, const ReplayMemory& memory,
                                        std::size_t batch_size, const DqnContext& ctx, Rng& rng,
                                        std::vector<double>& grad_scratch) {
  if (memory.size() < batch_size || batch_size == 0) return std::nullopt;
  const auto batch = memory.sample(batch_size, rng);
  grad_scratch.resize(online.param_count());
  const double loss = batch_loss_and_grad(online, target, memory, batch, ctx, grad_scratch);
  adam.apply(online.params(), grad_scratch);
  return loss;
}

/// theta_target <- theta when slot is a multiple of period.
inline bool sync_target(const Mlp& online, Mlp& target, long period, long slot) {
  require(period >= 1, "sync period must be >= 1");
  if (slot % period != 0) return false;
  target = online;
  return true;
}

}  // namespace ranslice
