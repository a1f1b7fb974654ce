#pragma once

// Helpers shared by the unit tests and the acceptance binary.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ranslice/auction.hpp"
#include "ranslice/dqn.hpp"
#include "ranslice/mlp.hpp"
#include "ranslice/rng.hpp"

namespace ranslice::testing {

struct AuctionInstance {
  InterferenceGraph graph;
  int channels = 1;
  std::vector<Bid> bids;
};

/// 4-cycle 0-1-3-2, the BS graph of the 2x2 grid.
inline InterferenceGraph four_cycle() {
  const std::vector<std::pair<int, int>> e{{0, 1}, {1, 3}, {3, 2}, {2, 0}};
  return InterferenceGraph::from_edges(4, e);
}

/// Values are multiples of 2^-20 in [0, 10] so every welfare sum is exact.
inline double dyadic_value(Rng& rng, double hi = 10.0) {
  return std::ldexp(std::floor(rng.uniform(0.0, hi) * 1048576.0), -20);
}

/// Up to 4 SPs on the 4-cycle, J in [1, 6], demands in [0, 3].
inline AuctionInstance random_instance(Rng& rng) {
  AuctionInstance in;
  in.graph = four_cycle();
  in.channels = static_cast<int>(rng.uniform_int(1, 6));
  const int sps = static_cast<int>(rng.uniform_int(1, 4));
  for (int i = 0; i < sps; ++i) {
    Bid b;
    b.sp_id = i;
    b.value = dyadic_value(rng);
    for (int k = 0; k < 4; ++k) b.demand.push_back(static_cast<int>(rng.uniform_int(0, 3)));
    in.bids.push_back(b);
  }
  return in;
}

/// Checks per-BS channel sets against the interference constraints and the
/// exact per-(SP, BS) grant counts. Empty string when valid.
inline std::string check_allocation(const AuctionInstance& in, std::uint32_t winners, const std::vector<MuRequest>& reqs,
                                    const std::vector<int>& channel) {
  const int B = in.graph.bs_count;
  std::vector<ChannelMask> used(static_cast<std::size_t>(B), 0);
  for (std::size_t r = 0; r < reqs.size(); ++r) {
    const int j = channel[r];
    if (j < 0) continue;
    if (j >= in.channels) return "channel index out of range";
    auto& m = used[static_cast<std::size_t>(reqs[r].bs)];
    if ((m >> j) & 1u) return "channel reused within a BS";
    m |= ChannelMask{1} << j;
  }
  for (int a = 0; a < B; ++a)
    for (int b = a + 1; b < B; ++b)
      if (in.graph.adjacent(a, b) && (used[static_cast<std::size_t>(a)] & used[static_cast<std::size_t>(b)]))
        return "adjacent BSs share a channel";
  for (std::size_t i = 0; i < in.bids.size(); ++i) {
    const bool won = (winners >> i) & 1u;
    for (int b = 0; b < B; ++b) {
      int granted = 0;
      for (std::size_t r = 0; r < reqs.size(); ++r)
        if (reqs[r].sp_id == in.bids[i].sp_id && reqs[r].bs == b && channel[r] >= 0) ++granted;
      const int want = won ? in.bids[i].demand[static_cast<std::size_t>(b)] : 0;
      if (granted != want) return "grant count differs from demand";
    }
  }
  return {};
}

/// One requesting MU per demanded channel, ids interleaved across SPs.
inline std::vector<MuRequest> requests_for(const AuctionInstance& in) {
  std::vector<MuRequest> reqs;
  int id = 0;
  for (const auto& b : in.bids)
    for (int bs = 0; bs < in.graph.bs_count; ++bs)
      for (int c = 0; c < b.demand[static_cast<std::size_t>(bs)]; ++c) reqs.push_back({id++, b.sp_id, bs, true});
  // a non-requesting MU per SP
  for (const auto& b : in.bids) reqs.push_back({id++, b.sp_id, 0, false});
  return reqs;
}


/// Output k of a tanh MLP in long double, written independently of Mlp.
inline long double reference_output(const std::vector<int>& sizes, const std::vector<long double>& p,
                                    const std::vector<double>& x, int k) {
  std::vector<long double> a(x.begin(), x.end());
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const int in = sizes[l];
    const int out = sizes[l + 1];
    const bool last = l + 2 == sizes.size();
    std::vector<long double> h;
    for (int o = 0; o < out; ++o) {
      if (last && o != k) {
        h.push_back(0.0L);
        continue;
      }
      long double s = p[off + static_cast<std::size_t>(in * out + o)];
      for (int i = 0; i < in; ++i) s += p[off + static_cast<std::size_t>(o * in + i)] * a[static_cast<std::size_t>(i)];
      h.push_back(last ? s : std::tanh(s));
    }
    off += static_cast<std::size_t>(in * out + out);
    a = std::move(h);
  }
  return a[static_cast<std::size_t>(k)];
}

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_param = 0;
  std::size_t params = 0;
};

/// Compares the analytic gradient of the batch TD loss (targets held fixed)
/// with central differences of a long double re-implementation of the loss.
/// Relative error uses max(|analytic|, |numeric|, floor) as denominator.
inline GradCheckResult gradient_check(const Mlp& online, const Mlp& target, const ReplayMemory& memory,
                                      std::span<const std::size_t> batch, const DqnContext& ctx,
                                      long double h = 1e-7L, double floor = 1e-10) {
  std::vector<double> grad(online.param_count());
  std::vector<double> targets;
  batch_loss_and_grad(online, target, memory, batch, ctx, grad, &targets);

  std::vector<std::vector<double>> xs;
  std::vector<int> acts;
  for (std::size_t i : batch) {
    xs.push_back(ctx.encoder->encode(memory[i].state));
    acts.push_back(memory[i].action);
  }
  std::vector<long double> p(online.params().begin(), online.params().end());
  auto loss = [&]() {
    long double l = 0.0L;
    for (std::size_t b = 0; b < xs.size(); ++b) {
      const long double e = static_cast<long double>(targets[b]) - reference_output(online.sizes(), p, xs[b], acts[b]);
      l += e * e;
    }
    return l / static_cast<long double>(xs.size());
  };
  GradCheckResult r;
  r.params = p.size();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const long double keep = p[i];
    p[i] = keep + h;
    const long double up = loss();
    p[i] = keep - h;
    const long double down = loss();
    p[i] = keep;
    const double numeric = static_cast<double>((up - down) / (2.0L * h));
    const double denom = std::max({std::abs(grad[i]), std::abs(numeric), floor});
    const double rel = std::abs(grad[i] - numeric) / denom;
    if (rel > r.max_rel_error) {
      r.max_rel_error = rel;
      r.worst_param = i;
    }
  }
  return r;
}

}  // namespace ranslice::testing
