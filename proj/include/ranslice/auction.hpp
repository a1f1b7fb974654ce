#pragma once

// One-shot VCG channel auction.
//
// Winner determination is exhaustive over SP subsets; a subset is feasible
// when the summed per-BS demands can be met from J channels with adjacent BSs
// using disjoint channel sets (a multicoloring of the BS graph). For bipartite
// BS graphs that reduces to d_b + d_b' <= J on every edge; otherwise an exact
// backtracking search decides.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ranslice/error.hpp"
#include "ranslice/topology.hpp"

namespace ranslice {

using ChannelMask = std::uint64_t;  // bit j set: channel j in use
inline constexpr int kMaxChannels = 64;
inline constexpr int kMaxAuctionSps = 16;

struct Bid {
  int sp_id = 0;
  double value = 0.0;
  std::vector<int> demand;  // channels wanted per BS
};

/// BS interference graph as seen by the auction.
struct InterferenceGraph {
  int bs_count = 0;
  std::vector<std::uint32_t> neighbours;  // bitmask of adjacent BSs
  bool bipartite = false;
  std::vector<int> side;  // 2-colouring when bipartite

  static InterferenceGraph from_edges(int bs_count, std::span<const std::pair<int, int>> edges) {
    require(bs_count >= 1 && bs_count <= 32, "interference graph supports 1..32 BSs");
    InterferenceGraph g;
    g.bs_count = bs_count;
    g.neighbours.assign(static_cast<std::size_t>(bs_count), 0);
    for (auto [a, b] : edges) {
      require(a >= 0 && b >= 0 && a < bs_count && b < bs_count && a != b, "invalid BS edge");
      g.neighbours[static_cast<std::size_t>(a)] |= 1u << b;
      g.neighbours[static_cast<std::size_t>(b)] |= 1u << a;
    }
    g.colour();
    return g;
  }

  static InterferenceGraph from_topology(const Topology& t) {
    std::vector<std::pair<int, int>> edges;
    for (int a = 0; a < t.bs_count; ++a)
      for (int b = a + 1; b < t.bs_count; ++b)
        if (t.adjacent(a, b)) edges.emplace_back(a, b);
    return from_edges(t.bs_count, edges);
  }

  bool adjacent(int a, int b) const { return (neighbours[static_cast<std::size_t>(a)] >> b) & 1u; }

 private:
  void colour() {
    side.assign(static_cast<std::size_t>(bs_count), -1);
    bipartite = true;
    for (int s = 0; s < bs_count; ++s) {
      if (side[static_cast<std::size_t>(s)] >= 0) continue;
      side[static_cast<std::size_t>(s)] = 0;
      std::vector<int> stack{s};
      while (!stack.empty()) {
        const int u = stack.back();
        stack.pop_back();
        for (int v = 0; v < bs_count; ++v) {
          if (!adjacent(u, v)) continue;
          auto& sv = side[static_cast<std::size_t>(v)];
          if (sv < 0) {
            sv = 1 - side[static_cast<std::size_t>(u)];
            stack.push_back(v);
          } else if (sv == side[static_cast<std::size_t>(u)]) {
            bipartite = false;
          }
        }
      }
    }
  }
};

namespace detail {

inline bool next_combination(std::vector<int>& idx, int n) {
  const int k = static_cast<int>(idx.size());
  int i = k - 1;
  while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i) --i;
  if (i < 0) return false;
  ++idx[static_cast<std::size_t>(i)];
  for (int j = i + 1; j < k; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  return true;
}

struct Multicolour {
  const InterferenceGraph& g;
  std::span<const int> demand;
  int channels;
  std::vector<int> order;
  std::vector<ChannelMask> assigned;

  bool search(std::size_t depth) {
    if (depth == order.size()) return true;
    const int b = order[depth];
    const int d = demand[static_cast<std::size_t>(b)];
    ChannelMask blocked = 0;
    for (int v = 0; v < g.bs_count; ++v)
      if (g.adjacent(b, v)) blocked |= assigned[static_cast<std::size_t>(v)];
    std::vector<int> free;
    for (int j = 0; j < channels; ++j)
      if (!((blocked >> j) & 1u)) free.push_back(j);
    if (static_cast<int>(free.size()) < d) return false;
    if (d == 0) return search(depth + 1);
    std::vector<int> idx(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) idx[static_cast<std::size_t>(i)] = i;
    do {
      ChannelMask m = 0;
      for (int i : idx) m |= ChannelMask{1} << free[static_cast<std::size_t>(i)];
      assigned[static_cast<std::size_t>(b)] = m;
      if (search(depth + 1)) return true;
    } while (next_combination(idx, static_cast<int>(free.size())));
    assigned[static_cast<std::size_t>(b)] = 0;
    return false;
  }
};

}  // namespace detail

/// Per-BS channel sets meeting `demand` from `channels` channels, or nullopt.
/// BSs are visited in decreasing-demand order and channel subsets are tried
/// lowest-index first, so the result is deterministic.
inline std::optional<std::vector<ChannelMask>> multicolour(std::span<const int> demand, const InterferenceGraph& g,
                                                           int channels) {
  require(static_cast<int>(demand.size()) == g.bs_count, "multicolour: demand length must equal bs_count");
  require(channels >= 0 && channels <= kMaxChannels, "multicolour: unsupported channel count");
  for (int d : demand)
    if (d < 0 || d > channels) return std::nullopt;
  detail::Multicolour mc{g, demand, channels, {}, std::vector<ChannelMask>(demand.size(), 0)};
  for (int b = 0; b < g.bs_count; ++b) mc.order.push_back(b);
  std::stable_sort(mc.order.begin(), mc.order.end(), [&](int a, int b) {
    return demand[static_cast<std::size_t>(a)] > demand[static_cast<std::size_t>(b)];
  });
  if (!mc.search(0)) return std::nullopt;
  return mc.assigned;
}

/// Whether per-BS demands can be served. Uses the edge condition on
/// bipartite graphs, exact backtracking otherwise.
inline bool demands_feasible(std::span<const int> demand, const InterferenceGraph& g, int channels) {
  require(static_cast<int>(demand.size()) == g.bs_count, "demands_feasible: demand length must equal bs_count");
  for (int d : demand)
    if (d < 0 || d > channels) return false;
  if (g.bipartite) {
    for (int a = 0; a < g.bs_count; ++a)
      for (int b = a + 1; b < g.bs_count; ++b)
        if (g.adjacent(a, b) && demand[static_cast<std::size_t>(a)] + demand[static_cast<std::size_t>(b)] > channels)
          return false;
    return true;
  }
  return multicolour(demand, g, channels).has_value();
}

inline std::vector<int> summed_demand(std::uint32_t winners, std::span<const Bid> bids, int bs_count) {
  std::vector<int> d(static_cast<std::size_t>(bs_count), 0);
  for (std::size_t i = 0; i < bids.size(); ++i) {
    if (!((winners >> i) & 1u)) continue;
    for (int b = 0; b < bs_count; ++b) d[static_cast<std::size_t>(b)] += bids[i].demand[static_cast<std::size_t>(b)];
  }
  return d;
}

inline void validate_bids(std::span<const Bid> bids, int bs_count) {
  require(bids.size() <= kMaxAuctionSps, "auction supports at most 16 SPs");
  for (const auto& b : bids) {
    const std::string who = "bid of SP " + std::to_string(b.sp_id);
    require(b.value >= 0.0 && b.value < std::numeric_limits<double>::infinity(), who + ": value must be finite and >= 0");
    require(static_cast<int>(b.demand.size()) == bs_count, who + ": demand length must equal bs_count");
    for (int d : b.demand) require(d >= 0, who + ": negative demand");
  }
}

/// Feasibility of a winner set given as bid positions (bit i = bids[i]).
inline bool feasible(std::uint32_t winners, std::span<const Bid> bids, const InterferenceGraph& g, int channels) {
  return demands_feasible(summed_demand(winners, bids, g.bs_count), g, channels);
}

/// Sum of winner values, accumulated in bid order.
inline double welfare_of(std::uint32_t set, std::span<const Bid> bids) {
  double w = 0.0;
  for (std::size_t i = 0; i < bids.size(); ++i)
    if ((set >> i) & 1u) w += bids[i].value;
  return w;
}

/// Tie-break between equal-welfare sets: fewer winners first, then the
/// lexicographically smaller sorted list of SP ids.
inline bool preferred_on_tie(std::uint32_t a, std::uint32_t b, std::span<const Bid> bids) {
  const int ca = std::popcount(a);
  const int cb = std::popcount(b);
  if (ca != cb) return ca < cb;
  auto ids = [&](std::uint32_t s) {
    std::vector<int> v;
    for (std::size_t i = 0; i < bids.size(); ++i)
      if ((s >> i) & 1u) v.push_back(bids[i].sp_id);
    std::sort(v.begin(), v.end());
    return v;
  };
  return ids(a) < ids(b);
}

struct WinnerSet {
  std::uint32_t mask = 0;
  double welfare = 0.0;
};

/// Feasibility of every subset of bidders, computed once and shared by the
/// main and per-SP exclusion searches.
class FeasibilityTable {
 public:
  FeasibilityTable(std::span<const Bid> bids, const InterferenceGraph& g, int channels) {
    validate_bids(bids, g.bs_count);
    const std::uint32_t n = 1u << bids.size();
    ok_.resize(n);
    for (std::uint32_t s = 0; s < n; ++s) ok_[s] = feasible(s, bids, g, channels);
  }
  bool operator()(std::uint32_t s) const { return ok_[s] != 0; }

 private:
  std::vector<std::uint8_t> ok_;
};

/// Welfare-maximizing feasible subset of the bidders in `allowed`.
inline WinnerSet best_subset(std::span<const Bid> bids, const FeasibilityTable& ok, std::uint32_t allowed) {
  WinnerSet best{0, 0.0};
  const std::uint32_t n = 1u << bids.size();
  for (std::uint32_t s = 1; s < n; ++s) {
    if ((s & ~allowed) != 0 || !ok(s)) continue;
    const double w = welfare_of(s, bids);
    if (w > best.welfare || (w == best.welfare && preferred_on_tie(s, best.mask, bids))) best = {s, w};
  }
  return best;
}

inline WinnerSet winner_determination(std::span<const Bid> bids, const InterferenceGraph& g, int channels) {
  const FeasibilityTable ok(bids, g, channels);
  return best_subset(bids, ok, (1u << bids.size()) - 1);
}

/// VCG payments: for each winner, the best welfare the others could reach
/// without it minus what the others get under the chosen allocation.
inline std::vector<double> payments(std::span<const Bid> bids, std::uint32_t winners, const FeasibilityTable& ok) {
  std::vector<double> tau(bids.size(), 0.0);
  const std::uint32_t all = (1u << bids.size()) - 1;
  for (std::size_t i = 0; i < bids.size(); ++i) {
    if (!((winners >> i) & 1u)) continue;
    const std::uint32_t others = all & ~(1u << i);
    const double without_i = best_subset(bids, ok, others).welfare;
    const double others_now = welfare_of(winners & others, bids);
    tau[i] = std::max(0.0, without_i - others_now);
  }
  return tau;
}

inline std::vector<double> payments(std::span<const Bid> bids, std::uint32_t winners, const InterferenceGraph& g,
                                    int channels) {
  return payments(bids, winners, FeasibilityTable(bids, g, channels));
}

struct MuRequest {
  int mu_id = 0;
  int sp_id = 0;
  int bs = 0;
  bool wants_channel = false;
};

/// Channel per request (same order as the requests), -1 when none.
/// Requesting MUs of winning SPs are served; channels go out lowest index
/// first to MUs in id order within each BS.
inline std::vector<int> assign_channels(std::uint32_t winners, std::span<const Bid> bids,
                                        std::span<const MuRequest> requests, const InterferenceGraph& g,
                                        int channels) {
  std::vector<int> sp_pos_of_request(requests.size(), -1);
  for (std::size_t r = 0; r < requests.size(); ++r) {
    for (std::size_t i = 0; i < bids.size(); ++i)
      if (bids[i].sp_id == requests[r].sp_id) sp_pos_of_request[r] = static_cast<int>(i);
    require(requests[r].bs >= 0 && requests[r].bs < g.bs_count,
            "assign_channels: MU " + std::to_string(requests[r].mu_id) + " at unknown BS");
  }
  for (std::size_t i = 0; i < bids.size(); ++i) {
    if (!((winners >> i) & 1u)) continue;
    for (int b = 0; b < g.bs_count; ++b) {
      int count = 0;
      for (std::size_t r = 0; r < requests.size(); ++r)
        if (sp_pos_of_request[r] == static_cast<int>(i) && requests[r].bs == b && requests[r].wants_channel) ++count;
      require(count == bids[i].demand[static_cast<std::size_t>(b)],
              "assign_channels: SP " + std::to_string(bids[i].sp_id) + " demand at BS " + std::to_string(b) +
                  " does not match its requesting MUs");
    }
  }
  const auto demand = summed_demand(winners, bids, g.bs_count);
  const auto sets = multicolour(demand, g, channels);
  if (!sets) throw std::logic_error("assign_channels: certified winner set has no channel assignment");

  std::vector<std::size_t> by_id(requests.size());
  for (std::size_t r = 0; r < by_id.size(); ++r) by_id[r] = r;
  std::stable_sort(by_id.begin(), by_id.end(),
                   [&](std::size_t a, std::size_t b) { return requests[a].mu_id < requests[b].mu_id; });
  std::vector<ChannelMask> remaining = *sets;
  std::vector<int> channel(requests.size(), -1);
  for (std::size_t r : by_id) {
    const auto& q = requests[r];
    const int pos = sp_pos_of_request[r];
    if (!q.wants_channel || pos < 0 || !((winners >> pos) & 1u)) continue;
    auto& m = remaining[static_cast<std::size_t>(q.bs)];
    const int j = std::countr_zero(m);
    m &= m - 1;
    channel[r] = j;
  }
  return channel;
}

struct AuctionOutcome {
  std::vector<bool> winners;      // per bid position
  std::vector<double> payments;   // per bid position
  double welfare = 0.0;
  std::vector<int> channel;       // per request, -1 when not granted
};

inline AuctionOutcome run_auction(std::span<const Bid> bids, std::span<const MuRequest> requests,
                                  const InterferenceGraph& g, int channels) {
  const FeasibilityTable ok(bids, g, channels);
  const auto w = best_subset(bids, ok, (1u << bids.size()) - 1);
  AuctionOutcome out;
  out.welfare = w.welfare;
  for (std::size_t i = 0; i < bids.size(); ++i) out.winners.push_back((w.mask >> i) & 1u);
  out.payments = payments(bids, w.mask, ok);
  out.channel = assign_channels(w.mask, bids, requests, g, channels);
  return out;
}

/// Exhaustive ground truth for tiny instances: every subset of bidders and
/// every per-BS choice of channel sets. Refuses anything larger than
/// 4 SPs, 4 BSs, 6 channels.
inline WinnerSet brute_force_oracle(std::span<const Bid> bids, const InterferenceGraph& g, int channels) {
  if (bids.size() > 4 || g.bs_count > 4 || channels > 6)
    throw std::invalid_argument("brute_force_oracle: instance too large");
  const int B = g.bs_count;
  const std::uint32_t full = (1u << channels) - 1;

  auto servable = [&](const std::vector<int>& d) {
    // enumerate channel masks BS by BS in index order
    std::vector<std::uint32_t> pick(static_cast<std::size_t>(B), 0);
    auto rec = [&](auto&& self, int b) -> bool {
      if (b == B) return true;
      for (std::uint32_t m = 0; m <= full; ++m) {
        if (std::popcount(m) != d[static_cast<std::size_t>(b)]) continue;
        bool clash = false;
        for (int c = 0; c < b && !clash; ++c)
          clash = g.adjacent(b, c) && (pick[static_cast<std::size_t>(c)] & m) != 0;
        if (clash) continue;
        pick[static_cast<std::size_t>(b)] = m;
        if (self(self, b + 1)) return true;
      }
      return false;
    };
    return rec(rec, 0);
  };

  WinnerSet best{0, 0.0};
  bool have = false;
  for (std::uint32_t s = 0; s < (1u << bids.size()); ++s) {
    std::vector<int> d(static_cast<std::size_t>(B), 0);
    double w = 0.0;
    for (std::size_t i = 0; i < bids.size(); ++i) {
      if (!((s >> i) & 1u)) continue;
      w += bids[i].value;
      for (int b = 0; b < B; ++b) d[static_cast<std::size_t>(b)] += bids[i].demand[static_cast<std::size_t>(b)];
    }
    if (!servable(d)) continue;
    if (!have || w > best.welfare || (w == best.welfare && preferred_on_tie(s, best.mask, bids))) {
      best = {s, w};
      have = true;
    }
  }
  return best;
}

}  // namespace ranslice
