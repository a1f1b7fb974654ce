#pragma once

// Seeded, label-keyed random streams.
//
// Every consumer of randomness owns a stream derived from the master seed and
// a textual label ("mu/3/arrivals"), so adding an entity never perturbs the
// draws of existing ones. Samplers are written out here instead of using the
// <random> distributions: those are implementation-defined and some carry
// hidden state, which would break bit-exact checkpoints.

#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <span>
#include <string_view>

namespace ranslice {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Seed for the stream named `label` under `master`. Two rounds of splitmix64
/// over (master, hash(label)) so nearby masters or labels decorrelate.
inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view label) {
  return splitmix64(splitmix64(master) ^ splitmix64(fnv1a64(label)));
}

class Rng {
 public:
  using Engine = std::mt19937_64;

  Rng() : engine_(0) {}
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t master, std::string_view label) : engine_(derive_seed(master, label)) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer on [lo, hi], unbiased (Lemire's multiply-shift with rejection).
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const auto range = static_cast<std::uint64_t>(hi - lo) + 1;
    if (range == 0) return static_cast<std::int64_t>(engine_());
    const std::uint64_t threshold = (0 - range) % range;
    for (;;) {
      const unsigned __int128 m = static_cast<unsigned __int128>(engine_()) * range;
      if (static_cast<std::uint64_t>(m) >= threshold) {
        return lo + static_cast<std::int64_t>(m >> 64);
      }
    }
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Poisson by sequential inversion; exact for the moderate rates used here.
  int poisson(double mean) {
    if (mean <= 0.0) return 0;
    const double u = uniform();
    double p = std::exp(-mean);
    double cdf = p;
    int k = 0;
    while (u > cdf) {
      ++k;
      p *= mean / k;
      const double next = cdf + p;
      if (next == cdf) break;  // tail mass below double resolution
      cdf = next;
    }
    return k;
  }

  /// Index drawn from a discrete distribution given by (not necessarily
  /// normalized) nonnegative weights.
  std::size_t categorical(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    const double u = uniform() * total;
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] <= 0.0) continue;
      acc += weights[i];
      last_positive = i;
      if (u < acc) return i;
    }
    return last_positive;
  }

  friend bool operator==(const Rng& a, const Rng& b) { return a.engine_ == b.engine_; }

  friend std::ostream& operator<<(std::ostream& os, const Rng& r) { return os << r.engine_; }
  friend std::istream& operator>>(std::istream& is, Rng& r) { return is >> r.engine_; }

 private:
  Engine engine_;
};

}  // namespace ranslice
