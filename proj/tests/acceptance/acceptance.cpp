// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
//
// usage: acceptance [criterion numbers...]   (default: all)
// Simulation outputs go to $RANSLICE_ACCEPTANCE_DIR or ./acceptance_out.

#include <boost/multiprecision/cpp_dec_float.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ranslice/auction.hpp"
#include "ranslice/dqn.hpp"
#include "ranslice/env.hpp"
#include "ranslice/simulator.hpp"
#include "ranslice/sp_agent.hpp"
#include "ranslice/tabular.hpp"
#include "support.hpp"

using namespace ranslice;
using ranslice::testing::AuctionInstance;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string out_root() {
  const char* env = std::getenv("RANSLICE_ACCEPTANCE_DIR");
  return env ? env : "acceptance_out";
}

// ---- 1. auction oracle equivalence ----

Verdict auction_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(derive_seed(2024, "acceptance/auction"));
  for (int t = 0; t < 1000; ++t) {
    const auto in = ranslice::testing::random_instance(rng);
    const auto fast = winner_determination(in.bids, in.graph, in.channels);
    const auto slow = brute_force_oracle(in.bids, in.graph, in.channels);
    if (fast.welfare != slow.welfare) return {false, fmt("instance %d: welfare %.17g vs oracle %.17g", t, fast.welfare, slow.welfare)};
    const auto reqs = ranslice::testing::requests_for(in);
    const auto out = run_auction(in.bids, reqs, in.graph, in.channels);
    std::uint32_t mask = 0;
    for (std::size_t i = 0; i < out.winners.size(); ++i) mask |= out.winners[i] ? 1u << i : 0u;
    if (mask != fast.mask) return {false, fmt("instance %d: run_auction winners differ", t)};
    const auto err = ranslice::testing::check_allocation(in, mask, reqs, out.channel);
    if (!err.empty()) return {false, fmt("instance %d: %s", t, err.c_str())};
  }
  const double secs = seconds_since(t0);
  return {secs <= 30.0, fmt("1000 instances agree with the oracle, %.2f s (limit 30 s)", secs)};
}

// ---- 2. VCG truthfulness and individual rationality ----

bool covers(const std::vector<int>& got, const std::vector<int>& need) {
  for (std::size_t b = 0; b < need.size(); ++b)
    if (got[b] < need[b]) return false;
  return true;
}

Verdict vcg_properties() {
  Rng rng(derive_seed(2024, "acceptance/vcg"));
  long checks = 0;
  for (int t = 0; t < 500; ++t) {
    const auto in = ranslice::testing::random_instance(rng);
    const auto w = winner_determination(in.bids, in.graph, in.channels);
    const auto tau = payments(in.bids, w.mask, in.graph, in.channels);
    for (std::size_t i = 0; i < in.bids.size(); ++i) {
      const bool won = (w.mask >> i) & 1u;
      if (!won && tau[i] != 0.0) return {false, fmt("instance %d: loser %zu pays %.17g", t, i, tau[i])};
      if (won && in.bids[i].value - tau[i] < 0.0) return {false, fmt("instance %d: winner %zu has negative utility", t, i)};
      const double truth = (won ? in.bids[i].value : 0.0) - tau[i];
      for (int m = 0; m < 20; ++m) {
        auto lie = in.bids;
        lie[i].value = ranslice::testing::dyadic_value(rng, 20.0);
        if (m % 2 == 1)
          for (auto& d : lie[i].demand) d = static_cast<int>(rng.uniform_int(0, 3));
        const auto wl = winner_determination(lie, in.graph, in.channels);
        const auto tl = payments(lie, wl.mask, in.graph, in.channels);
        const bool got = (wl.mask >> i) & 1u;
        const double u = (got && covers(lie[i].demand, in.bids[i].demand) ? in.bids[i].value : 0.0) - tl[i];
        ++checks;
        if (u > truth) return {false, fmt("instance %d SP %zu: misreport utility %.17g > truthful %.17g", t, i, u, truth)};
      }
    }
  }
  return {true, fmt("%ld misreports, none profitable; winners IR, losers pay 0", checks)};
}

// ---- 3. dynamics formulas against a high-precision oracle ----

using Hp = boost::multiprecision::cpp_dec_float_50;

Verdict dynamics_formulas() {
  const PhysConst pc;
  Rng rng(derive_seed(2024, "acceptance/dynamics"));
  double worst = 0.0;
  std::string worst_what = "none";
  auto rel = [&](double got, const Hp& want, const char* what) {
    const Hp diff = abs(Hp(got) - want);
    const double r = want == 0 ? static_cast<double>(diff) : static_cast<double>(diff / abs(want));
    if (r > worst) {
      worst = r;
      worst_what = what;
    }
  };
  const Hp ln2 = log(Hp(2));
  for (int t = 0; t < 10000; ++t) {
    const double gain = std::pow(10.0, rng.uniform(-16.0, -4.0));
    const int tasks = static_cast<int>(rng.uniform_int(0, pc.max_tasks));
    const int off = static_cast<int>(rng.uniform_int(0, tasks));
    const int queue = static_cast<int>(rng.uniform_int(0, pc.queue_cap));
    const int send = static_cast<int>(rng.uniform_int(0, queue));
    const bool granted = rng.bernoulli(0.5);
    const int arrivals = static_cast<int>(rng.uniform_int(0, 30));

    const Hp bits = Hp(pc.task_bits) * off + Hp(pc.pkt_bits) * send;
    const Hp capacity = Hp(pc.bandwidth_hz) * Hp(pc.slot_s);
    const Hp tx = Hp(pc.slot_s) * Hp(pc.bandwidth_hz) * Hp(pc.noise_psd_w_per_hz) / Hp(gain) * (exp(ln2 * bits / capacity) - 1);
    rel(tx_energy(gain, off, send, pc), tx, "tx_energy");

    const int local = tasks - (granted ? off : 0);
    const Hp cpu = Hp(pc.switched_cap) * Hp(pc.task_bits) * Hp(pc.cycles_per_bit) * Hp(pc.cpu_hz) * Hp(pc.cpu_hz) * local;
    rel(cpu_energy(tasks, granted, off, pc), cpu, "cpu_energy");

    const auto q = step_queue(queue, granted, send, arrivals, pc);
    int want_q = queue - (granted ? send : 0) + arrivals;
    int want_d = 0;
    if (want_q > pc.queue_cap) {
      want_d = want_q - pc.queue_cap;
      want_q = pc.queue_cap;
    }
    if (q.next_queue != want_q || q.drops != want_d)
      return {false, fmt("step_queue(%d, %d, %d, %d) = (%d, %d), expected (%d, %d)", queue, granted, send, arrivals,
                         q.next_queue, q.drops, want_q, want_d)};

    const double cpu_j = rng.uniform(0.0, 0.05);
    const double tx_j = rng.uniform(0.0, 0.05);
    const double ell = rng.uniform(0.0, 5.0);
    const Hp u = exp(Hp(-want_q)) + exp(Hp(-want_d)) + Hp(ell) * (exp(-Hp(cpu_j)) + exp(-Hp(tx_j)));
    rel(utility(want_q, want_d, cpu_j, tx_j, ell), u, "utility");
  }
  return {worst <= 1e-9, fmt("1e4 inputs, worst relative error %.3g (%s), queue arithmetic exact", worst, worst_what.c_str())};
}

// ---- 4. gradient check ----

Verdict gradient_check() {
  const auto topo = make_grid_topology(desk_profile().topology);
  const PhysConst pc;
  const StateEncoder enc(topo, pc);
  const ActionSpace space(pc.max_tasks, pc.queue_cap);
  const MaskTable masks(enc, pc, space);
  const DqnContext ctx{&enc, &pc, space, 0.9, &masks};
  Rng rng(derive_seed(2024, "acceptance/gradient"));
  double worst = 0.0;
  for (int b = 0; b < 10; ++b) {
    const Mlp online({5, 16, 16, 132}, rng);
    const Mlp target({5, 16, 16, 132}, rng);
    ReplayMemory mem(256);
    for (int i = 0; i < 256; ++i) {
      Experience e;
      e.state = {static_cast<int>(rng.uniform_int(0, topo.location_count() - 1)),
                 static_cast<int>(rng.uniform_int(0, pc.max_tasks)), static_cast<int>(rng.uniform_int(0, pc.queue_cap))};
      e.next = {static_cast<int>(rng.uniform_int(0, topo.location_count() - 1)),
                static_cast<int>(rng.uniform_int(0, pc.max_tasks)), static_cast<int>(rng.uniform_int(0, pc.queue_cap))};
      const std::vector<double> q(static_cast<std::size_t>(space.size()), 0.0);
      e.action = select_action(q, masks(e.state), 1.0, rng);
      e.utility = rng.uniform(0.5, 8.0);
      mem.push(e);
    }
    const auto batch = mem.sample(64, rng);
    const auto r = ranslice::testing::gradient_check(online, target, mem, batch, ctx);
    worst = std::max(worst, r.max_rel_error);
    if (r.max_rel_error > 1e-5)
      return {false, fmt("batch %d: parameter %zu relative error %.3g", b, r.worst_param, r.max_rel_error)};
  }
  return {true, fmt("10 batches of 64, all 2612 parameters, worst relative error %.3g", worst)};
}

// ---- 5. learning oracles ----

Verdict tabular_q_oracle() {
  TopologySpec ts;
  ts.cells_per_side = 2;
  ts.bs_per_side = 1;
  ts.area_m = 200.0;
  const auto topo = make_grid_topology(ts);
  PhysConst pc;
  pc.max_tasks = 1;
  pc.queue_cap = 2;
  const double gamma = 0.9;
  const MuMdp model(topo, pc, random_kernels(7, topo, 1, pc.max_tasks), 1.0, 3.0);
  const auto mdp = model.enumerate();
  const auto vi = value_iteration_oracle(mdp, gamma, 1e-13);
  Rng rng(derive_seed(2024, "acceptance/q"));
  const auto q = synchronous_q_learning(mdp, gamma, 1000000,
                                        [&](long n) { return 1.0 / (1.0 + (1.0 - gamma) * static_cast<double>(n)); }, rng);
  double err = 0.0;
  const auto v = q.values();
  for (int s = 0; s < mdp.num_states; ++s) {
    err = std::max(err, std::abs(v[static_cast<std::size_t>(s)] - vi.values[static_cast<std::size_t>(s)]));
    for (int a = 0; a < mdp.num_actions; ++a)
      if (mdp.is_feasible(s, a))
        err = std::max(err, std::abs(q.at(s, a) - vi.q[static_cast<std::size_t>(s * mdp.num_actions + a)]));
  }
  return {err <= 1e-3, fmt("(a) %d states x %d actions, 1e6 sweeps, sup error %.3g", mdp.num_states, mdp.num_actions, err)};
}

Verdict payment_value_oracle() {
  const double P[3][3] = {{0.2, 0.5, 0.3}, {0.4, 0.1, 0.5}, {0.3, 0.3, 0.4}};
  const double pay[3] = {0.0, 1.0, 2.0};
  const double gamma = 0.5;
  // direct solve of U = (1 - gamma) P pay + gamma P U
  double A[3][4];
  for (int i = 0; i < 3; ++i) {
    double r = 0.0;
    for (int j = 0; j < 3; ++j) {
      A[i][j] = (i == j ? 1.0 : 0.0) - gamma * P[i][j];
      r += P[i][j] * pay[j];
    }
    A[i][3] = (1.0 - gamma) * r;
  }
  for (int c = 0; c < 3; ++c)
    for (int r = c + 1; r < 3; ++r) {
      const double f = A[r][c] / A[c][c];
      for (int k = c; k < 4; ++k) A[r][k] -= f * A[c][k];
    }
  double U[3];
  for (int i = 2; i >= 0; --i) {
    double s = A[i][3];
    for (int j = i + 1; j < 3; ++j) s -= A[i][j] * U[j];
    U[i] = s / A[i][i];
  }

  SpLearningState st(AbstractionConfig::uniform(3, 2.0));
  for (int s = 0; s < 3; ++s)
    for (int t = 0; t < 3; ++t)
      for (int w = 0; w < 2; ++w)
        st.counts()[static_cast<std::size_t>((s * 3 + t) * 2 + w)] = static_cast<std::uint64_t>(std::llround(P[s][t] * 1e6));
  Rng rng(derive_seed(2024, "acceptance/payment"));
  int s = 0;
  std::vector<long> visits(3, 0);
  for (long k = 0; k < 20000000; ++k) {
    const int nx = static_cast<int>(rng.categorical(std::span<const double>(P[s], 3)));
    const long n = ++visits[static_cast<std::size_t>(s)];
    st.update_payment_value(s, true, pay[nx], 1.0 / (1.0 + static_cast<double>(n)), gamma);
    s = nx;
  }
  double err = 0.0;
  for (int i = 0; i < 3; ++i) err = std::max(err, std::abs(st.payment_values()[static_cast<std::size_t>(i)] - U[i]));
  return {err <= 1e-3, fmt("(b) 3-state process, 2e7 updates, sup error %.3g", err)};
}

Verdict estimator_oracle() {
  const double P[4][4] = {{0.1, 0.6, 0.2, 0.1}, {0.3, 0.3, 0.3, 0.1}, {0.05, 0.15, 0.5, 0.3}, {0.4, 0.1, 0.1, 0.4}};
  SpLearningState st(AbstractionConfig::uniform(4, 3.0));
  Rng rng(derive_seed(2024, "acceptance/estimator"));
  int s = 0;
  for (int k = 0; k < 10000; ++k) {
    const int nx = static_cast<int>(rng.categorical(std::span<const double>(P[s], 4)));
    st.update_counts(s, nx, true);
    s = nx;
  }
  double err = 0.0;
  for (int a = 0; a < 4; ++a) {
    const auto p = st.estimate(a, true);
    for (int b = 0; b < 4; ++b) err = std::max(err, std::abs(p[static_cast<std::size_t>(b)] - P[a][b]));
  }
  return {err <= 0.05, fmt("(c) 4-state kernel, 1e4 samples, max entry error %.3g", err)};
}

Verdict learning_oracles() {
  const auto a = tabular_q_oracle();
  const auto b = payment_value_oracle();
  const auto c = estimator_oracle();
  return {a.pass && b.pass && c.pass, a.detail + "; " + b.detail + "; " + c.detail};
}

// ---- desk runs shared by 6-9 ----

struct DeskRun {
  RunSummary summary;
  std::string metrics;
  std::vector<std::vector<std::optional<double>>> losses;  // [slot][mu]
};

class DeskRuns {
 public:
  const DeskRun& get(Scheme scheme, std::uint64_t seed, int channels = 5, double lambda = 4.0) {
    const auto key = std::make_tuple(scheme, seed, channels, lambda);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    RunConfig cfg = desk_profile();
    cfg.scheme = scheme;
    cfg.seed = seed;
    cfg.channels = channels;
    cfg.arrival_rate = lambda;
    cfg.slots = 20000;
    std::ostringstream dir;
    dir << out_root() << "/" << to_string(scheme) << "_J" << channels << "_lambda" << lambda << "_seed" << seed;
    DeskRun r;
    const auto t0 = std::chrono::steady_clock::now();
    const auto res = run(cfg, dir.str(), [&](const MetricsRow& row) {
      std::vector<std::optional<double>> l;
      for (const auto& m : row.mus) l.push_back(m.loss);
      r.losses.push_back(std::move(l));
    });
    std::fprintf(stderr, "  run %s: utility %.6f (%.1f s)\n", dir.str().c_str(), res.summary.utility, seconds_since(t0));
    r.summary = res.summary;
    r.metrics = res.metrics_path;
    return cache_.emplace(key, std::move(r)).first->second;
  }

 private:
  std::map<std::tuple<Scheme, std::uint64_t, int, double>, DeskRun> cache_;
};

DeskRuns& desk() {
  static DeskRuns runs;
  return runs;
}

const std::vector<std::uint64_t> kSeeds{1, 2, 3};

// ---- 6. convergence ----

Verdict convergence() {
  const auto& r = desk().get(Scheme::drl, 1);
  const std::size_t window = 500;
  const std::size_t at = 10000;
  const std::size_t mus = r.losses.front().size();
  std::string detail;
  bool pass = true;
  for (std::size_t n = 0; n < mus; ++n) {
    // moving average over the last `window` slots that produced a loss
    std::vector<double> ma(r.losses.size(), -1.0);
    std::vector<double> recent;
    double sum = 0.0;
    for (std::size_t k = 0; k < r.losses.size(); ++k) {
      if (!r.losses[k][n]) continue;
      recent.push_back(*r.losses[k][n]);
      sum += recent.back();
      if (recent.size() > window) sum -= recent[recent.size() - window - 1];
      if (recent.size() >= window) ma[k] = sum / static_cast<double>(window);
    }
    double peak = 0.0;
    for (std::size_t k = 0; k < at; ++k) peak = std::max(peak, ma[k]);
    const double now = ma[at - 1];
    const double ratio = peak > 0.0 ? now / peak : 1.0;
    pass = pass && now >= 0.0 && ratio <= 0.25;
    detail += fmt("%smu%zu %.3g", n ? ", " : "", n, ratio);
  }
  return {pass, "loss MA(500) at slot 1e4 over peak: " + detail + " (limit 0.25)"};
}

// ---- 7. DRL beats random ----

double mean_over_seeds(Scheme s, int channels, double lambda, double RunSummary::*field) {
  double acc = 0.0;
  for (auto seed : kSeeds) acc += desk().get(s, seed, channels, lambda).summary.*field;
  return acc / static_cast<double>(kSeeds.size());
}

Verdict drl_beats_random() {
  const double drl = mean_over_seeds(Scheme::drl, 5, 4.0, &RunSummary::utility);
  const double rnd = mean_over_seeds(Scheme::baseline3, 5, 4.0, &RunSummary::utility);
  return {drl > rnd, fmt("mean utility over 3 seeds: drl %.6f, baseline3 %.6f", drl, rnd)};
}

// ---- 8. trends ----

Verdict trends() {
  const double allow = 0.05;
  bool pass = true;
  std::string detail = "J {3,5,7}: queue";
  const int js[3] = {3, 5, 7};
  double q[3], d[3], u[3];
  for (int i = 0; i < 3; ++i) {
    q[i] = mean_over_seeds(Scheme::drl, js[i], 4.0, &RunSummary::queue);
    d[i] = mean_over_seeds(Scheme::drl, js[i], 4.0, &RunSummary::drops);
    u[i] = mean_over_seeds(Scheme::drl, js[i], 4.0, &RunSummary::utility);
  }
  for (int i = 0; i < 3; ++i) detail += fmt(" %.4g", q[i]);
  detail += ", drops";
  for (int i = 0; i < 3; ++i) detail += fmt(" %.4g", d[i]);
  detail += ", utility";
  for (int i = 0; i < 3; ++i) detail += fmt(" %.5g", u[i]);
  for (int i = 0; i + 1 < 3; ++i) {
    pass = pass && q[i + 1] <= q[i] * (1.0 + allow);
    pass = pass && d[i + 1] <= d[i] * (1.0 + allow);
    pass = pass && u[i + 1] >= u[i] * (1.0 - allow);
  }
  const double ls[3] = {2.0, 4.0, 6.0};
  double tx[3];
  detail += "; lambda {2,4,6}: tx_j";
  for (int i = 0; i < 3; ++i) {
    tx[i] = mean_over_seeds(Scheme::drl, 5, ls[i], &RunSummary::tx_j);
    detail += fmt(" %.4g", tx[i]);
  }
  for (int i = 0; i + 1 < 3; ++i) pass = pass && tx[i + 1] >= tx[i] * (1.0 - allow);
  return {pass, detail};
}

// ---- 9. determinism ----

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Verdict determinism() {
  const auto& first = desk().get(Scheme::drl, 1);
  RunConfig cfg = desk_profile();
  cfg.slots = 20000;
  const std::string dir = out_root() + "/determinism_repeat";
  const auto again = run(cfg, dir);
  const auto a = slurp(first.metrics);
  const auto b = slurp(again.metrics_path);
  return {!a.empty() && a == b, fmt("desk seed 1, 2e4 slots: %zu bytes, %s", a.size(), a == b ? "identical" : "DIFFERENT")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<int, std::function<Verdict()>>> all{
      {1, auction_oracle}, {2, vcg_properties}, {3, dynamics_formulas}, {4, gradient_check}, {5, learning_oracles},
      {6, convergence},    {7, drl_beats_random}, {8, trends},         {9, determinism}};
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  std::filesystem::create_directories(out_root());

  int failed = 0;
  for (const auto& [id, fn] : all) {
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += v.pass ? 0 : 1;
    std::printf("CRITERION %d: %s: %s [%.1f s]\n", id, v.pass ? "PASS" : "FAIL", v.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
