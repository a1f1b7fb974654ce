#pragma once

// The slot loop. Each slot runs, in order: MU action selection, SP bids,
// the auction, SP learning updates, environment advance, experience storage,
// DQN training and target sync. Randomness comes from label-keyed streams
// (see seed_label), so runs are reproducible from the master seed alone.

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "ranslice/auction.hpp"
#include "ranslice/baselines.hpp"
#include "ranslice/config.hpp"
#include "ranslice/dqn.hpp"
#include "ranslice/env.hpp"
#include "ranslice/error.hpp"
#include "ranslice/metrics.hpp"
#include "ranslice/mlp.hpp"
#include "ranslice/rng.hpp"
#include "ranslice/sp_agent.hpp"
#include "ranslice/topology.hpp"

namespace ranslice {

enum class Phase { select, bid, auction, sp_update, env_advance, store, train, sync };

inline const char* phase_name(Phase p) {
  switch (p) {
    case Phase::select: return "select";
    case Phase::bid: return "bid";
    case Phase::auction: return "auction";
    case Phase::sp_update: return "sp_update";
    case Phase::env_advance: return "env_advance";
    case Phase::store: return "store";
    case Phase::train: return "train";
    case Phase::sync: return "sync";
  }
  return "?";
}

/// Stream labels. Per MU: mobility, tasks, arrivals (environment), explore,
/// replay, init (learning), baseline (heuristic policies), kernels and start
/// (harness setup). SPs draw nothing.
inline std::string seed_label(int mu_id, std::string_view what) {
  return "mu/" + std::to_string(mu_id) + "/" + std::string(what);
}

inline std::vector<std::string> stream_labels(int num_mus) {
  std::vector<std::string> out;
  for (int n = 0; n < num_mus; ++n)
    for (const char* w : {"mobility", "tasks", "arrivals", "explore", "replay", "init", "baseline", "kernels", "start"})
      out.push_back(seed_label(n, w));
  return out;
}

/// Learning state of one MU.
struct MuAgent {
  Mlp online;
  Mlp target;
  AdamState adam;
  ReplayMemory memory;
  Rng explore;
  Rng replay;
  Rng baseline;
  std::vector<double> grad;
};

/// What an SP saw in one slot; handed to the audit hook.
struct SpView {
  int sp_id = 0;
  std::span<const MuReport> reports;
  bool won = false;
  double payment = 0.0;
};

class Simulator {
 public:
  static constexpr std::uint32_t kCheckpointVersion = 1;

  explicit Simulator(RunConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    const auto& pc = cfg_.phys;
    topo_ = make_grid_topology(cfg_.topology);
    graph_ = InterferenceGraph::from_topology(topo_);
    drl_ = cfg_.scheme == Scheme::drl;
    bid_gamma_ = drl_ ? pc.discount : 0.0;

    const int N = cfg_.num_mus();
    std::vector<MuState> mus;
    for (int i = 0, n = 0; i < cfg_.num_sps(); ++i) {
      std::vector<int> members;
      for (int c = 0; c < cfg_.mus_per_sp[static_cast<std::size_t>(i)]; ++c, ++n) {
        MuState m;
        m.mu_id = n;
        m.sp_id = i;
        Rng kr(cfg_.seed, seed_label(n, "kernels"));
        auto k = random_kernels(kr, topo_, cfg_.mobility_radius, pc.max_tasks, cfg_.dense_mobility);
        m.mobility_kernel = std::move(k.mobility);
        m.task_kernel = std::move(k.task);
        Rng sr(cfg_.seed, seed_label(n, "start"));
        m.local.location = static_cast<int>(sr.uniform_int(0, topo_.location_count() - 1));
        m.local.task_arrivals = static_cast<int>(sr.uniform_int(0, pc.max_tasks));
        m.local.queue_len = 0;
        m.pkt_rate = cfg_.arrival_rate;
        m.price = cfg_.mu_price.empty() ? pc.price : cfg_.mu_price[static_cast<std::size_t>(n)];
        m.energy_weight =
            cfg_.mu_energy_weight.empty() ? pc.energy_weight : cfg_.mu_energy_weight[static_cast<std::size_t>(n)];
        members.push_back(n);
        mus.push_back(std::move(m));
      }
      members_.push_back(std::move(members));
    }
    env_ = std::make_unique<Environment>(topo_, pc, mus, cfg_.seed);

    encoder_ = StateEncoder(topo_, pc, cfg_.encoding);
    space_ = ActionSpace(pc.max_tasks, pc.queue_cap);
    masks_ = MaskTable(encoder_, pc, space_);
    x_.resize(static_cast<std::size_t>(encoder_.dim()));
    ctx_ = DqnContext{&encoder_, &cfg_.phys, space_, pc.discount, &masks_};

    std::vector<int> sizes{encoder_.dim()};
    sizes.insert(sizes.end(), cfg_.hidden_layers.begin(), cfg_.hidden_layers.end());
    sizes.push_back(space_.size());
    for (int n = 0; n < N; ++n) {
      Rng init(cfg_.seed, seed_label(n, "init"));
      const Mlp net(sizes, init);
      MuAgent a{net,
                net,
                AdamState(0, cfg_.adam_step, cfg_.adam_beta1, cfg_.adam_beta2, cfg_.adam_eps),
                ReplayMemory(static_cast<std::size_t>(cfg_.replay_capacity)),
                Rng(cfg_.seed, seed_label(n, "explore")),
                Rng(cfg_.seed, seed_label(n, "replay")),
                Rng(cfg_.seed, seed_label(n, "baseline")),
                {}};
      a.adam = AdamState(a.online.param_count(), cfg_.adam_step, cfg_.adam_beta1, cfg_.adam_beta2, cfg_.adam_eps);
      agents_.push_back(std::move(a));
    }
    if (!drl_) baseline_ = baseline_params(cfg_, encoder_.gains());

    for (int i = 0; i < cfg_.num_sps(); ++i)
      sps_.emplace_back(AbstractionConfig::uniform(cfg_.payment_states, payment_cap(i)));
    summary_ = SummaryAccumulator(N);
  }

  const RunConfig& config() const { return cfg_; }
  const Topology& topology() const { return topo_; }
  const Environment& env() const { return *env_; }
  const MuAgent& agent(int n) const { return agents_.at(static_cast<std::size_t>(n)); }
  const SpLearningState& sp(int i) const { return sps_.at(static_cast<std::size_t>(i)); }
  const DqnContext& dqn_context() const { return ctx_; }
  long slot() const { return slot_; }
  RunSummary summary() const { return summary_.summary(); }
  MetricsShape shape() const { return {cfg_.num_mus(), cfg_.num_sps(), cfg_.payment_states}; }

  void set_event_hook(std::function<void(long, Phase)> h) { on_event_ = std::move(h); }
  void set_audit_hook(std::function<void(const SpView&)> h) { on_audit_ = std::move(h); }

  /// Auto cap: the largest total value the other SPs could ever declare.
  double payment_cap(int sp_id) const {
    if (cfg_.payment_cap > 0.0) return cfg_.payment_cap;
    double cap = 0.0;
    for (const auto& m : env_->mus()) {
      if (m.sp_id == sp_id) continue;
      const double q_max = drl_ ? 2.0 + 2.0 * m.energy_weight
                                : (cfg_.scheme == Scheme::baseline3 ? cfg_.random_value_max : 1.0);
      cap += m.price * q_max / (1.0 - bid_gamma_);
    }
    return cap > 0.0 ? cap : 1.0;
  }

  /// One slot. Contract violations are rethrown with the slot index prepended.
  MetricsRow step() {
    try {
      return step_impl();
    } catch (const ContractViolation& e) {
      throw ContractViolation("slot " + std::to_string(slot_) + ": " + e.what());
    }
  }

  // ---- checkpoint ----

  void save_checkpoint(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    Writer w{out};
    out.write("RSLCKPT", 8);
    w.pod(kCheckpointVersion);
    w.str(identity());
    w.pod(slot_);
    for (std::size_t n = 0; n < agents_.size(); ++n) {
      const auto& m = env_->mu(n);
      w.pod(m.local);
      const auto& s = env_->streams()[n];
      w.rng(s.mobility);
      w.rng(s.tasks);
      w.rng(s.arrivals);
      const auto& a = agents_[n];
      w.vec(std::vector<double>(a.online.params().begin(), a.online.params().end()));
      w.vec(std::vector<double>(a.target.params().begin(), a.target.params().end()));
      w.vec(a.adam.m);
      w.vec(a.adam.v);
      w.pod(a.adam.step);
      w.vec(a.memory.raw());
      w.pod(static_cast<std::uint64_t>(a.memory.head()));
      w.rng(a.explore);
      w.rng(a.replay);
      w.rng(a.baseline);
    }
    for (const auto& s : sps_) {
      w.vec(std::vector<std::uint64_t>(s.counts().begin(), s.counts().end()));
      w.vec(std::vector<double>(s.payment_values().begin(), s.payment_values().end()));
      w.vec(std::vector<std::uint64_t>(s.visits().begin(), s.visits().end()));
      w.pod(s.current_state());
      w.pod(s.clamp_count());
    }
    w.vec(summary_.raw());
    w.pod(summary_.slots());
    if (!out) throw std::runtime_error("write failed on " + path);
  }

  /// Restores a checkpoint written by a simulator with the same configuration
  /// (the slot budget and output directory may differ).
  void load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    Reader r{in, path};
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, "RSLCKPT", 8) != 0) throw std::runtime_error(path + " is not a checkpoint");
    if (r.pod<std::uint32_t>() != kCheckpointVersion) throw std::runtime_error(path + ": unsupported version");
    if (r.str() != identity()) throw std::runtime_error(path + ": checkpoint was written for a different config");
    slot_ = r.pod<long>();
    for (std::size_t n = 0; n < agents_.size(); ++n) {
      env_->set_local(n, r.pod<LocalState>());
      auto& s = env_->streams()[n];
      r.rng(s.mobility);
      r.rng(s.tasks);
      r.rng(s.arrivals);
      auto& a = agents_[n];
      r.into(a.online.params());
      r.into(a.target.params());
      a.adam.m = r.vec<double>();
      a.adam.v = r.vec<double>();
      a.adam.step = r.pod<long>();
      auto buf = r.vec<Experience>();
      const auto head = r.pod<std::uint64_t>();
      a.memory.restore(std::move(buf), static_cast<std::size_t>(head));
      r.rng(a.explore);
      r.rng(a.replay);
      r.rng(a.baseline);
      require(a.adam.m.size() == a.online.param_count() && a.adam.v.size() == a.online.param_count(),
              "checkpoint: Adam state size mismatch");
    }
    for (auto& s : sps_) {
      r.into(s.counts());
      r.into(s.payment_values());
      r.into(s.visits());
      s.set_current_state(r.pod<int>());
      s.set_clamp_count(r.pod<std::uint64_t>());
    }
    summary_.raw() = r.vec<double>();
    summary_.set_slots(r.pod<long>());
  }

 private:
  MetricsRow step_impl() {
    const long k = ++slot_;
    const auto& pc = cfg_.phys;
    const std::size_t N = agents_.size();
    const double eps = cfg_.epsilon_at(k);

    // 1. select
    std::vector<ActionEntry> chosen(N);
    std::vector<MuReport> reports(N);
    for (std::size_t n = 0; n < N; ++n) {
      const auto& local = env_->mu(n).local;
      const double gain = env_->gain_at(local.location);
      auto& a = agents_[n];
      if (drl_) {
        encoder_.encode(local, x_);
        const auto q = a.online.forward(x_);
        const auto& m = masks_(local);
        const int idx = select_action(q, m, eps, a.explore);
        chosen[n] = space_.decode(idx);
        reports[n] = {static_cast<int>(n), q[static_cast<std::size_t>(masked_argmax(q, m))], chosen[n].z,
                      local.location};
      } else {
        reports[n] = baseline_report(baseline_, static_cast<int>(n), local, gain, pc, a.baseline);
      }
    }
    event(k, Phase::select);

    // 2. bid: each SP sees only its own MUs' reports
    std::vector<Bid> bids;
    std::vector<std::vector<MuReport>> sp_reports(sps_.size());
    for (std::size_t i = 0; i < sps_.size(); ++i) {
      std::vector<double> prices;
      for (int n : members_[i]) {
        sp_reports[i].push_back(reports[static_cast<std::size_t>(n)]);
        prices.push_back(env_->mu(static_cast<std::size_t>(n)).price);
      }
      bids.push_back(build_bid(static_cast<int>(i), sp_reports[i], members_[i], prices, sps_[i], topo_, bid_gamma_));
    }
    event(k, Phase::bid);

    // 3. auction
    std::vector<MuRequest> requests;
    for (std::size_t n = 0; n < N; ++n) {
      const auto& m = env_->mu(n);
      requests.push_back({m.mu_id, m.sp_id, topo_.bs_of_location[static_cast<std::size_t>(m.local.location)],
                          reports[n].wants_channel});
    }
    const auto outcome = run_auction(bids, requests, graph_, cfg_.channels);
    event(k, Phase::auction);

    // 4. SP learning
    MetricsRow row;
    row.slot = k;
    for (std::size_t i = 0; i < sps_.size(); ++i) {
      const bool won = outcome.winners[i];
      const double tau = outcome.payments[i];
      if (on_audit_) on_audit_(SpView{static_cast<int>(i), sp_reports[i], won, tau});
      sps_[i].observe_auction(won, tau, bid_gamma_);
      const auto u = sps_[i].payment_values();
      row.sps.push_back({sps_[i].current_state(), bids[i].value, tau, won, {u.begin(), u.end()}});
    }
    event(k, Phase::sp_update);

    // 5. act and advance
    std::vector<SlotAction> actions(N);
    std::vector<LocalState> prev(N);
    for (std::size_t n = 0; n < N; ++n) {
      prev[n] = env_->mu(n).local;
      const bool granted = outcome.channel[n] >= 0;
      if (drl_) {
        actions[n] = {granted, chosen[n].offload, chosen[n].send};
      } else {
        actions[n] = baseline_act(prev[n], granted, env_->gain_at(prev[n].location), pc, agents_[n].baseline);
      }
    }
    const auto results = env_->advance(actions);
    event(k, Phase::env_advance);

    // 6. store
    if (drl_) {
      for (std::size_t n = 0; n < N; ++n) {
        const auto& act = actions[n];
        agents_[n].memory.push(
            {prev[n], space_.index(act.granted, act.offload, act.send), results[n].utility, env_->mu(n).local});
      }
    }
    event(k, Phase::store);

    // 7. train
    std::vector<std::optional<double>> losses(N);
    if (drl_) {
      for (std::size_t n = 0; n < N; ++n) {
        auto& a = agents_[n];
        losses[n] = train_step(a.online, a.target, a.adam, a.memory, static_cast<std::size_t>(cfg_.batch_size), ctx_,
                               a.replay, a.grad);
      }
    }
    event(k, Phase::train);

    // 8. sync
    if (drl_) {
      for (auto& a : agents_) sync_target(a.online, a.target, cfg_.target_sync_period, k);
    }
    event(k, Phase::sync);

    for (std::size_t n = 0; n < N; ++n) {
      const auto& r = results[n];
      row.mus.push_back({r.next_queue, r.drops, r.cpu_energy_j, r.tx_energy_j, r.utility, losses[n]});
    }
    summary_.add(row);
    return row;
  }

  void event(long k, Phase p) {
    if (on_event_) on_event_(k, p);
  }

  std::string identity() const {
    auto j = to_json(cfg_);
    j.erase("slots");
    j.erase("out_dir");
    return j.dump();
  }

  struct Writer {
    std::ostream& out;
    template <typename T>
    void pod(const T& v) {
      static_assert(std::is_trivially_copyable_v<T>);
      out.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
    template <typename T>
    void vec(const std::vector<T>& v) {
      static_assert(std::is_trivially_copyable_v<T>);
      pod(static_cast<std::uint64_t>(v.size()));
      out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(T)));
    }
    void str(const std::string& s) { vec(std::vector<char>(s.begin(), s.end())); }
    void rng(const Rng& g) {
      std::ostringstream os;
      os << g;
      str(os.str());
    }
  };

  struct Reader {
    std::istream& in;
    const std::string& path;
    void check() {
      if (!in) throw std::runtime_error(path + ": truncated checkpoint");
    }
    template <typename T>
    T pod() {
      T v{};
      in.read(reinterpret_cast<char*>(&v), sizeof v);
      check();
      return v;
    }
    template <typename T>
    std::vector<T> vec() {
      const auto n = pod<std::uint64_t>();
      if (n > (std::uint64_t{1} << 32)) throw std::runtime_error(path + ": corrupt checkpoint");
      std::vector<T> v(static_cast<std::size_t>(n));
      in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(T)));
      check();
      return v;
    }
    template <typename T>
    void into(std::span<T> dst) {
      const auto v = vec<std::remove_const_t<T>>();
      if (v.size() != dst.size()) throw std::runtime_error(path + ": checkpoint size mismatch");
      std::copy(v.begin(), v.end(), dst.begin());
    }
    std::string str() {
      const auto v = vec<char>();
      return {v.begin(), v.end()};
    }
    void rng(Rng& g) {
      std::istringstream is(str());
      is >> g;
      if (!is) throw std::runtime_error(path + ": bad RNG state");
    }
  };

  RunConfig cfg_;
  Topology topo_;
  InterferenceGraph graph_;
  bool drl_ = true;
  double bid_gamma_ = 0.0;
  std::vector<std::vector<int>> members_;
  std::unique_ptr<Environment> env_;
  StateEncoder encoder_;
  ActionSpace space_;
  MaskTable masks_;
  DqnContext ctx_;
  std::vector<MuAgent> agents_;
  BaselineParams baseline_;
  std::vector<SpLearningState> sps_;
  SummaryAccumulator summary_;
  long slot_ = 0;
  std::vector<double> x_;
  std::function<void(long, Phase)> on_event_;
  std::function<void(const SpView&)> on_audit_;
};

struct RunResult {
  RunSummary summary;
  std::string metrics_path;
};

inline void write_resolved_config(const RunConfig& cfg, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << to_json(cfg).dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed on " + path);
}

/// Runs cfg.slots slots. With a non-empty `out_dir` writes metrics.csv,
/// config.resolved and checkpoint.bin there. `observer` sees every row.
inline RunResult run(const RunConfig& cfg, const std::string& out_dir,
                     const std::function<void(const MetricsRow&)>& observer = {}, bool write_checkpoint = true) {
  Simulator sim(cfg);
  RunResult res;
  std::unique_ptr<MetricsWriter> writer;
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    write_resolved_config(cfg, out_dir + "/config.resolved");
    res.metrics_path = out_dir + "/metrics.csv";
    writer = std::make_unique<MetricsWriter>(res.metrics_path, sim.shape());
  }
  for (int k = 0; k < cfg.slots; ++k) {
    const auto row = sim.step();
    if (writer) writer->write(row);
    if (observer) observer(row);
  }
  if (writer) {
    writer->close();
    if (write_checkpoint) sim.save_checkpoint(out_dir + "/checkpoint.bin");
  }
  res.summary = sim.summary();
  return res;
}

// ---- sweeps ----

enum class SweepAxis { arrival_rate, channels };

inline std::string to_string(SweepAxis a) { return a == SweepAxis::arrival_rate ? "lambda" : "J"; }

inline SweepAxis parse_axis(const std::string& s) {
  if (s == "lambda" || s == "arrival_rate") return SweepAxis::arrival_rate;
  if (s == "J" || s == "channels") return SweepAxis::channels;
  throw ConfigError("unknown sweep axis '" + s + "' (expected lambda or J)");
}

struct SweepPoint {
  SweepAxis axis = SweepAxis::arrival_rate;
  double value = 0.0;
  Scheme scheme = Scheme::drl;
  std::uint64_t seed = 0;
  RunSummary summary;
};

inline RunConfig apply_axis(RunConfig cfg, SweepAxis axis, double value) {
  if (axis == SweepAxis::arrival_rate) {
    cfg.arrival_rate = value;
  } else {
    cfg.channels = static_cast<int>(value);
    if (cfg.channels != value) throw ConfigError("J axis values must be integers");
  }
  return cfg;
}

inline std::string point_dir(const std::string& root, const SweepPoint& p) {
  std::ostringstream os;
  os << root << '/' << to_string(p.axis) << '_' << p.value << '/' << to_string(p.scheme) << "/seed" << p.seed;
  return os.str();
}

inline const char* kSummaryHeader = "axis,value,scheme,seed,slots,queue,drops,cpu_j,tx_j,utility";

inline std::string format_summary_row(const SweepPoint& p) {
  std::string s = to_string(p.axis) + ',';
  detail::append_real(s, p.value);
  s += ',' + to_string(p.scheme) + ',' + std::to_string(p.seed) + ',' + std::to_string(p.summary.slots);
  for (double v : {p.summary.queue, p.summary.drops, p.summary.cpu_j, p.summary.tx_j, p.summary.utility}) {
    s += ',';
    detail::append_real(s, v);
  }
  return s;
}

inline void write_summary_csv(const std::string& path, std::span<const SweepPoint> points) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << kSummaryHeader << '\n';
  for (const auto& p : points) out << format_summary_row(p) << '\n';
  if (!out) throw std::runtime_error("write failed on " + path);
}

inline std::vector<SweepPoint> read_summary_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != kSummaryHeader) throw std::runtime_error(path + ": bad summary header");
  std::vector<SweepPoint> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = detail::split(line);
    if (f.size() != 10) throw std::runtime_error(path + ": bad summary row");
    SweepPoint p;
    p.axis = parse_axis(std::string(f[0]));
    p.value = detail::parse_real(f[1]);
    p.scheme = parse_scheme(std::string(f[2]));
    p.seed = static_cast<std::uint64_t>(detail::parse_int(f[3]));
    p.summary.slots = detail::parse_int(f[4]);
    p.summary.queue = detail::parse_real(f[5]);
    p.summary.drops = detail::parse_real(f[6]);
    p.summary.cpu_j = detail::parse_real(f[7]);
    p.summary.tx_j = detail::parse_real(f[8]);
    p.summary.utility = detail::parse_real(f[9]);
    out.push_back(p);
  }
  return out;
}

/// Every (value x scheme x seed) combination, in that nesting order. With a
/// non-empty `out_dir`, each run gets its own directory and summary.csv is
/// written at the root.
inline std::vector<SweepPoint> sweep(const RunConfig& base, SweepAxis axis, std::span<const double> values,
                                     std::span<const Scheme> schemes, std::span<const std::uint64_t> seeds,
                                     const std::string& out_dir,
                                     const std::function<void(const SweepPoint&)>& progress = {}) {
  if (values.empty()) throw ConfigError("sweep axis is empty");
  if (schemes.empty() || seeds.empty()) throw ConfigError("sweep needs at least one scheme and one seed");
  std::vector<SweepPoint> points;
  for (double v : values) {
    for (Scheme s : schemes) {
      for (std::uint64_t seed : seeds) {
        SweepPoint p;
        p.axis = axis;
        p.value = v;
        p.scheme = s;
        p.seed = seed;
        auto cfg = apply_axis(base, axis, v);
        cfg.scheme = s;
        cfg.seed = seed;
        cfg.out_dir = out_dir.empty() ? "" : point_dir(out_dir, p);
        p.summary = run(cfg, cfg.out_dir).summary;
        points.push_back(p);
        if (progress) progress(p);
      }
    }
  }
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    write_summary_csv(out_dir + "/summary.csv", points);
  }
  return points;
}

}  // namespace ranslice
