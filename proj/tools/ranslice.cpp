// Command-line front end: run, sweep and one-shot auction.

#include <cstdint>
#include <exception>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ranslice/auction.hpp"
#include "ranslice/config.hpp"
#include "ranslice/simulator.hpp"

using namespace ranslice;
using nlohmann::json;

namespace {

struct CommonOpts {
  std::string profile = "desk";
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> slots;
  std::optional<std::string> scheme;
  std::string out = "out";
};

void add_common(CLI::App* app, CommonOpts& o) {
  app->add_option("--profile", o.profile, "base profile (desk or paper)")->check(CLI::IsMember({"desk", "paper"}));
  app->add_option("--config", o.config_path, "JSON config applied on top of the profile");
  app->add_option("--seed", o.seed, "master seed");
  app->add_option("--slots", o.slots, "slot budget");
  app->add_option("--scheme", o.scheme, "drl, baseline1, baseline2 or baseline3");
  app->add_option("--out", o.out, "output directory");
}

RunConfig resolve(const CommonOpts& o) {
  RunConfig cfg = profile_by_name(o.profile);
  if (!o.config_path.empty()) cfg = load_config_file(o.config_path, cfg);
  if (o.seed) cfg.seed = *o.seed;
  if (o.slots) cfg.slots = *o.slots;
  if (o.scheme) cfg.scheme = parse_scheme(*o.scheme);
  cfg.out_dir = o.out;
  cfg.validate();
  return cfg;
}

void print_summary(const RunSummary& s) {
  std::cout << std::setprecision(10) << "slots " << s.slots << "\nqueue " << s.queue << "\ndrops " << s.drops
            << "\ncpu_j " << s.cpu_j << "\ntx_j " << s.tx_j << "\nutility " << s.utility << '\n';
}

int cmd_run(const CommonOpts& o) {
  const auto cfg = resolve(o);
  const long report_every = std::max(1, cfg.slots / 10);
  long k = 0;
  const auto res = run(cfg, cfg.out_dir, [&](const MetricsRow&) {
    if (++k % report_every == 0) std::cerr << "slot " << k << "/" << cfg.slots << '\n';
  });
  std::cout << "metrics " << res.metrics_path << '\n';
  print_summary(res.summary);
  return 0;
}

int cmd_sweep(const CommonOpts& o, const std::string& axis_name, const std::vector<double>& values,
              const std::vector<std::string>& scheme_names, std::vector<std::uint64_t> seeds) {
  const auto cfg = resolve(o);
  const auto axis = parse_axis(axis_name);
  std::vector<Scheme> schemes;
  for (const auto& s : scheme_names) schemes.push_back(parse_scheme(s));
  if (schemes.empty()) schemes = {Scheme::drl, Scheme::baseline1, Scheme::baseline2, Scheme::baseline3};
  if (seeds.empty()) seeds = {cfg.seed};
  sweep(cfg, axis, values, schemes, seeds, cfg.out_dir, [](const SweepPoint& p) {
    std::cerr << to_string(p.axis) << "=" << p.value << " " << to_string(p.scheme) << " seed " << p.seed
              << " utility " << p.summary.utility << '\n';
  });
  std::cout << "summary " << cfg.out_dir << "/summary.csv\n";
  return 0;
}

int cmd_auction(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open auction instance " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("cannot parse " + path + ": " + e.what());
  }
  std::vector<Bid> bids;
  std::vector<std::pair<int, int>> edges;
  int bs_count = 0;
  int channels = 0;
  try {
    bs_count = j.at("bs_count").get<int>();
    channels = j.at("channels").get<int>();
    for (const auto& e : j.value("edges", json::array())) edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    int id = 0;
    for (const auto& b : j.at("bids")) {
      Bid bid;
      bid.sp_id = b.value("sp_id", id);
      bid.value = b.at("value").get<double>();
      bid.demand = b.at("demand").get<std::vector<int>>();
      bids.push_back(std::move(bid));
      ++id;
    }
  } catch (const json::exception& e) {
    throw ConfigError("bad auction instance: " + std::string(e.what()));
  }
  const auto g = InterferenceGraph::from_edges(bs_count, edges);
  const FeasibilityTable ok(bids, g, channels);
  const auto best = best_subset(bids, ok, (1u << bids.size()) - 1);
  const auto pay = payments(bids, best.mask, ok);
  json out;
  out["welfare"] = best.welfare;
  out["winners"] = json::array();
  out["payments"] = json::array();
  for (std::size_t i = 0; i < bids.size(); ++i) {
    if ((best.mask >> i) & 1u) out["winners"].push_back(bids[i].sp_id);
    out["payments"].push_back(pay[i]);
  }
  std::cout << out.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-tenant RAN slicing simulator"};
  app.require_subcommand(1);

  CommonOpts run_opts;
  auto* run_cmd = app.add_subcommand("run", "simulate one configuration");
  add_common(run_cmd, run_opts);

  CommonOpts sweep_opts;
  std::string axis = "lambda";
  std::vector<double> values;
  std::vector<std::string> schemes;
  std::vector<std::uint64_t> seeds;
  auto* sweep_cmd = app.add_subcommand("sweep", "run every (value x scheme x seed) and write summary.csv");
  add_common(sweep_cmd, sweep_opts);
  sweep_cmd->add_option("--axis", axis, "lambda or J");
  sweep_cmd->add_option("--values", values, "axis values")->required()->delimiter(',');
  sweep_cmd->add_option("--schemes", schemes, "schemes (default: all)")->delimiter(',');
  sweep_cmd->add_option("--seeds", seeds, "seeds (default: --seed)")->delimiter(',');

  std::string instance;
  auto* auction_cmd = app.add_subcommand("auction", "solve one auction instance (JSON) and print the outcome");
  auction_cmd->add_option("instance", instance, "instance file")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run_cmd) return cmd_run(run_opts);
    if (*sweep_cmd) return cmd_sweep(sweep_opts, axis, values, schemes, seeds);
    if (*auction_cmd) return cmd_auction(instance);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
