#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "ranslice/config.hpp"

using namespace ranslice;
using nlohmann::json;

TEST(Config, DeskDefaults) {
  const auto c = desk_profile();
  EXPECT_EQ(c.num_sps(), 3);
  EXPECT_EQ(c.num_mus(), 6);
  EXPECT_EQ(c.channels, 5);
  EXPECT_EQ(c.arrival_rate, 4.0);
  EXPECT_EQ(c.topology.cells_per_side, 8);
  EXPECT_EQ(c.topology.area_m, 400.0);
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, PhysicalConstants) {
  const PhysConst pc;
  EXPECT_NEAR(pc.noise_psd_w_per_hz / std::pow(10.0, -20.4), 1.0, 1e-12);
  EXPECT_NEAR(pc.pathloss_const, 1e-4, 1e-18);
  EXPECT_DOUBLE_EQ(pc.tx_energy_cap(), 0.03);
  EXPECT_EQ(pc.queue_cap, 10);
  EXPECT_EQ(pc.max_tasks, 5);
}

TEST(Config, FullSizeProfile) {
  const auto c = paper_profile();
  EXPECT_EQ(c.num_mus(), 18);
  EXPECT_EQ(c.channels, 9);
  EXPECT_EQ(c.topology.cells_per_side * c.topology.cells_per_side, 1600);
  EXPECT_EQ(c.batch_size, 200);
  EXPECT_EQ(c.epsilon_at(1), 0.001);
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, EpsilonAnneal) {
  auto c = desk_profile();
  c.epsilon_start = 1.0;
  c.epsilon = 0.0;
  c.epsilon_decay_slots = 100;
  EXPECT_DOUBLE_EQ(c.epsilon_at(1), 1.0);
  EXPECT_DOUBLE_EQ(c.epsilon_at(51), 0.5);
  EXPECT_DOUBLE_EQ(c.epsilon_at(101), 0.0);
  EXPECT_DOUBLE_EQ(c.epsilon_at(100000), 0.0);
}

TEST(Config, ValidationRejectsBadValues) {
  auto c = desk_profile();
  c.slots = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = desk_profile();
  c.channels = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = desk_profile();
  c.phys.discount = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = desk_profile();
  c.batch_size = c.replay_capacity + 1;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Config, JsonOverridesAndUnknownKeys) {
  auto c = apply_json(desk_profile(), json{{"channels", 7}, {"arrival_rate", 6.0}, {"scheme", "random"}});
  EXPECT_EQ(c.channels, 7);
  EXPECT_EQ(c.arrival_rate, 6.0);
  EXPECT_EQ(c.scheme, Scheme::baseline3);
  EXPECT_THROW(apply_json(desk_profile(), json{{"chanels", 7}}), ConfigError);
  EXPECT_THROW(apply_json(desk_profile(), json{{"channels", "seven"}}), ConfigError);
  EXPECT_THROW(apply_json(desk_profile(), json::array()), ConfigError);
}

TEST(Config, ProfileKeyAppliesFirst) {
  const auto c = apply_json(desk_profile(), json{{"channels", 4}, {"profile", "paper"}});
  EXPECT_EQ(c.channels, 4);
  EXPECT_EQ(c.num_mus(), 18);
}

TEST(Config, DecibelAliases) {
  const auto c = apply_json(desk_profile(), json{{"noise_psd_dbm_per_hz", -164.0}, {"pathloss_db", -30.0}});
  EXPECT_NEAR(c.phys.noise_psd_w_per_hz / std::pow(10.0, -19.4), 1.0, 1e-12);
  EXPECT_NEAR(c.phys.pathloss_const, 1e-3, 1e-15);
}

TEST(Config, SpCountShorthand) {
  const auto c = apply_json(desk_profile(), json{{"num_sps", 2}});
  EXPECT_EQ(c.mus_per_sp, (std::vector<int>{2, 2}));
  const auto d = apply_json(desk_profile(), json{{"num_sps", 2}, {"mus_per_sp", json::array({1, 3})}});
  EXPECT_EQ(d.mus_per_sp, (std::vector<int>{1, 3}));
}

TEST(Config, ResolvedRoundTripIsExact) {
  auto c = desk_profile();
  c.phys.noise_psd_w_per_hz = dbm_per_hz_to_w_per_hz(-171.3);
  c.seed = 1234567890123ULL;
  c.topology.bs_edges = {{0, 1}, {1, 2}};
  c.mu_price = {1, 2, 3, 4, 5, 6};
  const auto j = to_json(c);
  const auto back = apply_json(desk_profile(), json::parse(j.dump()));
  EXPECT_EQ(to_json(back), j);
  EXPECT_EQ(back.phys.noise_psd_w_per_hz, c.phys.noise_psd_w_per_hz);
}

TEST(Config, LoadFile) {
  const auto path = std::filesystem::temp_directory_path() / "ranslice_cfg_test.json";
  {
    std::ofstream(path) << R"({"profile": "desk", "slots": 123, "seed": 9})";
  }
  const auto c = load_config_file(path.string());
  EXPECT_EQ(c.slots, 123);
  EXPECT_EQ(c.seed, 9u);
  {
    std::ofstream(path) << "{not json";
  }
  EXPECT_THROW(load_config_file(path.string()), ConfigError);
  EXPECT_THROW(load_config_file("/nonexistent/x.json"), ConfigError);
  std::filesystem::remove(path);
}

TEST(Config, SchemeNames) {
  for (auto s : {Scheme::drl, Scheme::baseline1, Scheme::baseline2, Scheme::baseline3})
    EXPECT_EQ(parse_scheme(to_string(s)), s);
  EXPECT_EQ(parse_scheme("channel_aware"), Scheme::baseline1);
  EXPECT_EQ(parse_scheme("queue_aware"), Scheme::baseline2);
  EXPECT_THROW(parse_scheme("greedy"), ConfigError);
}
