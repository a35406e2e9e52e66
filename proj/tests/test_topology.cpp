#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "guardband/topology.hpp"

using namespace guardband;
using Catch::Approx;

namespace {

/// Unique temp path for file round-trip tests; removed by the caller.
std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

bool has_violation(const std::vector<std::string>& v, const std::string& part) {
  return std::any_of(v.begin(), v.end(), [&](const std::string& msg) {
    return msg.find(part) != std::string::npos;
  });
}

}  // namespace

TEST_CASE("default layout shape") {
  const NetworkConfig cfg = default_config();
  REQUIRE(cfg.nodes.size() == 6);
  REQUIRE(cfg.spans.size() == 5);
  REQUIRE(cfg.windows.size() == 3);
  REQUIRE(cfg.probes.size() == 4);
  REQUIRE(cfg.grid.slot_count == 28);
  REQUIRE(cfg.grid.slot_width_ghz == 50.0);
  REQUIRE(cfg.grid.start_freq_thz == Approx(193.1));
  REQUIRE(cfg.total_span_km() == Approx(150.0));
}

TEST_CASE("default layout interleaves probes and windows") {
  const NetworkConfig cfg = default_config();

  REQUIRE(cfg.probes[0].slot == 0);
  REQUIRE(cfg.probes[1].slot == 9);
  REQUIRE(cfg.probes[2].slot == 18);
  REQUIRE(cfg.probes[3].slot == 27);

  REQUIRE(cfg.windows[0].first_slot == 1);
  REQUIRE(cfg.windows[1].first_slot == 10);
  REQUIRE(cfg.windows[2].first_slot == 19);
  for (const auto& w : cfg.windows) {
    REQUIRE(w.width_slots == 8);
    REQUIRE(w.width_slots * cfg.grid.slot_width_ghz == Approx(400.0));
    REQUIRE(static_cast<int>(w.active_channels.size()) == 8);
  }
  REQUIRE(cfg.windows[0].center_slot() == Approx(4.5));
  REQUIRE(cfg.windows[1].center_slot() == Approx(13.5));
  REQUIRE(cfg.windows[2].center_slot() == Approx(22.5));

  // Probe and window slot sets are disjoint: every slot claimed once.
  std::vector<int> claimed;
  for (const auto& p : cfg.probes) claimed.push_back(p.slot);
  for (const auto& w : cfg.windows) {
    for (int s = w.first_slot; s <= w.last_slot(); ++s) claimed.push_back(s);
  }
  std::sort(claimed.begin(), claimed.end());
  REQUIRE(static_cast<int>(claimed.size()) == cfg.grid.slot_count);
  REQUIRE(std::adjacent_find(claimed.begin(), claimed.end()) == claimed.end());
}

TEST_CASE("span loss follows length times attenuation") {
  const NetworkConfig cfg = default_config();
  REQUIRE(cfg.spans[0].loss_db() == Approx(5.0));   // 25 km * 0.2 dB/km
  REQUIRE(cfg.spans[4].loss_db() == Approx(10.0));  // 50 km * 0.2 dB/km
}

TEST_CASE("default config validates clean") {
  REQUIRE(validate(default_config()).empty());
}

TEST_CASE("validate flags overlapping slots") {
  NetworkConfig cfg = default_config();
  cfg.probes[1].slot = 3;  // inside user1's window
  const auto v = validate(cfg);
  REQUIRE_FALSE(v.empty());
  REQUIRE(has_violation(v, "slot overlap"));
}

TEST_CASE("validate flags node/span count mismatch") {
  NetworkConfig cfg = default_config();
  cfg.nodes.pop_back();  // 5 nodes, 5 spans
  const auto v = validate(cfg);
  REQUIRE(has_violation(v, "node/span count mismatch"));
}

TEST_CASE("validate flags structural damage") {
  SECTION("non-ascending node ids") {
    NetworkConfig cfg = default_config();
    cfg.nodes[2].node_id = 7;
    REQUIRE(has_violation(validate(cfg), "node_id"));
  }
  SECTION("non-positive span length") {
    NetworkConfig cfg = default_config();
    cfg.spans[0].length_km = 0.0;
    REQUIRE(has_violation(validate(cfg), "length_km"));
  }
  SECTION("duplicate probe id") {
    NetworkConfig cfg = default_config();
    cfg.probes[3].probe_id = 0;
    REQUIRE(has_violation(validate(cfg), "duplicate probe_id"));
  }
  SECTION("probe slot outside grid") {
    NetworkConfig cfg = default_config();
    cfg.probes[3].slot = 99;
    REQUIRE(has_violation(validate(cfg), "outside grid"));
  }
  SECTION("broken interleaving") {
    NetworkConfig cfg = default_config();
    // Park two probes side by side at the grid edge: P P U U P U P.
    // Every slot stays disjoint, so only the layout rule can object.
    cfg.probes[1].slot = 1;
    cfg.windows[0].first_slot = 2;
    cfg.windows[0].active_channels.clear();
    for (int c = 2; c <= 9; ++c) cfg.windows[0].active_channels.push_back(c);
    const auto v = validate(cfg);
    REQUIRE(v.size() == 1);
    REQUIRE(has_violation(v, "interleave"));
  }
  SECTION("unsorted active channels") {
    NetworkConfig cfg = default_config();
    std::swap(cfg.windows[0].active_channels[0],
              cfg.windows[0].active_channels[3]);
    REQUIRE(has_violation(validate(cfg), "sorted"));
  }
  SECTION("non-finite launch power") {
    NetworkConfig cfg = default_config();
    cfg.probes[0].launch_power_dbm =
        std::numeric_limits<double>::quiet_NaN();
    REQUIRE(has_violation(validate(cfg), "launch_power_dbm"));
  }
}

TEST_CASE("enum string round trips") {
  for (UserId u : {UserId::User1, UserId::User2, UserId::User3}) {
    REQUIRE(user_from_string(to_string(u)) == u);
  }
  for (OsnrLevel l : {OsnrLevel::Low, OsnrLevel::Mid, OsnrLevel::High}) {
    REQUIRE(osnr_level_from_string(to_string(l)) == l);
  }
  REQUIRE_THROWS_AS(user_from_string("user9"), std::invalid_argument);
  REQUIRE_THROWS_AS(osnr_level_from_string("ultra"), std::invalid_argument);
}

TEST_CASE("config JSON round trip is exact") {
  const NetworkConfig cfg = default_config();
  const ordered_json j = cfg;
  const NetworkConfig back = j.get<NetworkConfig>();
  REQUIRE(ordered_json(back).dump() == j.dump());
  REQUIRE(validate(back).empty());
}

TEST_CASE("config file round trip") {
  const std::string path = temp_path("gb_topology_roundtrip.json");
  const NetworkConfig cfg = default_config();
  save_config(cfg, path);
  const NetworkConfig back = load_config(path);
  REQUIRE(ordered_json(back).dump() == ordered_json(cfg).dump());
  std::remove(path.c_str());
}

TEST_CASE("config parsing rejects bad input") {
  SECTION("wrong schema version") {
    ordered_json j = default_config();
    j["schema_version"] = 99;
    REQUIRE_THROWS_AS(j.get<NetworkConfig>(), std::invalid_argument);
  }
  SECTION("unknown modulation") {
    ordered_json j = default_config();
    j["probes"][0]["modulation"] = "qpsk";
    REQUIRE_THROWS_AS(j.get<NetworkConfig>(), std::invalid_argument);
  }
  SECTION("missing file") {
    REQUIRE_THROWS_AS(load_config("/nonexistent/cfg.json"),
                      std::runtime_error);
  }
}
