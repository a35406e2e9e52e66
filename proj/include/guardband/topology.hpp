#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "guardband/version.hpp"

// Declarative model of the optical line system: spectral grid, ROADM chain,
// fiber spans, leased user windows and the operator's probe channels.
// Values are immutable after construction; validate() reports every broken
// invariant as data instead of throwing.

namespace guardband {

using ordered_json = nlohmann::ordered_json;

enum class UserId { User1 = 0, User2 = 1, User3 = 2 };
enum class OsnrLevel { Low = 0, Mid = 1, High = 2 };
enum class Modulation { Qam64_300G = 0 };

inline constexpr int kUserCount = 3;
inline constexpr int kProbeCount = 4;
inline constexpr int kNodeCount = 6;
inline constexpr int kSpanCount = 5;
inline constexpr int kWindowSlots = 8;

struct SpectralGrid {
  double start_freq_thz = 193.1;
  double slot_width_ghz = 50.0;
  int slot_count = 0;
};

struct OsaasWindow {
  UserId user = UserId::User1;
  int first_slot = 0;
  int width_slots = kWindowSlots;
  std::vector<int> active_channels;  // absolute slot indices, sorted
  double per_channel_power_dbm = 4.0;

  int last_slot() const { return first_slot + width_slots - 1; }
  bool contains(int slot) const {
    return slot >= first_slot && slot <= last_slot();
  }
  double center_slot() const {
    return first_slot + (width_slots - 1) / 2.0;
  }
};

struct OperatorProbe {
  int probe_id = 0;
  int slot = 0;
  double launch_power_dbm = 4.0;
  Modulation modulation = Modulation::Qam64_300G;
  OsnrLevel osnr_setting = OsnrLevel::Mid;
};

struct RoadmNode {
  int node_id = 0;
  double booster_gain_db = 15.0;
  double preamp_gain_db = 15.0;
  // Lumped WSS add/drop insertion loss; together with the two 15 dB
  // amplifier stages this leaves a 25 km hop power-neutral.
  double insertion_loss_db = 25.0;
  double ocm_resolution_ghz = 50.0;
};

struct FiberSpan {
  int span_id = 0;
  double length_km = 25.0;
  double attenuation_db_per_km = 0.2;

  double loss_db() const { return length_km * attenuation_db_per_km; }
};

struct NetworkConfig {
  SpectralGrid grid;
  std::vector<RoadmNode> nodes;
  std::vector<FiberSpan> spans;
  std::vector<OsaasWindow> windows;
  std::vector<OperatorProbe> probes;

  double total_span_km() const {
    double sum = 0.0;
    for (const auto& s : spans) sum += s.length_km;
    return sum;
  }
};

inline const char* to_string(UserId u) {
  switch (u) {
    case UserId::User1: return "user1";
    case UserId::User2: return "user2";
    case UserId::User3: return "user3";
  }
  return "?";
}

inline UserId user_from_string(const std::string& s) {
  if (s == "user1") return UserId::User1;
  if (s == "user2") return UserId::User2;
  if (s == "user3") return UserId::User3;
  throw std::invalid_argument("unknown user id: " + s);
}

inline const char* to_string(OsnrLevel l) {
  switch (l) {
    case OsnrLevel::Low: return "low";
    case OsnrLevel::Mid: return "mid";
    case OsnrLevel::High: return "high";
  }
  return "?";
}

inline OsnrLevel osnr_level_from_string(const std::string& s) {
  if (s == "low") return OsnrLevel::Low;
  if (s == "mid") return OsnrLevel::Mid;
  if (s == "high") return OsnrLevel::High;
  throw std::invalid_argument("unknown osnr level: " + s);
}

/// The testbed layout: 6 ROADMs over 4x25 km + 1x50 km spans, three 400 GHz
/// user windows of 8x50 GHz channels, and 4 probe channels interleaving the
/// windows as P1 U1 P2 U2 P3 U3 P4 on a 28-slot grid anchored at 193.1 THz.
inline NetworkConfig default_config() {
  NetworkConfig cfg;
  cfg.grid = SpectralGrid{193.1, 50.0, 28};

  for (int n = 0; n < kNodeCount; ++n) {
    cfg.nodes.push_back(RoadmNode{n, 15.0, 15.0, 25.0, 50.0});
  }
  const double lengths[kSpanCount] = {25.0, 25.0, 25.0, 25.0, 50.0};
  for (int s = 0; s < kSpanCount; ++s) {
    cfg.spans.push_back(FiberSpan{s, lengths[s], 0.2});
  }

  const int window_first[kUserCount] = {1, 10, 19};
  for (int u = 0; u < kUserCount; ++u) {
    OsaasWindow w;
    w.user = static_cast<UserId>(u);
    w.first_slot = window_first[u];
    w.width_slots = kWindowSlots;
    for (int c = 0; c < kWindowSlots; ++c) {
      w.active_channels.push_back(w.first_slot + c);
    }
    w.per_channel_power_dbm = 4.0;
    cfg.windows.push_back(w);
  }

  const int probe_slots[kProbeCount] = {0, 9, 18, 27};
  for (int p = 0; p < kProbeCount; ++p) {
    cfg.probes.push_back(
        OperatorProbe{p, probe_slots[p], 4.0, Modulation::Qam64_300G,
                      OsnrLevel::Mid});
  }
  return cfg;
}

/// Structural validation. Returns one human-readable violation per broken
/// rule; an empty list means the config is usable by the rest of the
/// pipeline (which assumes the fixed 6-node / 4-probe / 3-window shape).
inline std::vector<std::string> validate(const NetworkConfig& cfg) {
  std::vector<std::string> v;
  auto fail = [&v](const std::string& msg) { v.push_back(msg); };

  if (!(cfg.grid.slot_width_ghz > 0.0)) {
    fail("grid.slot_width_ghz: must be positive");
  }
  if (cfg.grid.slot_count <= 0) fail("grid.slot_count: must be positive");
  if (!std::isfinite(cfg.grid.start_freq_thz) ||
      cfg.grid.start_freq_thz <= 0.0) {
    fail("grid.start_freq_thz: must be positive and finite");
  }

  if (cfg.nodes.size() != cfg.spans.size() + 1) {
    std::ostringstream os;
    os << "node/span count mismatch: " << cfg.nodes.size() << " nodes, "
       << cfg.spans.size() << " spans (need nodes = spans + 1)";
    fail(os.str());
  }
  if (cfg.nodes.size() != kNodeCount) {
    fail("nodes: expected exactly " + std::to_string(kNodeCount));
  }
  if (cfg.probes.size() != kProbeCount) {
    fail("probes: expected exactly " + std::to_string(kProbeCount));
  }
  if (cfg.windows.size() != kUserCount) {
    fail("windows: expected exactly " + std::to_string(kUserCount));
  }

  for (std::size_t i = 0; i < cfg.nodes.size(); ++i) {
    const auto& n = cfg.nodes[i];
    if (n.node_id != static_cast<int>(i)) {
      fail("nodes[" + std::to_string(i) + "].node_id: must ascend from 0");
    }
    if (!std::isfinite(n.booster_gain_db) || !std::isfinite(n.preamp_gain_db) ||
        n.booster_gain_db < 0.0 || n.preamp_gain_db < 0.0) {
      fail("nodes[" + std::to_string(i) + "]: gains must be finite and >= 0");
    }
    if (n.insertion_loss_db < 0.0 || !std::isfinite(n.insertion_loss_db)) {
      fail("nodes[" + std::to_string(i) + "].insertion_loss_db: invalid");
    }
  }
  for (std::size_t i = 0; i < cfg.spans.size(); ++i) {
    const auto& s = cfg.spans[i];
    if (s.span_id != static_cast<int>(i)) {
      fail("spans[" + std::to_string(i) + "].span_id: must ascend from 0");
    }
    if (!(s.length_km > 0.0)) {
      fail("spans[" + std::to_string(i) + "].length_km: must be positive");
    }
    if (!(s.attenuation_db_per_km > 0.0)) {
      fail("spans[" + std::to_string(i) +
           "].attenuation_db_per_km: must be positive");
    }
  }

  // Slot occupancy: each probe slot and each window range claimed once.
  std::map<int, std::string> claimed;
  auto claim = [&](int slot, const std::string& owner) {
    if (slot < 0 || slot >= cfg.grid.slot_count) {
      fail(owner + ": slot " + std::to_string(slot) + " outside grid");
      return;
    }
    auto [it, inserted] = claimed.emplace(slot, owner);
    if (!inserted) {
      fail("slot overlap: slot " + std::to_string(slot) + " claimed by " +
           it->second + " and " + owner);
    }
  };

  std::vector<bool> seen_user(kUserCount, false);
  for (std::size_t i = 0; i < cfg.windows.size(); ++i) {
    const auto& w = cfg.windows[i];
    const std::string name = "windows[" + std::to_string(i) + "]";
    const int u = static_cast<int>(w.user);
    if (u >= 0 && u < kUserCount) {
      if (seen_user[u]) fail(name + ": duplicate window for " + to_string(w.user));
      seen_user[u] = true;
    }
    if (w.width_slots <= 0) {
      fail(name + ".width_slots: must be positive");
    } else {
      const double width_ghz = w.width_slots * cfg.grid.slot_width_ghz;
      if (std::abs(width_ghz - 400.0) > 1e-9) {
        fail(name + ": width " + std::to_string(width_ghz) +
             " GHz, expected 400 GHz");
      }
      for (int s = w.first_slot; s <= w.last_slot(); ++s) claim(s, name);
    }
    if (!std::isfinite(w.per_channel_power_dbm)) {
      fail(name + ".per_channel_power_dbm: must be finite");
    }
    int prev = -1;
    for (int c : w.active_channels) {
      if (!w.contains(c)) {
        fail(name + ": active channel " + std::to_string(c) +
             " outside window slots");
      }
      if (c == prev) fail(name + ": duplicate active channel " + std::to_string(c));
      if (c < prev) fail(name + ": active channels must be sorted");
      prev = c;
    }
  }

  std::vector<bool> seen_probe(kProbeCount, false);
  for (std::size_t i = 0; i < cfg.probes.size(); ++i) {
    const auto& p = cfg.probes[i];
    const std::string name = "probes[" + std::to_string(i) + "]";
    if (p.probe_id >= 0 && p.probe_id < kProbeCount) {
      if (seen_probe[p.probe_id]) fail(name + ": duplicate probe_id");
      seen_probe[p.probe_id] = true;
    } else {
      fail(name + ".probe_id: must be in 0.." + std::to_string(kProbeCount - 1));
    }
    if (!std::isfinite(p.launch_power_dbm)) {
      fail(name + ".launch_power_dbm: must be finite");
    }
    claim(p.slot, name);
  }

  // Interleaving: scanning the grid must alternate probe, window, probe, ...
  if (cfg.probes.size() == kProbeCount && cfg.windows.size() == kUserCount) {
    std::vector<std::pair<int, bool>> order;  // (position, is_probe)
    for (const auto& p : cfg.probes) order.emplace_back(p.slot, true);
    for (const auto& w : cfg.windows) order.emplace_back(w.first_slot, false);
    std::sort(order.begin(), order.end());
    bool ok = true;
    for (std::size_t i = 0; i < order.size(); ++i) {
      if (order[i].second != (i % 2 == 0)) ok = false;
    }
    if (!ok) fail("layout: probes must interleave user windows (P U P U P U P)");
  }

  return v;
}

// --- JSON (schema_version 1) ---

inline void to_json(ordered_json& j, const SpectralGrid& g) {
  j = ordered_json{{"start_freq_thz", g.start_freq_thz},
                   {"slot_width_ghz", g.slot_width_ghz},
                   {"slot_count", g.slot_count}};
}

inline void from_json(const ordered_json& j, SpectralGrid& g) {
  j.at("start_freq_thz").get_to(g.start_freq_thz);
  j.at("slot_width_ghz").get_to(g.slot_width_ghz);
  j.at("slot_count").get_to(g.slot_count);
}

inline void to_json(ordered_json& j, const OsaasWindow& w) {
  j = ordered_json{{"user", to_string(w.user)},
                   {"first_slot", w.first_slot},
                   {"width_slots", w.width_slots},
                   {"active_channels", w.active_channels},
                   {"per_channel_power_dbm", w.per_channel_power_dbm}};
}

inline void from_json(const ordered_json& j, OsaasWindow& w) {
  w.user = user_from_string(j.at("user").get<std::string>());
  j.at("first_slot").get_to(w.first_slot);
  j.at("width_slots").get_to(w.width_slots);
  j.at("active_channels").get_to(w.active_channels);
  j.at("per_channel_power_dbm").get_to(w.per_channel_power_dbm);
}

inline void to_json(ordered_json& j, const OperatorProbe& p) {
  j = ordered_json{{"probe_id", p.probe_id},
                   {"slot", p.slot},
                   {"launch_power_dbm", p.launch_power_dbm},
                   {"modulation", "64qam-300g"},
                   {"osnr_setting", to_string(p.osnr_setting)}};
}

inline void from_json(const ordered_json& j, OperatorProbe& p) {
  j.at("probe_id").get_to(p.probe_id);
  j.at("slot").get_to(p.slot);
  j.at("launch_power_dbm").get_to(p.launch_power_dbm);
  const auto mod = j.at("modulation").get<std::string>();
  if (mod != "64qam-300g") {
    throw std::invalid_argument("unknown modulation: " + mod);
  }
  p.modulation = Modulation::Qam64_300G;
  p.osnr_setting = osnr_level_from_string(j.at("osnr_setting").get<std::string>());
}

inline void to_json(ordered_json& j, const RoadmNode& n) {
  j = ordered_json{{"node_id", n.node_id},
                   {"booster_gain_db", n.booster_gain_db},
                   {"preamp_gain_db", n.preamp_gain_db},
                   {"insertion_loss_db", n.insertion_loss_db},
                   {"ocm_resolution_ghz", n.ocm_resolution_ghz}};
}

inline void from_json(const ordered_json& j, RoadmNode& n) {
  j.at("node_id").get_to(n.node_id);
  j.at("booster_gain_db").get_to(n.booster_gain_db);
  j.at("preamp_gain_db").get_to(n.preamp_gain_db);
  j.at("insertion_loss_db").get_to(n.insertion_loss_db);
  j.at("ocm_resolution_ghz").get_to(n.ocm_resolution_ghz);
}

inline void to_json(ordered_json& j, const FiberSpan& s) {
  j = ordered_json{{"span_id", s.span_id},
                   {"length_km", s.length_km},
                   {"attenuation_db_per_km", s.attenuation_db_per_km}};
}

inline void from_json(const ordered_json& j, FiberSpan& s) {
  j.at("span_id").get_to(s.span_id);
  j.at("length_km").get_to(s.length_km);
  j.at("attenuation_db_per_km").get_to(s.attenuation_db_per_km);
}

inline void to_json(ordered_json& j, const NetworkConfig& cfg) {
  j = ordered_json{{"schema_version", kSchemaVersion},
                   {"grid", cfg.grid},
                   {"nodes", cfg.nodes},
                   {"spans", cfg.spans},
                   {"windows", cfg.windows},
                   {"probes", cfg.probes}};
}

inline void from_json(const ordered_json& j, NetworkConfig& cfg) {
  const int version = j.at("schema_version").get<int>();
  if (version != kSchemaVersion) {
    throw std::invalid_argument("unsupported config schema_version " +
                                std::to_string(version));
  }
  j.at("grid").get_to(cfg.grid);
  j.at("nodes").get_to(cfg.nodes);
  j.at("spans").get_to(cfg.spans);
  j.at("windows").get_to(cfg.windows);
  j.at("probes").get_to(cfg.probes);
}

inline NetworkConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  ordered_json j;
  in >> j;
  return j.get<NetworkConfig>();
}

inline void save_config(const NetworkConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write config file: " + path);
  out << ordered_json(cfg).dump(2) << '\n';
}

}  // namespace guardband
