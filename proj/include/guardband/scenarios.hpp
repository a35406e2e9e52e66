#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "guardband/channel_physics.hpp"
#include "guardband/seeding.hpp"
#include "guardband/telemetry.hpp"
#include "guardband/topology.hpp"

// Labeled experiment generation: baseline sweeps, window-wide power ramps
// (0.5 dB steps up to 6 dB), and constant-total-power ADD/DROP states where
// d of the 8 window channels are dropped and the survivors are boosted by
// 10*log10(8/(8-d)) dB. A state is labeled with the interfering user only
// when the injected perturbation actually pushes some probe Q below the
// threshold; perturbed-but-clean states are labeled no-impairment and count
// toward the clean quota of the corpus.

namespace guardband {

inline constexpr int kRampStepCount = 12;   // 0.5 .. 6.0 dB
inline constexpr double kRampStepDb = 0.5;
inline constexpr int kMaxChannelsDropped = kWindowSlots - 1;

struct ScenarioSpec {
  ImpairmentKind kind = ImpairmentKind::None;
  std::optional<UserId> user;
  double ramp_offset_db = 0.0;  // PowerRamp only
  int channels_dropped = 0;     // AddDrop only
  OsnrLevel osnr_level = OsnrLevel::Mid;
  std::uint64_t seed = 0;
};

inline std::vector<std::string> validate(const ScenarioSpec& spec) {
  std::vector<std::string> violations;
  switch (spec.kind) {
    case ImpairmentKind::None:
      if (spec.user) violations.push_back("kind=none forbids a user");
      break;
    case ImpairmentKind::PowerRamp: {
      if (!spec.user) violations.push_back("power_ramp requires a user");
      const double steps = spec.ramp_offset_db / kRampStepDb;
      const bool on_grid = steps == std::floor(steps) && steps >= 1 &&
                           steps <= kRampStepCount;
      if (!on_grid) {
        violations.push_back("ramp_offset_db must be one of 0.5, 1.0, .. 6.0");
      }
      break;
    }
    case ImpairmentKind::AddDrop:
      if (!spec.user) violations.push_back("add_drop requires a user");
      if (spec.channels_dropped < 1 ||
          spec.channels_dropped > kMaxChannelsDropped) {
        violations.push_back("channels_dropped must be in 1..7");
      }
      break;
  }
  return violations;
}

/// Surviving channel offsets (0-based within the window) when keeping
/// `survivors` of the kWindowSlots channels: evenly spread across the
/// window, endpoints included whenever survivors >= 2.
inline std::vector<int> survivor_offsets(int survivors) {
  if (survivors < 1 || survivors > kWindowSlots) {
    throw std::domain_error("survivor_offsets: survivors must be in 1..8");
  }
  std::vector<int> offsets;
  if (survivors == 1) {
    offsets.push_back(0);
    return offsets;
  }
  for (int i = 0; i < survivors; ++i) {
    const double pos = static_cast<double>(i) * (kWindowSlots - 1) /
                       static_cast<double>(survivors - 1);
    offsets.push_back(static_cast<int>(std::lround(pos)));
  }
  return offsets;
}

/// Per-survivor power boost (dB) that holds the window total constant.
inline double add_drop_boost_db(int channels_dropped) {
  if (channels_dropped < 0 || channels_dropped > kMaxChannelsDropped) {
    throw std::domain_error("add_drop_boost_db: dropped must be in 0..7");
  }
  return linear_to_db(static_cast<double>(kWindowSlots) /
                      (kWindowSlots - channels_dropped));
}

/// Copy of the config with every probe conditioned at the given OSNR level.
inline NetworkConfig with_probe_osnr(NetworkConfig cfg, OsnrLevel level) {
  for (auto& p : cfg.probes) p.osnr_setting = level;
  return cfg;
}

/// Input loading for a scenario. The config must outlive the result.
inline LinkState scenario_link_state(const NetworkConfig& cfg,
                                     const ScenarioSpec& spec) {
  if (const auto violations = validate(spec); !violations.empty()) {
    throw std::invalid_argument("scenario_link_state: " + violations.front());
  }
  LinkState state = nominal_link_state(cfg, spec.seed);
  if (spec.kind == ImpairmentKind::None) return state;

  const OsaasWindow* window = nullptr;
  for (const auto& w : cfg.windows) {
    if (w.user == *spec.user) window = &w;
  }
  if (window == nullptr) {
    throw std::invalid_argument("scenario_link_state: user has no window");
  }

  if (spec.kind == ImpairmentKind::PowerRamp) {
    for (int c : window->active_channels) {
      state.slot_power_dbm[c] =
          window->per_channel_power_dbm + spec.ramp_offset_db;
    }
    return state;
  }

  // AddDrop: clear the window, then place the boosted survivors.
  for (int s = window->first_slot; s <= window->last_slot(); ++s) {
    state.slot_power_dbm[s] = std::nullopt;
  }
  const double boost = add_drop_boost_db(spec.channels_dropped);
  for (int off : survivor_offsets(kWindowSlots - spec.channels_dropped)) {
    state.slot_power_dbm[window->first_slot + off] =
        window->per_channel_power_dbm + boost;
  }
  return state;
}

/// Propagate one scenario and label the result by the probe-Q rule.
inline LabeledSnapshot run_scenario(const NetworkConfig& base_config,
                                    const ScenarioSpec& spec,
                                    int timestamp_index) {
  const NetworkConfig cfg = with_probe_osnr(base_config, spec.osnr_level);
  const LinkState state = scenario_link_state(cfg, spec);
  PropagationResult prop = propagate(state);

  LabeledSnapshot snap;
  snap.features.timestamp_index = timestamp_index;
  snap.features.probe_readings = std::move(prop.probes);
  snap.features.ocm_readings = std::move(prop.ocm);
  snap.impairment_kind = spec.kind;
  snap.scenario_user = spec.user;
  if (spec.kind == ImpairmentKind::PowerRamp) {
    snap.ramp_offset_db = spec.ramp_offset_db;
  }
  if (spec.kind == ImpairmentKind::AddDrop) {
    snap.channels_dropped = spec.channels_dropped;
  }
  snap.osnr_level = spec.osnr_level;
  snap.scenario_seed = spec.seed;
  snap.label = (spec.user && is_impaired(snap.features.probe_readings))
                   ? label_for_user(*spec.user)
                   : Label::NoImpairment;
  return snap;
}

/// The full 0.5..6.0 dB sweep for one user at one OSNR level: 12 states,
/// per-state seeds derived from `seed` by index.
inline std::vector<LabeledSnapshot> power_ramp_states(
    const NetworkConfig& cfg, UserId user, OsnrLevel level,
    std::uint64_t seed) {
  std::vector<LabeledSnapshot> states;
  for (int i = 0; i < kRampStepCount; ++i) {
    ScenarioSpec spec;
    spec.kind = ImpairmentKind::PowerRamp;
    spec.user = user;
    spec.ramp_offset_db = kRampStepDb * (i + 1);
    spec.osnr_level = level;
    spec.seed = derive_seed(seed, static_cast<std::uint64_t>(i));
    states.push_back(run_scenario(cfg, spec, i));
  }
  return states;
}

/// All drop counts d in 1..7 for one user at one OSNR level.
inline std::vector<LabeledSnapshot> add_drop_states(const NetworkConfig& cfg,
                                                    UserId user,
                                                    OsnrLevel level,
                                                    std::uint64_t seed) {
  std::vector<LabeledSnapshot> states;
  for (int d = 1; d <= kMaxChannelsDropped; ++d) {
    ScenarioSpec spec;
    spec.kind = ImpairmentKind::AddDrop;
    spec.user = user;
    spec.channels_dropped = d;
    spec.osnr_level = level;
    spec.seed = derive_seed(seed, static_cast<std::uint64_t>(d - 1));
    states.push_back(run_scenario(cfg, spec, d - 1));
  }
  return states;
}

struct CorpusComposition {
  int impaired_per_pair = 184;  // per (user, impairment kind) pair
  int total = 2920;
};

inline CorpusComposition default_composition() { return {}; }

/// Reduced profile for fast end-to-end runs.
inline CorpusComposition smoke_composition() {
  CorpusComposition comp;
  comp.impaired_per_pair = 25;
  comp.total = 300;
  return comp;
}

/// Deterministic labeled corpus: for each (user, kind) pair, keep injecting
/// scenarios (cycling magnitude/drop-count and OSNR level) until
/// `impaired_per_pair` of them trip the Q rule; untripped byproducts stay
/// in the corpus as no-impairment samples. Baseline (no-injection) states
/// then top the corpus up to `total`. Every scenario gets its own sub-seed
/// split off master_seed, so the corpus is a pure function of the seed.
inline std::vector<LabeledSnapshot> build_corpus(
    const NetworkConfig& cfg, const CorpusComposition& comp,
    std::uint64_t master_seed) {
  if (comp.impaired_per_pair <= 0 || comp.total <= 0) {
    throw std::domain_error("build_corpus: composition counts must be > 0");
  }
  const int pair_count = kUserCount * 2;
  if (comp.total < comp.impaired_per_pair * pair_count) {
    throw std::domain_error(
        "build_corpus: total smaller than the impaired quota");
  }

  constexpr OsnrLevel kLevels[] = {OsnrLevel::Low, OsnrLevel::Mid,
                                   OsnrLevel::High};
  std::vector<LabeledSnapshot> corpus;
  std::uint64_t stream = 0;
  int timestamp = 0;
  int clean_count = 0;

  for (int u = 0; u < kUserCount; ++u) {
    for (ImpairmentKind kind :
         {ImpairmentKind::PowerRamp, ImpairmentKind::AddDrop}) {
      int impaired = 0;
      const int attempt_cap = comp.impaired_per_pair * 50;
      for (int i = 0; impaired < comp.impaired_per_pair; ++i) {
        if (i >= attempt_cap) {
          throw std::runtime_error(
              "build_corpus: impaired quota unreachable; physics "
              "calibration and composition disagree");
        }
        ScenarioSpec spec;
        spec.kind = kind;
        spec.user = static_cast<UserId>(u);
        if (kind == ImpairmentKind::PowerRamp) {
          spec.ramp_offset_db = kRampStepDb * (1 + i % kRampStepCount);
          spec.osnr_level = kLevels[(i / kRampStepCount) % 3];
        } else {
          spec.channels_dropped = 1 + i % kMaxChannelsDropped;
          spec.osnr_level = kLevels[(i / kMaxChannelsDropped) % 3];
        }
        spec.seed = derive_seed(master_seed, stream++);
        LabeledSnapshot snap = run_scenario(cfg, spec, timestamp++);
        if (snap.label == Label::NoImpairment) {
          ++clean_count;
        } else {
          ++impaired;
        }
        corpus.push_back(std::move(snap));
      }
    }
  }

  const int clean_quota =
      comp.total - comp.impaired_per_pair * pair_count;
  if (clean_count > clean_quota) {
    throw std::domain_error(
        "build_corpus: perturbed-but-clean byproducts (" +
        std::to_string(clean_count) + ") exceed the clean quota (" +
        std::to_string(clean_quota) + ")");
  }
  for (int i = 0; clean_count < clean_quota; ++i, ++clean_count) {
    ScenarioSpec spec;
    spec.kind = ImpairmentKind::None;
    spec.osnr_level = kLevels[i % 3];
    spec.seed = derive_seed(master_seed, stream++);
    corpus.push_back(run_scenario(cfg, spec, timestamp++));
  }
  return corpus;
}

}  // namespace guardband
