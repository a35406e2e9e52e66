#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "guardband/seeding.hpp"
#include "guardband/topology.hpp"
#include "guardband/units.hpp"

// Analytic stand-in for the line system: maps a loading state (per-slot
// launch powers) to operator-visible telemetry. The model is deterministic
// given (state, seed): amplifier AGC tilt couples window power changes into
// probe power, a quadratic kernel turns power concentration into an
// electrical-SNR penalty, and transceiver readings add seeded gaussian
// jitter. Constants below are calibrated once so that nominal loading is
// clean at all three probe OSNR settings while full-scale ramps and
// single-channel concentrations push adjacent probes below the Q threshold.

namespace guardband {
namespace physics {

// AGC crosstalk: probe power debit per dB of window-total change, scaled by
// exp(-|probe - window center| / kTiltDecaySlots).
inline constexpr double kAgcCouplingDbPerDb = 0.9;
inline constexpr double kTiltDecaySlots = 8.0;

// Nonlinear interference: sum of eta(d) * p^2 over aggressor channels with
// eta(d) = 1/d^2 (slot distance d >= 1) and p in mW, scaled by kNliScale.
// A channel is an aggressor when it exceeds its equalized launch power;
// nominal loading therefore contributes exactly zero.
inline constexpr double kNliScalePerMw2 = 0.03;
inline constexpr double kAggressorEpsDb = 1e-9;

// One amplified stage per span: stage OSNR = kStageOsnrBaseDb - span loss.
inline constexpr double kStageOsnrBaseDb = 38.0;

// Added-ASE OSNR of the probe conditioning stage per setting.
inline constexpr double kLevelOsnrDb[3] = {18.0, 22.0, 26.0};

// Receiver chain: electrical SNR = OSNR - gap - NLI, Q = SNR - offset.
inline constexpr double kSnrGapDb = 2.0;
inline constexpr double kQOffsetDb = 6.0;

// An observation is impaired when any probe Q reading is strictly below
// this threshold (64-QAM 300G operating point of the synthetic model).
inline constexpr double kQThresholdDb = 7.8;

// Static nominals for the transceiver features that carry no impairment
// signal, and the measurement jitter sigmas.
inline constexpr double kCfoNominalMhz = 0.0;
inline constexpr double kCdcNominalPsNm = 2505.0;  // ~16.7 ps/nm/km * 150 km
inline constexpr double kDgdNominalPs = 1.5;
inline constexpr double kPdlNominalDb = 0.8;

inline constexpr double kSigmaCfoMhz = 30.0;
inline constexpr double kSigmaCdcPsNm = 2.0;
inline constexpr double kSigmaDgdPs = 0.3;
inline constexpr double kSigmaRxDb = 0.1;
inline constexpr double kSigmaOsnrDb = 0.2;
inline constexpr double kSigmaQDb = 0.15;
inline constexpr double kSigmaPdlDb = 0.1;
inline constexpr double kSigmaEsnrDb = 0.2;

}  // namespace physics

/// Loading at the OLS input. Unoccupied slots are nullopt, never a number.
struct LinkState {
  const NetworkConfig* config = nullptr;
  std::vector<std::optional<double>> slot_power_dbm;
  std::uint64_t rng_seed = 0;
};

struct ProbeReading {
  double cfo_mhz = 0.0;
  double cdc_ps_nm = 0.0;
  double dgd_ps = 0.0;
  double rx_power_dbm = 0.0;
  double osnr_db = 0.0;
  double q_factor_db = 0.0;
  double pdl_db = 0.0;
  double electrical_snr_db = 0.0;
};

struct OcmReading {
  int node_id = 0;
  std::vector<double> per_probe_power_dbm;     // by probe_id
  std::vector<double> window_total_power_dbm;  // by user index
  double node_total_output_dbm = 0.0;
};

struct PropagationResult {
  std::vector<OcmReading> ocm;       // by node_id, ascending
  std::vector<ProbeReading> probes;  // by probe slot, ascending
};

/// All probes and all active window channels at configured launch power.
inline LinkState nominal_link_state(const NetworkConfig& cfg,
                                    std::uint64_t seed) {
  LinkState state;
  state.config = &cfg;
  state.slot_power_dbm.assign(cfg.grid.slot_count, std::nullopt);
  state.rng_seed = seed;
  for (const auto& p : cfg.probes) {
    state.slot_power_dbm[p.slot] = p.launch_power_dbm;
  }
  for (const auto& w : cfg.windows) {
    for (int c : w.active_channels) {
      state.slot_power_dbm[c] = w.per_channel_power_dbm;
    }
  }
  return state;
}

/// Total power across a window's slots at the OLS input, dBm.
inline double window_total_dbm(const LinkState& state, const OsaasWindow& w) {
  double sum_mw = 0.0;
  for (int s = w.first_slot; s <= w.last_slot(); ++s) {
    if (state.slot_power_dbm[s]) sum_mw += dbm_to_mw(*state.slot_power_dbm[s]);
  }
  return mw_to_dbm(sum_mw);
}

/// Gain-tilt weight between a probe slot and a window.
inline double agc_tilt(int probe_slot, const OsaasWindow& w) {
  const double dist = std::abs(probe_slot - w.center_slot());
  return std::exp(-dist / physics::kTiltDecaySlots);
}

/// AGC crosstalk: probe power debit (dB) from per-window total-power
/// changes. Linear in the deltas and zero when all deltas are zero.
inline double edfa_agc_coupling(int probe_slot,
                                std::span<const double> window_delta_db,
                                const NetworkConfig& cfg) {
  if (window_delta_db.size() != cfg.windows.size()) {
    throw std::invalid_argument("edfa_agc_coupling: delta per window required");
  }
  double penalty = 0.0;
  for (std::size_t i = 0; i < cfg.windows.size(); ++i) {
    penalty += physics::kAgcCouplingDbPerDb * window_delta_db[i] *
               agc_tilt(probe_slot, cfg.windows[i]);
  }
  return penalty;
}

/// Equalized launch power a slot is supposed to carry, or nullopt when the
/// slot is not allocated to anything.
inline std::optional<double> nominal_slot_power_dbm(const NetworkConfig& cfg,
                                                    int slot) {
  for (const auto& p : cfg.probes) {
    if (p.slot == slot) return p.launch_power_dbm;
  }
  for (const auto& w : cfg.windows) {
    if (w.contains(slot)) return w.per_channel_power_dbm;
  }
  return std::nullopt;
}

/// Electrical-SNR penalty (dB) at a probe from nonlinear interference:
/// 10*log10(1 + kNliScale * sum eta(d_j) p_j^2) over channels running above
/// their equalized power. Strictly increasing in any aggressor power and
/// decaying with slot distance; exactly 0 under nominal loading.
inline double nli_penalty(int probe_slot, const LinkState& state) {
  const NetworkConfig& cfg = *state.config;
  double sum = 0.0;
  for (const auto& w : cfg.windows) {
    for (int s = w.first_slot; s <= w.last_slot(); ++s) {
      if (!state.slot_power_dbm[s]) continue;
      const double power_dbm = *state.slot_power_dbm[s];
      if (power_dbm <= w.per_channel_power_dbm + physics::kAggressorEpsDb) {
        continue;  // at or below equalized launch: not an aggressor
      }
      const int dist = std::abs(s - probe_slot);
      if (dist < 1) continue;  // disjointness makes this unreachable
      const double p_mw = dbm_to_mw(power_dbm);
      sum += (p_mw * p_mw) / (static_cast<double>(dist) * dist);
    }
  }
  return linear_to_db(1.0 + physics::kNliScalePerMw2 * sum);
}

inline double q_threshold_db() { return physics::kQThresholdDb; }

inline bool is_impaired(const std::vector<ProbeReading>& probes) {
  for (const auto& r : probes) {
    if (r.q_factor_db < physics::kQThresholdDb) return true;
  }
  return false;
}

/// Run the line system once. Node OCM readings track per-slot power through
/// the span losses, amplifier gains and AGC tilt; probe readings combine
/// stage OSNRs, the probe's conditioning OSNR, the NLI penalty and seeded
/// measurement jitter. Pure in (state, seed): identical inputs reproduce
/// identical readings. Throws std::invalid_argument when the config fails
/// validation.
inline PropagationResult propagate(const LinkState& state) {
  if (state.config == nullptr) {
    throw std::invalid_argument("propagate: link state has no config");
  }
  const NetworkConfig& cfg = *state.config;
  if (const auto violations = validate(cfg); !violations.empty()) {
    std::ostringstream os;
    os << "propagate: invalid config:";
    for (const auto& msg : violations) os << "\n  - " << msg;
    throw std::invalid_argument(os.str());
  }
  if (static_cast<int>(state.slot_power_dbm.size()) != cfg.grid.slot_count) {
    throw std::invalid_argument("propagate: slot power vector size mismatch");
  }
  for (const auto& maybe_power : state.slot_power_dbm) {
    if (maybe_power && !std::isfinite(*maybe_power)) {
      throw std::invalid_argument("propagate: occupied slot with non-finite power");
    }
  }

  // Window-total deltas against the equalized baseline drive the AGC tilt.
  const LinkState nominal = nominal_link_state(cfg, 0);
  std::vector<double> window_delta_db(cfg.windows.size(), 0.0);
  for (std::size_t i = 0; i < cfg.windows.size(); ++i) {
    const double now = window_total_dbm(state, cfg.windows[i]);
    const double ref = window_total_dbm(nominal, cfg.windows[i]);
    window_delta_db[i] = now - ref;
  }

  std::vector<const OperatorProbe*> probes_by_slot;
  for (const auto& p : cfg.probes) probes_by_slot.push_back(&p);
  std::sort(probes_by_slot.begin(), probes_by_slot.end(),
            [](const auto* a, const auto* b) { return a->slot < b->slot; });

  std::vector<double> agc_total_db;
  for (const auto* p : probes_by_slot) {
    agc_total_db.push_back(edfa_agc_coupling(p->slot, window_delta_db, cfg));
  }

  // Cumulative net gain per node: node 0 is the equalized mux output, each
  // later node adds booster + preamp - insertion loss - preceding span loss.
  const std::size_t node_count = cfg.nodes.size();
  const std::size_t amp_hops = cfg.spans.size();
  std::vector<double> net_gain_db(node_count, 0.0);
  for (std::size_t n = 1; n < node_count; ++n) {
    const auto& node = cfg.nodes[n];
    net_gain_db[n] = net_gain_db[n - 1] + node.booster_gain_db +
                     node.preamp_gain_db - node.insertion_loss_db -
                     cfg.spans[n - 1].loss_db();
  }

  PropagationResult result;
  for (std::size_t n = 0; n < node_count; ++n) {
    OcmReading ocm;
    ocm.node_id = cfg.nodes[n].node_id;
    const double agc_fraction =
        amp_hops == 0 ? 0.0
                      : static_cast<double>(n) / static_cast<double>(amp_hops);
    double total_mw = 0.0;

    ocm.per_probe_power_dbm.assign(cfg.probes.size(), 0.0);
    for (std::size_t pi = 0; pi < probes_by_slot.size(); ++pi) {
      const auto* p = probes_by_slot[pi];
      const double power = *state.slot_power_dbm[p->slot] + net_gain_db[n] -
                           agc_fraction * agc_total_db[pi];
      ocm.per_probe_power_dbm[p->probe_id] = power;
      total_mw += dbm_to_mw(power);
    }
    ocm.window_total_power_dbm.assign(cfg.windows.size(), 0.0);
    for (std::size_t wi = 0; wi < cfg.windows.size(); ++wi) {
      const auto& w = cfg.windows[wi];
      double win_mw = 0.0;
      for (int s = w.first_slot; s <= w.last_slot(); ++s) {
        if (!state.slot_power_dbm[s]) continue;
        win_mw += dbm_to_mw(*state.slot_power_dbm[s] + net_gain_db[n]);
      }
      ocm.window_total_power_dbm[static_cast<int>(w.user)] = mw_to_dbm(win_mw);
      total_mw += win_mw;
    }
    ocm.node_total_output_dbm = mw_to_dbm(total_mw);
    result.ocm.push_back(std::move(ocm));
  }

  // Probe readings, drawn in slot order with a fixed per-probe feature
  // order so a seed pins the whole result.
  Rng rng(state.rng_seed);
  for (std::size_t pi = 0; pi < probes_by_slot.size(); ++pi) {
    const auto* p = probes_by_slot[pi];
    std::vector<double> stages;
    stages.push_back(physics::kLevelOsnrDb[static_cast<int>(p->osnr_setting)]);
    for (const auto& span : cfg.spans) {
      stages.push_back(physics::kStageOsnrBaseDb - span.loss_db());
    }
    const double osnr_true = accumulate_osnr(stages) - agc_total_db[pi];
    const double nli_db = nli_penalty(p->slot, state);
    const double esnr_true = osnr_true - physics::kSnrGapDb - nli_db;
    const double q_true = esnr_true - physics::kQOffsetDb;
    const double rx_true =
        result.ocm.back().per_probe_power_dbm[p->probe_id];

    ProbeReading r;
    r.cfo_mhz = rng.gaussian(physics::kCfoNominalMhz, physics::kSigmaCfoMhz);
    r.cdc_ps_nm = rng.gaussian(physics::kCdcNominalPsNm, physics::kSigmaCdcPsNm);
    r.dgd_ps = rng.gaussian(physics::kDgdNominalPs, physics::kSigmaDgdPs);
    r.rx_power_dbm = rng.gaussian(rx_true, physics::kSigmaRxDb);
    r.osnr_db = rng.gaussian(osnr_true, physics::kSigmaOsnrDb);
    r.q_factor_db = rng.gaussian(q_true, physics::kSigmaQDb);
    r.pdl_db = rng.gaussian(physics::kPdlNominalDb, physics::kSigmaPdlDb);
    r.electrical_snr_db = rng.gaussian(esnr_true, physics::kSigmaEsnrDb);
    for (double value : {r.cfo_mhz, r.cdc_ps_nm, r.dgd_ps, r.rx_power_dbm,
                         r.osnr_db, r.q_factor_db, r.pdl_db,
                         r.electrical_snr_db}) {
      if (!std::isfinite(value)) {
        throw std::runtime_error("propagate: non-finite probe reading");
      }
    }
    result.probes.push_back(r);
  }
  return result;
}

}  // namespace guardband
