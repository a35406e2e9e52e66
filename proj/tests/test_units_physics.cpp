#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <vector>

#include "guardband/channel_physics.hpp"
#include "guardband/topology.hpp"
#include "guardband/units.hpp"

using namespace guardband;
using Catch::Approx;

TEST_CASE("dB/linear conversions") {
  REQUIRE(db_to_linear(0.0) == Approx(1.0));
  REQUIRE(db_to_linear(10.0) == Approx(10.0));
  REQUIRE(db_to_linear(3.0103) == Approx(2.0).margin(1e-4));
  for (double x = -30.0; x <= 30.0; x += 1.0) {
    REQUIRE(linear_to_db(db_to_linear(x)) == Approx(x).margin(1e-12));
  }
  REQUIRE_THROWS_AS(linear_to_db(0.0), std::domain_error);
  REQUIRE_THROWS_AS(linear_to_db(-1.0), std::domain_error);
}

TEST_CASE("OSNR accumulation") {
  const double single[] = {20.0};
  REQUIRE(accumulate_osnr(single) == Approx(20.0).margin(1e-12));

  const double pair[] = {20.0, 20.0};
  REQUIRE(accumulate_osnr(pair) == Approx(16.9897).margin(1e-3));

  SECTION("never exceeds the weakest stage") {
    const double stages[] = {18.0, 33.0, 33.0, 28.0};
    REQUIRE(accumulate_osnr(stages) < 18.0);
  }
  SECTION("permutation invariant") {
    const double a[] = {15.0, 22.0, 30.0};
    const double b[] = {30.0, 15.0, 22.0};
    REQUIRE(accumulate_osnr(a) == Approx(accumulate_osnr(b)).margin(1e-12));
  }
  SECTION("adding a stage always degrades") {
    const double shorter[] = {20.0, 25.0};
    const double longer[] = {20.0, 25.0, 40.0};
    REQUIRE(accumulate_osnr(longer) < accumulate_osnr(shorter));
  }
  SECTION("rejects empty and non-finite input") {
    REQUIRE_THROWS_AS(accumulate_osnr({}), std::domain_error);
    const double bad[] = {20.0, std::numeric_limits<double>::infinity()};
    REQUIRE_THROWS_AS(accumulate_osnr(bad), std::domain_error);
  }
}

TEST_CASE("AGC tilt weight decays with spectral distance") {
  const NetworkConfig cfg = default_config();
  const OsaasWindow& w1 = cfg.windows[0];  // center 4.5

  const double near = agc_tilt(0, w1);
  const double far = agc_tilt(27, w1);
  REQUIRE(near == Approx(std::exp(-4.5 / physics::kTiltDecaySlots)));
  REQUIRE(far == Approx(std::exp(-22.5 / physics::kTiltDecaySlots)));
  REQUIRE(near > far);
  REQUIRE(near > 0.0);
  REQUIRE(near <= 1.0);
}

TEST_CASE("amplifier coupling is linear and zero at rest") {
  const NetworkConfig cfg = default_config();

  const std::vector<double> zero(3, 0.0);
  for (const auto& p : cfg.probes) {
    REQUIRE(edfa_agc_coupling(p.slot, zero, cfg) == 0.0);
  }

  // +6 dB on user1: the flanking probes react harder than the far one.
  const std::vector<double> d1 = {6.0, 0.0, 0.0};
  const double p1 = edfa_agc_coupling(0, d1, cfg);
  const double p2 = edfa_agc_coupling(9, d1, cfg);
  const double p4 = edfa_agc_coupling(27, d1, cfg);
  REQUIRE(std::abs(p1) > std::abs(p4));
  REQUIRE(std::abs(p2) > std::abs(p4));

  // Linearity in the deltas.
  const std::vector<double> d2 = {12.0, 0.0, 0.0};
  REQUIRE(edfa_agc_coupling(0, d2, cfg) == Approx(2.0 * p1).margin(1e-12));
  const std::vector<double> d3 = {6.0, -2.0, 1.0};
  const std::vector<double> only2 = {0.0, -2.0, 0.0};
  const std::vector<double> only3 = {0.0, 0.0, 1.0};
  REQUIRE(edfa_agc_coupling(18, d3, cfg) ==
          Approx(edfa_agc_coupling(18, d1, cfg) +
                 edfa_agc_coupling(18, only2, cfg) +
                 edfa_agc_coupling(18, only3, cfg))
              .margin(1e-12));

  REQUIRE_THROWS_AS(edfa_agc_coupling(0, std::vector<double>(2, 0.0), cfg),
                    std::invalid_argument);
}

TEST_CASE("NLI penalty properties") {
  const NetworkConfig cfg = default_config();

  SECTION("nominal loading contributes nothing") {
    const LinkState state = nominal_link_state(cfg, 1);
    for (const auto& p : cfg.probes) {
      REQUIRE(nli_penalty(p.slot, state) == 0.0);
    }
  }

  SECTION("strictly increasing in aggressor power") {
    LinkState state = nominal_link_state(cfg, 1);
    state.slot_power_dbm[4] = 5.0;  // +1 dB inside user1

    const double weak = nli_penalty(0, state);
    REQUIRE(weak > 0.0);
    state.slot_power_dbm[4] = 6.0;
    REQUIRE(nli_penalty(0, state) > weak);
  }

  SECTION("decays as the aggressor moves away") {
    LinkState near = nominal_link_state(cfg, 1);
    near.slot_power_dbm[2] = 7.0;
    LinkState far = nominal_link_state(cfg, 1);
    far.slot_power_dbm[6] = 7.0;
    REQUIRE(nli_penalty(0, near) > nli_penalty(0, far));
  }

  SECTION("constant-total concentration raises the penalty") {
    // All 8 channels +3 dB vs 4 channels +6 dB holds total linear power
    // fixed while concentrating it; the quadratic kernel must grow.
    LinkState spread = nominal_link_state(cfg, 1);
    for (int s = 1; s <= 8; ++s) spread.slot_power_dbm[s] = 4.0 + 3.0103;
    LinkState packed = nominal_link_state(cfg, 1);
    for (int s = 1; s <= 8; ++s) packed.slot_power_dbm[s] = std::nullopt;
    for (int s : {1, 3, 5, 7}) packed.slot_power_dbm[s] = 4.0 + 6.0206;
    REQUIRE(nli_penalty(0, packed) > nli_penalty(0, spread));
  }
}

TEST_CASE("propagation is a pure function of state and seed") {
  const NetworkConfig cfg = default_config();
  const LinkState state = nominal_link_state(cfg, 77);

  const PropagationResult a = propagate(state);
  const PropagationResult b = propagate(state);
  REQUIRE(a.probes.size() == 4);
  REQUIRE(a.ocm.size() == 6);
  for (std::size_t i = 0; i < a.probes.size(); ++i) {
    REQUIRE(a.probes[i].cfo_mhz == b.probes[i].cfo_mhz);
    REQUIRE(a.probes[i].q_factor_db == b.probes[i].q_factor_db);
    REQUIRE(a.probes[i].osnr_db == b.probes[i].osnr_db);
    REQUIRE(a.probes[i].electrical_snr_db == b.probes[i].electrical_snr_db);
  }
  for (std::size_t n = 0; n < a.ocm.size(); ++n) {
    REQUIRE(a.ocm[n].node_total_output_dbm == b.ocm[n].node_total_output_dbm);
  }

  LinkState other = state;
  other.rng_seed = 78;
  const PropagationResult c = propagate(other);
  REQUIRE(c.probes[0].cfo_mhz != a.probes[0].cfo_mhz);
}

TEST_CASE("node totals are the linear sum of their parts") {
  const NetworkConfig cfg = default_config();
  LinkState state = nominal_link_state(cfg, 3);
  state.slot_power_dbm[12] = 6.5;  // break the symmetry a little

  const PropagationResult res = propagate(state);
  for (const auto& ocm : res.ocm) {
    double sum_mw = 0.0;
    for (double p : ocm.per_probe_power_dbm) sum_mw += dbm_to_mw(p);
    for (double w : ocm.window_total_power_dbm) sum_mw += dbm_to_mw(w);
    const double total = mw_to_dbm(sum_mw);
    REQUIRE(ocm.node_total_output_dbm ==
            Approx(total).epsilon(1e-9).margin(1e-9));
  }
}

TEST_CASE("input power shifts show up directly at the first node") {
  const NetworkConfig cfg = default_config();
  const LinkState base = nominal_link_state(cfg, 5);
  LinkState ramped = base;
  for (int c : cfg.windows[1].active_channels) {
    ramped.slot_power_dbm[c] = cfg.windows[1].per_channel_power_dbm + 6.0;
  }

  const PropagationResult res_base = propagate(base);
  const PropagationResult res_ramp = propagate(ramped);
  const double delta = res_ramp.ocm[0].window_total_power_dbm[1] -
                       res_base.ocm[0].window_total_power_dbm[1];
  REQUIRE(delta == Approx(6.0).margin(1e-9));
}

TEST_CASE("baseline probes stay above the impairment threshold") {
  const NetworkConfig cfg = default_config();  // Mid conditioning
  const PropagationResult res = propagate(nominal_link_state(cfg, 11));
  for (const auto& probe : res.probes) {
    REQUIRE(probe.q_factor_db > q_threshold_db());
  }
  REQUIRE_FALSE(is_impaired(res.probes));
}

TEST_CASE("probe Q tracks the analytic stage budget") {
  // Deterministic part of the model: OSNR(level, spans) - gap - offset.
  // Frozen per conditioning level; readings carry 0.15 dB jitter on top.
  const double expected_q[3] = {9.114, 12.044, 14.146};
  const double span_losses[] = {5.0, 5.0, 5.0, 5.0, 10.0};
  for (int level = 0; level < 3; ++level) {
    std::vector<double> stages = {physics::kLevelOsnrDb[level]};
    for (double loss : span_losses) {
      stages.push_back(physics::kStageOsnrBaseDb - loss);
    }
    const double q = accumulate_osnr(stages) - physics::kSnrGapDb -
                     physics::kQOffsetDb;
    REQUIRE(q == Approx(expected_q[level]).margin(1e-3));
  }
}

TEST_CASE("impairment rule is a strict threshold") {
  ProbeReading at_threshold;
  at_threshold.q_factor_db = q_threshold_db();
  REQUIRE_FALSE(is_impaired({at_threshold}));

  ProbeReading below = at_threshold;
  below.q_factor_db = q_threshold_db() - 1e-9;
  REQUIRE(is_impaired({below}));
  REQUIRE(is_impaired({at_threshold, below}));
}

TEST_CASE("propagate rejects broken inputs") {
  const NetworkConfig cfg = default_config();
  SECTION("no config") {
    LinkState state;
    REQUIRE_THROWS_AS(propagate(state), std::invalid_argument);
  }
  SECTION("invalid config") {
    NetworkConfig bad = default_config();
    bad.nodes.pop_back();
    LinkState state = nominal_link_state(cfg, 1);
    state.config = &bad;
    REQUIRE_THROWS_AS(propagate(state), std::invalid_argument);
  }
  SECTION("wrong slot vector size") {
    LinkState state = nominal_link_state(cfg, 1);
    state.slot_power_dbm.pop_back();
    REQUIRE_THROWS_AS(propagate(state), std::invalid_argument);
  }
  SECTION("occupied slot with non-finite power") {
    LinkState state = nominal_link_state(cfg, 1);
    state.slot_power_dbm[0] = std::numeric_limits<double>::quiet_NaN();
    REQUIRE_THROWS_AS(propagate(state), std::invalid_argument);
  }
}
