#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "guardband/scenarios.hpp"

using namespace guardband;
using Catch::Approx;

namespace {

ScenarioSpec ramp_spec(UserId user, double offset, OsnrLevel level,
                       std::uint64_t seed) {
  ScenarioSpec spec;
  spec.kind = ImpairmentKind::PowerRamp;
  spec.user = user;
  spec.ramp_offset_db = offset;
  spec.osnr_level = level;
  spec.seed = seed;
  return spec;
}

ScenarioSpec drop_spec(UserId user, int dropped, OsnrLevel level,
                       std::uint64_t seed) {
  ScenarioSpec spec;
  spec.kind = ImpairmentKind::AddDrop;
  spec.user = user;
  spec.channels_dropped = dropped;
  spec.osnr_level = level;
  spec.seed = seed;
  return spec;
}

std::string corpus_bytes(const std::vector<LabeledSnapshot>& corpus) {
  std::ostringstream os;
  for (const auto& snap : corpus) os << to_json(snap).dump() << '\n';
  return os.str();
}

}  // namespace

TEST_CASE("scenario specs are validated") {
  SECTION("baseline must not name a user") {
    ScenarioSpec spec;
    spec.user = UserId::User1;
    REQUIRE_FALSE(validate(spec).empty());
    spec.user.reset();
    REQUIRE(validate(spec).empty());
  }
  SECTION("ramp offsets live on the half-dB grid") {
    REQUIRE(validate(ramp_spec(UserId::User1, 0.5, OsnrLevel::Mid, 0)).empty());
    REQUIRE(validate(ramp_spec(UserId::User1, 6.0, OsnrLevel::Mid, 0)).empty());
    REQUIRE_FALSE(
        validate(ramp_spec(UserId::User1, 0.0, OsnrLevel::Mid, 0)).empty());
    REQUIRE_FALSE(
        validate(ramp_spec(UserId::User1, 0.3, OsnrLevel::Mid, 0)).empty());
    REQUIRE_FALSE(
        validate(ramp_spec(UserId::User1, 6.5, OsnrLevel::Mid, 0)).empty());
    ScenarioSpec no_user = ramp_spec(UserId::User1, 1.0, OsnrLevel::Mid, 0);
    no_user.user.reset();
    REQUIRE_FALSE(validate(no_user).empty());
  }
  SECTION("drop counts are 1..7") {
    REQUIRE(validate(drop_spec(UserId::User2, 1, OsnrLevel::Low, 0)).empty());
    REQUIRE(validate(drop_spec(UserId::User2, 7, OsnrLevel::Low, 0)).empty());
    REQUIRE_FALSE(
        validate(drop_spec(UserId::User2, 0, OsnrLevel::Low, 0)).empty());
    REQUIRE_FALSE(
        validate(drop_spec(UserId::User2, 8, OsnrLevel::Low, 0)).empty());
  }
}

TEST_CASE("survivor placement spreads across the window") {
  REQUIRE(survivor_offsets(8) == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7});
  REQUIRE(survivor_offsets(1) == std::vector<int>{0});
  REQUIRE(survivor_offsets(2) == std::vector<int>{0, 7});
  REQUIRE(survivor_offsets(4) == std::vector<int>{0, 2, 5, 7});

  for (int n = 2; n <= 8; ++n) {
    const auto offsets = survivor_offsets(n);
    REQUIRE(static_cast<int>(offsets.size()) == n);
    REQUIRE(offsets.front() == 0);
    REQUIRE(offsets.back() == 7);
    REQUIRE(std::is_sorted(offsets.begin(), offsets.end()));
    REQUIRE(std::adjacent_find(offsets.begin(), offsets.end()) ==
            offsets.end());
  }
  REQUIRE_THROWS_AS(survivor_offsets(0), std::domain_error);
  REQUIRE_THROWS_AS(survivor_offsets(9), std::domain_error);
}

TEST_CASE("add/drop boost conserves window power") {
  REQUIRE(add_drop_boost_db(0) == 0.0);
  REQUIRE(add_drop_boost_db(4) == Approx(3.0103).margin(1e-4));
  REQUIRE(add_drop_boost_db(7) == Approx(9.0309).margin(1e-4));
  REQUIRE_THROWS_AS(add_drop_boost_db(-1), std::domain_error);
  REQUIRE_THROWS_AS(add_drop_boost_db(8), std::domain_error);

  const NetworkConfig cfg = default_config();
  const LinkState nominal = nominal_link_state(cfg, 0);
  const double baseline = window_total_dbm(nominal, cfg.windows[2]);
  for (int d = 1; d <= kMaxChannelsDropped; ++d) {
    const LinkState state = scenario_link_state(
        cfg, drop_spec(UserId::User3, d, OsnrLevel::Mid, 9));
    REQUIRE(window_total_dbm(state, cfg.windows[2]) ==
            Approx(baseline).margin(1e-9));
    // Exactly 8-d occupied slots in the window, all else untouched.
    int occupied = 0;
    for (int s = cfg.windows[2].first_slot; s <= cfg.windows[2].last_slot();
         ++s) {
      if (state.slot_power_dbm[s]) ++occupied;
    }
    REQUIRE(occupied == kWindowSlots - d);
    REQUIRE(window_total_dbm(state, cfg.windows[0]) ==
            Approx(window_total_dbm(nominal, cfg.windows[0])).margin(1e-12));
  }
}

TEST_CASE("ramp states raise the whole window uniformly") {
  const NetworkConfig cfg = default_config();
  const LinkState state = scenario_link_state(
      cfg, ramp_spec(UserId::User2, 2.5, OsnrLevel::Mid, 4));
  for (int c : cfg.windows[1].active_channels) {
    REQUIRE(*state.slot_power_dbm[c] ==
            Approx(cfg.windows[1].per_channel_power_dbm + 2.5));
  }
  for (int c : cfg.windows[0].active_channels) {
    REQUIRE(*state.slot_power_dbm[c] ==
            Approx(cfg.windows[0].per_channel_power_dbm));
  }
  for (const auto& p : cfg.probes) {
    REQUIRE(*state.slot_power_dbm[p.slot] == Approx(p.launch_power_dbm));
  }
  REQUIRE_THROWS_AS(
      scenario_link_state(cfg, ramp_spec(UserId::User1, 0.4, OsnrLevel::Mid, 0)),
      std::invalid_argument);
}

TEST_CASE("labels follow the probe-Q rule") {
  const NetworkConfig cfg = default_config();

  SECTION("full-scale ramp at Mid conditioning trips") {
    const LabeledSnapshot snap =
        run_scenario(cfg, ramp_spec(UserId::User1, 6.0, OsnrLevel::Mid, 21), 0);
    REQUIRE(snap.label == Label::User1);
    REQUIRE(snap.impairment_kind == ImpairmentKind::PowerRamp);
    REQUIRE(snap.ramp_offset_db == Approx(6.0));
    REQUIRE_FALSE(snap.channels_dropped.has_value());
  }
  SECTION("small ramp at High conditioning stays clean") {
    const LabeledSnapshot snap = run_scenario(
        cfg, ramp_spec(UserId::User2, 0.5, OsnrLevel::High, 22), 0);
    REQUIRE(snap.label == Label::NoImpairment);
    REQUIRE(snap.impairment_kind == ImpairmentKind::PowerRamp);
    REQUIRE(snap.scenario_user == UserId::User2);
  }
  SECTION("one-channel concentration trips at every conditioning level") {
    for (OsnrLevel level : {OsnrLevel::Low, OsnrLevel::Mid, OsnrLevel::High}) {
      const LabeledSnapshot snap =
          run_scenario(cfg, drop_spec(UserId::User3, 7, level, 23), 0);
      REQUIRE(snap.label == Label::User3);
    }
  }
  SECTION("single drop at High conditioning stays clean") {
    const LabeledSnapshot snap =
        run_scenario(cfg, drop_spec(UserId::User1, 1, OsnrLevel::High, 24), 0);
    REQUIRE(snap.label == Label::NoImpairment);
  }
  SECTION("stored label always matches the stored Q readings") {
    for (std::uint64_t seed = 100; seed < 130; ++seed) {
      const LabeledSnapshot snap = run_scenario(
          cfg, ramp_spec(UserId::User2, 3.0, OsnrLevel::Mid, seed), 0);
      const bool tripped = is_impaired(snap.features.probe_readings);
      REQUIRE(snap.label ==
              (tripped ? Label::User2 : Label::NoImpairment));
    }
  }
}

TEST_CASE("sweep helpers enumerate the full grids") {
  const NetworkConfig cfg = default_config();

  const auto ramps =
      power_ramp_states(cfg, UserId::User1, OsnrLevel::Mid, 31);
  REQUIRE(ramps.size() == 12);
  for (int i = 0; i < 12; ++i) {
    REQUIRE(ramps[i].ramp_offset_db.has_value());
    REQUIRE(*ramps[i].ramp_offset_db == Approx(0.5 * (i + 1)));
    REQUIRE(ramps[i].scenario_user == UserId::User1);
  }

  const auto drops = add_drop_states(cfg, UserId::User3, OsnrLevel::Low, 32);
  REQUIRE(drops.size() == 7);
  for (int d = 1; d <= 7; ++d) {
    REQUIRE(drops[d - 1].channels_dropped.has_value());
    REQUIRE(*drops[d - 1].channels_dropped == d);
  }
}

TEST_CASE("corpus composition and determinism") {
  const NetworkConfig cfg = default_config();
  const CorpusComposition comp = smoke_composition();
  const auto corpus = build_corpus(cfg, comp, 42);

  REQUIRE(static_cast<int>(corpus.size()) == comp.total);

  std::map<std::pair<int, int>, int> impaired;
  int clean = 0;
  for (const auto& snap : corpus) {
    if (snap.label == Label::NoImpairment) {
      ++clean;
    } else {
      REQUIRE(snap.scenario_user.has_value());
      impaired[{static_cast<int>(*snap.scenario_user),
                static_cast<int>(snap.impairment_kind)}] += 1;
    }
    // Timestamps ascend uniquely, so every snapshot is traceable.
  }
  for (int u = 0; u < kUserCount; ++u) {
    REQUIRE(impaired[{u, static_cast<int>(ImpairmentKind::PowerRamp)}] ==
            comp.impaired_per_pair);
    REQUIRE(impaired[{u, static_cast<int>(ImpairmentKind::AddDrop)}] ==
            comp.impaired_per_pair);
  }
  REQUIRE(clean == comp.total - comp.impaired_per_pair * 6);

  for (std::size_t i = 0; i < corpus.size(); ++i) {
    REQUIRE(corpus[i].features.timestamp_index == static_cast<int>(i));
  }

  SECTION("byte-identical across rebuilds") {
    const auto again = build_corpus(cfg, comp, 42);
    REQUIRE(corpus_bytes(again) == corpus_bytes(corpus));
  }
  SECTION("a different seed moves the readings") {
    const auto other = build_corpus(cfg, comp, 43);
    REQUIRE(corpus_bytes(other) != corpus_bytes(corpus));
  }
}

TEST_CASE("corpus construction rejects impossible compositions") {
  const NetworkConfig cfg = default_config();
  CorpusComposition comp;
  comp.impaired_per_pair = 0;
  comp.total = 100;
  REQUIRE_THROWS_AS(build_corpus(cfg, comp, 1), std::domain_error);

  comp.impaired_per_pair = 20;
  comp.total = 100;  // < 120 impaired
  REQUIRE_THROWS_AS(build_corpus(cfg, comp, 1), std::domain_error);
}

TEST_CASE("corpus JSONL survives a file round trip") {
  const NetworkConfig cfg = default_config();
  CorpusComposition tiny;
  tiny.impaired_per_pair = 2;
  tiny.total = 40;
  const auto corpus = build_corpus(cfg, tiny, 7);

  const std::string path = "gb_corpus_roundtrip_test.jsonl";
  save_corpus_jsonl(corpus, path);
  const auto back = load_corpus_jsonl(path);
  REQUIRE(back.size() == corpus.size());
  REQUIRE(corpus_bytes(back) == corpus_bytes(corpus));
  std::remove(path.c_str());
}

TEST_CASE("corpus loader reports the offending line") {
  const std::string path = "gb_corpus_badline_test.jsonl";
  {
    std::ofstream out(path);
    out << "{\"schema_version\": 1, \"label\": \"no_impairment\"}\n";
    out << "not json at all\n";
  }
  try {
    load_corpus_jsonl(path);
    FAIL("expected a parse error");
  } catch (const std::runtime_error& e) {
    const std::string msg = e.what();
    REQUIRE(msg.find(path) != std::string::npos);
    REQUIRE(msg.find(":1:") != std::string::npos);
  }
  std::remove(path.c_str());
}
