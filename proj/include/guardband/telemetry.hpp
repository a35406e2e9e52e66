#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "guardband/channel_physics.hpp"
#include "guardband/topology.hpp"
#include "guardband/version.hpp"

// One 30-second poll of the whole line system, plus the labeling that turns
// polls into classifier training data. Corpora persist as JSON Lines, one
// labeled snapshot per line, each line carrying its own schema_version.

namespace guardband {

enum class ImpairmentKind { None = 0, PowerRamp = 1, AddDrop = 2 };

inline std::string to_string(ImpairmentKind k) {
  switch (k) {
    case ImpairmentKind::None: return "none";
    case ImpairmentKind::PowerRamp: return "power_ramp";
    case ImpairmentKind::AddDrop: return "add_drop";
  }
  throw std::invalid_argument("unknown ImpairmentKind");
}

inline ImpairmentKind impairment_kind_from_string(const std::string& s) {
  if (s == "none") return ImpairmentKind::None;
  if (s == "power_ramp") return ImpairmentKind::PowerRamp;
  if (s == "add_drop") return ImpairmentKind::AddDrop;
  throw std::invalid_argument("unknown ImpairmentKind: " + s);
}

/// Classifier target. kNoImpairment iff no probe Q crossed the threshold.
enum class Label { NoImpairment = 0, User1 = 1, User2 = 2, User3 = 3 };

inline constexpr int kClassCount = 4;

inline std::string to_string(Label label) {
  switch (label) {
    case Label::NoImpairment: return "no_impairment";
    case Label::User1: return "user1";
    case Label::User2: return "user2";
    case Label::User3: return "user3";
  }
  throw std::invalid_argument("unknown Label");
}

inline Label label_from_string(const std::string& s) {
  if (s == "no_impairment") return Label::NoImpairment;
  if (s == "user1") return Label::User1;
  if (s == "user2") return Label::User2;
  if (s == "user3") return Label::User3;
  throw std::invalid_argument("unknown Label: " + s);
}

inline Label label_for_user(UserId user) {
  return static_cast<Label>(static_cast<int>(user) + 1);
}

/// Everything the operator sees in one polling cycle: per-probe transceiver
/// features (ordered by probe slot) and per-node OCM readings (ordered by
/// node_id).
struct TelemetrySnapshot {
  int timestamp_index = 0;  // poll number; wall time = 30 s * index
  std::vector<ProbeReading> probe_readings;
  std::vector<OcmReading> ocm_readings;
};

/// A snapshot plus its class label and the generator-side metadata needed
/// for per-impairment-type reporting. Metadata never feeds the model.
struct LabeledSnapshot {
  TelemetrySnapshot features;
  Label label = Label::NoImpairment;
  ImpairmentKind impairment_kind = ImpairmentKind::None;
  std::optional<UserId> scenario_user;
  std::optional<double> ramp_offset_db;
  std::optional<int> channels_dropped;
  OsnrLevel osnr_level = OsnrLevel::Mid;
  std::uint64_t scenario_seed = 0;
};

// ---- JSON ----

using ordered_json = nlohmann::ordered_json;

inline ordered_json to_json(const ProbeReading& r) {
  return ordered_json{{"cfo_mhz", r.cfo_mhz},
                      {"cdc_ps_nm", r.cdc_ps_nm},
                      {"dgd_ps", r.dgd_ps},
                      {"rx_power_dbm", r.rx_power_dbm},
                      {"osnr_db", r.osnr_db},
                      {"q_factor_db", r.q_factor_db},
                      {"pdl_db", r.pdl_db},
                      {"electrical_snr_db", r.electrical_snr_db}};
}

inline ProbeReading probe_reading_from_json(const ordered_json& j) {
  ProbeReading r;
  r.cfo_mhz = j.at("cfo_mhz").get<double>();
  r.cdc_ps_nm = j.at("cdc_ps_nm").get<double>();
  r.dgd_ps = j.at("dgd_ps").get<double>();
  r.rx_power_dbm = j.at("rx_power_dbm").get<double>();
  r.osnr_db = j.at("osnr_db").get<double>();
  r.q_factor_db = j.at("q_factor_db").get<double>();
  r.pdl_db = j.at("pdl_db").get<double>();
  r.electrical_snr_db = j.at("electrical_snr_db").get<double>();
  return r;
}

inline ordered_json to_json(const OcmReading& r) {
  return ordered_json{{"node_id", r.node_id},
                      {"per_probe_power_dbm", r.per_probe_power_dbm},
                      {"window_total_power_dbm", r.window_total_power_dbm},
                      {"node_total_output_dbm", r.node_total_output_dbm}};
}

inline OcmReading ocm_reading_from_json(const ordered_json& j) {
  OcmReading r;
  r.node_id = j.at("node_id").get<int>();
  r.per_probe_power_dbm =
      j.at("per_probe_power_dbm").get<std::vector<double>>();
  r.window_total_power_dbm =
      j.at("window_total_power_dbm").get<std::vector<double>>();
  r.node_total_output_dbm = j.at("node_total_output_dbm").get<double>();
  return r;
}

inline ordered_json to_json(const TelemetrySnapshot& s) {
  ordered_json probes = ordered_json::array();
  for (const auto& r : s.probe_readings) probes.push_back(to_json(r));
  ordered_json ocm = ordered_json::array();
  for (const auto& r : s.ocm_readings) ocm.push_back(to_json(r));
  return ordered_json{{"timestamp_index", s.timestamp_index},
                      {"probe_readings", probes},
                      {"ocm_readings", ocm}};
}

inline TelemetrySnapshot telemetry_snapshot_from_json(const ordered_json& j) {
  TelemetrySnapshot s;
  s.timestamp_index = j.at("timestamp_index").get<int>();
  for (const auto& r : j.at("probe_readings")) {
    s.probe_readings.push_back(probe_reading_from_json(r));
  }
  for (const auto& r : j.at("ocm_readings")) {
    s.ocm_readings.push_back(ocm_reading_from_json(r));
  }
  return s;
}

inline ordered_json to_json(const LabeledSnapshot& s) {
  ordered_json j{{"schema_version", kSchemaVersion},
                 {"label", to_string(s.label)},
                 {"impairment_kind", to_string(s.impairment_kind)},
                 {"osnr_level", to_string(s.osnr_level)},
                 {"scenario_seed", s.scenario_seed}};
  if (s.scenario_user) {
    j["scenario_user"] = to_string(*s.scenario_user);
  }
  if (s.ramp_offset_db) {
    j["ramp_offset_db"] = *s.ramp_offset_db;
  }
  if (s.channels_dropped) {
    j["channels_dropped"] = *s.channels_dropped;
  }
  j["features"] = to_json(s.features);
  return j;
}

inline LabeledSnapshot labeled_snapshot_from_json(const ordered_json& j) {
  const int version = j.at("schema_version").get<int>();
  if (version != kSchemaVersion) {
    throw std::runtime_error("unsupported snapshot schema_version " +
                             std::to_string(version));
  }
  LabeledSnapshot s;
  s.label = label_from_string(j.at("label").get<std::string>());
  s.impairment_kind =
      impairment_kind_from_string(j.at("impairment_kind").get<std::string>());
  s.osnr_level = osnr_level_from_string(j.at("osnr_level").get<std::string>());
  s.scenario_seed = j.at("scenario_seed").get<std::uint64_t>();
  if (j.contains("scenario_user")) {
    s.scenario_user = user_from_string(j.at("scenario_user").get<std::string>());
  }
  if (j.contains("ramp_offset_db")) {
    s.ramp_offset_db = j.at("ramp_offset_db").get<double>();
  }
  if (j.contains("channels_dropped")) {
    s.channels_dropped = j.at("channels_dropped").get<int>();
  }
  s.features = telemetry_snapshot_from_json(j.at("features"));
  return s;
}

inline void save_corpus_jsonl(const std::vector<LabeledSnapshot>& corpus,
                              const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  for (const auto& snap : corpus) {
    out << to_json(snap).dump() << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline std::vector<LabeledSnapshot> load_corpus_jsonl(
    const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::vector<LabeledSnapshot> corpus;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      corpus.push_back(
          labeled_snapshot_from_json(ordered_json::parse(line)));
    } catch (const std::exception& e) {
      std::ostringstream os;
      os << path << ":" << line_no << ": " << e.what();
      throw std::runtime_error(os.str());
    }
  }
  return corpus;
}

}  // namespace guardband
