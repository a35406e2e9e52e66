#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "guardband/nn/tensor.hpp"
#include "guardband/posenc.hpp"
#include "guardband/seeding.hpp"
#include "guardband/telemetry.hpp"
#include "guardband/version.hpp"

// Snapshot -> model input. Two branches: a wavelength branch (4 probes x
// 8 transceiver features) and a component branch (6 nodes x 8 OCM power
// values), each z-scored per channel with training-split statistics and
// then extended with 2 positional-encoding channels. PE channels are
// appended raw, never normalized, so they always equal encode(row).

namespace guardband {

inline constexpr int kWavelengthRows = kProbeCount;  // sequence: probes
inline constexpr int kComponentRows = kNodeCount;    // sequence: nodes
inline constexpr int kRawFeatureCount = 8;
inline constexpr int kTensorChannels = kRawFeatureCount + kPosEncDim;

struct FeatureTensor {
  Tensor2 wavelength;  // kWavelengthRows x kTensorChannels
  Tensor2 component;   // kComponentRows x kTensorChannels
  int label = 0;       // class index 0..3
  ImpairmentKind impairment_kind = ImpairmentKind::None;  // report metadata
};

/// 4 x 8 raw transceiver features, probe order. Feature order per row:
/// cfo, cdc, dgd, rx_power, osnr, q_factor, pdl, electrical_snr.
inline Tensor2 raw_wavelength_features(const TelemetrySnapshot& snap) {
  if (static_cast<int>(snap.probe_readings.size()) != kWavelengthRows) {
    throw std::invalid_argument(
        "raw_wavelength_features: expected " +
        std::to_string(kWavelengthRows) + " probe readings, have " +
        std::to_string(snap.probe_readings.size()) + " (probe " +
        std::to_string(snap.probe_readings.size()) + " onward absent)");
  }
  Tensor2 m(kWavelengthRows, kRawFeatureCount);
  for (int r = 0; r < kWavelengthRows; ++r) {
    const ProbeReading& p = snap.probe_readings[r];
    const double row[kRawFeatureCount] = {
        p.cfo_mhz, p.cdc_ps_nm,   p.dgd_ps, p.rx_power_dbm,
        p.osnr_db, p.q_factor_db, p.pdl_db, p.electrical_snr_db};
    for (int c = 0; c < kRawFeatureCount; ++c) m.at(r, c) = row[c];
  }
  return m;
}

/// 6 x 8 raw OCM features, node order. Feature order per row:
/// node_total, window totals (3 users), per-probe powers (4 probes).
inline Tensor2 raw_component_features(const TelemetrySnapshot& snap) {
  if (static_cast<int>(snap.ocm_readings.size()) != kComponentRows) {
    throw std::invalid_argument(
        "raw_component_features: expected " + std::to_string(kComponentRows) +
        " OCM readings, have " + std::to_string(snap.ocm_readings.size()));
  }
  Tensor2 m(kComponentRows, kRawFeatureCount);
  for (int r = 0; r < kComponentRows; ++r) {
    const OcmReading& o = snap.ocm_readings[r];
    if (o.node_id != r) {
      throw std::invalid_argument(
          "raw_component_features: OCM reading for node " + std::to_string(r) +
          " absent (found node " + std::to_string(o.node_id) + ")");
    }
    if (static_cast<int>(o.window_total_power_dbm.size()) != kUserCount ||
        static_cast<int>(o.per_probe_power_dbm.size()) != kProbeCount) {
      throw std::invalid_argument(
          "raw_component_features: node " + std::to_string(r) +
          " reading incomplete");
    }
    int c = 0;
    m.at(r, c++) = o.node_total_output_dbm;
    for (int w = 0; w < kUserCount; ++w) m.at(r, c++) = o.window_total_power_dbm[w];
    for (int p = 0; p < kProbeCount; ++p) m.at(r, c++) = o.per_probe_power_dbm[p];
  }
  return m;
}

struct ChannelNorm {
  double mean = 0.0;
  double stddev = 1.0;
  bool degenerate = false;  // zero-variance channel: normalized value is 0
};

struct NormParams {
  std::vector<ChannelNorm> wavelength;  // kRawFeatureCount entries
  std::vector<ChannelNorm> component;   // kRawFeatureCount entries
};

namespace detail {

inline std::vector<ChannelNorm> channel_stats(
    const std::vector<Tensor2>& mats) {
  if (mats.empty()) throw std::domain_error("channel_stats: empty input");
  const int cols = mats.front().cols();
  std::vector<ChannelNorm> norms(cols);
  for (int c = 0; c < cols; ++c) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& m : mats) {
      for (int r = 0; r < m.rows(); ++r) sum += m.at(r, c);
      n += m.rows();
    }
    const double mean = sum / static_cast<double>(n);
    double sq = 0.0;
    for (const auto& m : mats) {
      for (int r = 0; r < m.rows(); ++r) {
        const double d = m.at(r, c) - mean;
        sq += d * d;
      }
    }
    const double var = sq / static_cast<double>(n);
    ChannelNorm& cn = norms[c];
    cn.mean = mean;
    if (var < 1e-24) {
      cn.stddev = 1.0;
      cn.degenerate = true;
    } else {
      cn.stddev = std::sqrt(var);
    }
  }
  return norms;
}

}  // namespace detail

/// Per-channel z-score statistics from the TRAINING subset only.
inline NormParams compute_norm_params(
    const std::vector<LabeledSnapshot>& corpus,
    const std::vector<int>& train_indices) {
  if (train_indices.empty()) {
    throw std::domain_error("compute_norm_params: empty training subset");
  }
  std::vector<Tensor2> wl, comp;
  wl.reserve(train_indices.size());
  comp.reserve(train_indices.size());
  for (int idx : train_indices) {
    wl.push_back(raw_wavelength_features(corpus.at(idx).features));
    comp.push_back(raw_component_features(corpus.at(idx).features));
  }
  NormParams params;
  params.wavelength = detail::channel_stats(wl);
  params.component = detail::channel_stats(comp);
  return params;
}

inline double apply_norm(double value, const ChannelNorm& cn) {
  if (cn.degenerate) return 0.0;
  return (value - cn.mean) / cn.stddev;
}

/// Normalize both branches and append PE channels for the row position.
inline FeatureTensor to_feature_tensor(const LabeledSnapshot& snap,
                                       const NormParams& params) {
  if (static_cast<int>(params.wavelength.size()) != kRawFeatureCount ||
      static_cast<int>(params.component.size()) != kRawFeatureCount) {
    throw std::invalid_argument("to_feature_tensor: bad norm params");
  }
  const Tensor2 wl_raw = raw_wavelength_features(snap.features);
  const Tensor2 comp_raw = raw_component_features(snap.features);

  FeatureTensor out;
  out.label = static_cast<int>(snap.label);
  out.impairment_kind = snap.impairment_kind;
  out.wavelength = Tensor2(kWavelengthRows, kTensorChannels);
  out.component = Tensor2(kComponentRows, kTensorChannels);
  for (int r = 0; r < kWavelengthRows; ++r) {
    for (int c = 0; c < kRawFeatureCount; ++c) {
      out.wavelength.at(r, c) = apply_norm(wl_raw.at(r, c), params.wavelength[c]);
    }
    const auto pe = encode(r);
    for (int d = 0; d < kPosEncDim; ++d) {
      out.wavelength.at(r, kRawFeatureCount + d) = pe[d];
    }
  }
  for (int r = 0; r < kComponentRows; ++r) {
    for (int c = 0; c < kRawFeatureCount; ++c) {
      out.component.at(r, c) = apply_norm(comp_raw.at(r, c), params.component[c]);
    }
    const auto pe = encode(r);
    for (int d = 0; d < kPosEncDim; ++d) {
      out.component.at(r, kRawFeatureCount + d) = pe[d];
    }
  }
  out.wavelength.check_finite("wavelength tensor");
  out.component.check_finite("component tensor");
  return out;
}

struct SplitIndices {
  std::vector<int> train;
  std::vector<int> test;
};

/// Per-class 3:1 split: shuffle each class with a class-specific stream of
/// `seed`, hold out round(n/4) samples for test, keep index order ascending
/// inside each half. Deterministic in seed.
inline SplitIndices stratified_split(const std::vector<int>& labels,
                                     std::uint64_t seed) {
  std::map<int, std::vector<int>> by_class;
  for (int i = 0; i < static_cast<int>(labels.size()); ++i) {
    by_class[labels[i]].push_back(i);
  }
  for (const auto& [cls, members] : by_class) {
    if (members.size() < 4) {
      throw std::domain_error("stratified_split: class " +
                              std::to_string(cls) + " has fewer than 4 members");
    }
  }
  SplitIndices split;
  for (auto& [cls, members] : by_class) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(cls)));
    fisher_yates(members, rng);
    const int test_n =
        static_cast<int>(std::lround(members.size() / 4.0));
    for (int i = 0; i < static_cast<int>(members.size()); ++i) {
      (i < test_n ? split.test : split.train).push_back(members[i]);
    }
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

struct Dataset {
  NormParams norm;
  std::vector<FeatureTensor> samples;
};

struct DatasetPair {
  Dataset train;
  Dataset test;
  SplitIndices split;
};

/// Corpus -> normalized train/test tensor sets (3:1 stratified).
inline DatasetPair build_datasets(const std::vector<LabeledSnapshot>& corpus,
                                  std::uint64_t split_seed) {
  std::vector<int> labels;
  labels.reserve(corpus.size());
  for (const auto& s : corpus) labels.push_back(static_cast<int>(s.label));
  DatasetPair pair;
  pair.split = stratified_split(labels, split_seed);
  pair.train.norm = compute_norm_params(corpus, pair.split.train);
  pair.test.norm = pair.train.norm;
  for (int idx : pair.split.train) {
    pair.train.samples.push_back(to_feature_tensor(corpus[idx], pair.train.norm));
  }
  for (int idx : pair.split.test) {
    pair.test.samples.push_back(to_feature_tensor(corpus[idx], pair.test.norm));
  }
  return pair;
}

// ---- JSON ----

inline ordered_json to_json(const ChannelNorm& cn) {
  return ordered_json{{"mean", cn.mean},
                      {"stddev", cn.stddev},
                      {"degenerate", cn.degenerate}};
}

inline ChannelNorm channel_norm_from_json(const ordered_json& j) {
  ChannelNorm cn;
  cn.mean = j.at("mean").get<double>();
  cn.stddev = j.at("stddev").get<double>();
  cn.degenerate = j.at("degenerate").get<bool>();
  return cn;
}

inline ordered_json to_json(const NormParams& p) {
  ordered_json wl = ordered_json::array();
  for (const auto& cn : p.wavelength) wl.push_back(to_json(cn));
  ordered_json comp = ordered_json::array();
  for (const auto& cn : p.component) comp.push_back(to_json(cn));
  return ordered_json{{"wavelength", wl}, {"component", comp}};
}

inline NormParams norm_params_from_json(const ordered_json& j) {
  NormParams p;
  for (const auto& cn : j.at("wavelength")) {
    p.wavelength.push_back(channel_norm_from_json(cn));
  }
  for (const auto& cn : j.at("component")) {
    p.component.push_back(channel_norm_from_json(cn));
  }
  return p;
}

inline ordered_json tensor_rows_json(const Tensor2& m) {
  ordered_json rows = ordered_json::array();
  for (int r = 0; r < m.rows(); ++r) {
    ordered_json row = ordered_json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m.at(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Tensor2 tensor_from_rows_json(const ordered_json& j) {
  const int rows = static_cast<int>(j.size());
  if (rows == 0) return Tensor2();
  const int cols = static_cast<int>(j.at(0).size());
  Tensor2 m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const auto& row = j.at(r);
    if (static_cast<int>(row.size()) != cols) {
      throw std::runtime_error("tensor_from_rows_json: ragged rows");
    }
    for (int c = 0; c < cols; ++c) m.at(r, c) = row.at(c).get<double>();
  }
  return m;
}

inline void save_dataset(const Dataset& ds, const std::string& path) {
  ordered_json samples = ordered_json::array();
  for (const auto& s : ds.samples) {
    samples.push_back(
        ordered_json{{"label", s.label},
                     {"impairment_kind", to_string(s.impairment_kind)},
                     {"wavelength", tensor_rows_json(s.wavelength)},
                     {"component", tensor_rows_json(s.component)}});
  }
  const ordered_json doc{{"schema_version", kSchemaVersion},
                         {"norm_params", to_json(ds.norm)},
                         {"samples", samples}};
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << doc.dump() << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline Dataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  const ordered_json doc = ordered_json::parse(in);
  const int version = doc.at("schema_version").get<int>();
  if (version != kSchemaVersion) {
    throw std::runtime_error("unsupported dataset schema_version " +
                             std::to_string(version));
  }
  Dataset ds;
  ds.norm = norm_params_from_json(doc.at("norm_params"));
  for (const auto& s : doc.at("samples")) {
    FeatureTensor t;
    t.label = s.at("label").get<int>();
    t.impairment_kind =
        impairment_kind_from_string(s.at("impairment_kind").get<std::string>());
    t.wavelength = tensor_from_rows_json(s.at("wavelength"));
    t.component = tensor_from_rows_json(s.at("component"));
    ds.samples.push_back(std::move(t));
  }
  return ds;
}

}  // namespace guardband
