#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "guardband/dataset.hpp"
#include "guardband/hash.hpp"
#include "guardband/metrics.hpp"
#include "guardband/nn/checkpoint.hpp"
#include "guardband/scenarios.hpp"
#include "guardband/telemetry.hpp"
#include "guardband/topology.hpp"
#include "guardband/training.hpp"
#include "guardband/version.hpp"

// End-to-end reproduction: corpus -> split -> CNN and MLP training ->
// evaluation and comparison, all seeded from one master seed. Every stage
// writes its artifact to <name>.partial and renames on completion, so an
// aborted run leaves finished artifacts final and the failing stage's
// output clearly marked. A manifest lists every artifact with its SHA-256.

namespace guardband {

struct PipelineOptions {
  std::uint64_t master_seed = 42;
  std::string out_dir = "out";
  bool smoke = false;   // reduced profile: 300 samples, 100 epochs
  int epochs_override = 0;  // > 0 replaces the profile epoch count
};

struct PipelineResult {
  std::string corpus_path;
  std::string train_path;
  std::string test_path;
  std::string cnn_checkpoint_path;
  std::string mlp_checkpoint_path;
  std::string cnn_report_path;
  std::string mlp_report_path;
  std::string comparison_text_path;
  std::string comparison_csv_path;
  std::string manifest_path;
  EvalReport cnn_report;
  EvalReport mlp_report;
  double wall_seconds = 0.0;
  std::vector<std::string> check_failures;  // empty on a healthy run
};

namespace detail {

/// Run `body` which must fill `path + ".partial"`, then promote it.
template <typename Fn>
inline void write_artifact(const std::string& path, Fn&& body) {
  const std::string partial = path + ".partial";
  body(partial);
  std::filesystem::rename(partial, path);
}

template <typename Fn>
inline auto stage(const std::string& name, Fn&& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    throw std::runtime_error("stage '" + name + "' failed: " + e.what());
  }
}

}  // namespace detail

inline int profile_epochs(const PipelineOptions& opt) {
  if (opt.epochs_override > 0) return opt.epochs_override;
  return opt.smoke ? 100 : TrainConfig{}.epochs;
}

/// Self-checks a finished run must pass for exit code 0: exact corpus
/// composition, label-rule consistency, split proportions, and the
/// accuracy floor / model ordering for the profile.
inline std::vector<std::string> pipeline_check_failures(
    const std::vector<LabeledSnapshot>& corpus, const DatasetPair& data,
    const PipelineResult& result, const PipelineOptions& opt) {
  std::vector<std::string> failures;
  const CorpusComposition comp =
      opt.smoke ? smoke_composition() : default_composition();

  if (static_cast<int>(corpus.size()) != comp.total) {
    failures.push_back("corpus size " + std::to_string(corpus.size()) +
                       " != " + std::to_string(comp.total));
  }
  std::map<std::pair<int, int>, int> impaired_counts;
  for (const auto& snap : corpus) {
    const bool tripped = is_impaired(snap.features.probe_readings);
    const Label expected = (snap.scenario_user && tripped)
                               ? label_for_user(*snap.scenario_user)
                               : Label::NoImpairment;
    if (snap.label != expected) {
      failures.push_back("label inconsistent with stored Q readings at "
                         "timestamp " +
                         std::to_string(snap.features.timestamp_index));
      break;
    }
    if (snap.label != Label::NoImpairment) {
      impaired_counts[{static_cast<int>(*snap.scenario_user),
                       static_cast<int>(snap.impairment_kind)}] += 1;
    }
  }
  for (int u = 0; u < kUserCount; ++u) {
    for (int k : {static_cast<int>(ImpairmentKind::PowerRamp),
                  static_cast<int>(ImpairmentKind::AddDrop)}) {
      const int n = impaired_counts[{u, k}];
      if (n != comp.impaired_per_pair) {
        failures.push_back("impaired count for user " + std::to_string(u + 1) +
                           " kind " + std::to_string(k) + " is " +
                           std::to_string(n) + ", want " +
                           std::to_string(comp.impaired_per_pair));
      }
    }
  }

  if (data.split.train.size() + data.split.test.size() != corpus.size()) {
    failures.push_back("split does not cover the corpus");
  }
  std::map<int, std::pair<long, long>> split_by_class;  // class -> (train, test)
  for (int idx : data.split.train) {
    split_by_class[static_cast<int>(corpus[idx].label)].first += 1;
  }
  for (int idx : data.split.test) {
    split_by_class[static_cast<int>(corpus[idx].label)].second += 1;
  }
  for (const auto& [cls, tt] : split_by_class) {
    const double n = static_cast<double>(tt.first + tt.second);
    if (std::abs(tt.second - n / 4.0) > 1.0 + 1e-9) {
      failures.push_back("class " + std::to_string(cls) +
                         " test fraction off 25% by more than 1 sample");
    }
  }

  const double cnn_acc = result.cnn_report.overall_accuracy;
  const double mlp_acc = result.mlp_report.overall_accuracy;
  const double floor = opt.smoke ? 0.70 : 0.90;
  if (cnn_acc < floor) {
    failures.push_back("cnn accuracy " + std::to_string(cnn_acc) +
                       " below floor " + std::to_string(floor));
  }
  if (!opt.smoke && cnn_acc < mlp_acc) {
    failures.push_back("cnn accuracy " + std::to_string(cnn_acc) +
                       " below mlp baseline " + std::to_string(mlp_acc));
  }
  return failures;
}

/// Full pipeline on the given config. Deterministic in
/// (config, options.master_seed, profile).
inline PipelineResult reproduce(const NetworkConfig& cfg,
                                const PipelineOptions& opt) {
  const auto t_start = std::chrono::steady_clock::now();
  namespace fs = std::filesystem;
  fs::create_directories(opt.out_dir);
  const std::string dir = opt.out_dir + "/";

  PipelineResult result;
  result.corpus_path = dir + "corpus.jsonl";
  result.train_path = dir + "train.json";
  result.test_path = dir + "test.json";
  result.cnn_checkpoint_path = dir + "cnn_checkpoint.json";
  result.mlp_checkpoint_path = dir + "mlp_checkpoint.json";
  result.cnn_report_path = dir + "cnn_report.json";
  result.mlp_report_path = dir + "mlp_report.json";
  result.comparison_text_path = dir + "comparison.txt";
  result.comparison_csv_path = dir + "comparison.csv";
  result.manifest_path = dir + "manifest.json";

  const std::uint64_t seed = opt.master_seed;
  const CorpusComposition comp =
      opt.smoke ? smoke_composition() : default_composition();

  // 1. Corpus.
  const std::vector<LabeledSnapshot> corpus = detail::stage("simulate", [&] {
    auto built = build_corpus(cfg, comp, derive_seed(seed, std::string("corpus")));
    detail::write_artifact(result.corpus_path, [&](const std::string& p) {
      save_corpus_jsonl(built, p);
    });
    return built;
  });

  // 2. Split + tensors.
  const DatasetPair data = detail::stage("dataset", [&] {
    DatasetPair pair =
        build_datasets(corpus, derive_seed(seed, std::string("split")));
    detail::write_artifact(result.train_path, [&](const std::string& p) {
      save_dataset(pair.train, p);
    });
    detail::write_artifact(result.test_path, [&](const std::string& p) {
      save_dataset(pair.test, p);
    });
    return pair;
  });

  // 3+4. Train both models.
  TrainConfig tc;
  tc.epochs = profile_epochs(opt);
  auto train_one = [&](const std::string& kind,
                       const std::string& checkpoint_path) {
    return detail::stage("train-" + kind, [&] {
      const std::uint64_t init_seed = derive_seed(seed, kind + "-init");
      auto model = make_model(kind, init_seed);
      AdamOpt adam(model->params());
      TrainConfig cfg_local = tc;
      cfg_local.shuffle_seed = derive_seed(seed, kind + "-shuffle");
      train(*model, adam, data.train, cfg_local);
      detail::write_artifact(checkpoint_path, [&](const std::string& p) {
        save_checkpoint(*model, adam, data.train.norm, init_seed, p);
      });
      return model;
    });
  };
  auto cnn = train_one("cnn", result.cnn_checkpoint_path);
  auto mlp = train_one("mlp", result.mlp_checkpoint_path);

  // 5. Evaluate and compare.
  detail::stage("evaluate", [&] {
    result.cnn_report = evaluate(*cnn, data.test);
    result.mlp_report = evaluate(*mlp, data.test);
    detail::write_artifact(result.cnn_report_path, [&](const std::string& p) {
      std::ofstream out(p, std::ios::binary | std::ios::trunc);
      out << to_json(result.cnn_report).dump(2) << '\n';
      if (!out) throw std::runtime_error("write failed: " + p);
    });
    detail::write_artifact(result.mlp_report_path, [&](const std::string& p) {
      std::ofstream out(p, std::ios::binary | std::ios::trunc);
      out << to_json(result.mlp_report).dump(2) << '\n';
      if (!out) throw std::runtime_error("write failed: " + p);
    });
    const ComparisonReport cmp = compare(result.mlp_report, result.cnn_report);
    detail::write_artifact(result.comparison_text_path,
                           [&](const std::string& p) {
      std::ofstream out(p, std::ios::binary | std::ios::trunc);
      out << render_comparison_text(cmp);
      if (!out) throw std::runtime_error("write failed: " + p);
    });
    detail::write_artifact(result.comparison_csv_path,
                           [&](const std::string& p) {
      std::ofstream out(p, std::ios::binary | std::ios::trunc);
      out << render_comparison_csv(cmp);
      if (!out) throw std::runtime_error("write failed: " + p);
    });
    return 0;
  });

  // 6. Manifest.
  detail::stage("manifest", [&] {
    const auto t_end = std::chrono::steady_clock::now();
    result.wall_seconds =
        std::chrono::duration<double>(t_end - t_start).count();
    ordered_json artifacts = ordered_json::array();
    for (const std::string* path :
         {&result.corpus_path, &result.train_path, &result.test_path,
          &result.cnn_checkpoint_path, &result.mlp_checkpoint_path,
          &result.cnn_report_path, &result.mlp_report_path,
          &result.comparison_text_path, &result.comparison_csv_path}) {
      artifacts.push_back(
          ordered_json{{"path", fs::path(*path).filename().string()},
                       {"sha256", sha256_file(*path)}});
    }
    const ordered_json doc{
        {"schema_version", kSchemaVersion},
        {"tool_version", kToolVersion},
        {"master_seed", seed},
        {"profile", opt.smoke ? "smoke" : "full"},
        {"epochs", tc.epochs},
        {"batch_size", tc.batch_size},
        {"seeds",
         ordered_json{{"corpus", derive_seed(seed, std::string("corpus"))},
                      {"split", derive_seed(seed, std::string("split"))},
                      {"cnn_init", derive_seed(seed, std::string("cnn-init"))},
                      {"cnn_shuffle", derive_seed(seed, std::string("cnn-shuffle"))},
                      {"mlp_init", derive_seed(seed, std::string("mlp-init"))},
                      {"mlp_shuffle", derive_seed(seed, std::string("mlp-shuffle"))}}},
        {"corpus_size", corpus.size()},
        {"train_size", data.train.samples.size()},
        {"test_size", data.test.samples.size()},
        {"cnn_overall_accuracy", result.cnn_report.overall_accuracy},
        {"mlp_overall_accuracy", result.mlp_report.overall_accuracy},
        {"artifacts", artifacts}};
    detail::write_artifact(result.manifest_path, [&](const std::string& p) {
      std::ofstream out(p, std::ios::binary | std::ios::trunc);
      out << doc.dump(2) << '\n';
      if (!out) throw std::runtime_error("write failed: " + p);
    });
    return 0;
  });

  result.check_failures = pipeline_check_failures(corpus, data, result, opt);
  return result;
}

}  // namespace guardband
