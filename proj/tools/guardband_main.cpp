// guardband: OSaaS line-system simulator with probe-channel telemetry and a
// user-attribution classifier. Subcommands chain into a full experiment:
//   simulate -> dataset -> train -> evaluate -> report
// or run everything with one seed via `reproduce`.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "guardband/dataset.hpp"
#include "guardband/metrics.hpp"
#include "guardband/nn/checkpoint.hpp"
#include "guardband/pipeline.hpp"
#include "guardband/scenarios.hpp"
#include "guardband/telemetry.hpp"
#include "guardband/topology.hpp"
#include "guardband/training.hpp"
#include "guardband/version.hpp"

namespace {

using namespace guardband;

NetworkConfig resolve_config(const std::string& config_path) {
  if (config_path.empty()) return default_config();
  NetworkConfig cfg = load_config(config_path);
  if (const auto violations = validate(cfg); !violations.empty()) {
    std::string msg = "config invalid:";
    for (const auto& v : violations) msg += "\n  - " + v;
    throw std::runtime_error(msg);
  }
  return cfg;
}

CorpusComposition resolve_composition(const std::string& path, bool smoke) {
  if (!path.empty()) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open composition: " + path);
    const ordered_json j = ordered_json::parse(in);
    CorpusComposition comp;
    comp.impaired_per_pair = j.at("impaired_per_pair").get<int>();
    comp.total = j.at("total").get<int>();
    return comp;
  }
  return smoke ? smoke_composition() : default_composition();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string default_out_dir() {
  if (const char* env = std::getenv("GUARDBAND_OUT_DIR");
      env != nullptr && env[0] != '\0') {
    return env;
  }
  return "out";
}

int run(int argc, char** argv) {
  CLI::App app{"OSaaS line-system simulator and impairment-attribution "
               "classifier"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand(
      "simulate", "Generate a labeled telemetry corpus (JSON Lines)");
  std::uint64_t sim_seed = 42;
  std::string sim_config, sim_composition, sim_out = "corpus.jsonl";
  bool sim_smoke = false;
  sim->add_option("--seed", sim_seed, "master seed for the corpus");
  sim->add_option("--config", sim_config, "network config JSON (default: built-in)");
  sim->add_option("--composition", sim_composition,
                  "composition JSON {impaired_per_pair, total}");
  sim->add_flag("--smoke", sim_smoke, "reduced 300-sample composition");
  sim->add_option("--out", sim_out, "output corpus path");

  // dataset
  auto* ds = app.add_subcommand(
      "dataset", "Split a corpus 3:1 and emit normalized tensor sets");
  std::string ds_in = "corpus.jsonl", ds_ratio = "3:1";
  std::string ds_out_train = "train.json", ds_out_test = "test.json";
  std::uint64_t ds_seed = 42;
  ds->add_option("--in", ds_in, "corpus JSON Lines path");
  ds->add_option("--split-seed", ds_seed, "seed for the stratified shuffle");
  ds->add_option("--ratio", ds_ratio, "train:test ratio (fixed at 3:1)");
  ds->add_option("--out-train", ds_out_train, "training set output path");
  ds->add_option("--out-test", ds_out_test, "test set output path");

  // train
  auto* tr = app.add_subcommand("train", "Train the CNN or the MLP baseline");
  std::string tr_model = "cnn", tr_train = "train.json",
              tr_checkpoint = "checkpoint.json";
  TrainConfig tr_cfg;
  std::uint64_t tr_seed = 42;
  tr->add_option("--model", tr_model, "cnn or mlp")
      ->check(CLI::IsMember({"cnn", "mlp"}));
  tr->add_option("--train", tr_train, "training set path");
  tr->add_option("--epochs", tr_cfg.epochs, "training epochs (default 1200)");
  tr->add_option("--batch-size", tr_cfg.batch_size, "batch size (default 32)");
  tr->add_option("--seed", tr_seed, "seed for init and epoch shuffling");
  tr->add_option("--checkpoint-out", tr_checkpoint, "checkpoint output path");

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "Evaluate a checkpoint on a test set");
  std::string ev_checkpoint = "checkpoint.json", ev_test = "test.json";
  std::string ev_format = "text", ev_out;
  ev->add_option("--checkpoint", ev_checkpoint, "checkpoint path");
  ev->add_option("--test", ev_test, "test set path");
  ev->add_option("--report", ev_format, "output format")
      ->check(CLI::IsMember({"json", "csv", "text"}));
  ev->add_option("--out", ev_out, "output path (default: stdout)");

  // report
  auto* rp = app.add_subcommand(
      "report", "Render the baseline-vs-CNN comparison table");
  std::string rp_base, rp_cnn, rp_text, rp_csv;
  rp->add_option("--base", rp_base, "baseline (MLP) evaluation report JSON")
      ->required();
  rp->add_option("--cnn", rp_cnn, "CNN evaluation report JSON")->required();
  rp->add_option("--text", rp_text, "write the text table here (default: stdout)");
  rp->add_option("--csv", rp_csv, "write the CSV table here");

  // reproduce
  auto* rpd = app.add_subcommand(
      "reproduce", "Full pipeline: simulate, split, train both models, "
                   "evaluate, compare, manifest");
  PipelineOptions rpd_opt;
  rpd_opt.out_dir.clear();
  std::string rpd_config;
  rpd->add_option("--seed", rpd_opt.master_seed, "master seed (default 42)");
  rpd->add_option("--out-dir", rpd_opt.out_dir,
                  "artifact directory (default: $GUARDBAND_OUT_DIR or ./out)");
  rpd->add_option("--config", rpd_config, "network config JSON");
  rpd->add_flag("--smoke", rpd_opt.smoke,
                "reduced profile: 300 samples, 100 epochs");
  rpd->add_option("--epochs", rpd_opt.epochs_override,
                  "override the profile epoch count");

  CLI11_PARSE(app, argc, argv);

  if (sim->parsed()) {
    const NetworkConfig cfg = resolve_config(sim_config);
    const CorpusComposition comp =
        resolve_composition(sim_composition, sim_smoke);
    const auto corpus = build_corpus(cfg, comp, sim_seed);
    save_corpus_jsonl(corpus, sim_out);
    std::printf("wrote %zu snapshots to %s\n", corpus.size(), sim_out.c_str());
    return 0;
  }

  if (ds->parsed()) {
    if (ds_ratio != "3:1") {
      throw std::runtime_error("only the 3:1 split ratio is supported");
    }
    const auto corpus = load_corpus_jsonl(ds_in);
    const DatasetPair pair = build_datasets(corpus, ds_seed);
    save_dataset(pair.train, ds_out_train);
    save_dataset(pair.test, ds_out_test);
    std::printf("train %zu samples -> %s\ntest %zu samples -> %s\n",
                pair.train.samples.size(), ds_out_train.c_str(),
                pair.test.samples.size(), ds_out_test.c_str());
    return 0;
  }

  if (tr->parsed()) {
    const Dataset train_set = load_dataset(tr_train);
    const std::uint64_t init_seed = derive_seed(tr_seed, tr_model + "-init");
    auto model = make_model(tr_model, init_seed);
    AdamOpt adam(model->params());
    tr_cfg.shuffle_seed = derive_seed(tr_seed, tr_model + "-shuffle");
    const TrainResult result = train(*model, adam, train_set, tr_cfg);
    save_checkpoint(*model, adam, train_set.norm, init_seed, tr_checkpoint);
    std::printf("%s trained for %d epochs, final mean loss %.6f -> %s\n",
                tr_model.c_str(), tr_cfg.epochs, result.final_loss(),
                tr_checkpoint.c_str());
    return 0;
  }

  if (ev->parsed()) {
    LoadedCheckpoint loaded = load_checkpoint(ev_checkpoint);
    const Dataset test_set = load_dataset(ev_test);
    const EvalReport report = evaluate(*loaded.model, test_set);
    std::string rendered;
    if (ev_format == "json") {
      rendered = to_json(report).dump(2) + "\n";
    } else if (ev_format == "csv") {
      rendered = render_report_csv(report);
    } else {
      rendered = render_report_text(report);
    }
    if (ev_out.empty()) {
      std::cout << rendered;
    } else {
      write_text_file(ev_out, rendered);
    }
    return 0;
  }

  if (rp->parsed()) {
    auto load_report = [](const std::string& path) {
      std::ifstream in(path, std::ios::binary);
      if (!in) throw std::runtime_error("cannot open report: " + path);
      return eval_report_from_json(ordered_json::parse(in));
    };
    const ComparisonReport cmp =
        compare(load_report(rp_base), load_report(rp_cnn));
    const std::string text = render_comparison_text(cmp);
    if (rp_text.empty()) {
      std::cout << text;
    } else {
      write_text_file(rp_text, text);
    }
    if (!rp_csv.empty()) {
      write_text_file(rp_csv, render_comparison_csv(cmp));
    }
    return 0;
  }

  if (rpd->parsed()) {
    if (rpd_opt.out_dir.empty()) rpd_opt.out_dir = default_out_dir();
    const NetworkConfig cfg = resolve_config(rpd_config);
    const PipelineResult result = reproduce(cfg, rpd_opt);
    std::printf("corpus %s\n", result.corpus_path.c_str());
    std::printf("cnn  accuracy %.4f (%s)\n",
                result.cnn_report.overall_accuracy,
                result.cnn_checkpoint_path.c_str());
    std::printf("mlp  accuracy %.4f (%s)\n",
                result.mlp_report.overall_accuracy,
                result.mlp_checkpoint_path.c_str());
    std::printf("manifest %s (%.1f s)\n", result.manifest_path.c_str(),
                result.wall_seconds);
    if (!result.check_failures.empty()) {
      std::fprintf(stderr, "run checks FAILED:\n");
      for (const auto& f : result.check_failures) {
        std::fprintf(stderr, "  - %s\n", f.c_str());
      }
      return 1;
    }
    std::printf("run checks passed\n");
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
