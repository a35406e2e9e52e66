#pragma once

#include <fstream>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "guardband/dataset.hpp"
#include "guardband/nn/adam.hpp"
#include "guardband/nn/models.hpp"
#include "guardband/version.hpp"

// Versioned JSON checkpoints: model kind, every parameter tensor, Adam
// moments and step counter, plus the dataset normalization parameters the
// model was trained with. Doubles are serialized round-trip exact, so
// save -> load -> forward reproduces logits bit for bit.

namespace guardband {

struct LoadedCheckpoint {
  std::unique_ptr<Model> model;
  AdamOpt optimizer;
  NormParams norm;
  std::uint64_t init_seed = 0;
};

namespace detail {

inline ordered_json tensor_to_json(const Tensor2& t) {
  return ordered_json{{"rows", t.rows()}, {"cols", t.cols()},
                      {"data", t.data()}};
}

inline Tensor2 tensor_from_json(const ordered_json& j) {
  Tensor2 t(j.at("rows").get<int>(), j.at("cols").get<int>());
  const auto data = j.at("data").get<std::vector<double>>();
  if (data.size() != t.size()) {
    throw std::runtime_error("checkpoint tensor: data length mismatch");
  }
  t.data() = data;
  return t;
}

}  // namespace detail

inline void save_checkpoint(Model& model, AdamOpt& opt,
                            const NormParams& norm, std::uint64_t init_seed,
                            const std::string& path) {
  const std::vector<Param*> params = model.params();
  auto& m = opt.first_moments();
  auto& v = opt.second_moments();
  if (m.size() != params.size() || v.size() != params.size()) {
    throw std::invalid_argument("save_checkpoint: optimizer/model mismatch");
  }
  ordered_json jparams = ordered_json::array();
  for (std::size_t i = 0; i < params.size(); ++i) {
    jparams.push_back(ordered_json{{"value", detail::tensor_to_json(params[i]->value)},
                                   {"m", detail::tensor_to_json(m[i])},
                                   {"v", detail::tensor_to_json(v[i])}});
  }
  const AdamHyper& hp = opt.hyper();
  const ordered_json doc{
      {"schema_version", kSchemaVersion},
      {"tool_version", kToolVersion},
      {"model_kind", model.kind()},
      {"init_seed", init_seed},
      {"adam",
       ordered_json{{"t", opt.step_count()},
                    {"lr", hp.lr},
                    {"beta1", hp.beta1},
                    {"beta2", hp.beta2},
                    {"epsilon", hp.epsilon}}},
      {"norm_params", to_json(norm)},
      {"params", jparams}};
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << doc.dump() << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  const ordered_json doc = ordered_json::parse(in);
  const int version = doc.at("schema_version").get<int>();
  if (version != kSchemaVersion) {
    throw std::runtime_error("unsupported checkpoint schema_version " +
                             std::to_string(version));
  }
  LoadedCheckpoint out;
  out.init_seed = doc.at("init_seed").get<std::uint64_t>();
  out.model = make_model(doc.at("model_kind").get<std::string>(), out.init_seed);
  out.norm = norm_params_from_json(doc.at("norm_params"));

  const std::vector<Param*> params = out.model->params();
  const auto& jparams = doc.at("params");
  if (jparams.size() != params.size()) {
    throw std::runtime_error("checkpoint: parameter count mismatch");
  }
  AdamHyper hp;
  const auto& jadam = doc.at("adam");
  hp.lr = jadam.at("lr").get<double>();
  hp.beta1 = jadam.at("beta1").get<double>();
  hp.beta2 = jadam.at("beta2").get<double>();
  hp.epsilon = jadam.at("epsilon").get<double>();
  out.optimizer = AdamOpt(params, hp);
  out.optimizer.set_step_count(jadam.at("t").get<std::int64_t>());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Tensor2 value = detail::tensor_from_json(jparams.at(i).at("value"));
    if (!value.same_shape(params[i]->value)) {
      throw std::runtime_error("checkpoint: tensor shape mismatch at index " +
                               std::to_string(i));
    }
    params[i]->value = value;
    out.optimizer.first_moments()[i] =
        detail::tensor_from_json(jparams.at(i).at("m"));
    out.optimizer.second_moments()[i] =
        detail::tensor_from_json(jparams.at(i).at("v"));
  }
  return out;
}

}  // namespace guardband
