#pragma once

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "guardband/dataset.hpp"
#include "guardband/nn/adam.hpp"
#include "guardband/nn/models.hpp"
#include "guardband/seeding.hpp"

// Mini-batch training loop (defaults: 1200 epochs, batch 32, lr 0.001)
// and the central-finite-difference gradient checker used to validate
// the hand-written backprop.

namespace guardband {

struct TrainConfig {
  int epochs = 1200;
  int batch_size = 32;
  std::uint64_t shuffle_seed = 0;
};

struct TrainResult {
  std::vector<double> epoch_mean_loss;
  double final_loss() const {
    return epoch_mean_loss.empty() ? 0.0 : epoch_mean_loss.back();
  }
};

/// Mean cross-entropy over a sample range, accumulating mean-loss gradients
/// when `accumulate_grads` is set. Returns the mean loss.
inline double run_batch(Model& model, const std::vector<FeatureTensor>& samples,
                        const std::vector<int>& order, int begin, int end,
                        bool accumulate_grads) {
  const int n = end - begin;
  if (n <= 0) throw std::invalid_argument("run_batch: empty batch");
  double loss_sum = 0.0;
  for (int i = begin; i < end; ++i) {
    const FeatureTensor& x = samples[order[i]];
    const std::vector<double> logits = model.forward(x);
    const std::vector<double> probs = softmax(logits);
    loss_sum += cross_entropy(probs, x.label);
    if (accumulate_grads) {
      std::vector<double> dlogits(probs.size());
      for (std::size_t c = 0; c < probs.size(); ++c) {
        dlogits[c] = (probs[c] - (static_cast<int>(c) == x.label ? 1.0 : 0.0)) /
                     static_cast<double>(n);
      }
      model.backward(dlogits);
    }
  }
  return loss_sum / n;
}

/// Train in place. Epoch shuffles derive from (shuffle_seed, epoch), so the
/// whole trajectory is a function of the init and shuffle seeds. Numeric
/// faults abort with the epoch and batch where they appeared.
inline TrainResult train(Model& model, AdamOpt& opt, const Dataset& train_set,
                         const TrainConfig& cfg) {
  if (train_set.samples.empty()) {
    throw std::domain_error("train: empty training set");
  }
  if (cfg.epochs < 1 || cfg.batch_size < 1) {
    throw std::domain_error("train: epochs and batch_size must be >= 1");
  }
  const int n = static_cast<int>(train_set.samples.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng rng(derive_seed(cfg.shuffle_seed,
                        static_cast<std::uint64_t>(epoch)));
    fisher_yates(order, rng);
    double loss_sum = 0.0;
    int batch_index = 0;
    for (int begin = 0; begin < n; begin += cfg.batch_size, ++batch_index) {
      const int end = std::min(begin + cfg.batch_size, n);
      try {
        model.zero_grads();
        const double batch_loss =
            run_batch(model, train_set.samples, order, begin, end, true);
        opt.step(model.params());
        loss_sum += batch_loss * (end - begin);
      } catch (const numeric_fault& e) {
        throw numeric_fault("epoch " + std::to_string(epoch) + " batch " +
                            std::to_string(batch_index) + ": " + e.what());
      }
    }
    const double epoch_loss = loss_sum / n;
    if (!std::isfinite(epoch_loss)) {
      throw numeric_fault("epoch " + std::to_string(epoch) +
                          ": non-finite mean loss");
    }
    result.epoch_mean_loss.push_back(epoch_loss);
  }
  return result;
}

struct GradCheckResult {
  double max_rel_err = 0.0;
  std::size_t params_checked = 0;
};

/// Compare every analytic parameter gradient against central finite
/// differences of the mean batch loss. rel err = |analytic - fd| /
/// (|fd| + 1e-8).
inline GradCheckResult gradient_check(Model& model,
                                      const std::vector<FeatureTensor>& batch,
                                      double h = 1e-5) {
  if (batch.empty()) throw std::domain_error("gradient_check: empty batch");
  std::vector<int> order(batch.size());
  std::iota(order.begin(), order.end(), 0);
  const int n = static_cast<int>(batch.size());

  model.zero_grads();
  run_batch(model, batch, order, 0, n, true);
  std::vector<Tensor2> analytic;
  for (Param* p : model.params()) analytic.push_back(p->grad);

  GradCheckResult result;
  const std::vector<Param*> params = model.params();
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    for (std::size_t i = 0; i < params[pi]->value.data().size(); ++i) {
      double& theta = params[pi]->value.data()[i];
      const double saved = theta;
      theta = saved + h;
      const double loss_plus = run_batch(model, batch, order, 0, n, false);
      theta = saved - h;
      const double loss_minus = run_batch(model, batch, order, 0, n, false);
      theta = saved;
      const double fd = (loss_plus - loss_minus) / (2.0 * h);
      const double rel = std::abs(analytic[pi].data()[i] - fd) /
                         (std::abs(fd) + 1e-8);
      result.max_rel_err = std::max(result.max_rel_err, rel);
      ++result.params_checked;
    }
  }
  return result;
}

/// Seeded synthetic inputs at normalized scale, for self-contained gradient
/// and determinism tests.
inline std::vector<FeatureTensor> synthetic_batch(int count,
                                                  std::uint64_t seed) {
  Rng rng(seed);
  std::vector<FeatureTensor> batch;
  for (int i = 0; i < count; ++i) {
    FeatureTensor t;
    t.label = static_cast<int>(rng.bounded(kClassCount));
    t.wavelength = Tensor2(kWavelengthRows, kTensorChannels);
    t.component = Tensor2(kComponentRows, kTensorChannels);
    for (double& v : t.wavelength.data()) v = rng.gaussian(0.0, 1.0);
    for (double& v : t.component.data()) v = rng.gaussian(0.0, 1.0);
    batch.push_back(std::move(t));
  }
  return batch;
}

}  // namespace guardband
