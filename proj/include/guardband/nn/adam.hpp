#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "guardband/nn/layers.hpp"
#include "guardband/nn/tensor.hpp"

// Adam with the fixed hyperparameters of the experiment. The single-tensor
// update is exposed separately so it can be checked against a hand-computed
// step; the optimizer just applies it across a parameter list.

namespace guardband {

struct AdamHyper {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// One bias-corrected Adam update for a single tensor. `t` must already be
/// incremented to the step being taken (>= 1). epsilon sits outside the
/// square root: theta -= lr * m_hat / (sqrt(v_hat) + eps).
inline void adam_update(Tensor2& value, const Tensor2& grad, Tensor2& m,
                        Tensor2& v, std::int64_t t, const AdamHyper& hp) {
  value.require_same_shape(grad, "adam_update");
  value.require_same_shape(m, "adam_update");
  value.require_same_shape(v, "adam_update");
  if (t < 1) throw std::invalid_argument("adam_update: step must be >= 1");
  const double bc1 = 1.0 - std::pow(hp.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(hp.beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < value.data().size(); ++i) {
    const double g = grad.data()[i];
    if (!std::isfinite(g)) throw numeric_fault("adam_update: non-finite gradient");
    m.data()[i] = hp.beta1 * m.data()[i] + (1.0 - hp.beta1) * g;
    v.data()[i] = hp.beta2 * v.data()[i] + (1.0 - hp.beta2) * g * g;
    const double m_hat = m.data()[i] / bc1;
    const double v_hat = v.data()[i] / bc2;
    value.data()[i] -= hp.lr * m_hat / (std::sqrt(v_hat) + hp.epsilon);
  }
  value.check_finite("adam_update");
}

/// Optimizer state for an ordered parameter list. The list order must stay
/// stable across the whole run (checkpointing relies on it too).
class AdamOpt {
 public:
  AdamOpt() = default;
  explicit AdamOpt(const std::vector<Param*>& params, AdamHyper hp = {})
      : hyper_(hp) {
    for (const Param* p : params) {
      m_.emplace_back(p->value.rows(), p->value.cols());
      v_.emplace_back(p->value.rows(), p->value.cols());
    }
  }

  std::int64_t step_count() const { return t_; }
  const AdamHyper& hyper() const { return hyper_; }
  std::vector<Tensor2>& first_moments() { return m_; }
  std::vector<Tensor2>& second_moments() { return v_; }
  void set_step_count(std::int64_t t) { t_ = t; }

  void step(const std::vector<Param*>& params) {
    if (params.size() != m_.size()) {
      throw std::invalid_argument("AdamOpt::step: parameter list changed size");
    }
    ++t_;
    for (std::size_t i = 0; i < params.size(); ++i) {
      adam_update(params[i]->value, params[i]->grad, m_[i], v_[i], t_, hyper_);
    }
  }

 private:
  AdamHyper hyper_;
  std::int64_t t_ = 0;
  std::vector<Tensor2> m_;
  std::vector<Tensor2> v_;
};

}  // namespace guardband
