#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "guardband/nn/tensor.hpp"
#include "guardband/seeding.hpp"

// Layers for the two desk-scale classifiers. Everything is sample-at-a-time:
// forward() caches what backward() needs, backward() accumulates into the
// layer's grad tensors and returns the gradient w.r.t. its input. Callers
// zero grads, loop a batch, and hand the accumulated grads to the optimizer.

namespace guardband {

struct Param {
  Tensor2 value;
  Tensor2 grad;

  void init_shape(int rows, int cols) {
    value = Tensor2(rows, cols);
    grad = Tensor2(rows, cols);
  }

  void zero_grad() { grad.fill(0.0); }
};

/// Glorot-uniform fill: +-sqrt(6 / (fan_in + fan_out)).
inline void glorot_fill(Tensor2& t, int fan_in, int fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  for (double& v : t.data()) v = (rng.uniform01() * 2.0 - 1.0) * limit;
}

inline double relu(double x) { return x > 0.0 ? x : 0.0; }

inline Tensor2 relu(const Tensor2& x) {
  Tensor2 out = x;
  for (double& v : out.data()) v = relu(v);
  return out;
}

/// Gradient of relu at pre-activation x (subgradient 0 at 0).
inline Tensor2 relu_backward(const Tensor2& dout, const Tensor2& pre) {
  dout.require_same_shape(pre, "relu_backward");
  Tensor2 din = dout;
  for (std::size_t i = 0; i < din.data().size(); ++i) {
    if (pre.data()[i] <= 0.0) din.data()[i] = 0.0;
  }
  return din;
}

/// Max-subtracted softmax; output sums to 1.
inline std::vector<double> softmax(const std::vector<double>& logits) {
  if (logits.empty()) throw std::invalid_argument("softmax: empty logits");
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> probs(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    probs[i] = std::exp(logits[i] - top);
    sum += probs[i];
  }
  for (double& p : probs) p /= sum;
  return probs;
}

/// -log(probs[label]) with a 1e-12 probability floor.
inline double cross_entropy(const std::vector<double>& probs, int label) {
  if (label < 0 || label >= static_cast<int>(probs.size())) {
    throw std::invalid_argument("cross_entropy: label out of range");
  }
  const double p = std::max(probs[label], 1e-12);
  const double loss = -std::log(p);
  if (!std::isfinite(loss)) throw numeric_fault("cross_entropy: non-finite loss");
  return loss;
}

/// Zero-padded "same"-length 1D cross-correlation over a [seq x channels]
/// input with kernel_count independent kernels. Weight layout: row k holds
/// kernel k as [channel][tap], taps contiguous per channel.
class Conv1dLayer {
 public:
  Conv1dLayer() = default;
  Conv1dLayer(int in_channels, int kernel_count, int kernel_size, Rng& rng)
      : in_channels_(in_channels),
        kernel_count_(kernel_count),
        kernel_size_(kernel_size) {
    if (kernel_size % 2 == 0) {
      throw std::invalid_argument("Conv1dLayer: kernel_size must be odd");
    }
    weights_.init_shape(kernel_count, in_channels * kernel_size);
    bias_.init_shape(1, kernel_count);
    glorot_fill(weights_.value, in_channels * kernel_size,
                kernel_count * kernel_size, rng);
  }

  int in_channels() const { return in_channels_; }
  int kernel_count() const { return kernel_count_; }
  int kernel_size() const { return kernel_size_; }
  Param& weights() { return weights_; }
  Param& bias() { return bias_; }

  double weight(int kernel, int channel, int tap) const {
    return weights_.value.at(kernel, channel * kernel_size_ + tap);
  }
  double& weight(int kernel, int channel, int tap) {
    return weights_.value.at(kernel, channel * kernel_size_ + tap);
  }

  Tensor2 forward(const Tensor2& in) {
    if (in.cols() != in_channels_) {
      throw std::invalid_argument("Conv1dLayer::forward: expected " +
                                  std::to_string(in_channels_) +
                                  " channels, got " + std::to_string(in.cols()));
    }
    cached_in_ = in;
    const int seq = in.rows();
    const int half = kernel_size_ / 2;
    Tensor2 out(seq, kernel_count_);
    const double* in_p = in.data().data();
    const double* w_p = weights_.value.data().data();
    double* out_p = out.data().data();
    for (int t = 0; t < seq; ++t) {
      for (int k = 0; k < kernel_count_; ++k) {
        double acc = bias_.value.data()[k];
        const double* wk = w_p + k * in_channels_ * kernel_size_;
        for (int dt = 0; dt < kernel_size_; ++dt) {
          const int s = t + dt - half;
          if (s < 0 || s >= seq) continue;  // zero padding
          const double* row = in_p + s * in_channels_;
          for (int c = 0; c < in_channels_; ++c) {
            acc += row[c] * wk[c * kernel_size_ + dt];
          }
        }
        out_p[t * kernel_count_ + k] = acc;
      }
    }
    out.check_finite("Conv1dLayer::forward");
    return out;
  }

  Tensor2 backward(const Tensor2& dout) {
    const int seq = cached_in_.rows();
    if (dout.rows() != seq || dout.cols() != kernel_count_) {
      throw std::invalid_argument("Conv1dLayer::backward: bad gradient shape");
    }
    const int half = kernel_size_ / 2;
    Tensor2 din(seq, in_channels_);
    const double* in_p = cached_in_.data().data();
    const double* w_p = weights_.value.data().data();
    double* wg_p = weights_.grad.data().data();
    double* din_p = din.data().data();
    for (int t = 0; t < seq; ++t) {
      for (int k = 0; k < kernel_count_; ++k) {
        const double g = dout.data()[t * kernel_count_ + k];
        bias_.grad.data()[k] += g;
        const double* wk = w_p + k * in_channels_ * kernel_size_;
        double* wgk = wg_p + k * in_channels_ * kernel_size_;
        for (int dt = 0; dt < kernel_size_; ++dt) {
          const int s = t + dt - half;
          if (s < 0 || s >= seq) continue;
          const double* in_row = in_p + s * in_channels_;
          double* din_row = din_p + s * in_channels_;
          for (int c = 0; c < in_channels_; ++c) {
            wgk[c * kernel_size_ + dt] += g * in_row[c];
            din_row[c] += g * wk[c * kernel_size_ + dt];
          }
        }
      }
    }
    return din;
  }

 private:
  int in_channels_ = 0;
  int kernel_count_ = 0;
  int kernel_size_ = 0;
  Param weights_;
  Param bias_;
  Tensor2 cached_in_;
};

/// Fully connected layer over a row vector: out = in * W^T + b.
class DenseLayer {
 public:
  DenseLayer() = default;
  DenseLayer(int in_dim, int out_dim, Rng& rng)
      : in_dim_(in_dim), out_dim_(out_dim) {
    weights_.init_shape(out_dim, in_dim);
    bias_.init_shape(1, out_dim);
    glorot_fill(weights_.value, in_dim, out_dim, rng);
  }

  int in_dim() const { return in_dim_; }
  int out_dim() const { return out_dim_; }
  Param& weights() { return weights_; }
  Param& bias() { return bias_; }

  Tensor2 forward(const Tensor2& in) {
    if (in.rows() != 1 || in.cols() != in_dim_) {
      throw std::invalid_argument("DenseLayer::forward: expected 1x" +
                                  std::to_string(in_dim_) + ", got " +
                                  in.shape_string());
    }
    cached_in_ = in;
    Tensor2 out(1, out_dim_);
    const double* in_p = in.data().data();
    const double* w_p = weights_.value.data().data();
    for (int o = 0; o < out_dim_; ++o) {
      double acc = bias_.value.data()[o];
      const double* row = w_p + o * in_dim_;
      for (int i = 0; i < in_dim_; ++i) {
        acc += in_p[i] * row[i];
      }
      out.data()[o] = acc;
    }
    out.check_finite("DenseLayer::forward");
    return out;
  }

  Tensor2 backward(const Tensor2& dout) {
    if (dout.rows() != 1 || dout.cols() != out_dim_) {
      throw std::invalid_argument("DenseLayer::backward: bad gradient shape");
    }
    Tensor2 din(1, in_dim_);
    const double* in_p = cached_in_.data().data();
    const double* w_p = weights_.value.data().data();
    double* wg_p = weights_.grad.data().data();
    double* din_p = din.data().data();
    for (int o = 0; o < out_dim_; ++o) {
      const double g = dout.data()[o];
      bias_.grad.data()[o] += g;
      const double* w_row = w_p + o * in_dim_;
      double* wg_row = wg_p + o * in_dim_;
      for (int i = 0; i < in_dim_; ++i) {
        wg_row[i] += g * in_p[i];
        din_p[i] += g * w_row[i];
      }
    }
    return din;
  }

 private:
  int in_dim_ = 0;
  int out_dim_ = 0;
  Param weights_;
  Param bias_;
  Tensor2 cached_in_;
};

}  // namespace guardband
