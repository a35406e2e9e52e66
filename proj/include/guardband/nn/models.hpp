#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "guardband/dataset.hpp"
#include "guardband/nn/layers.hpp"
#include "guardband/nn/tensor.hpp"
#include "guardband/seeding.hpp"

// The two classifiers. Both consume a FeatureTensor and emit 4 logits;
// backward() expects d(loss)/d(logits) for the sample most recently pushed
// through forward() and accumulates parameter gradients in place.

namespace guardband {

class Model {
 public:
  virtual ~Model() = default;
  virtual std::string kind() const = 0;
  virtual std::vector<double> forward(const FeatureTensor& x) = 0;
  virtual void backward(const std::vector<double>& dlogits) = 0;
  virtual std::vector<Param*> params() = 0;

  void zero_grads() {
    for (Param* p : params()) p->zero_grad();
  }

  std::size_t param_count() {
    std::size_t n = 0;
    for (Param* p : params()) n += p->value.size();
    return n;
  }
};

namespace detail {

inline Tensor2 flatten_rows(const Tensor2& m) {
  Tensor2 out(1, m.rows() * m.cols());
  int i = 0;
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) out.at(0, i++) = m.at(r, c);
  }
  return out;
}

inline Tensor2 unflatten_rows(const Tensor2& flat, int offset, int rows,
                              int cols) {
  Tensor2 out(rows, cols);
  int i = offset;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) out.at(r, c) = flat.at(0, i++);
  }
  return out;
}

inline Tensor2 row_vector(const std::vector<double>& v) {
  Tensor2 out(1, static_cast<int>(v.size()));
  for (int i = 0; i < out.cols(); ++i) out.at(0, i) = v[i];
  return out;
}

}  // namespace detail

inline constexpr int kConvKernels = 3;
inline constexpr int kConvKernelSize = 5;
inline constexpr int kFcWidth = 200;

/// Two conv layers per branch (3 kernels of size 5, same padding, ReLU),
/// flatten + concatenate (4*3 + 6*3 = 30), Dense(30->200) with ReLU, then
/// Dense(200->4) into softmax.
class CnnModel : public Model {
 public:
  explicit CnnModel(std::uint64_t init_seed) {
    Rng rng(derive_seed(init_seed, std::string("cnn-init")));
    wl_conv1_ = Conv1dLayer(kTensorChannels, kConvKernels, kConvKernelSize, rng);
    wl_conv2_ = Conv1dLayer(kConvKernels, kConvKernels, kConvKernelSize, rng);
    comp_conv1_ = Conv1dLayer(kTensorChannels, kConvKernels, kConvKernelSize, rng);
    comp_conv2_ = Conv1dLayer(kConvKernels, kConvKernels, kConvKernelSize, rng);
    const int flat_dim = (kWavelengthRows + kComponentRows) * kConvKernels;
    fc1_ = DenseLayer(flat_dim, kFcWidth, rng);
    fc2_ = DenseLayer(kFcWidth, kClassCount, rng);
  }

  std::string kind() const override { return "cnn"; }

  std::vector<double> forward(const FeatureTensor& x) override {
    wl_pre1_ = wl_conv1_.forward(x.wavelength);
    wl_pre2_ = wl_conv2_.forward(relu(wl_pre1_));
    comp_pre1_ = comp_conv1_.forward(x.component);
    comp_pre2_ = comp_conv2_.forward(relu(comp_pre1_));

    const Tensor2 wl_flat = detail::flatten_rows(relu(wl_pre2_));
    const Tensor2 comp_flat = detail::flatten_rows(relu(comp_pre2_));
    Tensor2 flat(1, wl_flat.cols() + comp_flat.cols());
    for (int i = 0; i < wl_flat.cols(); ++i) flat.at(0, i) = wl_flat.at(0, i);
    for (int i = 0; i < comp_flat.cols(); ++i) {
      flat.at(0, wl_flat.cols() + i) = comp_flat.at(0, i);
    }
    fc1_pre_ = fc1_.forward(flat);
    const Tensor2 logits = fc2_.forward(relu(fc1_pre_));
    return logits.data();
  }

  void backward(const std::vector<double>& dlogits) override {
    const Tensor2 d_h = fc2_.backward(detail::row_vector(dlogits));
    const Tensor2 d_flat = fc1_.backward(relu_backward(d_h, fc1_pre_));

    const int wl_len = kWavelengthRows * kConvKernels;
    const Tensor2 d_wl2 = relu_backward(
        detail::unflatten_rows(d_flat, 0, kWavelengthRows, kConvKernels),
        wl_pre2_);
    const Tensor2 d_wl1 = relu_backward(wl_conv2_.backward(d_wl2), wl_pre1_);
    wl_conv1_.backward(d_wl1);

    const Tensor2 d_comp2 = relu_backward(
        detail::unflatten_rows(d_flat, wl_len, kComponentRows, kConvKernels),
        comp_pre2_);
    const Tensor2 d_comp1 =
        relu_backward(comp_conv2_.backward(d_comp2), comp_pre1_);
    comp_conv1_.backward(d_comp1);
  }

  std::vector<Param*> params() override {
    return {&wl_conv1_.weights(),   &wl_conv1_.bias(),
            &wl_conv2_.weights(),   &wl_conv2_.bias(),
            &comp_conv1_.weights(), &comp_conv1_.bias(),
            &comp_conv2_.weights(), &comp_conv2_.bias(),
            &fc1_.weights(),        &fc1_.bias(),
            &fc2_.weights(),        &fc2_.bias()};
  }

 private:
  Conv1dLayer wl_conv1_, wl_conv2_, comp_conv1_, comp_conv2_;
  DenseLayer fc1_, fc2_;
  Tensor2 wl_pre1_, wl_pre2_, comp_pre1_, comp_pre2_, fc1_pre_;
};

inline constexpr int kMlpHiddenWidth = 100;
inline constexpr int kMlpHiddenLayers = 4;

/// Baseline: both branches flattened into one 100-vector, 4 hidden dense
/// layers of 100 with ReLU, then Dense(100->4) into softmax.
class MlpModel : public Model {
 public:
  explicit MlpModel(std::uint64_t init_seed,
                    int hidden_width = kMlpHiddenWidth) {
    if (hidden_width < 1) {
      throw std::invalid_argument("MlpModel: hidden_width must be >= 1");
    }
    Rng rng(derive_seed(init_seed, std::string("mlp-init")));
    const int in_dim =
        (kWavelengthRows + kComponentRows) * kTensorChannels;  // 100
    int dim = in_dim;
    for (int i = 0; i < kMlpHiddenLayers; ++i) {
      hidden_[i] = DenseLayer(dim, hidden_width, rng);
      dim = hidden_width;
    }
    out_ = DenseLayer(dim, kClassCount, rng);
  }

  std::string kind() const override { return "mlp"; }

  std::vector<double> forward(const FeatureTensor& x) override {
    const Tensor2 wl_flat = detail::flatten_rows(x.wavelength);
    const Tensor2 comp_flat = detail::flatten_rows(x.component);
    Tensor2 h(1, wl_flat.cols() + comp_flat.cols());
    for (int i = 0; i < wl_flat.cols(); ++i) h.at(0, i) = wl_flat.at(0, i);
    for (int i = 0; i < comp_flat.cols(); ++i) {
      h.at(0, wl_flat.cols() + i) = comp_flat.at(0, i);
    }
    for (int i = 0; i < kMlpHiddenLayers; ++i) {
      pre_[i] = hidden_[i].forward(h);
      h = relu(pre_[i]);
    }
    const Tensor2 logits = out_.forward(h);
    return logits.data();
  }

  void backward(const std::vector<double>& dlogits) override {
    Tensor2 d = out_.backward(detail::row_vector(dlogits));
    for (int i = kMlpHiddenLayers - 1; i >= 0; --i) {
      d = hidden_[i].backward(relu_backward(d, pre_[i]));
    }
  }

  std::vector<Param*> params() override {
    std::vector<Param*> out;
    for (int i = 0; i < kMlpHiddenLayers; ++i) {
      out.push_back(&hidden_[i].weights());
      out.push_back(&hidden_[i].bias());
    }
    out.push_back(&out_.weights());
    out.push_back(&out_.bias());
    return out;
  }

 private:
  DenseLayer hidden_[kMlpHiddenLayers];
  DenseLayer out_;
  Tensor2 pre_[kMlpHiddenLayers];
};

inline std::unique_ptr<Model> make_model(const std::string& kind,
                                         std::uint64_t init_seed) {
  if (kind == "cnn") return std::make_unique<CnnModel>(init_seed);
  if (kind == "mlp") return std::make_unique<MlpModel>(init_seed);
  throw std::invalid_argument("unknown model kind: " + kind);
}

}  // namespace guardband
