#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

// Minimal dense row-major matrix used for activations, weights and
// gradients. Any operation that would produce or consume a NaN/Inf raises
// numeric_fault instead of silently propagating it.

namespace guardband {

struct numeric_fault : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Tensor2 {
 public:
  Tensor2() = default;
  Tensor2(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols),
        data_(static_cast<std::size_t>(rows) * cols, fill) {
    if (rows < 0 || cols < 0) {
      throw std::invalid_argument("Tensor2: negative shape");
    }
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& at(int r, int c) { return data_[index(r, c)]; }
  double at(int r, int c) const { return data_[index(r, c)]; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool same_shape(const Tensor2& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  void check_finite(const std::string& where) const {
    for (double v : data_) {
      if (!std::isfinite(v)) {
        throw numeric_fault("non-finite value in " + where);
      }
    }
  }

  void fill(double value) {
    for (double& v : data_) v = value;
  }

  Tensor2& operator+=(const Tensor2& other) {
    require_same_shape(other, "operator+=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
  }

  Tensor2& operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
  }

  void require_same_shape(const Tensor2& other, const std::string& where) const {
    if (!same_shape(other)) {
      throw std::invalid_argument(
          where + ": shape mismatch " + shape_string() + " vs " +
          other.shape_string());
    }
  }

  std::string shape_string() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
  }

 private:
  std::size_t index(int r, int c) const {
    if (r < 0 || r >= rows_ || c < 0 || c >= cols_) {
      throw std::out_of_range("Tensor2: index (" + std::to_string(r) + "," +
                              std::to_string(c) + ") outside " +
                              shape_string());
    }
    return static_cast<std::size_t>(r) * cols_ + c;
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

}  // namespace guardband
