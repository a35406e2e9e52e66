#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

// Sinusoidal positional encoding, dimensionality 2. With dim = 2 there is a
// single frequency and the divisor is base^0 = 1, so the encoding collapses
// to [sin(pos), cos(pos)]; base stays configurable for future dims but is
// inert here.

namespace guardband {

inline constexpr int kPosEncDim = 2;

struct PositionalEncoding {
  int dim = kPosEncDim;
  double base = 10000.0;
};

inline std::array<double, kPosEncDim> encode(int pos,
                                             const PositionalEncoding& pe = {}) {
  if (pos < 0) throw std::domain_error("encode: position must be >= 0");
  if (pe.dim != kPosEncDim) {
    throw std::domain_error("encode: only dim 2 is supported");
  }
  if (pe.base <= 1.0) throw std::domain_error("encode: base must be > 1");
  const double divisor = std::pow(pe.base, 0.0 / pe.dim);  // = 1 at dim 2
  const double angle = static_cast<double>(pos) / divisor;
  return {std::sin(angle), std::cos(angle)};
}

}  // namespace guardband
