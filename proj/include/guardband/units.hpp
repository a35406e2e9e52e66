#pragma once

#include <cmath>
#include <span>
#include <stdexcept>

namespace guardband {

/// dB -> linear power ratio (also dBm -> mW).
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

/// Linear power ratio -> dB. Throws std::domain_error for ratio <= 0.
inline double linear_to_db(double ratio) {
  if (!(ratio > 0.0)) {
    throw std::domain_error("linear_to_db: ratio must be positive");
  }
  return 10.0 * std::log10(ratio);
}

inline double dbm_to_mw(double dbm) { return db_to_linear(dbm); }
inline double mw_to_dbm(double mw) { return linear_to_db(mw); }

/// Combine per-stage OSNRs: 1/OSNR_total = sum 1/OSNR_i in linear units,
/// result back in dB. Throws std::domain_error on an empty or non-finite
/// stage list. The result never exceeds the smallest input.
inline double accumulate_osnr(std::span<const double> stage_osnr_db) {
  if (stage_osnr_db.empty()) {
    throw std::domain_error("accumulate_osnr: no stages");
  }
  double inv_sum = 0.0;
  for (double stage : stage_osnr_db) {
    if (!std::isfinite(stage)) {
      throw std::domain_error("accumulate_osnr: non-finite stage OSNR");
    }
    inv_sum += 1.0 / db_to_linear(stage);
  }
  return linear_to_db(1.0 / inv_sum);
}

}  // namespace guardband
