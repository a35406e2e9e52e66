#pragma once

#include <array>
#include <cstdint>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "guardband/dataset.hpp"
#include "guardband/nn/models.hpp"
#include "guardband/seeding.hpp"
#include "guardband/version.hpp"

// Evaluation: argmax predictions (ties to the lowest class index), raw
// confusion counts and everything derived from them, plus the
// per-impairment-type breakdown table comparing the baseline MLP against
// the CNN. Classes never predicted get flagged-undefined precision instead
// of a silent 0.

namespace guardband {

struct ClassMetric {
  long support = 0;           // true members in the test set
  long predicted = 0;         // times the class was predicted
  long tp = 0;
  double precision = 0.0;     // valid iff precision_defined
  double recall = 0.0;        // valid iff support > 0
  bool precision_defined = false;
  bool recall_defined = false;
};

struct BreakdownRow {
  ImpairmentKind kind = ImpairmentKind::None;
  int cls = 0;  // class index the row scores (0 for the no-impairment row)
  long support = 0;
  ClassMetric metric;
};

struct EvalReport {
  long total = 0;
  std::array<std::array<long, kClassCount>, kClassCount> counts{};  // [true][pred]
  double overall_accuracy = 0.0;
  double impaired_only_accuracy = 0.0;  // over samples with true label != 0
  long impaired_total = 0;
  std::array<ClassMetric, kClassCount> per_class{};
  std::array<std::array<double, kClassCount>, kClassCount> confusion_row_norm{};
  std::array<bool, kClassCount> row_has_support{};
  std::vector<BreakdownRow> breakdown;  // 1 no-imp + 3 ramp + 3 add/drop
  std::uint64_t test_fingerprint = 0;   // hash of (label, kind) sequence
};

/// Argmax with ties broken toward the lowest class index.
inline int predict_class(const std::vector<double>& logits) {
  if (logits.empty()) throw std::invalid_argument("predict_class: no logits");
  int best = 0;
  for (int i = 1; i < static_cast<int>(logits.size()); ++i) {
    if (logits[i] > logits[best]) best = i;
  }
  return best;
}

/// Identity of a test set for split-mismatch detection: order-sensitive
/// hash of every sample's (label, impairment kind).
inline std::uint64_t test_set_fingerprint(const Dataset& ds) {
  std::string blob;
  blob.reserve(ds.samples.size() * 4);
  for (const auto& s : ds.samples) {
    blob.push_back(static_cast<char>('0' + s.label));
    blob.push_back(static_cast<char>('a' + static_cast<int>(s.impairment_kind)));
  }
  return fnv1a64(blob);
}

namespace detail {

inline ClassMetric class_metric_from_counts(
    const std::array<std::array<long, kClassCount>, kClassCount>& counts,
    int cls) {
  ClassMetric m;
  for (int t = 0; t < kClassCount; ++t) {
    for (int p = 0; p < kClassCount; ++p) {
      if (t == cls) m.support += counts[t][p];
      if (p == cls) m.predicted += counts[t][p];
    }
  }
  m.tp = counts[cls][cls];
  if (m.predicted > 0) {
    m.precision = static_cast<double>(m.tp) / static_cast<double>(m.predicted);
    m.precision_defined = true;
  }
  if (m.support > 0) {
    m.recall = static_cast<double>(m.tp) / static_cast<double>(m.support);
    m.recall_defined = true;
  }
  return m;
}

}  // namespace detail

/// Build a report from per-sample truths, predictions and kind metadata.
/// The breakdown row for (kind, user) restricts the test set to samples
/// whose scenario kind is `kind` or none, then scores the user's class on
/// that subset; the no-impairment row scores class 0 on the full set.
inline EvalReport report_from_predictions(
    const std::vector<int>& truths, const std::vector<int>& preds,
    const std::vector<ImpairmentKind>& kinds) {
  if (truths.empty()) throw std::domain_error("evaluate: empty test set");
  if (truths.size() != preds.size() || truths.size() != kinds.size()) {
    throw std::invalid_argument("report_from_predictions: length mismatch");
  }
  EvalReport r;
  r.total = static_cast<long>(truths.size());
  for (std::size_t i = 0; i < truths.size(); ++i) {
    if (truths[i] < 0 || truths[i] >= kClassCount || preds[i] < 0 ||
        preds[i] >= kClassCount) {
      throw std::invalid_argument("report_from_predictions: class out of range");
    }
    r.counts[truths[i]][preds[i]] += 1;
  }

  long correct = 0;
  for (int c = 0; c < kClassCount; ++c) correct += r.counts[c][c];
  r.overall_accuracy = static_cast<double>(correct) / r.total;

  long impaired_correct = 0;
  for (int t = 1; t < kClassCount; ++t) {
    for (int p = 0; p < kClassCount; ++p) {
      r.impaired_total += r.counts[t][p];
      if (t == p) impaired_correct += r.counts[t][p];
    }
  }
  r.impaired_only_accuracy =
      r.impaired_total > 0
          ? static_cast<double>(impaired_correct) / r.impaired_total
          : 0.0;

  for (int c = 0; c < kClassCount; ++c) {
    r.per_class[c] = detail::class_metric_from_counts(r.counts, c);
    long row_total = 0;
    for (int p = 0; p < kClassCount; ++p) row_total += r.counts[c][p];
    r.row_has_support[c] = row_total > 0;
    for (int p = 0; p < kClassCount; ++p) {
      r.confusion_row_norm[c][p] =
          row_total > 0 ? static_cast<double>(r.counts[c][p]) / row_total : 0.0;
    }
  }

  for (ImpairmentKind kind :
       {ImpairmentKind::None, ImpairmentKind::PowerRamp,
        ImpairmentKind::AddDrop}) {
    const int first_cls = kind == ImpairmentKind::None ? 0 : 1;
    const int last_cls = kind == ImpairmentKind::None ? 0 : kClassCount - 1;
    for (int cls = first_cls; cls <= last_cls; ++cls) {
      std::array<std::array<long, kClassCount>, kClassCount> sub{};
      for (std::size_t i = 0; i < truths.size(); ++i) {
        if (kind != ImpairmentKind::None &&
            kinds[i] != ImpairmentKind::None && kinds[i] != kind) {
          continue;
        }
        sub[truths[i]][preds[i]] += 1;
      }
      BreakdownRow row;
      row.kind = kind;
      row.cls = cls;
      row.metric = detail::class_metric_from_counts(sub, cls);
      row.support = row.metric.support;
      r.breakdown.push_back(row);
    }
  }

  std::string blob;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    blob.push_back(static_cast<char>('0' + truths[i]));
    blob.push_back(static_cast<char>('a' + static_cast<int>(kinds[i])));
  }
  r.test_fingerprint = fnv1a64(blob);
  return r;
}

inline EvalReport evaluate(Model& model, const Dataset& test) {
  if (test.samples.empty()) throw std::domain_error("evaluate: empty test set");
  std::vector<int> truths, preds;
  std::vector<ImpairmentKind> kinds;
  for (const auto& s : test.samples) {
    truths.push_back(s.label);
    preds.push_back(predict_class(model.forward(s)));
    kinds.push_back(s.impairment_kind);
  }
  return report_from_predictions(truths, preds, kinds);
}

// ---- comparison (baseline vs CNN) ----

struct ComparisonReport {
  EvalReport base;
  EvalReport cnn;
};

/// Side-by-side table; refuses reports that were not produced on the same
/// test set.
inline ComparisonReport compare(const EvalReport& base,
                                const EvalReport& cnn) {
  if (base.test_fingerprint != cnn.test_fingerprint ||
      base.total != cnn.total) {
    throw std::invalid_argument(
        "compare: reports come from different test sets");
  }
  return ComparisonReport{base, cnn};
}

namespace detail {

inline std::string pct(const ClassMetric& m, bool precision) {
  const bool defined = precision ? m.precision_defined : m.recall_defined;
  if (!defined) return "n/a";
  std::ostringstream os;
  os << std::fixed << std::setprecision(1)
     << (precision ? m.precision : m.recall) * 100.0;
  return os.str();
}

inline std::string breakdown_row_name(const BreakdownRow& row) {
  if (row.kind == ImpairmentKind::None) return "No Impairment";
  const std::string kind_name =
      row.kind == ImpairmentKind::PowerRamp ? "Power Increase" : "ADD/DROP";
  return kind_name + " User-" + std::to_string(row.cls);
}

}  // namespace detail

inline std::string render_comparison_text(const ComparisonReport& cmp) {
  std::ostringstream os;
  os << std::left << std::setw(24) << "Impairment" << std::right
     << std::setw(10) << "Base P%" << std::setw(10) << "Base R%"
     << std::setw(10) << "CNN P%" << std::setw(10) << "CNN R%" << "\n";
  for (std::size_t i = 0; i < cmp.base.breakdown.size(); ++i) {
    const auto& b = cmp.base.breakdown[i];
    const auto& c = cmp.cnn.breakdown[i];
    os << std::left << std::setw(24) << detail::breakdown_row_name(b)
       << std::right << std::setw(10) << detail::pct(b.metric, true)
       << std::setw(10) << detail::pct(b.metric, false) << std::setw(10)
       << detail::pct(c.metric, true) << std::setw(10)
       << detail::pct(c.metric, false) << "\n";
  }
  os << std::fixed << std::setprecision(4);
  os << "Overall accuracy: base " << cmp.base.overall_accuracy << ", cnn "
     << cmp.cnn.overall_accuracy << "\n";
  os << "Impaired-only accuracy: base " << cmp.base.impaired_only_accuracy
     << ", cnn " << cmp.cnn.impaired_only_accuracy << "\n";
  return os.str();
}

inline std::string render_report_text(const EvalReport& r) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4);
  os << "samples: " << r.total << "\n";
  os << "overall accuracy: " << r.overall_accuracy << "\n";
  os << "impaired-only accuracy: " << r.impaired_only_accuracy << " (over "
     << r.impaired_total << " impaired samples)\n";
  os << "\nconfusion (rows = true class, row-normalized";
  os << "; classes: no_impairment, user1, user2, user3):\n";
  for (int t = 0; t < kClassCount; ++t) {
    os << "  ";
    if (!r.row_has_support[t]) {
      os << "(no support)\n";
      continue;
    }
    for (int p = 0; p < kClassCount; ++p) {
      os << std::setw(8) << r.confusion_row_norm[t][p];
    }
    os << "\n";
  }
  os << "\nper class:\n";
  const char* names[] = {"no_impairment", "user1", "user2", "user3"};
  for (int c = 0; c < kClassCount; ++c) {
    const ClassMetric& m = r.per_class[c];
    os << "  " << std::left << std::setw(14) << names[c] << std::right
       << " support " << std::setw(5) << m.support << "  precision "
       << detail::pct(m, true) << "  recall " << detail::pct(m, false)
       << "\n";
  }
  return os.str();
}

inline std::string render_report_csv(const EvalReport& r) {
  std::ostringstream os;
  os << "class,support,tp,predicted,precision,recall\n";
  const char* names[] = {"no_impairment", "user1", "user2", "user3"};
  for (int c = 0; c < kClassCount; ++c) {
    const ClassMetric& m = r.per_class[c];
    os << names[c] << ',' << m.support << ',' << m.tp << ',' << m.predicted
       << ',';
    if (m.precision_defined) os << std::setprecision(17) << m.precision;
    os << ',';
    if (m.recall_defined) os << std::setprecision(17) << m.recall;
    os << "\n";
  }
  return os.str();
}

inline std::string render_comparison_csv(const ComparisonReport& cmp) {
  std::ostringstream os;
  os << "impairment,base_precision,base_recall,cnn_precision,cnn_recall\n";
  os << std::setprecision(17);
  for (std::size_t i = 0; i < cmp.base.breakdown.size(); ++i) {
    const auto& b = cmp.base.breakdown[i];
    const auto& c = cmp.cnn.breakdown[i];
    auto cell = [&](const ClassMetric& m, bool precision) -> std::string {
      const bool defined = precision ? m.precision_defined : m.recall_defined;
      if (!defined) return "";
      std::ostringstream v;
      v << std::setprecision(17) << (precision ? m.precision : m.recall);
      return v.str();
    };
    os << '"' << detail::breakdown_row_name(b) << '"' << ','
       << cell(b.metric, true) << ',' << cell(b.metric, false) << ','
       << cell(c.metric, true) << ',' << cell(c.metric, false) << "\n";
  }
  return os.str();
}

// ---- JSON ----

inline ordered_json to_json(const ClassMetric& m) {
  ordered_json j{{"support", m.support},
                 {"predicted", m.predicted},
                 {"tp", m.tp},
                 {"precision_defined", m.precision_defined},
                 {"recall_defined", m.recall_defined}};
  if (m.precision_defined) j["precision"] = m.precision;
  if (m.recall_defined) j["recall"] = m.recall;
  return j;
}

inline ClassMetric class_metric_from_json(const ordered_json& j) {
  ClassMetric m;
  m.support = j.at("support").get<long>();
  m.predicted = j.at("predicted").get<long>();
  m.tp = j.at("tp").get<long>();
  m.precision_defined = j.at("precision_defined").get<bool>();
  m.recall_defined = j.at("recall_defined").get<bool>();
  if (m.precision_defined) m.precision = j.at("precision").get<double>();
  if (m.recall_defined) m.recall = j.at("recall").get<double>();
  return m;
}

inline ordered_json to_json(const EvalReport& r) {
  ordered_json counts = ordered_json::array();
  ordered_json row_norm = ordered_json::array();
  for (int t = 0; t < kClassCount; ++t) {
    counts.push_back(r.counts[t]);
    row_norm.push_back(r.confusion_row_norm[t]);
  }
  ordered_json per_class = ordered_json::array();
  for (const auto& m : r.per_class) per_class.push_back(to_json(m));
  ordered_json breakdown = ordered_json::array();
  for (const auto& row : r.breakdown) {
    breakdown.push_back(ordered_json{{"row", detail::breakdown_row_name(row)},
                                     {"kind", to_string(row.kind)},
                                     {"class", row.cls},
                                     {"support", row.support},
                                     {"metric", to_json(row.metric)}});
  }
  return ordered_json{{"schema_version", kSchemaVersion},
                      {"total", r.total},
                      {"overall_accuracy", r.overall_accuracy},
                      {"impaired_only_accuracy", r.impaired_only_accuracy},
                      {"impaired_total", r.impaired_total},
                      {"confusion_counts", counts},
                      {"confusion_row_normalized", row_norm},
                      {"per_class", per_class},
                      {"breakdown", breakdown},
                      {"test_fingerprint", r.test_fingerprint}};
}

inline EvalReport eval_report_from_json(const ordered_json& j) {
  const int version = j.at("schema_version").get<int>();
  if (version != kSchemaVersion) {
    throw std::runtime_error("unsupported report schema_version " +
                             std::to_string(version));
  }
  EvalReport r;
  r.total = j.at("total").get<long>();
  r.overall_accuracy = j.at("overall_accuracy").get<double>();
  r.impaired_only_accuracy = j.at("impaired_only_accuracy").get<double>();
  r.impaired_total = j.at("impaired_total").get<long>();
  for (int t = 0; t < kClassCount; ++t) {
    long row_total = 0;
    for (int p = 0; p < kClassCount; ++p) {
      r.counts[t][p] = j.at("confusion_counts").at(t).at(p).get<long>();
      r.confusion_row_norm[t][p] =
          j.at("confusion_row_normalized").at(t).at(p).get<double>();
      row_total += r.counts[t][p];
    }
    r.row_has_support[t] = row_total > 0;
    r.per_class[t] = class_metric_from_json(j.at("per_class").at(t));
  }
  for (const auto& row : j.at("breakdown")) {
    BreakdownRow b;
    b.kind = impairment_kind_from_string(row.at("kind").get<std::string>());
    b.cls = row.at("class").get<int>();
    b.support = row.at("support").get<long>();
    b.metric = class_metric_from_json(row.at("metric"));
    r.breakdown.push_back(b);
  }
  r.test_fingerprint = j.at("test_fingerprint").get<std::uint64_t>();
  return r;
}

}  // namespace guardband
