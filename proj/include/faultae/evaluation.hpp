#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "faultae/dataset.hpp"

namespace faultae {

/// Positive class = fault.
struct ConfusionMatrix {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t tn = 0;
  std::int64_t fn = 0;

  std::int64_t total() const { return tp + fp + tn + fn; }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

/// A metric whose denominator was zero is left empty.
using Metric = std::optional<double>;

struct MetricsReport {
  ConfusionMatrix counts;
  Metric precision;
  Metric recall;
  Metric specificity;
  Metric f1;
};

ConfusionMatrix confusion(const LabelVector& flags, const LabelVector& truth);
MetricsReport metrics(const ConfusionMatrix& cm);

/// Harmonic mean of precision and recall; empty when both are zero.
Metric f1_score(double precision, double recall);

std::string format_metrics_table(const MetricsReport& report, const std::string& title = {});
void write_metrics_csv(const std::filesystem::path& path, const MetricsReport& report);

}  // namespace faultae
