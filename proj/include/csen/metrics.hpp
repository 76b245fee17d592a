#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace csen {

// Rows are actual classes, columns predicted classes.
struct ConfusionMatrix {
  std::vector<std::string> class_names;
  std::vector<std::vector<std::uint64_t>> counts;

  ConfusionMatrix() = default;
  explicit ConfusionMatrix(std::vector<std::string> names);
  ConfusionMatrix(std::vector<std::string> names, std::vector<std::vector<std::uint64_t>> counts);

  int classes() const { return static_cast<int>(class_names.size()); }
  void add(int actual, int predicted, std::uint64_t n = 1);
  void merge(const ConfusionMatrix& other);
  std::uint64_t total() const;
  std::uint64_t row_sum(int actual) const;
  std::uint64_t col_sum(int predicted) const;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

// One-vs-rest metrics per class. A metric whose denominator is zero is 0.
struct MetricsReport {
  std::vector<double> accuracy;
  std::vector<double> sensitivity;
  std::vector<double> specificity;
  double overall_accuracy = 0.0;

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

MetricsReport compute_metrics(const ConfusionMatrix& cm);

// Element-wise mean of several reports.
MetricsReport average_metrics(const std::vector<MetricsReport>& reports);

}  // namespace csen
