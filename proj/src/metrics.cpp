#include "csen/metrics.hpp"

#include "csen/error.hpp"

namespace csen {

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> names)
    : class_names(std::move(names)),
      counts(class_names.size(), std::vector<std::uint64_t>(class_names.size(), 0)) {}

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> names,
                                 std::vector<std::vector<std::uint64_t>> values)
    : class_names(std::move(names)), counts(std::move(values)) {
  require(counts.size() == class_names.size(), ErrorKind::dimension,
          "confusion matrix row count does not match class count");
  for (const auto& row : counts)
    require(row.size() == class_names.size(), ErrorKind::dimension,
            "confusion matrix is not square");
}

void ConfusionMatrix::add(int actual, int predicted, std::uint64_t n) {
  require(actual >= 0 && actual < classes() && predicted >= 0 && predicted < classes(),
          ErrorKind::dimension, "confusion matrix class index out of range");
  counts[static_cast<std::size_t>(actual)][static_cast<std::size_t>(predicted)] += n;
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
  require(other.class_names == class_names, ErrorKind::dimension,
          "cannot merge confusion matrices over different classes");
  for (std::size_t i = 0; i < counts.size(); ++i)
    for (std::size_t j = 0; j < counts.size(); ++j) counts[i][j] += other.counts[i][j];
}

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t t = 0;
  for (const auto& row : counts)
    for (auto v : row) t += v;
  return t;
}

std::uint64_t ConfusionMatrix::row_sum(int actual) const {
  std::uint64_t t = 0;
  for (auto v : counts.at(static_cast<std::size_t>(actual))) t += v;
  return t;
}

std::uint64_t ConfusionMatrix::col_sum(int predicted) const {
  std::uint64_t t = 0;
  for (const auto& row : counts) t += row.at(static_cast<std::size_t>(predicted));
  return t;
}

MetricsReport compute_metrics(const ConfusionMatrix& cm) {
  const auto total = cm.total();
  require(cm.classes() > 0 && total > 0, ErrorKind::data,
          "compute_metrics on an empty confusion matrix");
  auto ratio = [](std::uint64_t num, std::uint64_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  MetricsReport r;
  std::uint64_t trace = 0;
  for (int i = 0; i < cm.classes(); ++i) {
    const auto tp = cm.counts[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)];
    const auto fn = cm.row_sum(i) - tp;
    const auto fp = cm.col_sum(i) - tp;
    const auto tn = total - tp - fn - fp;
    trace += tp;
    r.sensitivity.push_back(ratio(tp, tp + fn));
    r.specificity.push_back(ratio(tn, tn + fp));
    r.accuracy.push_back(ratio(tp + tn, total));
  }
  r.overall_accuracy = ratio(trace, total);
  return r;
}

MetricsReport average_metrics(const std::vector<MetricsReport>& reports) {
  MetricsReport out;
  if (reports.empty()) return out;
  const auto c = reports.front().accuracy.size();
  out.accuracy.assign(c, 0.0);
  out.sensitivity.assign(c, 0.0);
  out.specificity.assign(c, 0.0);
  for (const auto& r : reports) {
    require(r.accuracy.size() == c, ErrorKind::dimension, "metric reports differ in class count");
    for (std::size_t i = 0; i < c; ++i) {
      out.accuracy[i] += r.accuracy[i];
      out.sensitivity[i] += r.sensitivity[i];
      out.specificity[i] += r.specificity[i];
    }
    out.overall_accuracy += r.overall_accuracy;
  }
  const double n = static_cast<double>(reports.size());
  for (std::size_t i = 0; i < c; ++i) {
    out.accuracy[i] /= n;
    out.sensitivity[i] /= n;
    out.specificity[i] /= n;
  }
  out.overall_accuracy /= n;
  return out;
}

}  // namespace csen
