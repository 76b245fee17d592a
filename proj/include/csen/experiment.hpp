#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "csen/config.hpp"
#include "csen/dataset.hpp"
#include "csen/folds.hpp"
#include "csen/metrics.hpp"
#include "csen/model.hpp"

namespace csen {

struct FoldResult {
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  ConfusionMatrix confusion;
  MetricsReport metrics;
};

struct EvaluationReport {
  std::string method;
  std::vector<std::string> class_names;
  std::uint64_t seed = 0;
  std::vector<FoldResult> folds;
  // Metrics of the confusion matrix summed over folds.
  ConfusionMatrix cumulative;
  MetricsReport cumulative_metrics;
  // Per-fold metrics averaged over folds.
  MetricsReport fold_mean_metrics;
};

struct ExperimentHooks {
  // Called with the dataset rows handed to model fitting for each fold.
  std::function<void(int fold, std::span<const std::size_t> rows)> on_fit_rows;
  // Called after each fold with its predictions, in test-row order.
  std::function<void(int fold, std::span<const std::size_t> test_rows,
                     std::span<const ClassDecision> decisions)>
      on_predictions;
};

// Stratified k-fold evaluation of config.method. Folds run on up to
// config.threads threads; results do not depend on the thread count.
EvaluationReport run_experiment(const FeatureDataset& dataset, const ExperimentConfig& config,
                                const ExperimentHooks& hooks = {});

struct BenchmarkEntry {
  Method method = Method::crc;
  double seconds = 0.0;
  std::size_t samples = 0;
};

// Fits each method on `train` (untimed), then times single-threaded
// one-query-at-a-time classification of every row of `test`. One warm-up
// query per method runs before timing starts.
std::vector<BenchmarkEntry> benchmark_inference(const FeatureDataset& train,
                                                const FeatureDataset& test,
                                                std::span<const Method> methods,
                                                const ExperimentConfig& config);

// Times already fitted models over the same test rows.
BenchmarkEntry time_inference(const ModelArtifact& model, const FeatureDataset& test);

}  // namespace csen
