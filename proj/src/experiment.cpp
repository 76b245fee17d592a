#include "csen/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <mutex>
#include <thread>

#include "csen/error.hpp"

namespace csen {

namespace {

FoldResult run_fold(const FeatureDataset& dataset, const ExperimentConfig& config,
                    const FoldPlan& plan, int fold, const ExperimentHooks& hooks,
                    std::mutex& hook_mutex) {
  const auto& train_rows = plan.train[static_cast<std::size_t>(fold)];
  const auto& test_rows = plan.test[static_cast<std::size_t>(fold)];
  if (hooks.on_fit_rows) {
    std::lock_guard lock(hook_mutex);
    hooks.on_fit_rows(fold, train_rows);
  }
  const FeatureDataset train = dataset.subset(train_rows);
  ModelArtifact model;
  try {
    model = fit_model(train, config, derive_seed(config.seed, 0x464f4c44, static_cast<std::uint64_t>(fold)));
  } catch (const Error& e) {
    fail(e.kind(), "fold " + std::to_string(fold) + ": " + e.what());
  }

  FoldResult result;
  result.train_size = train_rows.size();
  result.test_size = test_rows.size();
  result.confusion = ConfusionMatrix(dataset.class_names);
  std::vector<ClassDecision> decisions;
  decisions.reserve(test_rows.size());
  for (std::size_t row : test_rows) {
    try {
      decisions.push_back(predict(model, dataset.sample(static_cast<Index>(row))));
    } catch (const Error& e) {
      fail(e.kind(), "fold " + std::to_string(fold) + ", sample " + std::to_string(row) +
                         ": " + e.what());
    }
    result.confusion.add(dataset.labels[row], decisions.back().class_index);
  }
  if (hooks.on_predictions) {
    std::lock_guard lock(hook_mutex);
    hooks.on_predictions(fold, test_rows, decisions);
  }
  result.metrics = compute_metrics(result.confusion);
  return result;
}

}  // namespace

EvaluationReport run_experiment(const FeatureDataset& dataset, const ExperimentConfig& config,
                                const ExperimentHooks& hooks) {
  config.validate();
  dataset.validate();
  const FoldPlan plan = stratified_kfold(dataset.labels, config.k_folds, config.seed);

  std::vector<FoldResult> folds(static_cast<std::size_t>(config.k_folds));
  std::vector<std::exception_ptr> errors(folds.size());
  std::mutex hook_mutex;
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int f = next++; f < config.k_folds; f = next++) {
      try {
        folds[static_cast<std::size_t>(f)] = run_fold(dataset, config, plan, f, hooks, hook_mutex);
      } catch (...) {
        errors[static_cast<std::size_t>(f)] = std::current_exception();
      }
    }
  };
  const int workers = std::min(config.threads, config.k_folds);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  EvaluationReport report;
  report.method = to_string(config.method);
  report.class_names = dataset.class_names;
  report.seed = config.seed;
  report.cumulative = ConfusionMatrix(dataset.class_names);
  std::vector<MetricsReport> per_fold;
  for (auto& f : folds) {
    report.cumulative.merge(f.confusion);
    per_fold.push_back(f.metrics);
  }
  report.folds = std::move(folds);
  report.cumulative_metrics = compute_metrics(report.cumulative);
  report.fold_mean_metrics = average_metrics(per_fold);
  return report;
}

BenchmarkEntry time_inference(const ModelArtifact& model, const FeatureDataset& test) {
  BenchmarkEntry entry;
  entry.method = model.method;
  entry.samples = static_cast<std::size_t>(test.size());
  if (test.size() == 0) return entry;
  // Warm-up query, excluded from timing.
  (void)predict(model, test.sample(0));
  std::vector<Vector> queries;
  queries.reserve(static_cast<std::size_t>(test.size()));
  for (Index i = 0; i < test.size(); ++i) queries.push_back(test.sample(i));
  int sink = 0;
  const auto start = std::chrono::steady_clock::now();
  for (const auto& q : queries) sink += predict(model, q).class_index;
  const auto stop = std::chrono::steady_clock::now();
  entry.seconds = std::chrono::duration<double>(stop - start).count();
  // Keep the loop observable.
  if (sink < 0) entry.seconds = -entry.seconds;
  return entry;
}

std::vector<BenchmarkEntry> benchmark_inference(const FeatureDataset& train,
                                                const FeatureDataset& test,
                                                std::span<const Method> methods,
                                                const ExperimentConfig& config) {
  std::vector<BenchmarkEntry> out;
  for (Method m : methods) {
    auto cfg = config;
    cfg.method = m;
    if (test.size() == 0) {
      out.push_back({m, 0.0, 0});
      continue;
    }
    const auto model = fit_model(train, cfg, derive_seed(config.seed, 0x42454e43));
    out.push_back(time_inference(model, test));
  }
  return out;
}

}  // namespace csen
