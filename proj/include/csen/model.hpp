#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "csen/config.hpp"
#include "csen/dataset.hpp"
#include "csen/dictionary.hpp"
#include "csen/linalg.hpp"
#include "csen/nn/network.hpp"
#include "csen/sparse.hpp"

namespace csen {

// Inference-time settings that travel with a fitted model.
struct ClassifierSettings {
  ProxyMode proxy_mode = ProxyMode::ridge;
  bool proxy_scaling = false;
  bool crc_normalized_residual = true;
  double src_lambda_scale = 0.01;
  int src_max_iter = 500;
  double src_tol = 1e-6;
  bool src_normalized_residual = false;
  double src_lipschitz = 0.0;
  int knn_k = 5;
  DistanceMetric knn_metric = DistanceMetric::euclidean;
};

// Everything needed to classify raw feature vectors with one method.
struct ModelArtifact {
  Method method = Method::crc;
  std::vector<std::string> class_names;
  Standardizer standardizer;
  ProjectionMatrix projection;
  std::optional<Dictionary> dictionary;
  std::optional<nn::Network<float>> network;
  std::optional<ReferenceSet> reference;
  ClassifierSettings settings;
  std::vector<double> training_loss;

  int classes() const { return static_cast<int>(class_names.size()); }
  Index input_dim() const { return standardizer.dim(); }
};

// Sizes observed while fitting.
struct FitTrace {
  std::size_t balanced_size = 0;
  std::size_t network_samples = 0;
};

// Standardize and PCA on `train`, balance, then fit `config.method`.
ModelArtifact fit_model(const FeatureDataset& train, const ExperimentConfig& config,
                        std::uint64_t seed, FitTrace* trace = nullptr);

// Network input for a reduced query under the model's dictionary.
std::vector<float> network_input(const ModelArtifact& model, const Vector& y);

ClassDecision predict(const ModelArtifact& model, const Vector& features);

// Predictions for every row of `data`.
std::vector<ClassDecision> predict_all(const ModelArtifact& model, const FeatureDataset& data);

}  // namespace csen
