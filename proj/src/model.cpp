#include "csen/model.hpp"

#include <algorithm>
#include <cmath>

#include "csen/error.hpp"
#include "csen/folds.hpp"
#include "csen/nn/train.hpp"

namespace csen {

namespace {

enum SeedStream : std::uint64_t { kBalance = 1, kDictionary = 2, kInit = 3, kTrain = 4 };

int min_class_count(const FeatureDataset& data) {
  const auto counts = data.class_counts();
  return static_cast<int>(*std::min_element(counts.begin(), counts.end()));
}

std::vector<float> plane_input(const ProxyPlane& plane, bool scaling) {
  std::vector<float> input(plane.cells.size());
  double scale = 1.0;
  if (scaling) {
    double top = 0.0;
    for (double v : plane.cells) top = std::max(top, std::abs(v));
    if (top > 0.0) scale = 1.0 / top;
  }
  for (std::size_t i = 0; i < input.size(); ++i)
    input[i] = static_cast<float>(plane.cells[i] * scale);
  return input;
}

std::vector<float> to_float(const Vector& v) {
  std::vector<float> out(static_cast<std::size_t>(v.size()));
  for (Index i = 0; i < v.size(); ++i) out[static_cast<std::size_t>(i)] = static_cast<float>(v[i]);
  return out;
}

ClassDecision decide_scores(const std::vector<float>& scores) {
  Vector v(static_cast<Index>(scores.size()));
  for (std::size_t i = 0; i < scores.size(); ++i) v[static_cast<Index>(i)] = scores[i];
  return decide(std::move(v), ScoreSense::higher_is_better);
}

}  // namespace

std::vector<float> network_input(const ModelArtifact& model, const Vector& y) {
  require(model.dictionary.has_value(), ErrorKind::unsupported,
          std::string(to_string(model.method)) + " model has no dictionary");
  return plane_input(proxy(*model.dictionary, y, model.settings.proxy_mode),
                     model.settings.proxy_scaling);
}

ModelArtifact fit_model(const FeatureDataset& train, const ExperimentConfig& config,
                        std::uint64_t seed, FitTrace* trace) {
  config.validate();
  train.validate();

  ModelArtifact model;
  model.method = config.method;
  model.class_names = train.class_names;
  model.settings.proxy_mode = config.proxy_mode;
  model.settings.proxy_scaling = config.proxy_scaling;
  model.settings.crc_normalized_residual = config.crc_normalized_residual;
  model.settings.src_lambda_scale = config.src_lambda_scale;
  model.settings.src_max_iter = config.src_max_iter;
  model.settings.src_tol = config.src_tol;
  model.settings.src_normalized_residual = config.src_normalized_residual;
  model.settings.knn_k = config.knn_k;
  model.settings.knn_metric = config.knn_metric;

  model.standardizer = standardize_fit(train.features);
  FeatureDataset standardized = train;
  standardized.features = model.standardizer.apply_rows(train.features);
  const Index m = reduced_dimension(train.dim(), config.pca_cr);
  model.projection = pca_fit(standardized.features, m);

  FeatureDataset pool = config.balance
                            ? balance_training_set(standardized, derive_seed(seed, kBalance),
                                                   config.balance_jitter)
                                  .data
                            : standardized;
  if (trace) trace->balanced_size = static_cast<std::size_t>(pool.size());

  switch (config.method) {
    case Method::crc:
    case Method::src: {
      const int requested = config.method == Method::crc ? config.crc_atoms_per_class
                                                         : config.src_atoms_per_class;
      const int atoms = requested > 0 ? requested : min_class_count(pool);
      model.dictionary = build_dictionary(pool, atoms, model.projection, config.lambda,
                                          derive_seed(seed, kDictionary));
      if (config.method == Method::src)
        model.settings.src_lipschitz = lipschitz_constant(model.dictionary->D);
      break;
    }
    case Method::knn: {
      require(config.knn_k <= pool.size(), ErrorKind::parameter,
              "knn_k exceeds training size");
      ReferenceSet ref;
      ref.points = pca_apply_rows(model.projection, pool.features);
      ref.labels = pool.labels;
      ref.classes = pool.class_count();
      model.reference = std::move(ref);
      break;
    }
    case Method::csen1:
    case Method::csen2:
    case Method::reconnet: {
      model.dictionary = build_dictionary(pool, config.atoms_per_class, model.projection,
                                          config.lambda, derive_seed(seed, kDictionary));
      const auto& dict = *model.dictionary;
      std::vector<std::uint8_t> used(static_cast<std::size_t>(pool.size()), 0);
      for (auto row : dict.source_rows) used[row] = 1;

      std::vector<nn::Sample> samples;
      const Matrix Y = pca_apply_rows(model.projection, pool.features);
      for (Index i = 0; i < pool.size(); ++i) {
        if (used[static_cast<std::size_t>(i)]) continue;
        const Vector y = Y.row(i).transpose();
        samples.push_back({network_input(model, y), pool.labels[static_cast<std::size_t>(i)]});
      }
      require(!samples.empty(), ErrorKind::data,
              "no training samples left after drawing dictionary atoms");
      if (trace) trace->network_samples = samples.size();

      const auto init_seed = derive_seed(seed, kInit);
      model.network = config.method == Method::csen1 ? nn::build_csen1(dict.layout, init_seed)
                      : config.method == Method::csen2
                          ? nn::build_csen2(dict.layout, init_seed)
                          : nn::build_reconnet_baseline(dict.layout, init_seed);
      auto tc = config.csen_train;
      tc.seed = derive_seed(seed, kTrain);
      model.training_loss = nn::train(*model.network, samples, tc).epoch_loss;
      break;
    }
    case Method::mlp: {
      std::vector<nn::Sample> samples;
      samples.reserve(static_cast<std::size_t>(pool.size()));
      for (Index i = 0; i < pool.size(); ++i)
        samples.push_back({to_float(pool.sample(i)), pool.labels[static_cast<std::size_t>(i)]});
      if (trace) trace->network_samples = samples.size();
      model.network = nn::build_mlp(static_cast<int>(train.dim()), config.mlp_hidden,
                                    train.class_count(), derive_seed(seed, kInit));
      auto tc = config.mlp_train;
      tc.seed = derive_seed(seed, kTrain);
      model.training_loss = nn::train(*model.network, samples, tc).epoch_loss;
      break;
    }
  }
  return model;
}

ClassDecision predict(const ModelArtifact& model, const Vector& features) {
  const Vector s = model.standardizer.apply(features);
  if (model.method == Method::mlp) {
    require(model.network.has_value(), ErrorKind::unsupported, "mlp model has no network");
    return decide_scores(nn::forward<float>(*model.network, to_float(s)));
  }
  const Vector y = pca_apply(model.projection, s);
  switch (model.method) {
    case Method::crc:
      return crc_classify(*model.dictionary, y, {model.settings.crc_normalized_residual});
    case Method::src: {
      SrcOptions opts;
      opts.lambda_scale = model.settings.src_lambda_scale;
      opts.max_iter = model.settings.src_max_iter;
      opts.tol = model.settings.src_tol;
      opts.normalized_residual = model.settings.src_normalized_residual;
      if (model.settings.src_lipschitz > 0.0) opts.lipschitz = model.settings.src_lipschitz;
      return src_classify(*model.dictionary, y, opts);
    }
    case Method::knn:
      return knn_classify(*model.reference, y, model.settings.knn_k, model.settings.knn_metric);
    default: {
      require(model.network.has_value(), ErrorKind::unsupported, "model has no network");
      return decide_scores(nn::forward<float>(*model.network, network_input(model, y)));
    }
  }
}

std::vector<ClassDecision> predict_all(const ModelArtifact& model, const FeatureDataset& data) {
  std::vector<ClassDecision> out;
  out.reserve(static_cast<std::size_t>(data.size()));
  for (Index i = 0; i < data.size(); ++i) out.push_back(predict(model, data.sample(i)));
  return out;
}

}  // namespace csen
