#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "csen/dictionary.hpp"
#include "csen/nn/train.hpp"
#include "csen/sparse.hpp"

namespace csen {

enum class Method { csen1, csen2, reconnet, mlp, crc, src, knn };

const char* to_string(Method m);
Method parse_method(const std::string& name);
bool is_network(Method m);
bool uses_dictionary(Method m);
const std::vector<Method>& all_methods();

const char* to_string(ProxyMode m);
const char* to_string(DistanceMetric m);

struct ExperimentConfig {
  Method method = Method::csen1;
  double pca_cr = 0.5;
  int atoms_per_class = 625;
  double lambda = 2e-12;
  ProxyMode proxy_mode = ProxyMode::ridge;
  // Divide each proxy plane by its max |value| before the network.
  bool proxy_scaling = false;

  // 0 means every balanced training sample of a class becomes an atom.
  int crc_atoms_per_class = 0;
  bool crc_normalized_residual = true;

  int src_atoms_per_class = 0;
  double src_lambda_scale = 0.01;
  int src_max_iter = 500;
  double src_tol = 1e-6;
  bool src_normalized_residual = false;

  int knn_k = 5;
  DistanceMetric knn_metric = DistanceMetric::euclidean;

  nn::TrainConfig csen_train{1e-3, 0.9, 0.999, 1e-8, 15, 32, 0};
  nn::TrainConfig mlp_train{1e-4, 0.9, 0.999, 1e-8, 50, 32, 0};
  std::vector<int> mlp_hidden{512, 256, 128, 64};

  int k_folds = 5;
  bool balance = true;
  double balance_jitter = 0.05;
  std::uint64_t seed = 0;
  int threads = 1;

  void validate() const;
  // Applies one `key = value` setting; unknown keys are parse errors.
  void set(const std::string& key, const std::string& value);
  // Flat key = value listing of every setting, in a fixed order.
  std::string to_text() const;
};

// Reads `key = value` lines; `#` starts a comment.
ExperimentConfig parse_config(std::istream& in, const std::string& source,
                              ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& path,
                             ExperimentConfig base = {});

}  // namespace csen
