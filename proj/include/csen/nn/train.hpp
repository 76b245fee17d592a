#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "csen/nn/network.hpp"

namespace csen::nn {

struct TrainConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int epochs = 15;
  int batch_size = 32;
  std::uint64_t seed = 0;

  void validate() const;
};

template <typename T>
struct AdamState {
  Gradients<T> m;
  Gradients<T> v;
  std::int64_t t = 0;

  static AdamState zeros_like(const Network<T>& net);
};

// One bias-corrected Adam update of every parameter.
template <typename T>
void adam_step(Network<T>& net, const Gradients<T>& grads, AdamState<T>& state,
               const TrainConfig& config);

struct Sample {
  std::vector<float> input;
  int label = 0;
};

struct TrainLog {
  std::vector<double> epoch_loss;
};

// Seeded mini-batch softmax cross-entropy training with Adam. Gradients are
// averaged over each batch.
TrainLog train(Network<float>& net, std::span<const Sample> data, const TrainConfig& config);

double accuracy(const Network<float>& net, std::span<const Sample> data);

}  // namespace csen::nn
