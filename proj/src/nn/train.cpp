#include "csen/nn/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "csen/error.hpp"

namespace csen::nn {

void TrainConfig::validate() const {
  require(learning_rate > 0.0 && std::isfinite(learning_rate), ErrorKind::parameter,
          "learning rate must be positive");
  require(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0, ErrorKind::parameter,
          "Adam betas must lie in [0, 1)");
  require(epsilon > 0.0, ErrorKind::parameter, "Adam epsilon must be positive");
  require(epochs >= 0, ErrorKind::parameter, "epochs must be nonnegative");
  require(batch_size >= 1, ErrorKind::parameter, "batch size must be >= 1");
}

template <typename T>
AdamState<T> AdamState<T>::zeros_like(const Network<T>& net) {
  return {Gradients<T>::zeros_like(net), Gradients<T>::zeros_like(net), 0};
}

namespace {

template <typename T>
void adam_update(std::vector<T>& param, const std::vector<T>& grad, std::vector<T>& m,
                 std::vector<T>& v, double lr_t, const TrainConfig& c) {
  const T b1 = static_cast<T>(c.beta1);
  const T b2 = static_cast<T>(c.beta2);
  for (std::size_t i = 0; i < param.size(); ++i) {
    m[i] = b1 * m[i] + (T(1) - b1) * grad[i];
    v[i] = b2 * v[i] + (T(1) - b2) * grad[i] * grad[i];
    param[i] -= static_cast<T>(lr_t * m[i] / (std::sqrt(static_cast<double>(v[i])) + c.epsilon));
  }
}

}  // namespace

template <typename T>
void adam_step(Network<T>& net, const Gradients<T>& grads, AdamState<T>& state,
               const TrainConfig& config) {
  require(grads.weight.size() == net.layers.size() && state.m.weight.size() == net.layers.size(),
          ErrorKind::dimension, "Adam state does not match network");
  ++state.t;
  // Bias correction folded into the step size.
  const double t = static_cast<double>(state.t);
  const double lr_t = config.learning_rate * std::sqrt(1.0 - std::pow(config.beta2, t)) /
                      (1.0 - std::pow(config.beta1, t));
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    auto& layer = net.layers[i];
    adam_update(layer.weight, grads.weight[i], state.m.weight[i], state.v.weight[i], lr_t, config);
    adam_update(layer.bias, grads.bias[i], state.m.bias[i], state.v.bias[i], lr_t, config);
  }
}

TrainLog train(Network<float>& net, std::span<const Sample> data, const TrainConfig& config) {
  config.validate();
  TrainLog log;
  if (config.epochs == 0) return log;
  require(!data.empty(), ErrorKind::data, "training set is empty");
  for (const auto& s : data) {
    require(s.input.size() == static_cast<std::size_t>(net.input.size()), ErrorKind::dimension,
            "training sample does not match network input " + to_string(net.input));
    require(s.label >= 0 && s.label < net.output_count(), ErrorKind::data,
            "training label out of range");
  }

  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto state = AdamState<float>::zeros_like(net);
  auto batch_grads = Gradients<float>::zeros_like(net);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop =
          std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      batch_grads.set_zero();
      for (std::size_t k = start; k < stop; ++k) {
        const auto& s = data[order[k]];
        const auto trace = forward_trace<float>(net, s.input);
        float loss = 0.0f;
        batch_grads.add(backward<float>(net, trace, s.label, &loss));
        epoch_loss += loss;
      }
      batch_grads.scale(1.0f / static_cast<float>(stop - start));
      adam_step(net, batch_grads, state, config);
    }
    epoch_loss /= static_cast<double>(data.size());
    require(std::isfinite(epoch_loss), ErrorKind::training,
            net.name + ": loss became non-finite in epoch " + std::to_string(epoch + 1));
    log.epoch_loss.push_back(epoch_loss);
  }
  return log;
}

double accuracy(const Network<float>& net, std::span<const Sample> data) {
  if (data.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& s : data) {
    const auto scores = forward<float>(net, s.input);
    const auto best = std::max_element(scores.begin(), scores.end()) - scores.begin();
    if (best == s.label) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

template struct AdamState<float>;
template struct AdamState<double>;
template void adam_step<float>(Network<float>&, const Gradients<float>&, AdamState<float>&,
                               const TrainConfig&);
template void adam_step<double>(Network<double>&, const Gradients<double>&, AdamState<double>&,
                                const TrainConfig&);

}  // namespace csen::nn
