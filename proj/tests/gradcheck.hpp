#pragma once

// Finite-difference gradient checks shared by the unit and acceptance suites.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "csen/dictionary.hpp"
#include "csen/nn/network.hpp"

namespace csen::testing {

struct GradCase {
  std::string label;
  nn::Network<float> net;
  std::vector<float> input;
  int target = 0;
};

// Five small topologies that together exercise every layer kind and both
// heads; config selects one and seeds weights, input and target.
inline GradCase grad_case(int config, std::uint64_t seed) {
  using nn::NetworkBuilder;
  GradCase g;
  const ClassLayout six(4, 9);    // 6x6 plane
  const ClassLayout dead(3, 6);   // 6x4 plane with a dead block
  switch (config % 5) {
    case 0:
      g.label = "conv3x3+relu";
      g.net = NetworkBuilder<float>("g0", {1, 6, 6})
                  .conv2d(3, 3).relu().conv2d(2, 3).relu().conv2d(1, 3)
                  .class_average_head(six);
      break;
    case 1:
      g.label = "maxpool+transposed_conv";
      g.net = NetworkBuilder<float>("g1", {1, 6, 6})
                  .conv2d(3, 3).relu().maxpool2d().conv2d(2, 3).relu()
                  .transposed_conv2d(2, 3).relu().conv2d(1, 3)
                  .class_average_head(six);
      break;
    case 2:
      g.label = "conv11x11+conv1x1+conv7x7";
      g.net = NetworkBuilder<float>("g2", {1, 6, 4})
                  .conv2d(2, 11).relu().conv2d(2, 1).relu().conv2d(1, 7)
                  .class_average_head(dead);
      break;
    case 3:
      g.label = "dense";
      g.net = NetworkBuilder<float>("g3", {7, 1, 1})
                  .dense(5).relu().dense(4).relu().dense(3)
                  .identity_head();
      break;
    default:
      g.label = "conv+maxpool+dense";
      g.net = NetworkBuilder<float>("g4", {2, 4, 4})
                  .conv2d(2, 3).relu().maxpool2d().dense(3)
                  .identity_head();
      break;
  }
  nn::initialize(g.net, seed);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<float> n(0.0f, 1.0f);
  // nonzero biases so the check also covers them away from zero
  for (auto& l : g.net.layers)
    for (auto& b : l.bias) b = 0.1f * n(rng);
  g.input.resize(static_cast<std::size_t>(g.net.input.size()));
  for (auto& v : g.input) v = n(rng);
  g.target = static_cast<int>(rng() % static_cast<std::uint64_t>(g.net.output_count()));
  return g;
}

template <typename T>
double loss_at(const nn::Network<T>& net, const std::vector<T>& input, int target) {
  const auto scores = nn::forward<T>(net, input);
  return static_cast<double>(nn::softmax_cross_entropy<T>(scores, target));
}

// Norm-wise relative error of one gradient block. The denominator is floored
// at a fraction of the whole gradient's norm so that a block whose true
// gradient vanishes is judged against the network's gradient scale instead of
// against rounding noise.
inline double relative_error(const std::vector<double>& a, const std::vector<double>& b,
                             double floor) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double scale = std::max({std::sqrt(na), std::sqrt(nb), floor});
  return scale > 0.0 ? std::sqrt(diff) / scale : 0.0;
}

inline constexpr double kGradientFloor = 1e-3;

// Largest norm-wise relative error over the layers (weights and bias as one
// block) and the input gradient. The last bias alone has an exactly zero
// gradient under the shift-invariant softmax, so it is never judged by
// itself. Analytic gradients come from the network's own precision T; the
// reference is a central difference on the same network widened to double.
template <typename T>
double max_gradient_error(const nn::Network<float>& base, const std::vector<float>& input_f,
                          int target, double h) {
  const auto net = base.template cast<T>();
  const std::vector<T> input(input_f.begin(), input_f.end());
  const auto trace = nn::forward_trace<T>(net, input);
  std::vector<T> d_input;
  const auto grads = nn::backward<T>(net, trace, target, nullptr, &d_input);

  auto wide = base.template cast<double>();
  std::vector<double> x(input_f.begin(), input_f.end());
  auto central = [&](double& slot) {
    const double keep = slot;
    slot = keep + h;
    const double up = loss_at<double>(wide, x, target);
    slot = keep - h;
    const double down = loss_at<double>(wide, x, target);
    slot = keep;
    return (up - down) / (2.0 * h);
  };

  // one entry per parameterized layer, weights and bias together
  std::vector<std::pair<std::vector<double>, std::vector<double>>> tensors;
  for (std::size_t li = 0; li < wide.layers.size(); ++li) {
    auto& layer = wide.layers[li];
    if (layer.weight.empty()) continue;
    auto& t = tensors.emplace_back();
    for (std::size_t k = 0; k < layer.weight.size(); ++k) {
      t.first.push_back(static_cast<double>(grads.weight[li][k]));
      t.second.push_back(central(layer.weight[k]));
    }
    for (std::size_t k = 0; k < layer.bias.size(); ++k) {
      t.first.push_back(static_cast<double>(grads.bias[li][k]));
      t.second.push_back(central(layer.bias[k]));
    }
  }
  auto& in = tensors.emplace_back();
  for (std::size_t k = 0; k < x.size(); ++k) {
    in.first.push_back(static_cast<double>(d_input[k]));
    in.second.push_back(central(x[k]));
  }

  double total = 0.0;
  for (const auto& t : tensors)
    for (double v : t.second) total += v * v;
  const double floor = kGradientFloor * std::sqrt(total);
  double worst = 0.0;
  for (const auto& t : tensors) worst = std::max(worst, relative_error(t.first, t.second, floor));
  return worst;
}

}  // namespace csen::testing
