#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "csen/dictionary.hpp"

namespace csen::nn {

struct Shape {
  int channels = 0;
  int rows = 0;
  int cols = 0;

  int size() const { return channels * rows * cols; }
  int plane() const { return rows * cols; }
  friend bool operator==(const Shape&, const Shape&) = default;
};

std::string to_string(const Shape& s);

enum class LayerKind { conv2d, transposed_conv2d, maxpool2d, relu, dense };

const char* to_string(LayerKind kind);

// conv2d: stride 1, "same" zero padding (odd kernels).
// transposed_conv2d: stride 2, output exactly doubles rows and cols.
// maxpool2d: 2x2 window, stride 2, even input dims.
// dense: flattens its input; out_channels is the output width.
struct LayerSpec {
  LayerKind kind = LayerKind::relu;
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 1;
  int stride = 1;
  int padding = 0;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

template <typename T>
struct Layer {
  LayerSpec spec;
  Shape input;
  Shape output;
  // conv2d: [out][in][k][k]; transposed_conv2d: [in][out][k][k];
  // dense: [out][in]. Bias has one entry per output channel.
  std::vector<T> weight;
  std::vector<T> bias;

  std::size_t parameter_count() const { return weight.size() + bias.size(); }
};

enum class HeadKind {
  class_average,  // mean of a 1-channel map over each class block
  identity,       // the final layer already emits one value per class
};

struct Head {
  HeadKind kind = HeadKind::identity;
  ClassLayout layout;  // class_average only
};

template <typename T>
struct Network {
  std::string name;
  Shape input;
  std::vector<Layer<T>> layers;
  Head head;

  Shape final_map() const { return layers.empty() ? input : layers.back().output; }
  int output_count() const;
  std::size_t parameter_count() const;

  template <typename U>
  Network<U> cast() const {
    Network<U> out;
    out.name = name;
    out.input = input;
    out.head = head;
    out.layers.reserve(layers.size());
    for (const auto& l : layers) {
      Layer<U> c;
      c.spec = l.spec;
      c.input = l.input;
      c.output = l.output;
      c.weight.assign(l.weight.begin(), l.weight.end());
      c.bias.assign(l.bias.begin(), l.bias.end());
      out.layers.push_back(std::move(c));
    }
    return out;
  }
};

// Shape-checked incremental construction; a layer that does not fit the
// running shape throws a dimension error immediately.
template <typename T>
class NetworkBuilder {
 public:
  NetworkBuilder(std::string name, Shape input);

  NetworkBuilder& conv2d(int out_channels, int kernel);
  NetworkBuilder& transposed_conv2d(int out_channels, int kernel = 3);
  NetworkBuilder& maxpool2d();
  NetworkBuilder& relu();
  NetworkBuilder& dense(int out_width);
  NetworkBuilder& add(const LayerSpec& spec);

  Shape current() const { return current_; }

  Network<T> class_average_head(const ClassLayout& layout);
  Network<T> identity_head();

 private:
  Network<T> net_;
  Shape current_;
};

// Uniform(-b, b), b = sqrt(6 / fan_in); zero biases.
template <typename T>
void initialize(Network<T>& net, std::uint64_t seed);

// Per-layer parameter gradients, same layout as the network's parameters.
template <typename T>
struct Gradients {
  std::vector<std::vector<T>> weight;
  std::vector<std::vector<T>> bias;

  static Gradients zeros_like(const Network<T>& net);
  void set_zero();
  void scale(T factor);
  void add(const Gradients& other);
};

// Activations of one forward pass: values[0] is the input, values[i + 1]
// the output of layer i.
template <typename T>
struct Trace {
  std::vector<std::vector<T>> values;
  std::vector<T> scores;
};

template <typename T>
std::vector<T> forward(const Network<T>& net, std::span<const T> input);

template <typename T>
Trace<T> forward_trace(const Network<T>& net, std::span<const T> input);

// Softmax cross-entropy; writes d loss / d scores when grad is non-null.
template <typename T>
T softmax_cross_entropy(std::span<const T> scores, int target,
                        std::vector<T>* grad = nullptr);

// Gradient of an arbitrary scalar of the scores: d_scores is its gradient
// with respect to the scores. Optionally also returns d / d input.
template <typename T>
Gradients<T> backward_from_scores(const Network<T>& net, const Trace<T>& trace,
                                  std::span<const T> d_scores,
                                  std::vector<T>* d_input = nullptr);

// Cross-entropy loss and parameter gradients for one labelled sample.
template <typename T>
Gradients<T> backward(const Network<T>& net, const Trace<T>& trace, int target,
                      T* loss = nullptr, std::vector<T>* d_input = nullptr);

// Pre-head map of a class_average network squashed through the logistic
// function and flattened to atom order.
template <typename T>
std::vector<double> support_probability_map(const Network<T>& net,
                                            std::span<const T> input);

// Class-average head on its own, exposed for tests.
std::vector<double> class_average(const ClassLayout& layout,
                                  std::span<const double> map);

// Model builders. Class-block layouts fix the plane size.
Network<float> build_csen1(const ClassLayout& layout, std::uint64_t seed = 0);
Network<float> build_csen2(const ClassLayout& layout, std::uint64_t seed = 0);
Network<float> build_reconnet_baseline(const ClassLayout& layout,
                                       std::uint64_t seed = 0);
Network<float> build_mlp(int input_dim, std::span<const int> hidden, int classes,
                         std::uint64_t seed = 0);

inline constexpr int kDefaultMlpHidden[] = {512, 256, 128, 64};

// Analytic count: sum of k*k*c_in*c_out + c_out over conv layers plus
// in*out + out over dense layers.
std::size_t analytic_parameter_count(std::span<const LayerSpec> specs);

}  // namespace csen::nn
