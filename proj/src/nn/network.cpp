#include "csen/nn/network.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "csen/error.hpp"

namespace csen::nn {

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapRow = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMapRow = Eigen::Map<const RowMat<T>>;

// Patch geometry of a strided, padded correlation from `big` to `small`.
struct Patch {
  Shape big;
  int out_rows;
  int out_cols;
  int kernel;
  int stride;
  int pad;
};

// col[(c, ky, kx)][oy * out_cols + ox] = big[c][oy*s + ky - p][ox*s + kx - p]
template <typename T>
void im2col(const Patch& g, const T* src, T* col) {
  const int k = g.kernel;
  const int out_plane = g.out_rows * g.out_cols;
  for (int c = 0; c < g.big.channels; ++c) {
    const T* channel = src + static_cast<std::size_t>(c) * g.big.plane();
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        T* row = col + static_cast<std::size_t>((c * k + ky) * k + kx) * out_plane;
        for (int oy = 0; oy < g.out_rows; ++oy) {
          const int iy = oy * g.stride + ky - g.pad;
          T* dst = row + oy * g.out_cols;
          if (iy < 0 || iy >= g.big.rows) {
            std::fill(dst, dst + g.out_cols, T(0));
            continue;
          }
          const T* line = channel + iy * g.big.cols;
          for (int ox = 0; ox < g.out_cols; ++ox) {
            const int ix = ox * g.stride + kx - g.pad;
            dst[ox] = (ix >= 0 && ix < g.big.cols) ? line[ix] : T(0);
          }
        }
      }
    }
  }
}

// Adjoint of im2col: accumulates columns back onto `big`.
template <typename T>
void col2im(const Patch& g, const T* col, T* dst) {
  const int k = g.kernel;
  const int out_plane = g.out_rows * g.out_cols;
  for (int c = 0; c < g.big.channels; ++c) {
    T* channel = dst + static_cast<std::size_t>(c) * g.big.plane();
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const T* row = col + static_cast<std::size_t>((c * k + ky) * k + kx) * out_plane;
        for (int oy = 0; oy < g.out_rows; ++oy) {
          const int iy = oy * g.stride + ky - g.pad;
          if (iy < 0 || iy >= g.big.rows) continue;
          T* line = channel + iy * g.big.cols;
          const T* src = row + oy * g.out_cols;
          for (int ox = 0; ox < g.out_cols; ++ox) {
            const int ix = ox * g.stride + kx - g.pad;
            if (ix >= 0 && ix < g.big.cols) line[ix] += src[ox];
          }
        }
      }
    }
  }
}

template <typename T>
Patch conv_geometry(const Layer<T>& l) {
  return {l.input, l.output.rows, l.output.cols, l.spec.kernel, 1, l.spec.padding};
}

// The transposed convolution is the adjoint of a stride-2 correlation from
// its output (big) to its input (small).
template <typename T>
Patch tconv_geometry(const Layer<T>& l) {
  return {l.output, l.input.rows, l.input.cols, l.spec.kernel, l.spec.stride,
          l.spec.padding};
}

template <typename T>
void forward_layer(const Layer<T>& l, const std::vector<T>& in, std::vector<T>& out) {
  out.assign(static_cast<std::size_t>(l.output.size()), T(0));
  switch (l.spec.kind) {
    case LayerKind::conv2d: {
      const auto g = conv_geometry(l);
      const int patch = l.input.channels * l.spec.kernel * l.spec.kernel;
      RowMat<T> col(patch, l.output.plane());
      im2col(g, in.data(), col.data());
      ConstMapRow<T> W(l.weight.data(), l.output.channels, patch);
      MapRow<T> Y(out.data(), l.output.channels, l.output.plane());
      Y.noalias() = W * col;
      for (int c = 0; c < l.output.channels; ++c) Y.row(c).array() += l.bias[c];
      break;
    }
    case LayerKind::transposed_conv2d: {
      const auto g = tconv_geometry(l);
      const int patch = l.output.channels * l.spec.kernel * l.spec.kernel;
      ConstMapRow<T> W(l.weight.data(), l.input.channels, patch);
      ConstMapRow<T> X(in.data(), l.input.channels, l.input.plane());
      const RowMat<T> col = W.transpose() * X;
      col2im(g, col.data(), out.data());
      for (int c = 0; c < l.output.channels; ++c) {
        T* ch = out.data() + static_cast<std::size_t>(c) * l.output.plane();
        for (int i = 0; i < l.output.plane(); ++i) ch[i] += l.bias[c];
      }
      break;
    }
    case LayerKind::maxpool2d: {
      for (int c = 0; c < l.output.channels; ++c) {
        const T* src = in.data() + static_cast<std::size_t>(c) * l.input.plane();
        T* dst = out.data() + static_cast<std::size_t>(c) * l.output.plane();
        for (int oy = 0; oy < l.output.rows; ++oy) {
          for (int ox = 0; ox < l.output.cols; ++ox) {
            const T* p = src + (2 * oy) * l.input.cols + 2 * ox;
            dst[oy * l.output.cols + ox] =
                std::max(std::max(p[0], p[1]), std::max(p[l.input.cols], p[l.input.cols + 1]));
          }
        }
      }
      break;
    }
    case LayerKind::relu:
      for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] < T(0) ? T(0) : in[i];
      break;
    case LayerKind::dense: {
      ConstMapRow<T> W(l.weight.data(), l.output.channels, l.input.size());
      Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> x(in.data(), l.input.size());
      Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>> y(out.data(), l.output.channels);
      Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> b(l.bias.data(), l.output.channels);
      y.noalias() = W * x;
      y += b;
      break;
    }
  }
}

// Given dL/d(out), accumulates parameter gradients and writes dL/d(in).
template <typename T>
void backward_layer(const Layer<T>& l, const std::vector<T>& in,
                    const std::vector<T>& d_out, std::vector<T>& d_in,
                    std::vector<T>& d_weight, std::vector<T>& d_bias, bool need_input) {
  d_in.assign(static_cast<std::size_t>(l.input.size()), T(0));
  switch (l.spec.kind) {
    case LayerKind::conv2d: {
      const auto g = conv_geometry(l);
      const int patch = l.input.channels * l.spec.kernel * l.spec.kernel;
      RowMat<T> col(patch, l.output.plane());
      im2col(g, in.data(), col.data());
      ConstMapRow<T> dY(d_out.data(), l.output.channels, l.output.plane());
      MapRow<T> dW(d_weight.data(), l.output.channels, patch);
      dW.noalias() += dY * col.transpose();
      for (int c = 0; c < l.output.channels; ++c) d_bias[c] += dY.row(c).sum();
      if (need_input) {
        ConstMapRow<T> W(l.weight.data(), l.output.channels, patch);
        const RowMat<T> d_col = W.transpose() * dY;
        col2im(g, d_col.data(), d_in.data());
      }
      break;
    }
    case LayerKind::transposed_conv2d: {
      const auto g = tconv_geometry(l);
      const int patch = l.output.channels * l.spec.kernel * l.spec.kernel;
      RowMat<T> d_col(patch, l.input.plane());
      im2col(g, d_out.data(), d_col.data());
      ConstMapRow<T> X(in.data(), l.input.channels, l.input.plane());
      MapRow<T> dW(d_weight.data(), l.input.channels, patch);
      dW.noalias() += X * d_col.transpose();
      for (int c = 0; c < l.output.channels; ++c) {
        const T* ch = d_out.data() + static_cast<std::size_t>(c) * l.output.plane();
        T sum = 0;
        for (int i = 0; i < l.output.plane(); ++i) sum += ch[i];
        d_bias[c] += sum;
      }
      if (need_input) {
        ConstMapRow<T> W(l.weight.data(), l.input.channels, patch);
        MapRow<T> dX(d_in.data(), l.input.channels, l.input.plane());
        dX.noalias() = W * d_col;
      }
      break;
    }
    case LayerKind::maxpool2d: {
      for (int c = 0; c < l.output.channels; ++c) {
        const T* src = in.data() + static_cast<std::size_t>(c) * l.input.plane();
        const T* g = d_out.data() + static_cast<std::size_t>(c) * l.output.plane();
        T* dst = d_in.data() + static_cast<std::size_t>(c) * l.input.plane();
        for (int oy = 0; oy < l.output.rows; ++oy) {
          for (int ox = 0; ox < l.output.cols; ++ox) {
            const int base = (2 * oy) * l.input.cols + 2 * ox;
            const int cand[4] = {base, base + 1, base + l.input.cols, base + l.input.cols + 1};
            int arg = cand[0];
            for (int q = 1; q < 4; ++q)
              if (src[cand[q]] > src[arg]) arg = cand[q];
            dst[arg] += g[oy * l.output.cols + ox];
          }
        }
      }
      break;
    }
    case LayerKind::relu:
      for (std::size_t i = 0; i < in.size(); ++i) d_in[i] = in[i] > T(0) ? d_out[i] : T(0);
      break;
    case LayerKind::dense: {
      ConstMapRow<T> W(l.weight.data(), l.output.channels, l.input.size());
      Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> x(in.data(), l.input.size());
      Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> dy(d_out.data(), l.output.channels);
      MapRow<T> dW(d_weight.data(), l.output.channels, l.input.size());
      dW.noalias() += dy * x.transpose();
      for (int c = 0; c < l.output.channels; ++c) d_bias[c] += dy[c];
      if (need_input) {
        Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>> dx(d_in.data(), l.input.size());
        dx.noalias() = W.transpose() * dy;
      }
      break;
    }
  }
}

template <typename T>
std::vector<T> apply_head(const Network<T>& net, const std::vector<T>& map) {
  if (net.head.kind == HeadKind::identity) return map;
  const auto& layout = net.head.layout;
  std::vector<double> sums(static_cast<std::size_t>(layout.classes()), 0.0);
  for (int r = 0; r < layout.plane_rows(); ++r)
    for (int c = 0; c < layout.plane_cols(); ++c) {
      const int k = layout.class_at(r, c);
      if (k >= 0) sums[static_cast<std::size_t>(k)] += map[static_cast<std::size_t>(r * layout.plane_cols() + c)];
    }
  std::vector<T> scores(sums.size());
  for (std::size_t k = 0; k < sums.size(); ++k)
    scores[k] = static_cast<T>(sums[k] / layout.atoms_per_class());
  return scores;
}

template <typename T>
std::vector<T> head_backward(const Network<T>& net, std::span<const T> d_scores) {
  const Shape map = net.final_map();
  if (net.head.kind == HeadKind::identity)
    return std::vector<T>(d_scores.begin(), d_scores.end());
  const auto& layout = net.head.layout;
  std::vector<T> d_map(static_cast<std::size_t>(map.size()), T(0));
  const T inv = T(1) / static_cast<T>(layout.atoms_per_class());
  for (int r = 0; r < layout.plane_rows(); ++r)
    for (int c = 0; c < layout.plane_cols(); ++c) {
      const int k = layout.class_at(r, c);
      if (k >= 0) d_map[static_cast<std::size_t>(r * layout.plane_cols() + c)] = d_scores[static_cast<std::size_t>(k)] * inv;
    }
  return d_map;
}

void check_kernel(int kernel) {
  require(kernel == 1 || kernel == 3 || kernel == 7 || kernel == 11, ErrorKind::dimension,
          "convolution kernels must be 1, 3, 7 or 11, got " + std::to_string(kernel));
}

}  // namespace

std::string to_string(const Shape& s) {
  return std::to_string(s.channels) + "x" + std::to_string(s.rows) + "x" +
         std::to_string(s.cols);
}

const char* to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::conv2d: return "conv2d";
    case LayerKind::transposed_conv2d: return "transposed_conv2d";
    case LayerKind::maxpool2d: return "maxpool2d";
    case LayerKind::relu: return "relu";
    case LayerKind::dense: return "dense";
  }
  return "?";
}

template <typename T>
int Network<T>::output_count() const {
  return head.kind == HeadKind::class_average ? head.layout.classes() : final_map().size();
}

template <typename T>
std::size_t Network<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.parameter_count();
  return n;
}

template <typename T>
NetworkBuilder<T>::NetworkBuilder(std::string name, Shape input) : current_(input) {
  require(input.size() > 0, ErrorKind::dimension, "network input must be non-empty");
  net_.name = std::move(name);
  net_.input = input;
}

template <typename T>
NetworkBuilder<T>& NetworkBuilder<T>::add(const LayerSpec& spec) {
  Layer<T> l;
  l.spec = spec;
  l.input = current_;
  require(spec.in_channels == 0 || spec.kind == LayerKind::dense ||
              spec.in_channels == current_.channels,
          ErrorKind::dimension,
          std::string(to_string(spec.kind)) + " expects " + std::to_string(spec.in_channels) +
              " input channels, running shape is " + to_string(current_));
  l.spec.in_channels = spec.kind == LayerKind::dense ? current_.size() : current_.channels;
  switch (spec.kind) {
    case LayerKind::conv2d:
      check_kernel(spec.kernel);
      require(spec.out_channels >= 1, ErrorKind::dimension, "conv2d needs output channels");
      l.spec.stride = 1;
      l.spec.padding = spec.kernel / 2;
      l.output = {spec.out_channels, current_.rows, current_.cols};
      l.weight.resize(static_cast<std::size_t>(spec.out_channels) * current_.channels *
                      spec.kernel * spec.kernel);
      l.bias.resize(static_cast<std::size_t>(spec.out_channels));
      break;
    case LayerKind::transposed_conv2d:
      require(spec.kernel == 3, ErrorKind::dimension,
              "transposed_conv2d supports 3x3 kernels only");
      require(spec.out_channels >= 1, ErrorKind::dimension,
              "transposed_conv2d needs output channels");
      l.spec.stride = 2;
      l.spec.padding = 1;
      l.output = {spec.out_channels, 2 * current_.rows, 2 * current_.cols};
      l.weight.resize(static_cast<std::size_t>(current_.channels) * spec.out_channels *
                      spec.kernel * spec.kernel);
      l.bias.resize(static_cast<std::size_t>(spec.out_channels));
      break;
    case LayerKind::maxpool2d:
      require(current_.rows % 2 == 0 && current_.cols % 2 == 0 && current_.rows > 0,
              ErrorKind::dimension,
              "maxpool2d needs even spatial dims, running shape is " + to_string(current_));
      l.spec.kernel = 2;
      l.spec.stride = 2;
      l.spec.out_channels = current_.channels;
      l.output = {current_.channels, current_.rows / 2, current_.cols / 2};
      break;
    case LayerKind::relu:
      l.spec.out_channels = current_.channels;
      l.output = current_;
      break;
    case LayerKind::dense:
      require(spec.out_channels >= 1, ErrorKind::dimension, "dense needs output width");
      l.spec.kernel = 1;
      l.output = {spec.out_channels, 1, 1};
      l.weight.resize(static_cast<std::size_t>(spec.out_channels) * current_.size());
      l.bias.resize(static_cast<std::size_t>(spec.out_channels));
      break;
  }
  current_ = l.output;
  net_.layers.push_back(std::move(l));
  return *this;
}

template <typename T>
NetworkBuilder<T>& NetworkBuilder<T>::conv2d(int out_channels, int kernel) {
  return add({LayerKind::conv2d, 0, out_channels, kernel, 1, 0});
}

template <typename T>
NetworkBuilder<T>& NetworkBuilder<T>::transposed_conv2d(int out_channels, int kernel) {
  return add({LayerKind::transposed_conv2d, 0, out_channels, kernel, 2, 1});
}

template <typename T>
NetworkBuilder<T>& NetworkBuilder<T>::maxpool2d() {
  return add({LayerKind::maxpool2d, 0, 0, 2, 2, 0});
}

template <typename T>
NetworkBuilder<T>& NetworkBuilder<T>::relu() {
  return add({LayerKind::relu, 0, 0, 1, 1, 0});
}

template <typename T>
NetworkBuilder<T>& NetworkBuilder<T>::dense(int out_width) {
  return add({LayerKind::dense, 0, out_width, 1, 1, 0});
}

template <typename T>
Network<T> NetworkBuilder<T>::class_average_head(const ClassLayout& layout) {
  require(current_ == Shape{1, layout.plane_rows(), layout.plane_cols()},
          ErrorKind::dimension,
          "class-average head needs a 1x" + std::to_string(layout.plane_rows()) + "x" +
              std::to_string(layout.plane_cols()) + " map, running shape is " +
              to_string(current_));
  net_.head = {HeadKind::class_average, layout};
  return net_;
}

template <typename T>
Network<T> NetworkBuilder<T>::identity_head() {
  net_.head = {HeadKind::identity, {}};
  return net_;
}

template <typename T>
void initialize(Network<T>& net, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (auto& l : net.layers) {
    if (l.weight.empty()) continue;
    int fan_in = 1;
    switch (l.spec.kind) {
      case LayerKind::conv2d:
      case LayerKind::transposed_conv2d:
        fan_in = l.input.channels * l.spec.kernel * l.spec.kernel;
        break;
      case LayerKind::dense:
        fan_in = l.input.size();
        break;
      default:
        break;
    }
    const double bound = std::sqrt(6.0 / fan_in);
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (auto& w : l.weight) w = static_cast<T>(dist(rng));
    std::fill(l.bias.begin(), l.bias.end(), T(0));
  }
}

template <typename T>
Gradients<T> Gradients<T>::zeros_like(const Network<T>& net) {
  Gradients g;
  for (const auto& l : net.layers) {
    g.weight.emplace_back(l.weight.size(), T(0));
    g.bias.emplace_back(l.bias.size(), T(0));
  }
  return g;
}

template <typename T>
void Gradients<T>::set_zero() {
  for (auto& w : weight) std::fill(w.begin(), w.end(), T(0));
  for (auto& b : bias) std::fill(b.begin(), b.end(), T(0));
}

template <typename T>
void Gradients<T>::scale(T factor) {
  for (auto& w : weight) for (auto& v : w) v *= factor;
  for (auto& b : bias) for (auto& v : b) v *= factor;
}

template <typename T>
void Gradients<T>::add(const Gradients& other) {
  for (std::size_t i = 0; i < weight.size(); ++i) {
    for (std::size_t j = 0; j < weight[i].size(); ++j) weight[i][j] += other.weight[i][j];
    for (std::size_t j = 0; j < bias[i].size(); ++j) bias[i][j] += other.bias[i][j];
  }
}

template <typename T>
Trace<T> forward_trace(const Network<T>& net, std::span<const T> input) {
  require(input.size() == static_cast<std::size_t>(net.input.size()), ErrorKind::dimension,
          net.name + " expects input of size " + std::to_string(net.input.size()) + " (" +
              to_string(net.input) + "), got " + std::to_string(input.size()));
  Trace<T> trace;
  trace.values.resize(net.layers.size() + 1);
  trace.values[0].assign(input.begin(), input.end());
  for (std::size_t i = 0; i < net.layers.size(); ++i)
    forward_layer(net.layers[i], trace.values[i], trace.values[i + 1]);
  trace.scores = apply_head(net, trace.values.back());
  return trace;
}

template <typename T>
std::vector<T> forward(const Network<T>& net, std::span<const T> input) {
  require(input.size() == static_cast<std::size_t>(net.input.size()), ErrorKind::dimension,
          net.name + " expects input of size " + std::to_string(net.input.size()) + " (" +
              to_string(net.input) + "), got " + std::to_string(input.size()));
  std::vector<T> cur(input.begin(), input.end());
  std::vector<T> next;
  for (const auto& l : net.layers) {
    forward_layer(l, cur, next);
    cur.swap(next);
  }
  return apply_head(net, cur);
}

template <typename T>
T softmax_cross_entropy(std::span<const T> scores, int target, std::vector<T>* grad) {
  require(target >= 0 && static_cast<std::size_t>(target) < scores.size(),
          ErrorKind::parameter, "target class out of range");
  double top = -std::numeric_limits<double>::infinity();
  for (T s : scores) top = std::max(top, static_cast<double>(s));
  double total = 0.0;
  for (T s : scores) total += std::exp(static_cast<double>(s) - top);
  const double log_z = top + std::log(total);
  if (grad) {
    grad->resize(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
      const double p = std::exp(static_cast<double>(scores[i]) - log_z);
      (*grad)[i] = static_cast<T>(p - (static_cast<int>(i) == target ? 1.0 : 0.0));
    }
  }
  return static_cast<T>(log_z - static_cast<double>(scores[static_cast<std::size_t>(target)]));
}

template <typename T>
Gradients<T> backward_from_scores(const Network<T>& net, const Trace<T>& trace,
                                  std::span<const T> d_scores, std::vector<T>* d_input) {
  require(trace.values.size() == net.layers.size() + 1, ErrorKind::dimension,
          "trace does not belong to this network");
  require(d_scores.size() == static_cast<std::size_t>(net.output_count()), ErrorKind::dimension,
          "score gradient has wrong length");
  auto grads = Gradients<T>::zeros_like(net);
  std::vector<T> d_cur = head_backward(net, d_scores);
  std::vector<T> d_prev;
  for (std::size_t i = net.layers.size(); i-- > 0;) {
    const bool need_input = i > 0 || d_input != nullptr;
    backward_layer(net.layers[i], trace.values[i], d_cur, d_prev, grads.weight[i],
                   grads.bias[i], need_input);
    d_cur.swap(d_prev);
  }
  if (d_input) *d_input = std::move(d_cur);
  return grads;
}

template <typename T>
Gradients<T> backward(const Network<T>& net, const Trace<T>& trace, int target, T* loss,
                      std::vector<T>* d_input) {
  std::vector<T> d_scores;
  const T value = softmax_cross_entropy<T>(trace.scores, target, &d_scores);
  if (loss) *loss = value;
  return backward_from_scores<T>(net, trace, d_scores, d_input);
}

template <typename T>
std::vector<double> support_probability_map(const Network<T>& net, std::span<const T> input) {
  require(net.head.kind == HeadKind::class_average, ErrorKind::unsupported,
          net.name + " has no spatial output map");
  const auto trace = forward_trace(net, input);
  const auto& map = trace.values.back();
  const auto& layout = net.head.layout;
  std::vector<double> p(static_cast<std::size_t>(layout.atom_count()));
  for (int a = 0; a < layout.atom_count(); ++a) {
    const auto cell = layout.cell_of(a);
    const double v = map[static_cast<std::size_t>(cell.row * layout.plane_cols() + cell.col)];
    p[static_cast<std::size_t>(a)] = 1.0 / (1.0 + std::exp(-v));
  }
  return p;
}

std::vector<double> class_average(const ClassLayout& layout, std::span<const double> map) {
  require(map.size() == static_cast<std::size_t>(layout.cell_count()), ErrorKind::dimension,
          "class_average: map size does not match layout");
  Network<double> probe;
  probe.input = {1, layout.plane_rows(), layout.plane_cols()};
  probe.head = {HeadKind::class_average, layout};
  return apply_head(probe, std::vector<double>(map.begin(), map.end()));
}

Network<float> build_csen1(const ClassLayout& layout, std::uint64_t seed) {
  auto net = NetworkBuilder<float>("csen1", {1, layout.plane_rows(), layout.plane_cols()})
                 .conv2d(48, 3).relu()
                 .conv2d(24, 3).relu()
                 .conv2d(1, 3)
                 .class_average_head(layout);
  initialize(net, seed);
  return net;
}

Network<float> build_csen2(const ClassLayout& layout, std::uint64_t seed) {
  require(layout.plane_rows() % 2 == 0 && layout.plane_cols() % 2 == 0, ErrorKind::dimension,
          "csen2 needs even plane dims, layout plane is " +
              std::to_string(layout.plane_rows()) + "x" + std::to_string(layout.plane_cols()));
  auto net = NetworkBuilder<float>("csen2", {1, layout.plane_rows(), layout.plane_cols()})
                 .conv2d(48, 3).relu()
                 .maxpool2d()
                 .conv2d(24, 3).relu()
                 .transposed_conv2d(24, 3).relu()
                 .conv2d(1, 3)
                 .class_average_head(layout);
  initialize(net, seed);
  return net;
}

Network<float> build_reconnet_baseline(const ClassLayout& layout, std::uint64_t seed) {
  auto net = NetworkBuilder<float>("reconnet", {1, layout.plane_rows(), layout.plane_cols()})
                 .conv2d(64, 11).relu()
                 .conv2d(32, 1).relu()
                 .conv2d(1, 7).relu()
                 .conv2d(64, 11).relu()
                 .conv2d(32, 1).relu()
                 .conv2d(1, 7)
                 .class_average_head(layout);
  initialize(net, seed);
  return net;
}

Network<float> build_mlp(int input_dim, std::span<const int> hidden, int classes,
                         std::uint64_t seed) {
  require(input_dim >= 1 && classes >= 1, ErrorKind::parameter, "mlp widths must be positive");
  NetworkBuilder<float> b("mlp", {input_dim, 1, 1});
  for (int width : hidden) {
    require(width >= 1, ErrorKind::parameter, "mlp widths must be positive");
    b.dense(width).relu();
  }
  auto net = b.dense(classes).identity_head();
  initialize(net, seed);
  return net;
}

std::size_t analytic_parameter_count(std::span<const LayerSpec> specs) {
  std::size_t n = 0;
  for (const auto& s : specs) {
    const auto k2 = static_cast<std::size_t>(s.kernel) * s.kernel;
    switch (s.kind) {
      case LayerKind::conv2d:
      case LayerKind::transposed_conv2d:
        n += k2 * s.in_channels * s.out_channels + s.out_channels;
        break;
      case LayerKind::dense:
        n += static_cast<std::size_t>(s.in_channels) * s.out_channels + s.out_channels;
        break;
      default:
        break;
    }
  }
  return n;
}

#define CSEN_INSTANTIATE(T)                                                              \
  template struct Network<T>;                                                            \
  template class NetworkBuilder<T>;                                                      \
  template struct Gradients<T>;                                                          \
  template void initialize<T>(Network<T>&, std::uint64_t);                               \
  template std::vector<T> forward<T>(const Network<T>&, std::span<const T>);             \
  template Trace<T> forward_trace<T>(const Network<T>&, std::span<const T>);             \
  template T softmax_cross_entropy<T>(std::span<const T>, int, std::vector<T>*);         \
  template Gradients<T> backward_from_scores<T>(const Network<T>&, const Trace<T>&,      \
                                                std::span<const T>, std::vector<T>*);    \
  template Gradients<T> backward<T>(const Network<T>&, const Trace<T>&, int, T*,         \
                                    std::vector<T>*);                                    \
  template std::vector<double> support_probability_map<T>(const Network<T>&,             \
                                                          std::span<const T>);

CSEN_INSTANTIATE(float)
CSEN_INSTANTIATE(double)

#undef CSEN_INSTANTIATE

}  // namespace csen::nn
