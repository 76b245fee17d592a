#include "csen/model_io.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "csen/binary_io.hpp"
#include "csen/error.hpp"

namespace csen {

namespace {

constexpr char kMagic[8] = {'C', 'S', 'E', 'N', 'M', 'O', 'D', 'L'};
constexpr char kTrailer[4] = {'E', 'N', 'D', '!'};
constexpr std::uint64_t kMaxTensorEntries = 1ull << 32;

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

[[noreturn]] void corrupt(const std::string& source, const std::string& what) {
  fail(ErrorKind::persistence, source + ": " + what);
}

using Items = std::vector<std::pair<std::string, std::string>>;

class SettingsReader {
 public:
  SettingsReader(const Items& items, std::string source) : source_(std::move(source)) {
    for (const auto& [k, v] : items)
      if (!index_.emplace(k, v).second) corrupt(source_, "duplicate setting '" + k + "'");
  }

  bool has(const std::string& k) const { return index_.count(k) != 0; }

  const std::string& str(const std::string& k) const {
    auto it = index_.find(k);
    if (it == index_.end()) corrupt(source_, "missing setting '" + k + "'");
    return it->second;
  }

  template <typename T>
  T num(const std::string& k) const {
    const auto& s = str(k);
    T v{};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
      corrupt(source_, "setting '" + k + "' is not numeric");
    return v;
  }

  bool flag(const std::string& k) const { return num<int>(k) != 0; }

 private:
  std::string source_;
  std::map<std::string, std::string> index_;
};

class TensorTable {
 public:
  explicit TensorTable(std::string source) : source_(std::move(source)) {}

  void add(const std::string& name, Matrix value) {
    if (!index_.emplace(name, tensors_.size()).second)
      corrupt(source_, "duplicate tensor '" + name + "'");
    tensors_.emplace_back(name, std::move(value));
  }

  const Matrix& get(const std::string& name, Index rows, Index cols) const {
    const Matrix& m = get(name);
    if (m.rows() != rows || m.cols() != cols) {
      corrupt(source_, "tensor '" + name + "' has shape " + std::to_string(m.rows()) + "x" +
                           std::to_string(m.cols()) + ", expected " + std::to_string(rows) +
                           "x" + std::to_string(cols));
    }
    return m;
  }

  const Matrix& get(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) corrupt(source_, "missing tensor '" + name + "'");
    return tensors_[it->second].second;
  }

  Vector vec(const std::string& name, Index n) const { return get(name, n, 1).col(0); }

  const std::vector<std::pair<std::string, Matrix>>& all() const { return tensors_; }

 private:
  std::string source_;
  std::vector<std::pair<std::string, Matrix>> tensors_;
  std::map<std::string, std::size_t> index_;
};

template <typename T>
Matrix as_column(const std::vector<T>& v) {
  Matrix m(static_cast<Index>(v.size()), 1);
  for (std::size_t i = 0; i < v.size(); ++i) m(static_cast<Index>(i), 0) = static_cast<double>(v[i]);
  return m;
}

nn::LayerKind parse_layer_kind(const std::string& s, const std::string& source) {
  for (auto k : {nn::LayerKind::conv2d, nn::LayerKind::transposed_conv2d,
                 nn::LayerKind::maxpool2d, nn::LayerKind::relu, nn::LayerKind::dense})
    if (s == nn::to_string(k)) return k;
  corrupt(source, "unknown layer kind '" + s + "'");
}

void collect(const ModelArtifact& model, Items& settings, TensorTable& tensors) {
  auto put = [&](const std::string& k, std::string v) { settings.emplace_back(k, std::move(v)); };
  const auto& s = model.settings;
  put("method", to_string(model.method));
  put("classes", std::to_string(model.class_names.size()));
  for (std::size_t i = 0; i < model.class_names.size(); ++i)
    put("class." + std::to_string(i), model.class_names[i]);
  put("proxy_mode", to_string(s.proxy_mode));
  put("proxy_scaling", s.proxy_scaling ? "1" : "0");
  put("crc_normalized_residual", s.crc_normalized_residual ? "1" : "0");
  put("src_lambda_scale", fmt(s.src_lambda_scale));
  put("src_max_iter", std::to_string(s.src_max_iter));
  put("src_tol", fmt(s.src_tol));
  put("src_normalized_residual", s.src_normalized_residual ? "1" : "0");
  put("src_lipschitz", fmt(s.src_lipschitz));
  put("knn_k", std::to_string(s.knn_k));
  put("knn_metric", to_string(s.knn_metric));
  put("input_dim", std::to_string(model.standardizer.dim()));
  put("reduced_dim", std::to_string(model.projection.reduced_dim()));

  tensors.add("standardizer.mean", model.standardizer.mean);
  tensors.add("standardizer.std", model.standardizer.std);
  tensors.add("projection.basis", model.projection.basis);
  tensors.add("projection.mean", model.projection.mean);
  tensors.add("projection.eigenvalues", model.projection.eigenvalues);

  if (model.dictionary) {
    const auto& dict = *model.dictionary;
    put("dictionary", "1");
    put("dictionary.lambda", fmt(dict.lambda));
    put("dictionary.atoms_per_class", std::to_string(dict.layout.atoms_per_class()));
    tensors.add("dictionary.phi", dict.phi);
    tensors.add("dictionary.D", dict.D);
    tensors.add("dictionary.B", dict.B);
    tensors.add("dictionary.source_rows", as_column(dict.source_rows));
  }
  if (model.network) {
    const auto& net = *model.network;
    put("network", "1");
    put("network.name", net.name);
    put("network.input", std::to_string(net.input.channels) + "," +
                             std::to_string(net.input.rows) + "," +
                             std::to_string(net.input.cols));
    put("network.head", net.head.kind == nn::HeadKind::class_average ? "class_average" : "identity");
    put("network.layers", std::to_string(net.layers.size()));
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
      const auto& l = net.layers[i];
      const std::string p = "network.layer." + std::to_string(i);
      put(p + ".kind", nn::to_string(l.spec.kind));
      put(p + ".out", std::to_string(l.spec.out_channels));
      put(p + ".kernel", std::to_string(l.spec.kernel));
      if (!l.weight.empty()) {
        tensors.add(p + ".weight", as_column(l.weight));
        tensors.add(p + ".bias", as_column(l.bias));
      }
    }
  }
  if (model.reference) {
    put("reference", "1");
    tensors.add("reference.points", model.reference->points);
    tensors.add("reference.labels", as_column(model.reference->labels));
  }
  tensors.add("training_loss", as_column(model.training_loss));
}

std::vector<int> parse_ints(const std::string& text, const std::string& source) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    int v = 0;
    const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
    if (res.ec != std::errc() || res.ptr != item.data() + item.size())
      corrupt(source, "bad integer list '" + text + "'");
    out.push_back(v);
  }
  return out;
}

template <typename T>
std::vector<T> column_values(const Matrix& m) {
  std::vector<T> out(static_cast<std::size_t>(m.rows()));
  for (Index i = 0; i < m.rows(); ++i) out[static_cast<std::size_t>(i)] = static_cast<T>(m(i, 0));
  return out;
}

template <typename T>
std::vector<T> exact_integers(const Matrix& m, const std::string& name, const std::string& source) {
  for (Index i = 0; i < m.rows(); ++i) {
    const double v = m(i, 0);
    if (!(v >= 0.0) || v != std::floor(v) || v > 9.0e15)
      corrupt(source, "tensor '" + name + "' holds a non-integer index");
  }
  return column_values<T>(m);
}

ModelArtifact assemble(const SettingsReader& s, const TensorTable& t, const std::string& source) {
  ModelArtifact model;
  try {
    model.method = parse_method(s.str("method"));
  } catch (const Error&) {
    corrupt(source, "unknown method '" + s.str("method") + "'");
  }
  const int classes = s.num<int>("classes");
  if (classes < 1 || classes > (1 << 20)) corrupt(source, "implausible class count");
  for (int i = 0; i < classes; ++i) model.class_names.push_back(s.str("class." + std::to_string(i)));

  auto& st = model.settings;
  const auto& mode = s.str("proxy_mode");
  if (mode == "ridge") st.proxy_mode = ProxyMode::ridge;
  else if (mode == "correlation") st.proxy_mode = ProxyMode::correlation;
  else corrupt(source, "unknown proxy mode");
  st.proxy_scaling = s.flag("proxy_scaling");
  st.crc_normalized_residual = s.flag("crc_normalized_residual");
  st.src_lambda_scale = s.num<double>("src_lambda_scale");
  st.src_max_iter = s.num<int>("src_max_iter");
  st.src_tol = s.num<double>("src_tol");
  st.src_normalized_residual = s.flag("src_normalized_residual");
  st.src_lipschitz = s.num<double>("src_lipschitz");
  st.knn_k = s.num<int>("knn_k");
  const auto& metric = s.str("knn_metric");
  if (metric == "euclidean") st.knn_metric = DistanceMetric::euclidean;
  else if (metric == "cityblock") st.knn_metric = DistanceMetric::cityblock;
  else if (metric == "cosine") st.knn_metric = DistanceMetric::cosine;
  else corrupt(source, "unknown knn metric");

  const auto d = s.num<Index>("input_dim");
  const auto m = s.num<Index>("reduced_dim");
  if (d < 1 || m < 1 || m > d) corrupt(source, "inconsistent input/reduced dimensions");
  model.standardizer.mean = t.vec("standardizer.mean", d);
  model.standardizer.std = t.vec("standardizer.std", d);
  model.projection.basis = t.get("projection.basis", m, d);
  model.projection.mean = t.vec("projection.mean", d);
  model.projection.eigenvalues = t.vec("projection.eigenvalues", m);

  if (s.has("dictionary")) {
    const int apc = s.num<int>("dictionary.atoms_per_class");
    if (apc < 1 || classes < 2) corrupt(source, "bad dictionary layout");
    Dictionary dict;
    dict.layout = build_layout(classes, apc);
    const Index n = dict.layout.atom_count();
    dict.lambda = s.num<double>("dictionary.lambda");
    dict.class_names = model.class_names;
    dict.phi = t.get("dictionary.phi", d, n);
    dict.D = t.get("dictionary.D", m, n);
    dict.B = t.get("dictionary.B", n, m);
    dict.source_rows = exact_integers<std::size_t>(t.get("dictionary.source_rows", n, 1),
                                                   "dictionary.source_rows", source);
    model.dictionary = std::move(dict);
  }
  if (s.has("network")) {
    const auto dims = parse_ints(s.str("network.input"), source);
    if (dims.size() != 3) corrupt(source, "network input shape needs 3 dims");
    const int layers = s.num<int>("network.layers");
    if (layers < 1 || layers > 4096) corrupt(source, "implausible layer count");
    try {
      nn::NetworkBuilder<float> b(s.str("network.name"), {dims[0], dims[1], dims[2]});
      for (int i = 0; i < layers; ++i) {
        const std::string p = "network.layer." + std::to_string(i);
        nn::LayerSpec spec;
        spec.kind = parse_layer_kind(s.str(p + ".kind"), source);
        spec.out_channels = s.num<int>(p + ".out");
        spec.kernel = s.num<int>(p + ".kernel");
        b.add(spec);
      }
      const auto& head = s.str("network.head");
      if (head == "class_average") {
        if (!model.dictionary) corrupt(source, "class-average head without a dictionary");
        model.network = b.class_average_head(model.dictionary->layout);
      } else if (head == "identity") {
        model.network = b.identity_head();
      } else {
        corrupt(source, "unknown head '" + head + "'");
      }
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::persistence) throw;
      corrupt(source, std::string("network structure rejected: ") + e.what());
    }
    auto& net = *model.network;
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
      auto& l = net.layers[i];
      if (l.weight.empty()) continue;
      const std::string p = "network.layer." + std::to_string(i);
      l.weight = column_values<float>(t.get(p + ".weight", static_cast<Index>(l.weight.size()), 1));
      l.bias = column_values<float>(t.get(p + ".bias", static_cast<Index>(l.bias.size()), 1));
    }
    if (net.output_count() != classes) corrupt(source, "network output does not match classes");
  }
  if (s.has("reference")) {
    ReferenceSet ref;
    ref.points = t.get("reference.points");
    if (ref.points.cols() != m) corrupt(source, "reference points do not match reduced dim");
    ref.labels = exact_integers<int>(t.get("reference.labels", ref.points.rows(), 1),
                                     "reference.labels", source);
    for (int label : ref.labels)
      if (label >= classes) corrupt(source, "reference label out of range");
    ref.classes = classes;
    model.reference = std::move(ref);
  }
  model.training_loss = column_values<double>(t.get("training_loss"));

  const bool needs_dict = uses_dictionary(model.method);
  const bool needs_net = is_network(model.method);
  if (needs_dict != model.dictionary.has_value() || needs_net != model.network.has_value() ||
      (model.method == Method::knn) != model.reference.has_value())
    corrupt(source, "components do not match method " + std::string(to_string(model.method)));
  return model;
}

}  // namespace

void write_model(const ModelArtifact& model, std::ostream& out) {
  Items settings;
  TensorTable tensors("<memory>");
  collect(model, settings, tensors);

  out.write(kMagic, sizeof kMagic);
  binio::put_u32(out, kModelFormatVersion);
  binio::put_u32(out, static_cast<std::uint32_t>(settings.size()));
  for (const auto& [k, v] : settings) {
    binio::put_string(out, k);
    binio::put_string(out, v);
  }
  binio::put_u32(out, static_cast<std::uint32_t>(tensors.all().size()));
  for (const auto& [name, value] : tensors.all()) {
    binio::put_string(out, name);
    binio::put_u64(out, static_cast<std::uint64_t>(value.rows()));
    binio::put_u64(out, static_cast<std::uint64_t>(value.cols()));
  }
  for (const auto& [name, value] : tensors.all())
    for (Index i = 0; i < value.rows(); ++i)
      for (Index j = 0; j < value.cols(); ++j) binio::put_f64(out, value(i, j));
  out.write(kTrailer, sizeof kTrailer);
}

ModelArtifact read_model(std::istream& in, const std::string& source) {
  binio::Reader r(in, ErrorKind::persistence, source);
  char magic[8];
  r.bytes(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof magic) != 0) corrupt(source, "not a model file (bad magic)");
  const auto version = r.u32();
  if (version != kModelFormatVersion) {
    corrupt(source, "unsupported format version " + std::to_string(version) + " (expected " +
                        std::to_string(kModelFormatVersion) + ")");
  }
  const auto n_settings = r.u32();
  if (n_settings > (1u << 20)) r.error("implausible settings count");
  Items items;
  for (std::uint32_t i = 0; i < n_settings; ++i) {
    auto k = r.string();
    auto v = r.string();
    items.emplace_back(std::move(k), std::move(v));
  }
  const auto n_tensors = r.u32();
  if (n_tensors > (1u << 20)) r.error("implausible tensor count");
  std::vector<std::tuple<std::string, std::uint64_t, std::uint64_t>> table;
  for (std::uint32_t i = 0; i < n_tensors; ++i) {
    auto name = r.string();
    const auto rows = r.u64();
    const auto cols = r.u64();
    if (rows > kMaxTensorEntries || cols > kMaxTensorEntries ||
        (rows != 0 && cols > kMaxTensorEntries / rows))
      r.error("implausible shape for tensor '" + name + "'");
    table.emplace_back(std::move(name), rows, cols);
  }

  const SettingsReader settings(items, source);
  TensorTable tensors(source);
  for (const auto& [name, rows, cols] : table) {
    Matrix value(static_cast<Index>(rows), static_cast<Index>(cols));
    for (Index i = 0; i < value.rows(); ++i)
      for (Index j = 0; j < value.cols(); ++j) value(i, j) = r.f64();
    if (!value.allFinite()) corrupt(source, "tensor '" + name + "' has non-finite values");
    tensors.add(name, std::move(value));
  }
  char trailer[4];
  r.bytes(trailer, sizeof trailer);
  if (std::memcmp(trailer, kTrailer, sizeof trailer) != 0) r.error("missing end marker");
  if (in.peek() != std::char_traits<char>::eof()) r.error("trailing bytes after end marker");
  return assemble(settings, tensors, source);
}

void save_model(const ModelArtifact& model, const std::filesystem::path& path) {
  std::ostringstream buffer(std::ios::binary);
  write_model(model, buffer);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorKind::persistence, "cannot write model " + path.string());
  const auto bytes = buffer.str();
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  require(static_cast<bool>(out), ErrorKind::persistence, "write failed for " + path.string());
}

ModelArtifact load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::persistence, "cannot open model " + path.string());
  return read_model(in, path.string());
}

}  // namespace csen
