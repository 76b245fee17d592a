#include "csen/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "csen/error.hpp"

namespace csen {

const char* to_string(Method m) {
  switch (m) {
    case Method::csen1: return "csen1";
    case Method::csen2: return "csen2";
    case Method::reconnet: return "reconnet";
    case Method::mlp: return "mlp";
    case Method::crc: return "crc";
    case Method::src: return "src";
    case Method::knn: return "knn";
  }
  return "?";
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> methods{Method::csen1, Method::csen2, Method::reconnet,
                                           Method::mlp,   Method::crc,   Method::src,
                                           Method::knn};
  return methods;
}

Method parse_method(const std::string& name) {
  for (Method m : all_methods())
    if (name == to_string(m)) return m;
  fail(ErrorKind::parse, "unknown method '" + name + "'");
}

bool is_network(Method m) {
  return m == Method::csen1 || m == Method::csen2 || m == Method::reconnet || m == Method::mlp;
}

bool uses_dictionary(Method m) {
  return m == Method::csen1 || m == Method::csen2 || m == Method::reconnet ||
         m == Method::crc || m == Method::src;
}

const char* to_string(ProxyMode m) {
  return m == ProxyMode::ridge ? "ridge" : "correlation";
}

const char* to_string(DistanceMetric m) {
  switch (m) {
    case DistanceMetric::euclidean: return "euclidean";
    case DistanceMetric::cityblock: return "cityblock";
    case DistanceMetric::cosine: return "cosine";
  }
  return "?";
}

void ExperimentConfig::validate() const {
  require(pca_cr > 0.0 && pca_cr <= 1.0, ErrorKind::parameter, "pca_cr must lie in (0, 1]");
  require(atoms_per_class >= 1, ErrorKind::parameter, "atoms_per_class must be >= 1");
  require(lambda > 0.0 && std::isfinite(lambda), ErrorKind::parameter, "lambda must be positive");
  require(crc_atoms_per_class >= 0 && src_atoms_per_class >= 0, ErrorKind::parameter,
          "dictionary sizes must be nonnegative");
  require(src_lambda_scale > 0.0, ErrorKind::parameter, "src_lambda_scale must be positive");
  require(src_max_iter >= 1 && src_tol > 0.0, ErrorKind::parameter, "bad src solver settings");
  require(knn_k >= 1, ErrorKind::parameter, "knn_k must be >= 1");
  require(k_folds >= 2, ErrorKind::parameter, "k_folds must be >= 2");
  require(balance_jitter >= 0.0, ErrorKind::parameter, "balance_jitter must be nonnegative");
  require(threads >= 1, ErrorKind::parameter, "threads must be >= 1");
  for (int w : mlp_hidden) require(w >= 1, ErrorKind::parameter, "mlp widths must be positive");
  csen_train.validate();
  mlp_train.validate();
}

namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  const auto* last = text.data() + text.size();
  const auto res = std::from_chars(text.data(), last, v);
  require(!text.empty() && res.ec == std::errc() && res.ptr == last, ErrorKind::parse,
          "config key '" + key + "': '" + text + "' is not a valid number");
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  fail(ErrorKind::parse, "config key '" + key + "': '" + text + "' is not a boolean");
}

bool parse_residual(const std::string& key, const std::string& text) {
  if (text == "normalized") return true;
  if (text == "plain") return false;
  fail(ErrorKind::parse, "config key '" + key + "' must be 'normalized' or 'plain'");
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

void set_train(nn::TrainConfig& t, const std::string& key, const std::string& field,
               const std::string& value) {
  if (field == "learning_rate") t.learning_rate = parse_number<double>(key, value);
  else if (field == "beta1") t.beta1 = parse_number<double>(key, value);
  else if (field == "beta2") t.beta2 = parse_number<double>(key, value);
  else if (field == "epsilon") t.epsilon = parse_number<double>(key, value);
  else if (field == "epochs") t.epochs = parse_number<int>(key, value);
  else if (field == "batch_size") t.batch_size = parse_number<int>(key, value);
  else fail(ErrorKind::parse, "unknown config key '" + key + "'");
}

}  // namespace

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  if (key == "method") method = parse_method(value);
  else if (key == "pca_cr") pca_cr = parse_number<double>(key, value);
  else if (key == "atoms_per_class") atoms_per_class = parse_number<int>(key, value);
  else if (key == "lambda") lambda = parse_number<double>(key, value);
  else if (key == "proxy_mode") {
    if (value == "ridge") proxy_mode = ProxyMode::ridge;
    else if (value == "correlation") proxy_mode = ProxyMode::correlation;
    else fail(ErrorKind::parse, "proxy_mode must be 'ridge' or 'correlation'");
  } else if (key == "proxy_scaling") proxy_scaling = parse_bool(key, value);
  else if (key == "crc_atoms_per_class") crc_atoms_per_class = parse_number<int>(key, value);
  else if (key == "crc_residual") crc_normalized_residual = parse_residual(key, value);
  else if (key == "src_atoms_per_class") src_atoms_per_class = parse_number<int>(key, value);
  else if (key == "src_lambda_scale") src_lambda_scale = parse_number<double>(key, value);
  else if (key == "src_max_iter") src_max_iter = parse_number<int>(key, value);
  else if (key == "src_tol") src_tol = parse_number<double>(key, value);
  else if (key == "src_residual") src_normalized_residual = parse_residual(key, value);
  else if (key == "knn_k") knn_k = parse_number<int>(key, value);
  else if (key == "knn_metric") {
    if (value == "euclidean") knn_metric = DistanceMetric::euclidean;
    else if (value == "cityblock") knn_metric = DistanceMetric::cityblock;
    else if (value == "cosine") knn_metric = DistanceMetric::cosine;
    else fail(ErrorKind::parse, "knn_metric must be euclidean, cityblock or cosine");
  } else if (key.rfind("csen_", 0) == 0) set_train(csen_train, key, key.substr(5), value);
  else if (key == "mlp_hidden") {
    std::vector<int> widths;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) widths.push_back(parse_number<int>(key, trim(item)));
    require(!widths.empty(), ErrorKind::parse, "mlp_hidden needs at least one width");
    mlp_hidden = widths;
  } else if (key.rfind("mlp_", 0) == 0) set_train(mlp_train, key, key.substr(4), value);
  else if (key == "k_folds") k_folds = parse_number<int>(key, value);
  else if (key == "balance") balance = parse_bool(key, value);
  else if (key == "balance_jitter") balance_jitter = parse_number<double>(key, value);
  else if (key == "seed") seed = parse_number<std::uint64_t>(key, value);
  else if (key == "threads") threads = parse_number<int>(key, value);
  else fail(ErrorKind::parse, "unknown config key '" + key + "'");
}

std::string ExperimentConfig::to_text() const {
  std::ostringstream out;
  auto train = [&](const char* prefix, const nn::TrainConfig& t) {
    out << prefix << "learning_rate = " << format_double(t.learning_rate) << '\n'
        << prefix << "beta1 = " << format_double(t.beta1) << '\n'
        << prefix << "beta2 = " << format_double(t.beta2) << '\n'
        << prefix << "epsilon = " << format_double(t.epsilon) << '\n'
        << prefix << "epochs = " << t.epochs << '\n'
        << prefix << "batch_size = " << t.batch_size << '\n';
  };
  out << "method = " << to_string(method) << '\n'
      << "pca_cr = " << format_double(pca_cr) << '\n'
      << "atoms_per_class = " << atoms_per_class << '\n'
      << "lambda = " << format_double(lambda) << '\n'
      << "proxy_mode = " << to_string(proxy_mode) << '\n'
      << "proxy_scaling = " << (proxy_scaling ? "true" : "false") << '\n'
      << "crc_atoms_per_class = " << crc_atoms_per_class << '\n'
      << "crc_residual = " << (crc_normalized_residual ? "normalized" : "plain") << '\n'
      << "src_atoms_per_class = " << src_atoms_per_class << '\n'
      << "src_lambda_scale = " << format_double(src_lambda_scale) << '\n'
      << "src_max_iter = " << src_max_iter << '\n'
      << "src_tol = " << format_double(src_tol) << '\n'
      << "src_residual = " << (src_normalized_residual ? "normalized" : "plain") << '\n'
      << "knn_k = " << knn_k << '\n'
      << "knn_metric = " << to_string(knn_metric) << '\n';
  train("csen_", csen_train);
  train("mlp_", mlp_train);
  out << "mlp_hidden = ";
  for (std::size_t i = 0; i < mlp_hidden.size(); ++i) out << (i ? "," : "") << mlp_hidden[i];
  out << '\n'
      << "k_folds = " << k_folds << '\n'
      << "balance = " << (balance ? "true" : "false") << '\n'
      << "balance_jitter = " << format_double(balance_jitter) << '\n'
      << "seed = " << seed << '\n'
      << "threads = " << threads << '\n';
  return out.str();
}

ExperimentConfig parse_config(std::istream& in, const std::string& source,
                              ExperimentConfig base) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail(ErrorKind::parse, source + ":" + std::to_string(line_no) + ": expected key = value");
    }
    try {
      base.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const Error& e) {
      fail(e.kind(), source + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  try {
    base.validate();
  } catch (const Error& e) {
    fail(e.kind(), source + ": " + e.what());
  }
  return base;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::data, "cannot open config " + path.string());
  return parse_config(in, path.string(), std::move(base));
}

}  // namespace csen
