#include "csen/dataset.hpp"

#include <Eigen/QR>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <unordered_map>

#include "csen/binary_io.hpp"
#include "csen/error.hpp"

namespace csen {

namespace {

constexpr char kPackedMagic[5] = {'S', 'P', 'K', 'D', '1'};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::vector<std::size_t> FeatureDataset::class_counts() const {
  std::vector<std::size_t> counts(class_names.size(), 0);
  for (int label : labels) ++counts.at(static_cast<std::size_t>(label));
  return counts;
}

FeatureDataset FeatureDataset::subset(std::span<const std::size_t> rows) const {
  FeatureDataset out;
  out.class_names = class_names;
  out.provenance = provenance;
  out.features.resize(static_cast<Index>(rows.size()), dim());
  out.labels.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i] < static_cast<std::size_t>(size()), ErrorKind::dimension,
            "subset row " + std::to_string(rows[i]) + " out of range");
    out.features.row(static_cast<Index>(i)) =
        features.row(static_cast<Index>(rows[i]));
    out.labels[i] = labels[rows[i]];
  }
  return out;
}

void FeatureDataset::validate() const {
  require(size() >= 1, ErrorKind::data, "dataset has no samples");
  require(labels.size() == static_cast<std::size_t>(size()), ErrorKind::data,
          "dataset label count does not match sample count");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    require(labels[i] >= 0 && labels[i] < class_count(), ErrorKind::data,
            "sample " + std::to_string(i) + " has label out of range");
  }
  require(features.allFinite(), ErrorKind::data,
          "dataset contains non-finite feature values");
}

DatasetFormat format_for_path(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? DatasetFormat::csv
                                    : DatasetFormat::packed_binary;
}

FeatureDataset read_csv_dataset(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  auto parse_error = [&](const std::string& what) {
    fail(ErrorKind::parse,
         source + ":" + std::to_string(line_no) + ": " + what);
  };

  if (!std::getline(in, line)) {
    line_no = 1;
    parse_error("missing header");
  }
  ++line_no;
  const auto header = split_csv_line(trim(line));
  if (header.size() < 2 || trim(header[0]) != "label") {
    parse_error("header must be 'label,f0,f1,...'");
  }
  const std::size_t dim = header.size() - 1;
  for (std::size_t j = 0; j < dim; ++j) {
    if (trim(header[j + 1]) != "f" + std::to_string(j)) {
      parse_error("header column " + std::to_string(j + 1) + " must be f" +
                  std::to_string(j));
    }
  }

  FeatureDataset out;
  out.provenance = source;
  std::unordered_map<std::string, int> class_index;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      parse_error("expected " + std::to_string(header.size()) +
                  " fields, got " + std::to_string(cells.size()));
    }
    const std::string name = trim(cells[0]);
    if (name.empty()) parse_error("empty label");
    auto [it, inserted] =
        class_index.emplace(name, static_cast<int>(out.class_names.size()));
    if (inserted) out.class_names.push_back(name);
    out.labels.push_back(it->second);
    for (std::size_t j = 0; j < dim; ++j) {
      const std::string cell = trim(cells[j + 1]);
      double v = 0.0;
      const auto* first = cell.data();
      const auto* last = cell.data() + cell.size();
      const auto res = std::from_chars(first, last, v);
      if (cell.empty() || res.ec != std::errc() || res.ptr != last) {
        parse_error("field " + std::to_string(j + 1) + " is not a number");
      }
      if (!std::isfinite(v)) {
        parse_error("field " + std::to_string(j + 1) + " is not finite");
      }
      values.push_back(v);
    }
  }
  if (out.labels.empty()) fail(ErrorKind::parse, source + ": no samples");

  const auto samples = static_cast<Index>(out.labels.size());
  out.features = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic,
                                                Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), samples, static_cast<Index>(dim));
  return out;
}

void write_csv_dataset(const FeatureDataset& data, std::ostream& out) {
  out << "label";
  for (Index j = 0; j < data.dim(); ++j) out << ",f" << j;
  out << '\n';
  char buf[64];
  for (Index i = 0; i < data.size(); ++i) {
    out << data.class_names.at(static_cast<std::size_t>(data.labels[i]));
    for (Index j = 0; j < data.dim(); ++j) {
      const auto res = std::to_chars(buf, buf + sizeof buf, data.features(i, j));
      out << ',' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
    }
    out << '\n';
  }
}

FeatureDataset read_packed_dataset(std::istream& in, const std::string& source) {
  binio::Reader r(in, ErrorKind::parse, source);
  char magic[5];
  r.bytes(magic, sizeof magic);
  if (std::memcmp(magic, kPackedMagic, sizeof magic) != 0) {
    fail(ErrorKind::parse, source + ": unknown magic at offset 0");
  }
  const auto samples = r.u32();
  const auto dim = r.u32();
  const auto classes = r.u32();
  if (samples == 0 || dim == 0 || classes == 0) r.error("zero-sized header");
  if (classes > (1u << 20)) r.error("implausible class count");

  FeatureDataset out;
  out.provenance = source;
  out.class_names.reserve(classes);
  for (std::uint32_t c = 0; c < classes; ++c) out.class_names.push_back(r.string());
  out.labels.resize(samples);
  for (auto& label : out.labels) {
    const auto v = r.u32();
    if (v >= classes) r.error("label out of range");
    label = static_cast<int>(v);
  }
  out.features.resize(samples, dim);
  for (std::uint32_t i = 0; i < samples; ++i) {
    for (std::uint32_t j = 0; j < dim; ++j) {
      const double v = r.f64();
      if (!std::isfinite(v)) r.error("non-finite feature value");
      out.features(i, j) = v;
    }
  }
  return out;
}

void write_packed_dataset(const FeatureDataset& data, std::ostream& out) {
  out.write(kPackedMagic, sizeof kPackedMagic);
  binio::put_u32(out, static_cast<std::uint32_t>(data.size()));
  binio::put_u32(out, static_cast<std::uint32_t>(data.dim()));
  binio::put_u32(out, static_cast<std::uint32_t>(data.class_names.size()));
  for (const auto& name : data.class_names) binio::put_string(out, name);
  for (int label : data.labels) binio::put_u32(out, static_cast<std::uint32_t>(label));
  for (Index i = 0; i < data.size(); ++i)
    for (Index j = 0; j < data.dim(); ++j) binio::put_f64(out, data.features(i, j));
}

FeatureDataset load_dataset(const std::filesystem::path& path,
                            DatasetFormat format) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::data,
          "cannot open dataset " + path.string());
  FeatureDataset out = format == DatasetFormat::csv
                           ? read_csv_dataset(in, path.string())
                           : read_packed_dataset(in, path.string());
  out.validate();
  return out;
}

void save_dataset(const FeatureDataset& data, const std::filesystem::path& path,
                  DatasetFormat format) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorKind::data,
          "cannot write dataset " + path.string());
  if (format == DatasetFormat::csv) {
    write_csv_dataset(data, out);
  } else {
    write_packed_dataset(data, out);
  }
  require(static_cast<bool>(out), ErrorKind::data,
          "write failed for " + path.string());
}

FeatureDataset generate_synthetic(int classes, Index per_class, Index dim,
                                  double separation, std::uint64_t seed) {
  require(classes >= 2, ErrorKind::parameter, "synthetic data needs >= 2 classes");
  require(per_class >= 1, ErrorKind::parameter, "per_class must be >= 1");
  require(dim >= 2, ErrorKind::parameter, "dimension must be >= 2");
  require(separation >= 0.0 && std::isfinite(separation), ErrorKind::parameter,
          "separation must be nonnegative");
  require(classes <= dim, ErrorKind::parameter,
          "orthonormal class means need classes <= dimension");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  Matrix raw(dim, classes);
  for (Index j = 0; j < raw.cols(); ++j)
    for (Index i = 0; i < raw.rows(); ++i) raw(i, j) = normal(rng);
  const Matrix Q = Eigen::HouseholderQR<Matrix>(raw).householderQ() *
                   Matrix::Identity(dim, classes);

  FeatureDataset out;
  out.provenance = "synthetic seed=" + std::to_string(seed);
  for (int c = 0; c < classes; ++c) out.class_names.push_back("class" + std::to_string(c));
  out.features.resize(classes * per_class, dim);
  out.labels.resize(static_cast<std::size_t>(classes * per_class));
  Index row = 0;
  for (int c = 0; c < classes; ++c) {
    const Vector centre = separation * Q.col(c);
    for (Index k = 0; k < per_class; ++k, ++row) {
      for (Index j = 0; j < dim; ++j) out.features(row, j) = centre[j] + normal(rng);
      out.labels[static_cast<std::size_t>(row)] = c;
    }
  }
  return out;
}

}  // namespace csen
