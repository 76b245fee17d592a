#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "csen/types.hpp"

namespace csen {

// Labeled feature vectors, one sample per row.
struct FeatureDataset {
  Matrix features;              // samples x d
  std::vector<int> labels;      // per sample, in [0, class_count)
  std::vector<std::string> class_names;
  std::string provenance;

  Index size() const { return features.rows(); }
  Index dim() const { return features.cols(); }
  int class_count() const { return static_cast<int>(class_names.size()); }

  Vector sample(Index i) const { return features.row(i).transpose(); }
  std::vector<std::size_t> class_counts() const;
  // Rows listed in `rows`, in that order.
  FeatureDataset subset(std::span<const std::size_t> rows) const;

  // Throws data error if labels or values break the invariants.
  void validate() const;
};

enum class DatasetFormat { csv, packed_binary };

// Guesses the format from the extension (.csv vs anything else).
DatasetFormat format_for_path(const std::filesystem::path& path);

FeatureDataset load_dataset(const std::filesystem::path& path,
                            DatasetFormat format);
void save_dataset(const FeatureDataset& data, const std::filesystem::path& path,
                  DatasetFormat format);

// Stream forms, mainly for tests.
FeatureDataset read_csv_dataset(std::istream& in, const std::string& source);
void write_csv_dataset(const FeatureDataset& data, std::ostream& out);
FeatureDataset read_packed_dataset(std::istream& in, const std::string& source);
void write_packed_dataset(const FeatureDataset& data, std::ostream& out);

// Gaussian clusters with unit covariance; class i is centred on
// separation * u_i for seeded random orthonormal u_i.
FeatureDataset generate_synthetic(int classes, Index per_class, Index dim,
                                  double separation, std::uint64_t seed);

}  // namespace csen
