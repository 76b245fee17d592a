#include "csen/dictionary.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "csen/error.hpp"

namespace csen {

namespace {

int ceil_sqrt(int v) {
  int r = static_cast<int>(std::sqrt(static_cast<double>(v)));
  while (r * r < v) ++r;
  while (r > 1 && (r - 1) * (r - 1) >= v) --r;
  return r;
}

int ceil_div(int a, int b) { return (a + b - 1) / b; }

}  // namespace

ClassLayout::ClassLayout(int classes, int atoms_per_class)
    : classes_(classes), atoms_per_class_(atoms_per_class) {
  require(classes >= 2, ErrorKind::parameter, "layout needs at least 2 classes");
  require(atoms_per_class >= 1, ErrorKind::parameter,
          "layout needs at least 1 atom per class");
  block_rows_ = ceil_sqrt(atoms_per_class);
  block_cols_ = ceil_div(atoms_per_class, block_rows_);
  grid_cols_ = ceil_sqrt(classes);
  grid_rows_ = ceil_div(classes, grid_cols_);
  cell_atom_.assign(static_cast<std::size_t>(cell_count()), -1);
  for (int a = 0; a < atom_count(); ++a) {
    const auto cell = cell_of(a);
    cell_atom_[static_cast<std::size_t>(cell.row * plane_cols() + cell.col)] = a;
  }
}

PlaneCell ClassLayout::block_origin(int c) const {
  return {(c / grid_cols_) * block_rows_, (c % grid_cols_) * block_cols_};
}

PlaneCell ClassLayout::cell_of(int atom) const {
  const int c = atom / atoms_per_class_;
  const int j = atom % atoms_per_class_;
  const auto origin = block_origin(c);
  return {origin.row + j / block_cols_, origin.col + j % block_cols_};
}

ClassLayout build_layout(int classes, int atoms_per_class) {
  return ClassLayout(classes, atoms_per_class);
}

ProxyPlane plane_reshape(const Vector& flat, const ClassLayout& layout) {
  require(flat.size() == layout.atom_count(), ErrorKind::dimension,
          "plane_reshape expects " + std::to_string(layout.atom_count()) +
              " coefficients, got " + std::to_string(flat.size()));
  ProxyPlane plane;
  plane.rows = layout.plane_rows();
  plane.cols = layout.plane_cols();
  plane.cells.assign(static_cast<std::size_t>(layout.cell_count()), 0.0);
  for (int a = 0; a < layout.atom_count(); ++a) {
    const auto cell = layout.cell_of(a);
    plane.cells[static_cast<std::size_t>(cell.row * plane.cols + cell.col)] = flat[a];
  }
  return plane;
}

Vector plane_flatten(const ProxyPlane& plane, const ClassLayout& layout) {
  require(plane.rows == layout.plane_rows() && plane.cols == layout.plane_cols() &&
              plane.cells.size() == static_cast<std::size_t>(layout.cell_count()),
          ErrorKind::dimension, "plane dimensions do not match layout");
  Vector flat(layout.atom_count());
  for (int a = 0; a < layout.atom_count(); ++a) {
    const auto cell = layout.cell_of(a);
    flat[a] = plane.at(cell.row, cell.col);
  }
  return flat;
}

std::pair<Index, Index> Dictionary::class_columns(int c) const {
  const Index per = layout.atoms_per_class();
  return {static_cast<Index>(c) * per, per};
}

Dictionary build_dictionary_from_rows(const FeatureDataset& train,
                                      std::vector<std::size_t> rows,
                                      int atoms_per_class,
                                      const ProjectionMatrix& P, double lambda) {
  require(train.dim() == P.input_dim(), ErrorKind::dimension,
          "dictionary samples have dimension " + std::to_string(train.dim()) +
              ", projection expects " + std::to_string(P.input_dim()));
  Dictionary dict;
  dict.layout = build_layout(train.class_count(), atoms_per_class);
  require(rows.size() == static_cast<std::size_t>(dict.layout.atom_count()),
          ErrorKind::dimension, "atom row count does not match layout");
  dict.class_names = train.class_names;
  dict.lambda = lambda;

  Matrix phi(train.dim(), static_cast<Index>(rows.size()));
  for (std::size_t a = 0; a < rows.size(); ++a) {
    require(train.labels.at(rows[a]) == dict.layout.class_of_atom(static_cast<int>(a)),
            ErrorKind::data, "atom rows are not grouped by class");
    phi.col(static_cast<Index>(a)) = train.features.row(static_cast<Index>(rows[a])).transpose();
  }
  dict.phi = normalize_columns(phi);
  dict.D = normalize_columns(P.basis * dict.phi);
  dict.B = ridge_denoiser(dict.D, lambda);
  dict.source_rows = std::move(rows);
  return dict;
}

Dictionary build_dictionary(const FeatureDataset& train, int atoms_per_class,
                            const ProjectionMatrix& P, double lambda,
                            std::uint64_t seed) {
  require(atoms_per_class >= 1, ErrorKind::parameter,
          "atoms_per_class must be >= 1");
  std::vector<std::vector<std::size_t>> by_class(train.class_names.size());
  for (std::size_t i = 0; i < train.labels.size(); ++i)
    by_class.at(static_cast<std::size_t>(train.labels[i])).push_back(i);

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> rows;
  rows.reserve(by_class.size() * static_cast<std::size_t>(atoms_per_class));
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto& pool = by_class[c];
    require(pool.size() >= static_cast<std::size_t>(atoms_per_class), ErrorKind::data,
            "class '" + train.class_names[c] + "' has " + std::to_string(pool.size()) +
                " training samples, dictionary needs " +
                std::to_string(atoms_per_class));
    // Partial Fisher-Yates: the first atoms_per_class entries are a uniform
    // random ordered sample without replacement.
    for (std::size_t k = 0; k < static_cast<std::size_t>(atoms_per_class); ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, pool.size() - 1);
      std::swap(pool[k], pool[pick(rng)]);
      rows.push_back(pool[k]);
    }
  }
  return build_dictionary_from_rows(train, std::move(rows), atoms_per_class, P, lambda);
}

Vector proxy_coefficients(const Dictionary& dict, const Vector& y, ProxyMode mode) {
  require(y.size() == dict.reduced_dim(), ErrorKind::dimension,
          "proxy expects query length " + std::to_string(dict.reduced_dim()) +
              ", got " + std::to_string(y.size()));
  return mode == ProxyMode::ridge ? Vector(dict.B * y)
                                  : Vector(dict.D.transpose() * y);
}

ProxyPlane proxy(const Dictionary& dict, const Vector& y, ProxyMode mode) {
  return plane_reshape(proxy_coefficients(dict, y, mode), dict.layout);
}

}  // namespace csen
