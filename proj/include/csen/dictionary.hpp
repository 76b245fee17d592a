#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "csen/dataset.hpp"
#include "csen/linalg.hpp"
#include "csen/types.hpp"

namespace csen {

struct PlaneCell {
  int row = 0;
  int col = 0;
  friend bool operator==(const PlaneCell&, const PlaneCell&) = default;
};

// 2-D arrangement of n = classes * atoms_per_class coefficients where each
// class occupies one contiguous rectangular block. Atom a belongs to class
// a / atoms_per_class and fills its block row-major. Cells not covered by
// an atom are dead and always read as zero.
class ClassLayout {
 public:
  ClassLayout() = default;
  ClassLayout(int classes, int atoms_per_class);

  int classes() const { return classes_; }
  int atoms_per_class() const { return atoms_per_class_; }
  int atom_count() const { return classes_ * atoms_per_class_; }
  int block_rows() const { return block_rows_; }
  int block_cols() const { return block_cols_; }
  int grid_rows() const { return grid_rows_; }
  int grid_cols() const { return grid_cols_; }
  int plane_rows() const { return grid_rows_ * block_rows_; }
  int plane_cols() const { return grid_cols_ * block_cols_; }
  int cell_count() const { return plane_rows() * plane_cols(); }

  PlaneCell cell_of(int atom) const;
  int class_of_atom(int atom) const { return atom / atoms_per_class_; }
  // Atom index at a plane cell, or -1 for a dead cell.
  int atom_at(int row, int col) const {
    return cell_atom_[static_cast<std::size_t>(row * plane_cols() + col)];
  }
  // Class owning a live cell, or -1 for a dead cell.
  int class_at(int row, int col) const {
    const int atom = atom_at(row, col);
    return atom < 0 ? -1 : class_of_atom(atom);
  }
  // Top-left cell of class c's block.
  PlaneCell block_origin(int c) const;

  friend bool operator==(const ClassLayout& a, const ClassLayout& b) {
    return a.classes_ == b.classes_ && a.atoms_per_class_ == b.atoms_per_class_;
  }

 private:
  int classes_ = 0;
  int atoms_per_class_ = 0;
  int block_rows_ = 0;
  int block_cols_ = 0;
  int grid_rows_ = 0;
  int grid_cols_ = 0;
  std::vector<int> cell_atom_;
};

ClassLayout build_layout(int classes, int atoms_per_class);

// Proxy coefficients arranged on a layout's plane (row-major cells).
struct ProxyPlane {
  int rows = 0;
  int cols = 0;
  std::vector<double> cells;

  double at(int r, int c) const {
    return cells[static_cast<std::size_t>(r * cols + c)];
  }
};

ProxyPlane plane_reshape(const Vector& flat, const ClassLayout& layout);
// Live cells in atom order; dead cells are skipped.
Vector plane_flatten(const ProxyPlane& plane, const ClassLayout& layout);

enum class ProxyMode { ridge, correlation };

struct Dictionary {
  Matrix phi;  // d x n raw atoms, unit columns
  Matrix D;    // m x n equivalent dictionary, unit columns
  Matrix B;    // n x m denoiser
  ClassLayout layout;
  double lambda = 0.0;
  std::vector<std::string> class_names;
  // Row of the source dataset each atom was drawn from.
  std::vector<std::size_t> source_rows;

  int classes() const { return layout.classes(); }
  Index atom_count() const { return D.cols(); }
  Index reduced_dim() const { return D.rows(); }
  // Column range [first, first + atoms_per_class) of class c.
  std::pair<Index, Index> class_columns(int c) const;
};

// Seeded random choice of atoms_per_class samples per class, in random
// order. `train` holds feature vectors in the same space as P's input.
Dictionary build_dictionary(const FeatureDataset& train, int atoms_per_class,
                            const ProjectionMatrix& P, double lambda,
                            std::uint64_t seed);

// Builds from explicit atom rows (class-major, atoms_per_class each).
Dictionary build_dictionary_from_rows(const FeatureDataset& train,
                                      std::vector<std::size_t> rows,
                                      int atoms_per_class,
                                      const ProjectionMatrix& P, double lambda);

Vector proxy_coefficients(const Dictionary& dict, const Vector& y, ProxyMode mode);
ProxyPlane proxy(const Dictionary& dict, const Vector& y,
                 ProxyMode mode = ProxyMode::ridge);

}  // namespace csen
