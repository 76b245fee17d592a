#pragma once

#include <span>

#include "csen/types.hpp"

namespace csen {

// Per-feature affine normalization to zero mean and unit (population) variance.
struct Standardizer {
  Vector mean;
  Vector std;

  Index dim() const { return mean.size(); }
  Vector apply(const Vector& s) const;
  // Row-wise application to a samples x d matrix.
  Matrix apply_rows(const Matrix& X) const;
};

// Standardizer fitted on the rows of X. Zero-variance columns get std 1.
Standardizer standardize_fit(const Matrix& X);

// Rows of `basis` are orthonormal principal directions (m x d).
struct ProjectionMatrix {
  Matrix basis;
  Vector mean;
  Vector eigenvalues;  // descending, length m

  Index reduced_dim() const { return basis.rows(); }
  Index input_dim() const { return basis.cols(); }
};

// Top-m principal directions of the sample covariance of X (rows = samples).
// Each direction's largest-magnitude entry is made positive.
ProjectionMatrix pca_fit(const Matrix& X, Index m);

// A (s - mean).
Vector pca_apply(const ProjectionMatrix& P, const Vector& s);
// Row-wise pca_apply; returns samples x m.
Matrix pca_apply_rows(const ProjectionMatrix& P, const Matrix& X);

// Reduced dimension for a compression ratio m/d, at least 1.
Index reduced_dimension(Index d, double compression_ratio);

enum class RidgeForm { automatic, primal, dual };

// B = (D^T D + lambda I)^{-1} D^T, n x m for an m x n D.
//
// automatic picks the dual (Woodbury) form D^T (D D^T + lambda I)^{-1} when
// n > m, the primal form otherwise.
Matrix ridge_denoiser(const Matrix& D, double lambda,
                      RidgeForm form = RidgeForm::automatic);

// Copy of M with every column scaled to unit l2 norm.
Matrix normalize_columns(const Matrix& M);

}  // namespace csen
