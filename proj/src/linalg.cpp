#include "csen/linalg.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <string>

#include "csen/error.hpp"

namespace csen {

Vector Standardizer::apply(const Vector& s) const {
  require(s.size() == mean.size(), ErrorKind::dimension,
          "standardizer expects length " + std::to_string(mean.size()) +
              ", got " + std::to_string(s.size()));
  return (s - mean).cwiseQuotient(std);
}

Matrix Standardizer::apply_rows(const Matrix& X) const {
  require(X.cols() == mean.size(), ErrorKind::dimension,
          "standardizer expects " + std::to_string(mean.size()) +
              " columns, got " + std::to_string(X.cols()));
  Matrix out = X.rowwise() - mean.transpose();
  out.array().rowwise() /= std.transpose().array();
  return out;
}

Standardizer standardize_fit(const Matrix& X) {
  require(X.rows() > 0 && X.cols() > 0, ErrorKind::dimension,
          "standardize_fit on empty input");
  Standardizer out;
  out.mean = X.colwise().mean().transpose();
  const Matrix centered = X.rowwise() - out.mean.transpose();
  out.std = (centered.colwise().squaredNorm() / static_cast<double>(X.rows()))
                .cwiseSqrt()
                .transpose();
  for (Index j = 0; j < out.std.size(); ++j) {
    // Guard: constant columns pass through centred but unscaled.
    if (!(out.std[j] > 1e-12)) out.std[j] = 1.0;
  }
  return out;
}

ProjectionMatrix pca_fit(const Matrix& X, Index m) {
  const Index samples = X.rows();
  const Index d = X.cols();
  require(samples > 0 && d > 0, ErrorKind::dimension, "pca_fit on empty input");
  require(m >= 1 && m <= std::min(samples, d), ErrorKind::dimension,
          "pca_fit: m=" + std::to_string(m) + " outside [1, " +
              std::to_string(std::min(samples, d)) + "]");

  ProjectionMatrix P;
  P.mean = X.colwise().mean().transpose();
  const Matrix centered = X.rowwise() - P.mean.transpose();
  const double denom = samples > 1 ? static_cast<double>(samples - 1) : 1.0;
  const Matrix cov = (centered.transpose() * centered) / denom;

  Eigen::SelfAdjointEigenSolver<Matrix> solver(cov);
  require(solver.info() == Eigen::Success, ErrorKind::numeric,
          "pca_fit: eigensolver did not converge");

  // Eigen returns ascending eigenvalues.
  P.basis.resize(m, d);
  P.eigenvalues.resize(m);
  for (Index k = 0; k < m; ++k) {
    const Index src = d - 1 - k;
    Vector dir = solver.eigenvectors().col(src);
    Index arg = 0;
    dir.cwiseAbs().maxCoeff(&arg);
    if (dir[arg] < 0) dir = -dir;
    P.basis.row(k) = dir.transpose();
    P.eigenvalues[k] = std::max(0.0, solver.eigenvalues()[src]);
  }
  return P;
}

Vector pca_apply(const ProjectionMatrix& P, const Vector& s) {
  require(s.size() == P.input_dim(), ErrorKind::dimension,
          "pca_apply expects length " + std::to_string(P.input_dim()) +
              ", got " + std::to_string(s.size()));
  return P.basis * (s - P.mean);
}

Matrix pca_apply_rows(const ProjectionMatrix& P, const Matrix& X) {
  require(X.cols() == P.input_dim(), ErrorKind::dimension,
          "pca_apply expects " + std::to_string(P.input_dim()) +
              " columns, got " + std::to_string(X.cols()));
  return (X.rowwise() - P.mean.transpose()) * P.basis.transpose();
}

Index reduced_dimension(Index d, double compression_ratio) {
  require(compression_ratio > 0.0 && compression_ratio <= 1.0,
          ErrorKind::parameter, "compression ratio must lie in (0, 1]");
  const auto m = static_cast<Index>(std::llround(compression_ratio * d));
  return std::clamp<Index>(m, 1, d);
}

namespace {

Matrix spd_solve(const Matrix& G, const Matrix& rhs, const char* which) {
  Eigen::LLT<Matrix> llt(G);
  if (llt.info() == Eigen::Success) {
    Matrix x = llt.solve(rhs);
    if (x.allFinite()) return x;
  }
  // Fallback for systems that are only semi-definite to working precision.
  Eigen::LDLT<Matrix> ldlt(G);
  require(ldlt.info() == Eigen::Success && ldlt.isPositive(),
          ErrorKind::numeric,
          std::string("ridge_denoiser: singular ") + which + " system");
  Matrix x = ldlt.solve(rhs);
  require(x.allFinite(), ErrorKind::numeric,
          std::string("ridge_denoiser: non-finite ") + which + " solution");
  return x;
}

}  // namespace

Matrix ridge_denoiser(const Matrix& D, double lambda, RidgeForm form) {
  require(D.rows() >= 1 && D.cols() >= 1, ErrorKind::dimension,
          "ridge_denoiser on empty dictionary");
  require(lambda > 0.0 && std::isfinite(lambda), ErrorKind::parameter,
          "ridge_denoiser: lambda must be positive");
  const Index m = D.rows();
  const Index n = D.cols();
  if (form == RidgeForm::automatic) {
    form = n > m ? RidgeForm::dual : RidgeForm::primal;
  }
  if (form == RidgeForm::dual) {
    Matrix G = D * D.transpose();
    G.diagonal().array() += lambda;
    // B = D^T G^{-1} = (G^{-1} D)^T since G is symmetric.
    return spd_solve(G, D, "dual").transpose();
  }
  Matrix G = D.transpose() * D;
  G.diagonal().array() += lambda;
  return spd_solve(G, D.transpose(), "primal");
}

Matrix normalize_columns(const Matrix& M) {
  Matrix out = M;
  for (Index j = 0; j < out.cols(); ++j) {
    const double norm = out.col(j).norm();
    require(norm > 0.0 && std::isfinite(norm), ErrorKind::data,
            "normalize_columns: column " + std::to_string(j) +
                " has zero or non-finite norm");
    out.col(j) /= norm;
  }
  return out;
}

}  // namespace csen
