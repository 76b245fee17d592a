#include "csen/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "csen/error.hpp"

namespace csen {

SupportEstimate estimate_support(const Vector& scores, double tau) {
  SupportEstimate out;
  out.scores = scores;
  out.tau = tau;
  out.mask.assign(static_cast<std::size_t>(scores.size()), 0);
  for (Index i = 0; i < scores.size(); ++i) {
    if (scores[i] > tau) {
      out.mask[static_cast<std::size_t>(i)] = 1;
      out.support.push_back(i);
    }
  }
  return out;
}

double lasso_objective(const Matrix& D, const Vector& y, const Vector& x,
                       double lambda_l1) {
  return 0.5 * (D * x - y).squaredNorm() + lambda_l1 * x.lpNorm<1>();
}

double lipschitz_constant(const Matrix& D, int steps) {
  // Iterate on the smaller Gram matrix; both share the top eigenvalue.
  const bool wide = D.cols() > D.rows();
  const Index k = wide ? D.rows() : D.cols();
  if (k == 0) return 0.0;
  Vector v = Vector::Ones(k) / std::sqrt(static_cast<double>(k));
  double estimate = 0.0;
  for (int s = 0; s < steps; ++s) {
    Vector w = wide ? Vector(D * (D.transpose() * v)) : Vector(D.transpose() * (D * v));
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    estimate = v.dot(w);
    v = w / norm;
  }
  return estimate;
}

Vector soft_threshold(const Vector& v, double threshold) {
  return v.unaryExpr([threshold](double a) {
    if (a > threshold) return a - threshold;
    if (a < -threshold) return a + threshold;
    return 0.0;
  });
}

SparseSolution fista_l1(const Matrix& D, const Vector& y, double lambda_l1,
                        const FistaOptions& options) {
  require(y.size() == D.rows(), ErrorKind::dimension,
          "fista_l1: query length " + std::to_string(y.size()) +
              " does not match dictionary rows " + std::to_string(D.rows()));
  require(lambda_l1 > 0.0 && std::isfinite(lambda_l1), ErrorKind::parameter,
          "fista_l1: lambda must be positive");
  require(options.max_iter >= 1, ErrorKind::parameter, "fista_l1: max_iter < 1");

  const double L = options.lipschitz ? *options.lipschitz : lipschitz_constant(D);
  SparseSolution sol;
  sol.x_hat = Vector::Zero(D.cols());
  if (!(L > 0.0)) {
    sol.final_objective = 0.5 * y.squaredNorm();
    sol.converged = true;
    return sol;
  }
  const double step = 1.0 / L;

  Vector x = Vector::Zero(D.cols());
  Vector Dx = Vector::Zero(D.rows());
  Vector Dx_prev = Dx;
  Vector x_prev = x;
  Vector z = x;
  Vector Dz = Dx;
  double t = 1.0;
  double objective = 0.5 * y.squaredNorm();

  for (int it = 1; it <= options.max_iter; ++it) {
    const Vector grad = D.transpose() * (Dz - y);
    x_prev.swap(x);
    Dx_prev.swap(Dx);
    x = soft_threshold(z - step * grad, step * lambda_l1);
    Dx.noalias() = D * x;

    const double next = 0.5 * (Dx - y).squaredNorm() + lambda_l1 * x.lpNorm<1>();
    if (!std::isfinite(next)) {
      fail(ErrorKind::numeric, "fista_l1: non-finite objective at iteration " +
                                   std::to_string(it));
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double beta = (t - 1.0) / t_next;
    z = x + beta * (x - x_prev);
    Dz = Dx + beta * (Dx - Dx_prev);
    t = t_next;

    const double change = std::abs(next - objective);
    const double scale = std::max(objective, std::numeric_limits<double>::min());
    objective = next;
    sol.iterations = it;
    if (change <= options.tol * scale) {
      sol.converged = true;
      break;
    }
  }
  sol.x_hat = std::move(x);
  sol.final_objective = objective;
  return sol;
}

ClassDecision decide(Vector scores, ScoreSense sense) {
  require(scores.size() >= 1, ErrorKind::dimension, "decision needs scores");
  const bool lower = sense == ScoreSense::lower_is_better;
  auto better = [lower](double a, double b) { return lower ? a < b : a > b; };
  Index best = 0;
  for (Index i = 1; i < scores.size(); ++i)
    if (better(scores[i], scores[best])) best = i;
  ClassDecision out;
  out.class_index = static_cast<int>(best);
  out.sense = sense;
  if (scores.size() > 1) {
    Index second = best == 0 ? 1 : 0;
    for (Index i = 0; i < scores.size(); ++i)
      if (i != best && better(scores[i], scores[second])) second = i;
    const double gap = std::abs(scores[second] - scores[best]);
    out.margin = std::isnan(gap) ? 0.0 : gap;
  }
  out.scores = std::move(scores);
  return out;
}

namespace {

Vector class_residuals(const Dictionary& dict, const Vector& y, const Vector& x,
                       bool normalized, bool& any_nonzero) {
  const int c = dict.classes();
  Vector residuals(c);
  any_nonzero = false;
  for (int k = 0; k < c; ++k) {
    const auto [first, count] = dict.class_columns(k);
    const auto xk = x.segment(first, count);
    const double residual = (y - dict.D.middleCols(first, count) * xk).norm();
    if (normalized) {
      const double norm = xk.norm();
      if (norm > 0.0) {
        any_nonzero = true;
        residuals[k] = residual / norm;
      } else {
        residuals[k] = std::numeric_limits<double>::infinity();
      }
    } else {
      any_nonzero = any_nonzero || xk.squaredNorm() > 0.0;
      residuals[k] = residual;
    }
  }
  return residuals;
}

}  // namespace

ClassDecision src_classify(const Dictionary& dict, const Vector& y,
                           const SrcOptions& options) {
  require(y.size() == dict.reduced_dim(), ErrorKind::dimension,
          "src_classify: query length mismatch");
  const double norm = y.norm();
  require(norm > 0.0 && std::isfinite(norm), ErrorKind::numeric,
          "src_classify: query has zero or non-finite norm");
  const Vector unit = y / norm;
  double lambda = options.lambda_l1 ? *options.lambda_l1
                                    : options.lambda_scale *
                                          (dict.D.transpose() * unit).lpNorm<Eigen::Infinity>();
  if (!(lambda > 0.0)) lambda = std::numeric_limits<double>::min();

  FistaOptions fista;
  fista.max_iter = options.max_iter;
  fista.tol = options.tol;
  fista.lipschitz = options.lipschitz;
  const auto sol = fista_l1(dict.D, unit, lambda, fista);

  bool any_nonzero = false;
  Vector residuals =
      class_residuals(dict, unit, sol.x_hat, options.normalized_residual, any_nonzero);
  return decide(std::move(residuals), ScoreSense::lower_is_better);
}

ClassDecision crc_classify(const Dictionary& dict, const Vector& y,
                           const CrcOptions& options) {
  require(y.size() == dict.reduced_dim(), ErrorKind::dimension,
          "crc_classify: query length mismatch");
  const Vector x = dict.B * y;
  bool any_nonzero = false;
  Vector residuals =
      class_residuals(dict, y, x, options.normalized_residual, any_nonzero);
  require(any_nonzero, ErrorKind::numeric,
          "crc_classify: all class coefficient groups are zero");
  return decide(std::move(residuals), ScoreSense::lower_is_better);
}

ClassDecision knn_classify(const ReferenceSet& reference, const Vector& y, int k,
                           DistanceMetric metric) {
  const Index n = reference.points.rows();
  require(k >= 1, ErrorKind::parameter, "knn: k must be >= 1");
  require(static_cast<Index>(k) <= n, ErrorKind::parameter,
          "knn: k=" + std::to_string(k) + " exceeds training size " + std::to_string(n));
  require(y.size() == reference.points.cols(), ErrorKind::dimension,
          "knn: query length mismatch");

  Vector dist(n);
  switch (metric) {
    case DistanceMetric::euclidean:
      dist = (reference.points.rowwise() - y.transpose()).rowwise().squaredNorm();
      break;
    case DistanceMetric::cityblock:
      dist = (reference.points.rowwise() - y.transpose()).cwiseAbs().rowwise().sum();
      break;
    case DistanceMetric::cosine: {
      const double qn = y.norm();
      const Vector dots = reference.points * y;
      const Vector norms = reference.points.rowwise().norm();
      for (Index i = 0; i < n; ++i) {
        const double denom = qn * norms[i];
        dist[i] = denom > 0.0 ? 1.0 - dots[i] / denom : 1.0;
      }
      break;
    }
  }

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::partial_sort(order.begin(), order.begin() + k, order.end(),
                    [&](Index a, Index b) {
                      return dist[a] < dist[b] || (dist[a] == dist[b] && a < b);
                    });
  Vector votes = Vector::Zero(reference.classes);
  for (int i = 0; i < k; ++i)
    votes[reference.labels[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])]] += 1.0;
  return decide(std::move(votes), ScoreSense::higher_is_better);
}

}  // namespace csen
