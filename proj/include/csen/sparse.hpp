#pragma once

#include <optional>
#include <vector>

#include "csen/dictionary.hpp"
#include "csen/types.hpp"

namespace csen {

struct SupportEstimate {
  Vector scores;
  double tau = 0.0;
  std::vector<std::uint8_t> mask;
  std::vector<Index> support;
};

// Support = { i : scores_i > tau }.
SupportEstimate estimate_support(const Vector& scores, double tau);

struct SparseSolution {
  Vector x_hat;
  int iterations = 0;
  double final_objective = 0.0;
  bool converged = false;
};

// 1/2 ||D x - y||^2 + lambda ||x||_1
double lasso_objective(const Matrix& D, const Vector& y, const Vector& x,
                       double lambda_l1);

// Largest eigenvalue of D^T D by power iteration.
double lipschitz_constant(const Matrix& D, int steps = 100);

Vector soft_threshold(const Vector& v, double threshold);

struct FistaOptions {
  int max_iter = 500;
  double tol = 1e-6;
  // Precomputed step constant; estimated when empty.
  std::optional<double> lipschitz;
};

SparseSolution fista_l1(const Matrix& D, const Vector& y, double lambda_l1,
                        const FistaOptions& options = {});

enum class ScoreSense { lower_is_better, higher_is_better };

struct ClassDecision {
  int class_index = 0;
  Vector scores;
  double margin = 0.0;
  ScoreSense sense = ScoreSense::lower_is_better;
};

// Best score with ties to the lowest index, margin = |best - second best|.
ClassDecision decide(Vector scores, ScoreSense sense);

struct SrcOptions {
  // Absolute l1 weight; when unset, lambda_scale * ||D^T y||_inf.
  std::optional<double> lambda_l1;
  double lambda_scale = 0.01;
  int max_iter = 500;
  double tol = 1e-6;
  std::optional<double> lipschitz;
  bool normalized_residual = false;
};

ClassDecision src_classify(const Dictionary& dict, const Vector& y,
                           const SrcOptions& options = {});

struct CrcOptions {
  // Residuals divided by ||x_i||; plain residuals when false.
  bool normalized_residual = true;
};

ClassDecision crc_classify(const Dictionary& dict, const Vector& y,
                           const CrcOptions& options = {});

enum class DistanceMetric { euclidean, cityblock, cosine };

// Labelled reference points in the reduced space, one per row.
struct ReferenceSet {
  Matrix points;
  std::vector<int> labels;
  int classes = 0;
};

// Scores are vote counts per class.
ClassDecision knn_classify(const ReferenceSet& reference, const Vector& y, int k,
                           DistanceMetric metric = DistanceMetric::euclidean);

}  // namespace csen
