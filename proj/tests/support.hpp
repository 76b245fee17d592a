#pragma once

#include <cstdint>
#include <random>

#include "csen/types.hpp"

namespace csen::testing {

inline Matrix gaussian(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix M(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) M(i, j) = n(rng);
  return M;
}

inline Vector gaussian(Index n, std::mt19937_64& rng) { return gaussian(n, 1, rng).col(0); }

inline double max_abs(const Matrix& M) { return M.size() ? M.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace csen::testing
