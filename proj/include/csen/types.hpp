#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>

namespace csen {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

}  // namespace csen
