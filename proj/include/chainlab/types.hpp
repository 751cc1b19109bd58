#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>

namespace chainlab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Rng = std::mt19937_64;

}  // namespace chainlab
