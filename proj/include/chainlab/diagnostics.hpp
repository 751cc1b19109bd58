#pragma once

#include <vector>

#include "chainlab/operator_lab.hpp"

namespace chainlab {

struct ConvergenceCurve {
  std::vector<int> steps;
  std::vector<double> tv_distance;
};

// Exact distribution iteration from a point mass: total variation distance
// (1/2) sum_j |(delta_start P^n)_j - pi_j| for n = 1..n_max.
ConvergenceCurve tv_curve(const TransitionMatrix& P, int start, int n_max);

// Sample autocorrelation at lags 0..max_lag (lag 0 is exactly 1). Errors on
// trajectories with zero variance.
std::vector<double> autocorrelation(const std::vector<double>& xs, int max_lag);

// N / (1 + 2 sum rho_k), the autocorrelation sum truncated before the first
// lag pair (rho_0 + rho_1), (rho_2 + rho_3), ... with non-positive sum.
// Values above N are possible for antithetic chains and reported as-is.
double effective_sample_size(const std::vector<double>& xs);

}  // namespace chainlab
