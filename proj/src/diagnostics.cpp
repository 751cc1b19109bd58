#include "chainlab/diagnostics.hpp"

#include <cmath>
#include <stdexcept>

namespace chainlab {

ConvergenceCurve tv_curve(const TransitionMatrix& P, int start, int n_max) {
  const int n = P.n();
  if (start < 0 || start >= n) throw std::invalid_argument("start cell out of range");
  if (n_max < 1) throw std::invalid_argument("n_max must be at least 1");

  ConvergenceCurve curve;
  Vec dist = Vec::Zero(n);
  dist[start] = 1.0;
  Vec next(n);
  for (int step = 1; step <= n_max; ++step) {
    for (int j = 0; j < n; ++j) {
      long double acc = 0.0L;
      for (int i = 0; i < n; ++i)
        acc += static_cast<long double>(dist[i]) * static_cast<long double>(P.P(i, j));
      next[j] = static_cast<double>(acc);
    }
    dist.swap(next);
    long double tv = 0.0L;
    for (int j = 0; j < n; ++j)
      tv += std::abs(static_cast<long double>(dist[j]) -
                     static_cast<long double>(P.weights[j]));
    curve.steps.push_back(step);
    curve.tv_distance.push_back(static_cast<double>(0.5L * tv));
  }
  return curve;
}

namespace {

struct CenteredSeries {
  std::vector<double> centered;
  double c0;  // lag-0 autocovariance (biased, divided by N)
};

CenteredSeries center(const std::vector<double>& xs) {
  const std::size_t n = xs.size();
  if (n < 2) throw std::invalid_argument("trajectory too short");
  long double mean = 0.0L;
  for (double x : xs) mean += static_cast<long double>(x);
  mean /= static_cast<long double>(n);
  CenteredSeries out;
  out.centered.resize(n);
  long double c0 = 0.0L;
  long double scale = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    out.centered[i] = static_cast<double>(static_cast<long double>(xs[i]) - mean);
    c0 += static_cast<long double>(out.centered[i]) * out.centered[i];
    scale += std::abs(static_cast<long double>(xs[i]));
  }
  c0 /= static_cast<long double>(n);
  out.c0 = static_cast<double>(c0);
  if (!(out.c0 > 1e-30 * (1.0 + static_cast<double>(scale / n))))
    throw std::domain_error("trajectory has zero variance; autocorrelation undefined");
  return out;
}

double lag_correlation(const CenteredSeries& s, std::size_t k) {
  if (k == 0) return 1.0;
  const std::size_t n = s.centered.size();
  long double acc = 0.0L;
  for (std::size_t i = 0; i + k < n; ++i)
    acc += static_cast<long double>(s.centered[i]) * s.centered[i + k];
  return static_cast<double>(acc / static_cast<long double>(n)) / s.c0;
}

}  // namespace

std::vector<double> autocorrelation(const std::vector<double>& xs, int max_lag) {
  if (max_lag < 0 || static_cast<std::size_t>(max_lag) >= xs.size())
    throw std::invalid_argument("max_lag must lie in [0, N)");
  const CenteredSeries s = center(xs);
  std::vector<double> rho(max_lag + 1);
  for (int k = 0; k <= max_lag; ++k) rho[k] = lag_correlation(s, k);
  return rho;
}

double effective_sample_size(const std::vector<double>& xs) {
  const CenteredSeries s = center(xs);
  const std::size_t n = xs.size();
  long double pair_sum = 0.0L;
  for (std::size_t m = 0; 2 * m + 1 < n; ++m) {
    const double gamma = lag_correlation(s, 2 * m) + lag_correlation(s, 2 * m + 1);
    if (gamma <= 0.0) break;
    pair_sum += static_cast<long double>(gamma);
  }
  const double denom = static_cast<double>(-1.0L + 2.0L * pair_sum);
  return static_cast<double>(n) / std::max(denom, 1e-12);
}

}  // namespace chainlab
