#pragma once

#include "chainlab/operator_lab.hpp"
#include "chainlab/types.hpp"

namespace chainlab {

struct SpectralReport {
  Vec eigenvalues;  // descending
  double lambda_min = 0.0;
  double beta = 0.0;  // largest |eigenvalue| after removing one copy of 1
  double gap = 0.0;   // 1 - beta
  bool positive = false;
  double tolerance = 0.0;
  int ones_multiplicity = 0;  // >1 flags a non-ergodic kernel
};

// S = D^{1/2} P D^{-1/2} with D = diag(weights); similarity makes the
// reversible kernel symmetric. The result is exactly symmetrized by
// averaging with its transpose.
Mat symmetrize(const TransitionMatrix& P);

// Full real spectrum of a symmetric matrix, descending.
Vec eigenvalues_symmetric(const Mat& S);

// Reference cyclic-Jacobi eigensolver kept as an independent cross-check for
// the production solver; rotates until the off-diagonal norm falls below
// 1e-12 of the matrix norm (at most 100 sweeps).
Vec eigenvalues_symmetric_jacobi(const Mat& S);

// Spectrum, extremes, absolute gap, and the non-negativity verdict
// (lambda_min >= -tol * max(1, lambda_max)).
SpectralReport spectral_report(const TransitionMatrix& P, double tol = 1e-10);

}  // namespace chainlab
