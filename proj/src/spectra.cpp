#include "chainlab/spectra.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "chainlab/errors.hpp"

namespace chainlab {

Mat symmetrize(const TransitionMatrix& P) {
  const int n = P.n();
  if (P.weights.size() != n)
    throw DimensionError("weight vector does not match the matrix size");
  for (int i = 0; i < n; ++i)
    if (!(P.weights[i] > 0.0))
      throw std::invalid_argument("symmetrization needs strictly positive weights");
  if (check_detailed_balance(P) > 1e-12)
    throw std::invalid_argument("kernel is not reversible within tolerance");

  Vec sq(n);
  for (int i = 0; i < n; ++i) sq[i] = std::sqrt(P.weights[i]);
  Mat S(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) S(i, j) = sq[i] / sq[j] * P.P(i, j);
  const double asym = (S - S.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10) throw NumericError("symmetrized kernel is unexpectedly asymmetric");
  S = 0.5 * (S + S.transpose()).eval();
  return S;
}

namespace {

void require_symmetric(const Mat& S) {
  if (S.rows() != S.cols()) throw DimensionError("eigensolver needs a square matrix");
  const double scale = std::max(1.0, S.cwiseAbs().maxCoeff());
  if ((S - S.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
    throw std::invalid_argument("eigensolver needs a symmetric matrix");
}

}  // namespace

Vec eigenvalues_symmetric(const Mat& S) {
  require_symmetric(S);
  // Kernels with large near-null eigenvalue clusters starve the tridiagonal
  // deflation test of a reference scale and stall the QL iteration, so solve
  // with the spectrum shifted away from zero. The shift is a representable
  // diagonal perturbation (a few ulp) and is undone exactly afterwards.
  const double shift = 2.0 * std::max(1.0, S.cwiseAbs().maxCoeff());
  Mat shifted = S;
  shifted.diagonal().array() += shift;
  Eigen::SelfAdjointEigenSolver<Mat> solver(shifted, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw NumericError("symmetric eigensolver failed to converge");
  Vec ev = solver.eigenvalues().array() - shift;
  std::reverse(ev.data(), ev.data() + ev.size());
  return ev;
}

Vec eigenvalues_symmetric_jacobi(const Mat& S) {
  require_symmetric(S);
  Mat A = 0.5 * (S + S.transpose());
  const int n = static_cast<int>(A.rows());
  const double stop = 1e-12 * std::max(A.norm(), 1e-300);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += 2.0 * A(p, q) * A(p, q);
    if (std::sqrt(off) <= stop) {
      Vec ev = A.diagonal();
      std::sort(ev.data(), ev.data() + n, std::greater<double>());
      return ev;
    }
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) {
        const double apq = A(p, q);
        if (apq == 0.0) continue;
        const double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = A(k, p);
          const double akq = A(k, q);
          A(k, p) = c * akp - s * akq;
          A(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = A(p, k);
          const double aqk = A(q, k);
          A(p, k) = c * apk - s * aqk;
          A(q, k) = s * apk + c * aqk;
        }
      }
  }
  throw NumericError("Jacobi eigensolver did not converge within 100 sweeps");
}

SpectralReport spectral_report(const TransitionMatrix& P, double tol) {
  SpectralReport report;
  report.tolerance = tol;
  report.eigenvalues = eigenvalues_symmetric(symmetrize(P));
  const int n = static_cast<int>(report.eigenvalues.size());
  report.lambda_min = report.eigenvalues[n - 1];

  const double lambda_max = report.eigenvalues[0];
  double beta = 0.0;
  if (n > 1) beta = std::max(std::abs(report.eigenvalues[1]), std::abs(report.lambda_min));
  report.beta = std::clamp(beta, 0.0, 1.0);
  report.gap = 1.0 - report.beta;
  report.positive = report.lambda_min >= -tol * std::max(1.0, std::abs(lambda_max));
  for (int i = 0; i < n; ++i)
    if (report.eigenvalues[i] >= 1.0 - 1e-10) ++report.ones_multiplicity;
  return report;
}

}  // namespace chainlab
