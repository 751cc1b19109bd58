#pragma once

#include <vector>

#include "chainlab/density.hpp"
#include "chainlab/geometry.hpp"
#include "chainlab/types.hpp"

namespace chainlab {

// Finite state space: cells with positive volumes and positive weights rho.
// pi_i is proportional to rho_i * volume_i and sums to 1.
struct DiscreteSpace {
  std::vector<int> resolution;           // per-axis cell counts; empty for abstract spaces
  std::vector<std::vector<int>> coords;  // grid coordinates of kept cells (grid spaces only)
  std::vector<Vec> centers;              // cell centers (grid spaces only)
  Vec volume;
  Vec rho;
  Vec pi;

  int n() const { return static_cast<int>(rho.size()); }
  bool is_grid() const { return !resolution.empty(); }
};

// Abstract weighted space with labeled cells 0..n-1.
DiscreteSpace make_space(Vec volume, Vec rho);

// Midpoint discretization over the body's bounding box; cells whose center
// falls outside the body or carries zero density are dropped.
DiscreteSpace grid_space(const ConvexBody& body, const Density& density,
                         const std::vector<int>& resolution);

// Row-stochastic kernel together with the weights it is reversible against
// (pi for sampler kernels, normalized volume for proposal kernels).
struct TransitionMatrix {
  Mat P;
  Vec weights;

  int n() const { return static_cast<int>(P.rows()); }
};

// Averaging structure behind a kernel built from chord projections:
// auxiliary pairs (block, cell) with block = direction index, T the
// per-(block, chord) conditional expectation, M the average over blocks.
// Pair p = block * n + cell. Dense realizations are available for small
// sizes; the apply_* routines work at any size.
struct OperatorFactorization {
  int num_blocks = 0;
  std::vector<std::vector<std::vector<int>>> chords;  // [block][chord] -> cell ids
  Vec pi;

  int cells() const { return static_cast<int>(pi.size()); }
  int pairs() const { return num_blocks * cells(); }

  Vec mu() const;      // pair weights: mu_(b,i) = pi_i / num_blocks
  Mat M_hat() const;   // cells x pairs averaging matrix
  Mat M_star() const;  // pairs x cells lifting matrix (the adjoint realization)
  Mat T_hat() const;   // pairs x pairs projection; dense sizes are capped

  Vec apply_M(const Vec& g) const;
  Vec apply_M_star(const Vec& f) const;
  Vec apply_T(const Vec& g) const;
};

struct FactorizationReport {
  double reconstruction = 0.0;    // max |P - M T M*|
  double idempotency = 0.0;       // max |T^2 - T|
  double self_adjointness = 0.0;  // max |D_mu T - T' D_mu|
  double adjoint_identity = 0.0;  // max |<f, Mg>_pi - <M*f, g>_mu| over random f, g
};

// Random-scan single-axis resampling on a grid space.
std::pair<TransitionMatrix, OperatorFactorization> build_gibbs_matrix(const DiscreteSpace& space);

// Chord resampling averaged over a finite set of lattice directions. Each
// direction is an integer step vector with coprime components; cells on the
// same lattice line form one chord.
std::pair<TransitionMatrix, OperatorFactorization> build_hit_and_run_matrix(
    const DiscreteSpace& space, const std::vector<std::vector<int>>& direction_set);

// Exact level decomposition: distinct rho values define bands; within a band
// the kernel resamples volume-uniformly among cells at or above the band.
TransitionMatrix build_slice_matrix(const DiscreteSpace& space);

// Accept/reject walk driven by a volume-reversible proposal kernel B.
TransitionMatrix build_metropolis_matrix(const DiscreteSpace& space, const TransitionMatrix& B);

// Same kernel assembled through the band decomposition with the B-induced
// per-band kernels; an independent arithmetic route kept for cross-checks.
TransitionMatrix build_metropolis_via_slice(const DiscreteSpace& space,
                                            const TransitionMatrix& B);

// Proposal kernels, all reversible against normalized volume.
TransitionMatrix proposal_independent_uniform(const DiscreteSpace& space);
// Local neighbor walk (grid: Chebyshev radius; abstract: index distance),
// lazified so its spectrum is non-negative.
TransitionMatrix proposal_lazy_ball_walk(const DiscreteSpace& space, int radius = 1);
// Two-cell swap; not positive (eigenvalue -1). Negative control.
TransitionMatrix proposal_swap(const DiscreteSpace& space);
// Wraps a user matrix after validating stochasticity and volume-reversibility.
TransitionMatrix proposal_from_matrix(const DiscreteSpace& space, Mat B);

// (I + P)/2: hold with probability 1/2. Maps each eigenvalue x to (1+x)/2.
TransitionMatrix lazy_kernel(const TransitionMatrix& P);

// Residuals of P = M T M*, T idempotent, T mu-self-adjoint, and the lifting
// adjoint identity over `trials` random vector pairs (internal fixed seed).
FactorizationReport verify_factorization(const TransitionMatrix& P,
                                         const OperatorFactorization& F, int trials = 100);

// max_{i,j} |w_i P_ij - w_j P_ji| against the matrix's own weights.
double check_detailed_balance(const TransitionMatrix& P);

// max_i |sum_j P_ij - 1|
double row_sum_error(const TransitionMatrix& P);

// max_j |(pi P)_j - pi_j|
double stationarity_error(const TransitionMatrix& P);

// Compares <T g, g>_mu for the band-structure T against the band-weighted
// sum of per-band quadratic forms, over `trials` random auxiliary vectors;
// returns the largest absolute discrepancy. The second overload uses the
// per-band kernels induced by a volume-reversible proposal B instead of
// volume-uniform resampling.
double level_decomposition_check(const DiscreteSpace& space, int trials, Rng& rng);
double level_decomposition_check(const DiscreteSpace& space, const TransitionMatrix& B,
                                 int trials, Rng& rng);

// Samples a trajectory of cell indices from a row-stochastic kernel.
std::vector<int> simulate_discrete_chain(const TransitionMatrix& P, int start,
                                         std::int64_t steps, Rng& rng);

}  // namespace chainlab
