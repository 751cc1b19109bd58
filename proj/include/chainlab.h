/* C interface to the chainlab sampler and operator-verification library.
 *
 * All functions return a chainlab_status; CHAINLAB_OK means success and any
 * other value leaves outputs untouched. chainlab_last_error() describes the
 * most recent failure on the calling thread. Objects returned through
 * chainlab_*_new/build calls are owned by the caller and released with the
 * matching *_free function.
 */
#ifndef CHAINLAB_H
#define CHAINLAB_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define CHAINLAB_API __declspec(dllexport)
#else
#define CHAINLAB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum chainlab_status {
  CHAINLAB_OK = 0,
  CHAINLAB_ERR_INVALID_ARGUMENT = 1,
  CHAINLAB_ERR_DIMENSION = 2,
  CHAINLAB_ERR_DOMAIN = 3,
  CHAINLAB_ERR_UNBOUNDED = 4,
  CHAINLAB_ERR_BUDGET = 5,
  CHAINLAB_ERR_NUMERIC = 6,
  CHAINLAB_ERR_UNKNOWN = 7
} chainlab_status;

typedef struct chainlab_body chainlab_body;
typedef struct chainlab_density chainlab_density;
typedef struct chainlab_chain chainlab_chain;
typedef struct chainlab_space chainlab_space;
typedef struct chainlab_matrix chainlab_matrix;
typedef struct chainlab_factorization chainlab_factorization;

CHAINLAB_API const char* chainlab_version(void);
CHAINLAB_API const char* chainlab_last_error(void);

/* ---- convex bodies ---- */

CHAINLAB_API chainlab_status chainlab_body_box(int dim, const double* lower,
                                               const double* upper, chainlab_body** out);
CHAINLAB_API chainlab_status chainlab_body_ball(int dim, const double* center, double radius,
                                                chainlab_body** out);
/* A is row-major with num_halfspaces rows and dim columns; the body is
 * {x : A x <= b} and must be bounded with `witness` strictly inside. */
CHAINLAB_API chainlab_status chainlab_body_polytope(int num_halfspaces, int dim,
                                                    const double* A, const double* b,
                                                    const double* witness,
                                                    chainlab_body** out);
CHAINLAB_API void chainlab_body_free(chainlab_body* body);

CHAINLAB_API chainlab_status chainlab_body_dim(const chainlab_body* body, int* out);
CHAINLAB_API chainlab_status chainlab_body_contains(const chainlab_body* body, const double* x,
                                                    int* out);
CHAINLAB_API chainlab_status chainlab_body_chord_extent(const chainlab_body* body,
                                                        const double* x, const double* dir,
                                                        double* s_min, double* s_max);
CHAINLAB_API chainlab_status chainlab_body_interior_point(const chainlab_body* body,
                                                          double* out);
CHAINLAB_API chainlab_status chainlab_body_bounding_box(const chainlab_body* body,
                                                        double* lower, double* upper);

/* ---- densities ---- */

CHAINLAB_API chainlab_status chainlab_density_uniform(chainlab_density** out);
CHAINLAB_API chainlab_status chainlab_density_gaussian(double sigma, chainlab_density** out);
CHAINLAB_API chainlab_status chainlab_density_exponential(int dim, const double* rates,
                                                          chainlab_density** out);
/* evaluator receives (dim, point, ctx) and must return a non-negative value
 * bounded by sup_bound on the body it is used with. */
CHAINLAB_API chainlab_status chainlab_density_custom(
    double (*evaluator)(int dim, const double* x, void* ctx), void* ctx, double sup_bound,
    chainlab_density** out);
CHAINLAB_API void chainlab_density_free(chainlab_density* density);

CHAINLAB_API chainlab_status chainlab_density_eval(const chainlab_density* density, int dim,
                                                   const double* x, double* out);
CHAINLAB_API chainlab_status chainlab_density_sup_bound(const chainlab_density* density,
                                                        const chainlab_body* body, double* out);

/* ---- continuous samplers ----
 *
 * sampler: "hit-and-run", "gibbs", "slice", "metropolis", or any of those
 * prefixed with "lazy:". proposal (metropolis only): "independent-uniform"
 * or "ball-walk" (with radius). initial may be NULL to start from the
 * body's stored interior point. */

CHAINLAB_API chainlab_status chainlab_chain_new(const chainlab_body* body,
                                                const chainlab_density* density,
                                                const char* sampler, const char* proposal,
                                                double proposal_radius, uint64_t seed,
                                                const double* initial, chainlab_chain** out);
CHAINLAB_API void chainlab_chain_free(chainlab_chain* chain);

CHAINLAB_API chainlab_status chainlab_chain_position(const chainlab_chain* chain, double* out);
CHAINLAB_API chainlab_status chainlab_chain_step_count(const chainlab_chain* chain,
                                                       int64_t* out);
CHAINLAB_API chainlab_status chainlab_chain_step(chainlab_chain* chain);
/* Advances n steps; if trajectory is non-NULL it receives n*dim doubles,
 * the position after each step in row-major order. */
CHAINLAB_API chainlab_status chainlab_chain_run(chainlab_chain* chain, int64_t n,
                                                double* trajectory);

/* ---- discrete spaces and kernels ---- */

CHAINLAB_API chainlab_status chainlab_space_grid(const chainlab_body* body,
                                                 const chainlab_density* density,
                                                 const int* resolution, chainlab_space** out);
CHAINLAB_API chainlab_status chainlab_space_make(int n, const double* volume,
                                                 const double* rho, chainlab_space** out);
CHAINLAB_API void chainlab_space_free(chainlab_space* space);
CHAINLAB_API chainlab_status chainlab_space_n(const chainlab_space* space, int* out);
CHAINLAB_API chainlab_status chainlab_space_pi(const chainlab_space* space, double* out);

/* factorization output pointers may be NULL when only the kernel is needed */
CHAINLAB_API chainlab_status chainlab_matrix_gibbs(const chainlab_space* space,
                                                   chainlab_matrix** out_P,
                                                   chainlab_factorization** out_F);
/* directions: num_directions rows of dim integers, row-major */
CHAINLAB_API chainlab_status chainlab_matrix_hit_and_run(const chainlab_space* space,
                                                         const int* directions,
                                                         int num_directions,
                                                         chainlab_matrix** out_P,
                                                         chainlab_factorization** out_F);
CHAINLAB_API chainlab_status chainlab_matrix_slice(const chainlab_space* space,
                                                   chainlab_matrix** out_P);
CHAINLAB_API chainlab_status chainlab_matrix_metropolis(const chainlab_space* space,
                                                        const chainlab_matrix* proposal,
                                                        chainlab_matrix** out_P);
CHAINLAB_API chainlab_status chainlab_matrix_metropolis_via_slice(const chainlab_space* space,
                                                                  const chainlab_matrix* proposal,
                                                                  chainlab_matrix** out_P);
CHAINLAB_API chainlab_status chainlab_matrix_lazy(const chainlab_matrix* P,
                                                  chainlab_matrix** out);

CHAINLAB_API chainlab_status chainlab_proposal_independent_uniform(const chainlab_space* space,
                                                                   chainlab_matrix** out);
CHAINLAB_API chainlab_status chainlab_proposal_ball_walk(const chainlab_space* space, int radius,
                                                         chainlab_matrix** out);
CHAINLAB_API chainlab_status chainlab_proposal_swap(const chainlab_space* space,
                                                    chainlab_matrix** out);
CHAINLAB_API chainlab_status chainlab_proposal_from_entries(const chainlab_space* space,
                                                            const double* entries,
                                                            chainlab_matrix** out);
/* Wraps externally produced entries (row-major) and reversibility weights
 * without validating them, so imported kernels can be cross-checked. */
CHAINLAB_API chainlab_status chainlab_matrix_wrap(int n, const double* entries,
                                                  const double* weights,
                                                  chainlab_matrix** out);
CHAINLAB_API void chainlab_matrix_free(chainlab_matrix* matrix);
CHAINLAB_API void chainlab_factorization_free(chainlab_factorization* factorization);

CHAINLAB_API chainlab_status chainlab_matrix_n(const chainlab_matrix* matrix, int* out);
/* row-major n*n */
CHAINLAB_API chainlab_status chainlab_matrix_entries(const chainlab_matrix* matrix,
                                                     double* out);
CHAINLAB_API chainlab_status chainlab_matrix_weights(const chainlab_matrix* matrix,
                                                     double* out);
CHAINLAB_API chainlab_status chainlab_matrix_detailed_balance(const chainlab_matrix* matrix,
                                                              double* out);
CHAINLAB_API chainlab_status chainlab_matrix_row_sum_error(const chainlab_matrix* matrix,
                                                           double* out);
CHAINLAB_API chainlab_status chainlab_matrix_stationarity_error(const chainlab_matrix* matrix,
                                                                double* out);

/* ---- verification and spectra ---- */

/* residuals[0..3] = reconstruction, idempotency, self-adjointness, adjoint
 * identity over `trials` random vector pairs. */
CHAINLAB_API chainlab_status chainlab_verify_factorization(const chainlab_matrix* P,
                                                           const chainlab_factorization* F,
                                                           int trials, double residuals[4]);
/* proposal may be NULL: the per-band kernels then resample volume-uniformly */
CHAINLAB_API chainlab_status chainlab_level_check(const chainlab_space* space,
                                                  const chainlab_matrix* proposal, int trials,
                                                  uint64_t seed, double* out);

/* eigenvalues (descending, length n) may be NULL; the scalar outputs may
 * individually be NULL as well. positive is 0/1. */
CHAINLAB_API chainlab_status chainlab_spectral_report(const chainlab_matrix* P, double tol,
                                                      double* eigenvalues, double* lambda_min,
                                                      double* beta, double* gap, int* positive);

/* ---- diagnostics ---- */

CHAINLAB_API chainlab_status chainlab_tv_curve(const chainlab_matrix* P, int start, int n_max,
                                               double* out);
CHAINLAB_API chainlab_status chainlab_autocorrelation(const double* xs, int64_t n, int max_lag,
                                                      double* out);
CHAINLAB_API chainlab_status chainlab_effective_sample_size(const double* xs, int64_t n,
                                                            double* out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* CHAINLAB_H */
