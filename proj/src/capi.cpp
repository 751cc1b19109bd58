#include "chainlab.h"

#include <cstring>
#include <string>

#include "chainlab/chain.hpp"
#include "chainlab/density.hpp"
#include "chainlab/diagnostics.hpp"
#include "chainlab/errors.hpp"
#include "chainlab/geometry.hpp"
#include "chainlab/operator_lab.hpp"
#include "chainlab/spectra.hpp"

using chainlab::ChainState;
using chainlab::ConvexBody;
using chainlab::Density;
using chainlab::DiscreteSpace;
using chainlab::Mat;
using chainlab::OperatorFactorization;
using chainlab::Proposal;
using chainlab::Rng;
using chainlab::TransitionMatrix;
using chainlab::Vec;

struct chainlab_body {
  ConvexBody impl;
};
struct chainlab_density {
  Density impl;
};
struct chainlab_space {
  DiscreteSpace impl;
};
struct chainlab_matrix {
  TransitionMatrix impl;
};
struct chainlab_factorization {
  OperatorFactorization impl;
};

struct chainlab_chain {
  ConvexBody body;
  Density density;
  int kind;  // 0 hit-and-run, 1 gibbs, 2 slice, 3 metropolis
  bool lazy;
  Proposal proposal;
  ChainState state;
  Rng rng;
};

namespace {

thread_local std::string g_last_error;

template <typename Fn>
chainlab_status guarded(Fn&& fn) {
  try {
    fn();
    return CHAINLAB_OK;
  } catch (const chainlab::DimensionError& e) {
    g_last_error = e.what();
    return CHAINLAB_ERR_DIMENSION;
  } catch (const chainlab::UnboundedError& e) {
    g_last_error = e.what();
    return CHAINLAB_ERR_UNBOUNDED;
  } catch (const chainlab::BudgetError& e) {
    g_last_error = e.what();
    return CHAINLAB_ERR_BUDGET;
  } catch (const chainlab::NumericError& e) {
    g_last_error = e.what();
    return CHAINLAB_ERR_NUMERIC;
  } catch (const std::domain_error& e) {
    g_last_error = e.what();
    return CHAINLAB_ERR_DOMAIN;
  } catch (const std::invalid_argument& e) {
    g_last_error = e.what();
    return CHAINLAB_ERR_INVALID_ARGUMENT;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return CHAINLAB_ERR_UNKNOWN;
  } catch (...) {
    g_last_error = "unrecognized failure";
    return CHAINLAB_ERR_UNKNOWN;
  }
}

chainlab_status null_arg(const char* what) {
  g_last_error = std::string("null pointer: ") + what;
  return CHAINLAB_ERR_INVALID_ARGUMENT;
}

#define REQUIRE(ptr)                 \
  do {                               \
    if ((ptr) == nullptr) return null_arg(#ptr); \
  } while (0)

ChainState advance(chainlab_chain& c) {
  auto inner = [&c](const ChainState& s, Rng& r) -> ChainState {
    switch (c.kind) {
      case 0:
        return chainlab::hit_and_run_step(c.body, c.density, s, r);
      case 1:
        return chainlab::gibbs_step(c.body, c.density, s, r);
      case 2:
        return chainlab::slice_step(c.body, c.density, s, r);
      default:
        return chainlab::metropolis_step(c.body, c.density, c.proposal, s, r);
    }
  };
  if (c.lazy) return chainlab::lazy_step(inner, c.state, c.rng);
  return inner(c.state, c.rng);
}

}  // namespace

extern "C" {

const char* chainlab_version(void) { return "0.1.0"; }

const char* chainlab_last_error(void) { return g_last_error.c_str(); }

/* ---- bodies ---- */

chainlab_status chainlab_body_box(int dim, const double* lower, const double* upper,
                                  chainlab_body** out) {
  REQUIRE(lower);
  REQUIRE(upper);
  REQUIRE(out);
  return guarded([&] {
    if (dim < 1) throw std::invalid_argument("dimension must be positive");
    Vec lo = Eigen::Map<const Vec>(lower, dim);
    Vec hi = Eigen::Map<const Vec>(upper, dim);
    *out = new chainlab_body{ConvexBody::box(std::move(lo), std::move(hi))};
  });
}

chainlab_status chainlab_body_ball(int dim, const double* center, double radius,
                                   chainlab_body** out) {
  REQUIRE(center);
  REQUIRE(out);
  return guarded([&] {
    if (dim < 1) throw std::invalid_argument("dimension must be positive");
    *out = new chainlab_body{ConvexBody::ball(Eigen::Map<const Vec>(center, dim), radius)};
  });
}

chainlab_status chainlab_body_polytope(int num_halfspaces, int dim, const double* A,
                                       const double* b, const double* witness,
                                       chainlab_body** out) {
  REQUIRE(A);
  REQUIRE(b);
  REQUIRE(witness);
  REQUIRE(out);
  return guarded([&] {
    if (dim < 1 || num_halfspaces < 1)
      throw std::invalid_argument("polytope needs positive dimensions");
    Mat normals(num_halfspaces, dim);
    for (int i = 0; i < num_halfspaces; ++i)
      for (int j = 0; j < dim; ++j) normals(i, j) = A[i * dim + j];
    *out = new chainlab_body{ConvexBody::polytope(std::move(normals),
                                                  Eigen::Map<const Vec>(b, num_halfspaces),
                                                  Eigen::Map<const Vec>(witness, dim))};
  });
}

void chainlab_body_free(chainlab_body* body) { delete body; }

chainlab_status chainlab_body_dim(const chainlab_body* body, int* out) {
  REQUIRE(body);
  REQUIRE(out);
  return guarded([&] { *out = body->impl.dim(); });
}

chainlab_status chainlab_body_contains(const chainlab_body* body, const double* x, int* out) {
  REQUIRE(body);
  REQUIRE(x);
  REQUIRE(out);
  return guarded([&] {
    *out = body->impl.contains(Eigen::Map<const Vec>(x, body->impl.dim())) ? 1 : 0;
  });
}

chainlab_status chainlab_body_chord_extent(const chainlab_body* body, const double* x,
                                           const double* dir, double* s_min, double* s_max) {
  REQUIRE(body);
  REQUIRE(x);
  REQUIRE(dir);
  REQUIRE(s_min);
  REQUIRE(s_max);
  return guarded([&] {
    const int d = body->impl.dim();
    const chainlab::Interval ext =
        body->impl.chord_extent(Eigen::Map<const Vec>(x, d), Eigen::Map<const Vec>(dir, d));
    *s_min = ext.lo;
    *s_max = ext.hi;
  });
}

chainlab_status chainlab_body_interior_point(const chainlab_body* body, double* out) {
  REQUIRE(body);
  REQUIRE(out);
  return guarded([&] {
    const Vec& w = body->impl.interior_point();
    std::memcpy(out, w.data(), sizeof(double) * w.size());
  });
}

chainlab_status chainlab_body_bounding_box(const chainlab_body* body, double* lower,
                                           double* upper) {
  REQUIRE(body);
  REQUIRE(lower);
  REQUIRE(upper);
  return guarded([&] {
    const chainlab::AxisBox& bb = body->impl.bounding_box();
    std::memcpy(lower, bb.lower.data(), sizeof(double) * bb.lower.size());
    std::memcpy(upper, bb.upper.data(), sizeof(double) * bb.upper.size());
  });
}

/* ---- densities ---- */

chainlab_status chainlab_density_uniform(chainlab_density** out) {
  REQUIRE(out);
  return guarded([&] { *out = new chainlab_density{Density::uniform()}; });
}

chainlab_status chainlab_density_gaussian(double sigma, chainlab_density** out) {
  REQUIRE(out);
  return guarded([&] { *out = new chainlab_density{Density::truncated_gaussian(sigma)}; });
}

chainlab_status chainlab_density_exponential(int dim, const double* rates,
                                             chainlab_density** out) {
  REQUIRE(rates);
  REQUIRE(out);
  return guarded([&] {
    if (dim < 1) throw std::invalid_argument("dimension must be positive");
    *out = new chainlab_density{
        Density::product_exponential(Eigen::Map<const Vec>(rates, dim))};
  });
}

chainlab_status chainlab_density_custom(double (*evaluator)(int, const double*, void*),
                                        void* ctx, double sup_bound, chainlab_density** out) {
  REQUIRE(evaluator);
  REQUIRE(out);
  return guarded([&] {
    auto fn = [evaluator, ctx](const Vec& x) {
      return evaluator(static_cast<int>(x.size()), x.data(), ctx);
    };
    *out = new chainlab_density{Density::custom(fn, sup_bound)};
  });
}

void chainlab_density_free(chainlab_density* density) { delete density; }

chainlab_status chainlab_density_eval(const chainlab_density* density, int dim, const double* x,
                                      double* out) {
  REQUIRE(density);
  REQUIRE(x);
  REQUIRE(out);
  return guarded([&] {
    if (dim < 1) throw std::invalid_argument("dimension must be positive");
    *out = density->impl(Eigen::Map<const Vec>(x, dim));
  });
}

chainlab_status chainlab_density_sup_bound(const chainlab_density* density,
                                           const chainlab_body* body, double* out) {
  REQUIRE(density);
  REQUIRE(body);
  REQUIRE(out);
  return guarded([&] { *out = density->impl.sup_bound(body->impl); });
}

/* ---- samplers ---- */

chainlab_status chainlab_chain_new(const chainlab_body* body, const chainlab_density* density,
                                   const char* sampler, const char* proposal,
                                   double proposal_radius, uint64_t seed, const double* initial,
                                   chainlab_chain** out) {
  REQUIRE(body);
  REQUIRE(density);
  REQUIRE(sampler);
  REQUIRE(out);
  return guarded([&] {
    std::string name(sampler);
    bool lazy = false;
    if (name.rfind("lazy:", 0) == 0) {
      lazy = true;
      name = name.substr(5);
    }
    int kind;
    if (name == "hit-and-run")
      kind = 0;
    else if (name == "gibbs")
      kind = 1;
    else if (name == "slice")
      kind = 2;
    else if (name == "metropolis")
      kind = 3;
    else
      throw std::invalid_argument("unknown sampler: " + name);

    Proposal prop = Proposal::independent_uniform();
    if (proposal != nullptr) {
      if (kind != 3)
        throw std::invalid_argument("proposals apply to the metropolis sampler only");
      const std::string pname(proposal);
      if (pname == "independent-uniform")
        prop = Proposal::independent_uniform();
      else if (pname == "ball-walk")
        prop = Proposal::ball_walk(proposal_radius);
      else
        throw std::invalid_argument("unknown proposal: " + pname);
    }

    Vec start = initial != nullptr
                    ? Vec(Eigen::Map<const Vec>(initial, body->impl.dim()))
                    : body->impl.interior_point();
    if (!body->impl.contains(start))
      throw std::invalid_argument("initial point is outside the body");
    if (!(density->impl(start) > 0.0))
      throw std::invalid_argument("initial point has zero density");

    auto* chain = new chainlab_chain{body->impl,          density->impl, kind, lazy, prop,
                                     ChainState{start, 0}, Rng(seed)};
    *out = chain;
  });
}

void chainlab_chain_free(chainlab_chain* chain) { delete chain; }

chainlab_status chainlab_chain_position(const chainlab_chain* chain, double* out) {
  REQUIRE(chain);
  REQUIRE(out);
  return guarded([&] {
    std::memcpy(out, chain->state.position.data(),
                sizeof(double) * chain->state.position.size());
  });
}

chainlab_status chainlab_chain_step_count(const chainlab_chain* chain, int64_t* out) {
  REQUIRE(chain);
  REQUIRE(out);
  return guarded([&] { *out = chain->state.step_count; });
}

chainlab_status chainlab_chain_step(chainlab_chain* chain) {
  REQUIRE(chain);
  return guarded([&] { chain->state = advance(*chain); });
}

chainlab_status chainlab_chain_run(chainlab_chain* chain, int64_t n, double* trajectory) {
  REQUIRE(chain);
  return guarded([&] {
    if (n < 0) throw std::invalid_argument("step count must be non-negative");
    const int d = chain->body.dim();
    for (int64_t i = 0; i < n; ++i) {
      chain->state = advance(*chain);
      if (trajectory != nullptr)
        std::memcpy(trajectory + i * d, chain->state.position.data(), sizeof(double) * d);
    }
  });
}

/* ---- spaces and kernels ---- */

chainlab_status chainlab_space_grid(const chainlab_body* body, const chainlab_density* density,
                                    const int* resolution, chainlab_space** out) {
  REQUIRE(body);
  REQUIRE(density);
  REQUIRE(resolution);
  REQUIRE(out);
  return guarded([&] {
    std::vector<int> res(resolution, resolution + body->impl.dim());
    *out = new chainlab_space{chainlab::grid_space(body->impl, density->impl, res)};
  });
}

chainlab_status chainlab_space_make(int n, const double* volume, const double* rho,
                                    chainlab_space** out) {
  REQUIRE(volume);
  REQUIRE(rho);
  REQUIRE(out);
  return guarded([&] {
    if (n < 1) throw std::invalid_argument("space needs at least one cell");
    *out = new chainlab_space{chainlab::make_space(Eigen::Map<const Vec>(volume, n),
                                                   Eigen::Map<const Vec>(rho, n))};
  });
}

void chainlab_space_free(chainlab_space* space) { delete space; }

chainlab_status chainlab_space_n(const chainlab_space* space, int* out) {
  REQUIRE(space);
  REQUIRE(out);
  return guarded([&] { *out = space->impl.n(); });
}

chainlab_status chainlab_space_pi(const chainlab_space* space, double* out) {
  REQUIRE(space);
  REQUIRE(out);
  return guarded([&] {
    std::memcpy(out, space->impl.pi.data(), sizeof(double) * space->impl.n());
  });
}

chainlab_status chainlab_matrix_gibbs(const chainlab_space* space, chainlab_matrix** out_P,
                                      chainlab_factorization** out_F) {
  REQUIRE(space);
  REQUIRE(out_P);
  return guarded([&] {
    auto [P, F] = chainlab::build_gibbs_matrix(space->impl);
    *out_P = new chainlab_matrix{std::move(P)};
    if (out_F != nullptr) *out_F = new chainlab_factorization{std::move(F)};
  });
}

chainlab_status chainlab_matrix_hit_and_run(const chainlab_space* space, const int* directions,
                                            int num_directions, chainlab_matrix** out_P,
                                            chainlab_factorization** out_F) {
  REQUIRE(space);
  REQUIRE(directions);
  REQUIRE(out_P);
  return guarded([&] {
    const int d = static_cast<int>(space->impl.resolution.size());
    if (num_directions < 1) throw std::invalid_argument("need at least one direction");
    std::vector<std::vector<int>> dirs(num_directions, std::vector<int>(d));
    for (int k = 0; k < num_directions; ++k)
      for (int t = 0; t < d; ++t) dirs[k][t] = directions[k * d + t];
    auto [P, F] = chainlab::build_hit_and_run_matrix(space->impl, dirs);
    *out_P = new chainlab_matrix{std::move(P)};
    if (out_F != nullptr) *out_F = new chainlab_factorization{std::move(F)};
  });
}

chainlab_status chainlab_matrix_slice(const chainlab_space* space, chainlab_matrix** out_P) {
  REQUIRE(space);
  REQUIRE(out_P);
  return guarded([&] {
    *out_P = new chainlab_matrix{chainlab::build_slice_matrix(space->impl)};
  });
}

chainlab_status chainlab_matrix_metropolis(const chainlab_space* space,
                                           const chainlab_matrix* proposal,
                                           chainlab_matrix** out_P) {
  REQUIRE(space);
  REQUIRE(proposal);
  REQUIRE(out_P);
  return guarded([&] {
    *out_P =
        new chainlab_matrix{chainlab::build_metropolis_matrix(space->impl, proposal->impl)};
  });
}

chainlab_status chainlab_matrix_metropolis_via_slice(const chainlab_space* space,
                                                     const chainlab_matrix* proposal,
                                                     chainlab_matrix** out_P) {
  REQUIRE(space);
  REQUIRE(proposal);
  REQUIRE(out_P);
  return guarded([&] {
    *out_P =
        new chainlab_matrix{chainlab::build_metropolis_via_slice(space->impl, proposal->impl)};
  });
}

chainlab_status chainlab_matrix_lazy(const chainlab_matrix* P, chainlab_matrix** out) {
  REQUIRE(P);
  REQUIRE(out);
  return guarded([&] { *out = new chainlab_matrix{chainlab::lazy_kernel(P->impl)}; });
}

chainlab_status chainlab_proposal_independent_uniform(const chainlab_space* space,
                                                      chainlab_matrix** out) {
  REQUIRE(space);
  REQUIRE(out);
  return guarded([&] {
    *out = new chainlab_matrix{chainlab::proposal_independent_uniform(space->impl)};
  });
}

chainlab_status chainlab_proposal_ball_walk(const chainlab_space* space, int radius,
                                            chainlab_matrix** out) {
  REQUIRE(space);
  REQUIRE(out);
  return guarded([&] {
    *out = new chainlab_matrix{chainlab::proposal_lazy_ball_walk(space->impl, radius)};
  });
}

chainlab_status chainlab_proposal_swap(const chainlab_space* space, chainlab_matrix** out) {
  REQUIRE(space);
  REQUIRE(out);
  return guarded([&] { *out = new chainlab_matrix{chainlab::proposal_swap(space->impl)}; });
}

chainlab_status chainlab_proposal_from_entries(const chainlab_space* space,
                                               const double* entries, chainlab_matrix** out) {
  REQUIRE(space);
  REQUIRE(entries);
  REQUIRE(out);
  return guarded([&] {
    const int n = space->impl.n();
    Mat B(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) B(i, j) = entries[i * n + j];
    *out = new chainlab_matrix{chainlab::proposal_from_matrix(space->impl, std::move(B))};
  });
}

chainlab_status chainlab_matrix_wrap(int n, const double* entries, const double* weights,
                                     chainlab_matrix** out) {
  REQUIRE(entries);
  REQUIRE(weights);
  REQUIRE(out);
  return guarded([&] {
    if (n < 1) throw std::invalid_argument("matrix needs at least one row");
    Mat P(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) P(i, j) = entries[i * n + j];
    Vec w = Eigen::Map<const Vec>(weights, n);
    *out = new chainlab_matrix{TransitionMatrix{std::move(P), std::move(w)}};
  });
}

void chainlab_matrix_free(chainlab_matrix* matrix) { delete matrix; }

void chainlab_factorization_free(chainlab_factorization* factorization) {
  delete factorization;
}

chainlab_status chainlab_matrix_n(const chainlab_matrix* matrix, int* out) {
  REQUIRE(matrix);
  REQUIRE(out);
  return guarded([&] { *out = matrix->impl.n(); });
}

chainlab_status chainlab_matrix_entries(const chainlab_matrix* matrix, double* out) {
  REQUIRE(matrix);
  REQUIRE(out);
  return guarded([&] {
    const int n = matrix->impl.n();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out[i * n + j] = matrix->impl.P(i, j);
  });
}

chainlab_status chainlab_matrix_weights(const chainlab_matrix* matrix, double* out) {
  REQUIRE(matrix);
  REQUIRE(out);
  return guarded([&] {
    std::memcpy(out, matrix->impl.weights.data(), sizeof(double) * matrix->impl.n());
  });
}

chainlab_status chainlab_matrix_detailed_balance(const chainlab_matrix* matrix, double* out) {
  REQUIRE(matrix);
  REQUIRE(out);
  return guarded([&] { *out = chainlab::check_detailed_balance(matrix->impl); });
}

chainlab_status chainlab_matrix_row_sum_error(const chainlab_matrix* matrix, double* out) {
  REQUIRE(matrix);
  REQUIRE(out);
  return guarded([&] { *out = chainlab::row_sum_error(matrix->impl); });
}

chainlab_status chainlab_matrix_stationarity_error(const chainlab_matrix* matrix, double* out) {
  REQUIRE(matrix);
  REQUIRE(out);
  return guarded([&] { *out = chainlab::stationarity_error(matrix->impl); });
}

/* ---- verification and spectra ---- */

chainlab_status chainlab_verify_factorization(const chainlab_matrix* P,
                                              const chainlab_factorization* F, int trials,
                                              double residuals[4]) {
  REQUIRE(P);
  REQUIRE(F);
  REQUIRE(residuals);
  return guarded([&] {
    const chainlab::FactorizationReport r =
        chainlab::verify_factorization(P->impl, F->impl, trials);
    residuals[0] = r.reconstruction;
    residuals[1] = r.idempotency;
    residuals[2] = r.self_adjointness;
    residuals[3] = r.adjoint_identity;
  });
}

chainlab_status chainlab_level_check(const chainlab_space* space,
                                     const chainlab_matrix* proposal, int trials, uint64_t seed,
                                     double* out) {
  REQUIRE(space);
  REQUIRE(out);
  return guarded([&] {
    Rng rng(seed);
    *out = proposal == nullptr
               ? chainlab::level_decomposition_check(space->impl, trials, rng)
               : chainlab::level_decomposition_check(space->impl, proposal->impl, trials, rng);
  });
}

chainlab_status chainlab_spectral_report(const chainlab_matrix* P, double tol,
                                         double* eigenvalues, double* lambda_min, double* beta,
                                         double* gap, int* positive) {
  REQUIRE(P);
  return guarded([&] {
    const chainlab::SpectralReport r = chainlab::spectral_report(P->impl, tol);
    if (eigenvalues != nullptr)
      std::memcpy(eigenvalues, r.eigenvalues.data(),
                  sizeof(double) * r.eigenvalues.size());
    if (lambda_min != nullptr) *lambda_min = r.lambda_min;
    if (beta != nullptr) *beta = r.beta;
    if (gap != nullptr) *gap = r.gap;
    if (positive != nullptr) *positive = r.positive ? 1 : 0;
  });
}

/* ---- diagnostics ---- */

chainlab_status chainlab_tv_curve(const chainlab_matrix* P, int start, int n_max, double* out) {
  REQUIRE(P);
  REQUIRE(out);
  return guarded([&] {
    const chainlab::ConvergenceCurve curve = chainlab::tv_curve(P->impl, start, n_max);
    std::memcpy(out, curve.tv_distance.data(), sizeof(double) * curve.tv_distance.size());
  });
}

chainlab_status chainlab_autocorrelation(const double* xs, int64_t n, int max_lag, double* out) {
  REQUIRE(xs);
  REQUIRE(out);
  return guarded([&] {
    std::vector<double> series(xs, xs + n);
    const std::vector<double> rho = chainlab::autocorrelation(series, max_lag);
    std::memcpy(out, rho.data(), sizeof(double) * rho.size());
  });
}

chainlab_status chainlab_effective_sample_size(const double* xs, int64_t n, double* out) {
  REQUIRE(xs);
  REQUIRE(out);
  return guarded([&] {
    std::vector<double> series(xs, xs + n);
    *out = chainlab::effective_sample_size(series);
  });
}

} /* extern "C" */
