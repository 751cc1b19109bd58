#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "chainlab/density.hpp"
#include "chainlab/geometry.hpp"
#include "chainlab/types.hpp"

namespace chainlab {

struct ChainState {
  Vec position;
  std::int64_t step_count = 0;
};

// Proposal kernel for the Metropolis walk. Each kind is reversible with
// respect to the uniform distribution on the body (out-of-body proposals
// count as rejections). CustomMatrix exists for discrete experiments only
// and is realized in the operator lab, not here.
struct Proposal {
  enum class Kind { IndependentUniform, BallWalk, CustomMatrix };

  static Proposal independent_uniform() { return {Kind::IndependentUniform, 0.0}; }
  static Proposal ball_walk(double radius);

  Kind kind = Kind::IndependentUniform;
  double radius = 0.0;
};

using StepFn = std::function<ChainState(const ChainState&, Rng&)>;

ChainState hit_and_run_step(const ConvexBody& body, const Density& density,
                            const ChainState& state, Rng& rng);

// Hit-and-run restricted to axis directions, the axis chosen uniformly.
ChainState gibbs_step(const ConvexBody& body, const Density& density, const ChainState& state,
                      Rng& rng);

// Simple slice sampler: level t uniform on (0, rho(x)], then a uniform point
// of {rho >= t} by rejection from the bounding box.
ChainState slice_step(const ConvexBody& body, const Density& density, const ChainState& state,
                      Rng& rng);

// min(1, rho_y / rho_x); rho_x must be positive.
double acceptance_ratio(double rho_x, double rho_y);

ChainState metropolis_step(const ConvexBody& body, const Density& density,
                           const Proposal& proposal, const ChainState& state, Rng& rng);

// Holds with probability 1/2, otherwise delegates; step_count increments
// either way.
ChainState lazy_step(const StepFn& inner, const ChainState& state, Rng& rng);

// [initial, x_1, ..., x_n]; deterministic given the rng seed.
std::vector<Vec> run_chain(const StepFn& step, const Vec& initial, std::int64_t n, Rng& rng);

}  // namespace chainlab
