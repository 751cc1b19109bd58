#include "chainlab/chain.hpp"

#include <cmath>
#include <stdexcept>

#include "chainlab/errors.hpp"

namespace chainlab {

namespace {

constexpr std::int64_t kRejectionBudget = 10'000'000;

Vec uniform_in_box(const AxisBox& bb, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vec y(bb.dim());
  for (int i = 0; i < bb.dim(); ++i)
    y[i] = bb.lower[i] + unit(rng) * (bb.upper[i] - bb.lower[i]);
  return y;
}

Vec uniform_in_body(const ConvexBody& body, Rng& rng) {
  for (std::int64_t k = 0; k < kRejectionBudget; ++k) {
    Vec y = uniform_in_box(body.bounding_box(), rng);
    if (body.contains(y)) return y;
  }
  throw BudgetError("rejection budget exhausted sampling the body uniformly");
}

}  // namespace

Proposal Proposal::ball_walk(double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw std::invalid_argument("ball-walk radius must be positive and finite");
  return {Kind::BallWalk, radius};
}

ChainState hit_and_run_step(const ConvexBody& body, const Density& density,
                            const ChainState& state, Rng& rng) {
  const Vec dir = random_direction(rng, body.dim());
  const ChordSlice slice = chord_weight(density, body, state.position, dir);
  return {sample_chord(slice, rng), state.step_count + 1};
}

ChainState gibbs_step(const ConvexBody& body, const Density& density, const ChainState& state,
                      Rng& rng) {
  std::uniform_int_distribution<int> pick(0, body.dim() - 1);
  Vec dir = Vec::Zero(body.dim());
  dir[pick(rng)] = 1.0;
  const ChordSlice slice = chord_weight(density, body, state.position, dir);
  return {sample_chord(slice, rng), state.step_count + 1};
}

ChainState slice_step(const ConvexBody& body, const Density& density, const ChainState& state,
                      Rng& rng) {
  if (!body.contains(state.position))
    throw std::domain_error("slice step started outside the support");
  const double rho_x = density(state.position);
  if (!(rho_x > 0.0)) throw std::domain_error("slice step started outside the support");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double t = (1.0 - unit(rng)) * rho_x;  // uniform on (0, rho_x]
  for (std::int64_t k = 0; k < kRejectionBudget; ++k) {
    Vec y = uniform_in_box(body.bounding_box(), rng);
    if (in_level_set(density, body, t, y)) return {std::move(y), state.step_count + 1};
  }
  throw BudgetError("rejection budget exhausted sampling the level set");
}

double acceptance_ratio(double rho_x, double rho_y) {
  if (!(rho_x > 0.0)) throw std::domain_error("acceptance ratio needs rho(x) > 0");
  if (rho_y < 0.0) throw std::domain_error("acceptance ratio needs rho(y) >= 0");
  return std::min(1.0, rho_y / rho_x);
}

ChainState metropolis_step(const ConvexBody& body, const Density& density,
                           const Proposal& proposal, const ChainState& state, Rng& rng) {
  Vec y;
  switch (proposal.kind) {
    case Proposal::Kind::IndependentUniform:
      y = uniform_in_body(body, rng);
      break;
    case Proposal::Kind::BallWalk: {
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      const Vec dir = random_direction(rng, body.dim());
      const double r = std::pow(unit(rng), 1.0 / body.dim());
      y = state.position + proposal.radius * r * dir;
      if (!body.contains(y)) return {state.position, state.step_count + 1};
      break;
    }
    case Proposal::Kind::CustomMatrix:
      throw std::invalid_argument(
          "custom-matrix proposals are discrete-only; use the operator lab");
  }
  const double alpha = acceptance_ratio(density(state.position), density(y));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (unit(rng) < alpha) return {std::move(y), state.step_count + 1};
  return {state.position, state.step_count + 1};
}

ChainState lazy_step(const StepFn& inner, const ChainState& state, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (unit(rng) < 0.5) return {state.position, state.step_count + 1};
  ChainState next = inner(state, rng);
  next.step_count = state.step_count + 1;
  return next;
}

std::vector<Vec> run_chain(const StepFn& step, const Vec& initial, std::int64_t n, Rng& rng) {
  if (initial.size() == 0 || !initial.allFinite())
    throw std::invalid_argument("initial point must be non-empty and finite");
  if (n < 0) throw std::invalid_argument("step count must be non-negative");
  std::vector<Vec> trajectory;
  trajectory.reserve(static_cast<std::size_t>(n) + 1);
  trajectory.push_back(initial);
  ChainState state{initial, 0};
  for (std::int64_t i = 0; i < n; ++i) {
    state = step(state, rng);
    trajectory.push_back(state.position);
  }
  return trajectory;
}

}  // namespace chainlab
