#pragma once

#include <functional>
#include <vector>

#include "chainlab/geometry.hpp"
#include "chainlab/types.hpp"

namespace chainlab {

// Unnormalized density rho on a body. Built-in variants know their own
// supremum over any bounding box; custom densities carry a user bound.
class Density {
 public:
  enum class Kind { Uniform, ProductExponential, TruncatedGaussian, Custom };

  static Density uniform();
  // rho(x) = exp(-rates . x)
  static Density product_exponential(Vec rates);
  // rho(x) = exp(-|x|^2 / (2 sigma^2))
  static Density truncated_gaussian(double sigma);
  static Density custom(std::function<double(const Vec&)> evaluator, double sup_bound);

  Kind kind() const { return kind_; }
  double operator()(const Vec& x) const;

  // Upper bound of rho over the body (analytic over the bounding box for
  // built-ins; the stored user value for custom densities).
  double sup_bound(const ConvexBody& body) const;

  // Samples `samples` bounding-box points and counts evaluations exceeding
  // sup_bound. Advisory only: callers warn, they do not fail.
  int validate_sup_bound(const ConvexBody& body, Rng& rng, int samples = 10000) const;

  const Vec& rates() const;
  double sigma() const;

 private:
  explicit Density(Kind kind) : kind_(kind) {}

  Kind kind_;
  Vec rates_;
  double sigma_ = 0.0;
  std::function<double(const Vec&)> custom_;
  double custom_sup_ = 0.0;
};

// A chord through the body with the 1-D restriction of rho integrated along
// it. The panel list is the quadrature mesh; it doubles as the inverse-CDF
// index for sampling.
struct ChordSlice {
  struct Node {
    double s;
    double cum;  // integral of rho over [s_min, s]
  };
  struct Panel {
    double a;           // left endpoint in chord parameter
    double h;           // width
    double fa, fm, fb;  // rho at left, middle, right
    double value;       // Simpson integral over the panel
    double cum_before;  // integral over all panels to the left
  };

  Vec origin;
  Vec direction;
  Interval interval;
  double weight = 0.0;
  std::vector<Node> cdf_table;
  std::vector<Panel> panels;
};

// Integrates rho along the chord through x in direction dir (adaptive
// composite Simpson, 65 initial nodes, panels bisected until the local error
// estimate drops below 1e-10 of the running total).
ChordSlice chord_weight(const Density& density, const ConvexBody& body, const Vec& x,
                        const Vec& dir);

// Deterministic inverse CDF: the s with CDF(s) = u * weight, u in [0,1],
// resolved to 1e-10 in s by bisection within the quadrature panel.
double sample_chord_s(const ChordSlice& slice, double u);

// Draws a point on the chord with density proportional to rho along it.
Vec sample_chord(const ChordSlice& slice, Rng& rng);

// Membership in {rho >= t} intersected with the body. Level parameter t must
// be positive (t = 0 is admitted because every body here is bounded).
bool in_level_set(const Density& density, const ConvexBody& body, double t, const Vec& x);

}  // namespace chainlab
