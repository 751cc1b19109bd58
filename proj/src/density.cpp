#include "chainlab/density.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "chainlab/errors.hpp"

namespace chainlab {

Density Density::uniform() { return Density(Kind::Uniform); }

Density Density::product_exponential(Vec rates) {
  if (rates.size() == 0) throw DimensionError("exponential rates must be non-empty");
  if (!rates.allFinite()) throw std::invalid_argument("exponential rates must be finite");
  Density d(Kind::ProductExponential);
  d.rates_ = std::move(rates);
  return d;
}

Density Density::truncated_gaussian(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw std::invalid_argument("gaussian sigma must be positive and finite");
  Density d(Kind::TruncatedGaussian);
  d.sigma_ = sigma;
  return d;
}

Density Density::custom(std::function<double(const Vec&)> evaluator, double sup_bound) {
  if (!evaluator) throw std::invalid_argument("custom density needs an evaluator");
  if (!(sup_bound > 0.0) || !std::isfinite(sup_bound))
    throw std::invalid_argument("custom density needs a positive finite sup bound");
  Density d(Kind::Custom);
  d.custom_ = std::move(evaluator);
  d.custom_sup_ = sup_bound;
  return d;
}

double Density::operator()(const Vec& x) const {
  double v = 0.0;
  switch (kind_) {
    case Kind::Uniform:
      v = 1.0;
      break;
    case Kind::ProductExponential:
      if (x.size() != rates_.size())
        throw DimensionError("point dimension does not match exponential rates");
      v = std::exp(-rates_.dot(x));
      break;
    case Kind::TruncatedGaussian:
      v = std::exp(-x.squaredNorm() / (2.0 * sigma_ * sigma_));
      break;
    case Kind::Custom:
      v = custom_(x);
      break;
  }
  if (std::isnan(v)) throw NumericError("density evaluated to NaN");
  if (v < 0.0) throw std::domain_error("density evaluated to a negative value");
  return v;
}

double Density::sup_bound(const ConvexBody& body) const {
  const AxisBox& bb = body.bounding_box();
  switch (kind_) {
    case Kind::Uniform:
      return 1.0;
    case Kind::ProductExponential: {
      if (bb.dim() != rates_.size())
        throw DimensionError("body dimension does not match exponential rates");
      // exp(-r.x) peaks at the corner minimizing r.x.
      Vec corner(bb.dim());
      for (int i = 0; i < bb.dim(); ++i)
        corner[i] = rates_[i] > 0.0 ? bb.lower[i] : bb.upper[i];
      return std::exp(-rates_.dot(corner));
    }
    case Kind::TruncatedGaussian: {
      // Peak at the bounding-box point closest to the origin.
      Vec nearest(bb.dim());
      for (int i = 0; i < bb.dim(); ++i)
        nearest[i] = std::clamp(0.0, bb.lower[i], bb.upper[i]);
      return std::exp(-nearest.squaredNorm() / (2.0 * sigma_ * sigma_));
    }
    case Kind::Custom:
      return custom_sup_;
  }
  return 0.0;
}

int Density::validate_sup_bound(const ConvexBody& body, Rng& rng, int samples) const {
  const AxisBox& bb = body.bounding_box();
  const double bound = sup_bound(body);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vec x(bb.dim());
  int violations = 0;
  for (int k = 0; k < samples; ++k) {
    for (int i = 0; i < bb.dim(); ++i)
      x[i] = bb.lower[i] + unit(rng) * (bb.upper[i] - bb.lower[i]);
    if (!body.contains(x)) continue;
    if ((*this)(x) > bound * (1.0 + 1e-12)) ++violations;
  }
  return violations;
}

const Vec& Density::rates() const {
  if (kind_ != Kind::ProductExponential) throw std::logic_error("density has no rates");
  return rates_;
}

double Density::sigma() const {
  if (kind_ != Kind::TruncatedGaussian) throw std::logic_error("density has no sigma");
  return sigma_;
}

namespace {

// Evaluates rho along the chord; non-finite values abort the quadrature.
struct ChordFn {
  const Density& density;
  const Vec& x;
  const Vec& dir;
  mutable Vec scratch;

  double operator()(double s) const {
    scratch = x + s * dir;
    const double v = density(scratch);
    if (!std::isfinite(v)) throw NumericError("density is not finite on the chord");
    return v;
  }
};

struct Refiner {
  const ChordFn& f;
  std::vector<ChordSlice::Panel>& out;
  double total;  // running estimate of the full integral

  static double simpson(double h, double fa, double fm, double fb) {
    return h / 6.0 * (fa + 4.0 * fm + fb);
  }

  void refine(double a, double b, double fa, double fm, double fb, double s1, int depth) {
    const double m = 0.5 * (a + b);
    const double am = 0.5 * (a + m);
    const double mb = 0.5 * (m + b);
    const double fam = f(am);
    const double fmb = f(mb);
    const double left = simpson(m - a, fa, fam, fm);
    const double right = simpson(b - m, fm, fmb, fb);
    const double s2 = left + right;
    total += s2 - s1;

    const double tol = 1e-10 * std::max(std::abs(total), 1e-290);
    const bool converged = std::abs(s2 - s1) / 15.0 <= tol;
    const bool floor_hit = depth >= 48 || (b - a) <= 1e-14 * (1.0 + std::abs(a) + std::abs(b));
    if (converged || floor_hit) {
      out.push_back({a, m - a, fa, fam, fm, left, 0.0});
      out.push_back({m, b - m, fm, fmb, fb, right, 0.0});
      return;
    }
    refine(a, m, fa, fam, fm, left, depth + 1);
    refine(m, b, fm, fmb, fb, right, depth + 1);
  }
};

// Integral of the panel's quadratic interpolant from its left edge to
// fraction xi in [0, 1] of its width.
double panel_partial(const ChordSlice::Panel& p, double xi) {
  const double x2 = xi * xi;
  const double x3 = x2 * xi;
  const double wa = (2.0 / 3.0) * x3 - 1.5 * x2 + xi;
  const double wm = -(4.0 / 3.0) * x3 + 2.0 * x2;
  const double wb = (2.0 / 3.0) * x3 - 0.5 * x2;
  return p.h * (p.fa * wa + p.fm * wm + p.fb * wb);
}

}  // namespace

ChordSlice chord_weight(const Density& density, const ConvexBody& body, const Vec& x,
                        const Vec& dir) {
  const Interval ext = body.chord_extent(x, dir);
  if (!ext.finite()) throw UnboundedError("chord is unbounded; cannot integrate rho along it");

  ChordSlice slice;
  slice.origin = x;
  slice.direction = dir;
  slice.interval = ext;

  const double lo = ext.lo;
  const double len = ext.length();
  ChordFn fn{density, x, dir, Vec(x.size())};

  if (len > 0.0) {
    constexpr int kInitialPanels = 32;  // 65 nodes
    const double h = len / kInitialPanels;
    std::vector<double> nodes(2 * kInitialPanels + 1);
    for (int i = 0; i < static_cast<int>(nodes.size()); ++i)
      nodes[i] = fn(lo + 0.5 * h * i);

    Refiner refiner{fn, slice.panels, 0.0};
    for (int p = 0; p < kInitialPanels; ++p)
      refiner.total +=
          Refiner::simpson(h, nodes[2 * p], nodes[2 * p + 1], nodes[2 * p + 2]);
    for (int p = 0; p < kInitialPanels; ++p) {
      const double a = lo + p * h;
      refiner.refine(a, a + h, nodes[2 * p], nodes[2 * p + 1], nodes[2 * p + 2],
                     Refiner::simpson(h, nodes[2 * p], nodes[2 * p + 1], nodes[2 * p + 2]), 0);
    }
  }

  long double cum = 0.0L;
  slice.cdf_table.reserve(slice.panels.size() + 1);
  slice.cdf_table.push_back({lo, 0.0});
  for (auto& p : slice.panels) {
    p.cum_before = static_cast<double>(cum);
    cum += p.value;
    slice.cdf_table.push_back({p.a + p.h, static_cast<double>(cum)});
  }
  slice.weight = static_cast<double>(cum);

  if (!(slice.weight >= 1e-300))
    throw std::domain_error("density vanishes along the chord (weight underflow)");
  return slice;
}

double sample_chord_s(const ChordSlice& slice, double u) {
  if (!(slice.weight > 0.0)) throw std::domain_error("chord slice has no weight");
  u = std::clamp(u, 0.0, 1.0);
  const double target = u * slice.weight;

  // Locate the panel whose cumulative range covers the target.
  const auto it = std::upper_bound(
      slice.panels.begin(), slice.panels.end(), target,
      [](double t, const ChordSlice::Panel& p) { return t < p.cum_before; });
  const auto& p = (it == slice.panels.begin()) ? *it : *(it - 1);

  const double local = target - p.cum_before;
  double lo = 0.0, hi = 1.0;
  if (p.h > 0.0) {
    while ((hi - lo) * p.h > 1e-10) {
      const double mid = 0.5 * (lo + hi);
      (panel_partial(p, mid) < local ? lo : hi) = mid;
    }
  }
  return p.a + 0.5 * (lo + hi) * p.h;
}

Vec sample_chord(const ChordSlice& slice, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double s = sample_chord_s(slice, unit(rng));
  return slice.origin + s * slice.direction;
}

bool in_level_set(const Density& density, const ConvexBody& body, double t, const Vec& x) {
  if (t < 0.0 || !std::isfinite(t))
    throw std::domain_error("level parameter must be non-negative and finite");
  return body.contains(x) && density(x) >= t;
}

}  // namespace chainlab
