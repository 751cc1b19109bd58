#include "chainlab/geometry.hpp"

#include <Eigen/LU>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "chainlab/errors.hpp"

namespace chainlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_unit(const Vec& dir) {
  const double norm = dir.norm();
  if (std::abs(norm - 1.0) > 1e-9)
    throw std::invalid_argument("direction is not unit length");
}

double binomial_count(int m, int d) {
  double c = 1.0;
  for (int i = 0; i < d; ++i) c *= double(m - i) / double(i + 1);
  return c;
}

}  // namespace

bool Interval::finite() const { return std::isfinite(lo) && std::isfinite(hi); }

double AxisBox::volume() const {
  double v = 1.0;
  for (int i = 0; i < dim(); ++i) v *= upper[i] - lower[i];
  return v;
}

bool AxisBox::contains(const Vec& x) const {
  for (int i = 0; i < dim(); ++i)
    if (x[i] < lower[i] || x[i] > upper[i]) return false;
  return true;
}

ConvexBody ConvexBody::box(Vec lower, Vec upper) {
  if (lower.size() != upper.size() || lower.size() == 0)
    throw DimensionError("box bounds must be non-empty and of equal length");
  for (int i = 0; i < lower.size(); ++i)
    if (!(lower[i] < upper[i]))
      throw std::invalid_argument("box must have positive extent on every axis");
  ConvexBody body(Kind::Box, static_cast<int>(lower.size()));
  body.bbox_ = AxisBox{lower, upper};
  body.witness_ = 0.5 * (lower + upper);
  return body;
}

ConvexBody ConvexBody::ball(Vec center, double radius) {
  if (center.size() == 0) throw DimensionError("ball center must be non-empty");
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw std::invalid_argument("ball radius must be positive and finite");
  ConvexBody body(Kind::Ball, static_cast<int>(center.size()));
  body.center_ = center;
  body.radius_ = radius;
  body.bbox_ = AxisBox{center.array() - radius, center.array() + radius};
  body.witness_ = std::move(center);
  return body;
}

ConvexBody ConvexBody::polytope(Mat A, Vec b, Vec witness) {
  const int m = static_cast<int>(A.rows());
  const int d = static_cast<int>(A.cols());
  if (d == 0 || m == 0 || b.size() != m || witness.size() != d)
    throw DimensionError("polytope A, b, witness sizes are inconsistent");
  if (m < d + 1)
    throw UnboundedError("a bounded polytope with interior needs at least d+1 halfspaces");

  // Strict interiority of the witness.
  const Vec slack = b - A * witness;
  for (int i = 0; i < m; ++i)
    if (!(slack[i] > 0.0))
      throw std::invalid_argument("witness is not strictly interior to the polytope");

  ConvexBody body(Kind::Polytope, d);
  body.normals_ = std::move(A);
  body.offsets_ = std::move(b);
  body.witness_ = witness;

  // Bounding box by vertex enumeration: a linear functional on a bounded
  // polytope attains its extrema at vertices, i.e. at non-singular d-subsets
  // of active constraints.
  if (binomial_count(m, d) > 2e5)
    throw BudgetError("polytope has too many halfspace combinations to enumerate");

  Vec lo = Vec::Constant(d, kInf);
  Vec hi = Vec::Constant(d, -kInf);
  bool any_vertex = false;

  std::vector<int> idx(d);
  for (int i = 0; i < d; ++i) idx[i] = i;
  Mat sub(d, d);
  Vec rhs(d);
  const double feas_scale = 1.0 + body.offsets_.cwiseAbs().maxCoeff();
  while (true) {
    for (int r = 0; r < d; ++r) {
      sub.row(r) = body.normals_.row(idx[r]);
      rhs[r] = body.offsets_[idx[r]];
    }
    Eigen::FullPivLU<Mat> lu(sub);
    if (lu.isInvertible()) {
      Vec v = lu.solve(rhs);
      if (((body.normals_ * v - body.offsets_).array() <= 1e-9 * feas_scale).all()) {
        any_vertex = true;
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
      }
    }
    // next d-combination of {0..m-1}
    int k = d - 1;
    while (k >= 0 && idx[k] == m - d + k) --k;
    if (k < 0) break;
    ++idx[k];
    for (int j = k + 1; j < d; ++j) idx[j] = idx[j - 1] + 1;
  }
  if (!any_vertex)
    throw UnboundedError("polytope has no vertices; it cannot be bounded");
  // Tiny inflation so vertex membership survives rounding.
  const double pad = 1e-12 * (1.0 + lo.cwiseAbs().maxCoeff() + hi.cwiseAbs().maxCoeff());
  body.bbox_ = AxisBox{lo.array() - pad, hi.array() + pad};
  if (!body.bbox_.contains(witness))
    throw UnboundedError("witness escapes the enumerated bounding box");

  // Probe chords in fixed random directions: every chord from the witness
  // must be finite and stay inside the bounding box, otherwise the halfspace
  // data describes an unbounded set that slipped past enumeration.
  Rng probe_rng(0x9e3779b97f4a7c15ULL);
  const double probe_tol =
      1e-6 * (1.0 + body.bbox_.lower.cwiseAbs().maxCoeff() + body.bbox_.upper.cwiseAbs().maxCoeff());
  for (int trial = 0; trial < 256; ++trial) {
    const Vec dir = random_direction(probe_rng, d);
    const Interval ext = body.chord_extent(witness, dir);
    if (!ext.finite())
      throw UnboundedError("polytope admits an unbounded chord");
    const Vec lo_pt = witness + ext.lo * dir;
    const Vec hi_pt = witness + ext.hi * dir;
    for (int i = 0; i < d; ++i) {
      if (lo_pt[i] < body.bbox_.lower[i] - probe_tol || lo_pt[i] > body.bbox_.upper[i] + probe_tol ||
          hi_pt[i] < body.bbox_.lower[i] - probe_tol || hi_pt[i] > body.bbox_.upper[i] + probe_tol)
        throw UnboundedError("chord endpoint escapes the enumerated bounding box");
    }
  }
  return body;
}

void ConvexBody::check_dim(const Vec& x) const {
  if (x.size() != dim_) throw DimensionError("point dimension does not match body");
}

bool ConvexBody::contains(const Vec& x) const {
  check_dim(x);
  switch (kind_) {
    case Kind::Box: {
      for (int i = 0; i < dim_; ++i) {
        const double tol = 1e-12 * (1.0 + std::abs(bbox_.lower[i]) + std::abs(bbox_.upper[i]));
        if (x[i] < bbox_.lower[i] - tol || x[i] > bbox_.upper[i] + tol) return false;
      }
      return true;
    }
    case Kind::Ball:
      return (x - center_).norm() <= radius_ + 1e-12 * (1.0 + radius_);
    case Kind::Polytope: {
      for (int i = 0; i < normals_.rows(); ++i) {
        const double lhs = normals_.row(i).dot(x);
        const double tol = 1e-12 * (1.0 + std::abs(offsets_[i]) +
                                    normals_.row(i).cwiseAbs().dot(x.cwiseAbs()));
        if (lhs > offsets_[i] + tol) return false;
      }
      return true;
    }
  }
  return false;
}

Interval ConvexBody::chord_extent(const Vec& x, const Vec& dir) const {
  check_dim(x);
  check_dim(dir);
  require_unit(dir);
  if (!contains(x)) throw std::invalid_argument("chord origin is outside the body");

  double lo = -kInf;
  double hi = kInf;
  switch (kind_) {
    case Kind::Box: {
      for (int i = 0; i < dim_; ++i) {
        const double di = dir[i];
        if (di == 0.0) continue;
        const double t1 = (bbox_.lower[i] - x[i]) / di;
        const double t2 = (bbox_.upper[i] - x[i]) / di;
        lo = std::max(lo, std::min(t1, t2));
        hi = std::min(hi, std::max(t1, t2));
      }
      break;
    }
    case Kind::Ball: {
      const Vec u = x - center_;
      const double ud = u.dot(dir);
      const double disc = std::max(0.0, ud * ud - (u.squaredNorm() - radius_ * radius_));
      const double root = std::sqrt(disc);
      lo = -ud - root;
      hi = -ud + root;
      break;
    }
    case Kind::Polytope: {
      for (int i = 0; i < normals_.rows(); ++i) {
        const double denom = normals_.row(i).dot(dir);
        const double avail = offsets_[i] - normals_.row(i).dot(x);
        const double scale = 1.0 + normals_.row(i).cwiseAbs().sum();
        if (denom > 1e-14 * scale)
          hi = std::min(hi, avail / denom);
        else if (denom < -1e-14 * scale)
          lo = std::max(lo, avail / denom);
      }
      break;
    }
  }
  // The origin is a member, so 0 belongs to the interval; clamp away
  // rounding that would place it just outside.
  lo = std::min(lo, 0.0);
  hi = std::max(hi, 0.0);
  return Interval{lo, hi};
}

const Vec& ConvexBody::ball_center() const {
  if (kind_ != Kind::Ball) throw std::logic_error("not a ball");
  return center_;
}

double ConvexBody::ball_radius() const {
  if (kind_ != Kind::Ball) throw std::logic_error("not a ball");
  return radius_;
}

const Mat& ConvexBody::halfspace_normals() const {
  if (kind_ != Kind::Polytope) throw std::logic_error("not a polytope");
  return normals_;
}

const Vec& ConvexBody::halfspace_offsets() const {
  if (kind_ != Kind::Polytope) throw std::logic_error("not a polytope");
  return offsets_;
}

Vec random_direction(Rng& rng, int d) {
  if (d < 1) throw std::invalid_argument("direction dimension must be at least 1");
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec v(d);
  double norm = 0.0;
  do {
    for (int i = 0; i < d; ++i) v[i] = normal(rng);
    norm = v.norm();
  } while (norm < 1e-12);
  return v / norm;
}

}  // namespace chainlab
