#pragma once

#include <vector>

#include "chainlab/types.hpp"

namespace chainlab {

// Chord parameter range: {s : x + s*dir inside the body}. Endpoints may be
// infinite when the intersection is unbounded (degenerate halfspace data).
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const { return hi - lo; }
  bool finite() const;
  bool contains(double s) const { return lo <= s && s <= hi; }
};

// Axis-aligned box. Used as a body variant and for bounding boxes.
struct AxisBox {
  Vec lower;
  Vec upper;

  int dim() const { return static_cast<int>(lower.size()); }
  double volume() const;
  bool contains(const Vec& x) const;
  Vec center() const { return 0.5 * (lower + upper); }
};

// Convex subset of R^d with non-empty interior. Closed: membership ties at
// the boundary resolve to true, so chord endpoints are members.
class ConvexBody {
 public:
  enum class Kind { Box, Ball, Polytope };

  static ConvexBody box(Vec lower, Vec upper);
  static ConvexBody ball(Vec center, double radius);
  // Halfspace intersection {x : A x <= b}. Must be bounded and `witness`
  // strictly interior; the bounding box is derived by vertex enumeration.
  static ConvexBody polytope(Mat A, Vec b, Vec witness);

  int dim() const { return dim_; }
  Kind kind() const { return kind_; }

  bool contains(const Vec& x) const;

  // [s_lo, s_hi] such that x + s*dir is a member iff s is in the interval.
  // Requires contains(x) and |dir| = 1 (within 1e-12).
  Interval chord_extent(const Vec& x, const Vec& dir) const;

  // Strictly interior point stored at construction.
  const Vec& interior_point() const { return witness_; }
  const AxisBox& bounding_box() const { return bbox_; }

  const Vec& ball_center() const;
  double ball_radius() const;
  const Mat& halfspace_normals() const;
  const Vec& halfspace_offsets() const;

 private:
  ConvexBody(Kind kind, int dim) : kind_(kind), dim_(dim) {}
  void check_dim(const Vec& x) const;

  Kind kind_;
  int dim_;
  AxisBox bbox_;
  Vec witness_;
  Vec center_;        // ball
  double radius_ = 0; // ball
  Mat normals_;       // polytope rows
  Vec offsets_;       // polytope rhs
};

// Uniform draw from the unit sphere S^{d-1} (normalized standard normals).
// For d = 1 this is +1 or -1 with equal probability.
Vec random_direction(Rng& rng, int d);

}  // namespace chainlab
