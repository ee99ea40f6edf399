#pragma once

#include <algorithm>
#include <limits>
#include <span>
#include <vector>

#include "perclab/types.hpp"

namespace perclab {

class NormModel;

/// Euclidean distance from q to the closed segment [a, b].
template <typename Derived1, typename Derived2, typename Derived3>
typename Derived1::Scalar point_segment_distance(const Eigen::MatrixBase<Derived1>& q,
                                                 const Eigen::MatrixBase<Derived2>& a,
                                                 const Eigen::MatrixBase<Derived3>& b) {
  using Scalar = typename Derived1::Scalar;
  const auto ab = (b - a).eval();
  const Scalar len2 = ab.squaredNorm();
  if (len2 == Scalar(0)) return (q - a).norm();
  Scalar t = (q - a).dot(ab) / len2;
  t = std::clamp(t, Scalar(0), Scalar(1));
  return (q - (a + t * ab)).norm();
}

/// Closed segment; a == b is allowed and denotes a point.
struct Segment {
  Vector a;
  Vector b;

  Vector at(double t) const { return a + t * (b - a); }
  bool degenerate() const { return a == b; }
};

/// Finite nonempty point set, stored column-wise (d x count).
class PointCloud {
 public:
  explicit PointCloud(Matrix points);
  static PointCloud from_points(std::span<const Vector> points);

  int dimension() const { return int(points_.rows()); }
  Eigen::Index size() const { return points_.cols(); }
  const Matrix& points() const { return points_; }
  auto point(Eigen::Index i) const { return points_.col(i); }

 private:
  Matrix points_;
};

/// Element of Omega presented as finitely many closed segments. With no
/// segments the set is the origin alone.
class PolygonalSet {
 public:
  /// Validates: segments meet only at shared endpoints, the union is
  /// connected and it contains the origin. Throws DomainError otherwise.
  PolygonalSet(int dimension, std::vector<Segment> segments);

  /// No validation. Used for Steiner trees and intermediate results, where
  /// overlapping collinear edges can occur on tie families.
  static PolygonalSet unchecked(int dimension, std::vector<Segment> segments);
  static PolygonalSet origin(int dimension);
  /// Polyline through the given vertices in order.
  static PolygonalSet polyline(std::span<const Vector> vertices);

  int dimension() const { return dimension_; }
  const std::vector<Segment>& segments() const { return segments_; }
  bool is_point() const { return segments_.empty(); }
  /// Distinct segment endpoints (the origin when there are no segments).
  std::vector<Vector> vertices() const;

  PolygonalSet scaled(double t) const;
  PolygonalSet transformed(const Matrix& linear) const;

 private:
  PolygonalSet(int dimension, std::vector<Segment> segments, bool validate);

  int dimension_;
  std::vector<Segment> segments_;
};

/// Flat view of a compact set as points and segments, the common currency
/// of the metric routines.
struct PrimitiveSet {
  int dimension = 0;
  std::vector<Segment> primitives;

  static PrimitiveSet of(const PolygonalSet& set);
  static PrimitiveSet of(const PointCloud& cloud);
};

/// Euclidean distance from q to the set.
double distance_to_set(const Vector& q, const PrimitiveSet& set);

/// Bounds on sup_{x in X} dist(x, Y).
struct DirectedBounds {
  double lower = 0.0;
  double upper = 0.0;
};

/// Directed distance by branch and bound over each segment of X. Along a
/// segment the distance to each primitive of Y is convex, so
/// min_k max(f_k(t0), f_k(t1)) bounds the supremum on [t0, t1]. Stops once
/// upper - lower <= tol, or early when the bounds settle the comparison with
/// `threshold` (when threshold is finite).
DirectedBounds directed_hausdorff(const PrimitiveSet& x, const PrimitiveSet& y, double tol = 1e-9,
                                  double threshold = std::numeric_limits<double>::quiet_NaN());

double hausdorff_distance(const PrimitiveSet& x, const PrimitiveSet& y, double tol = 1e-9);
double hausdorff_distance(const PolygonalSet& x, const PolygonalSet& y);
double hausdorff_distance(const PolygonalSet& x, const PointCloud& y);
double hausdorff_distance(const PointCloud& x, const PolygonalSet& y);
double hausdorff_distance(const PointCloud& x, const PointCloud& y);

/// delta(X, Y) < eps, deciding with early exits.
bool hausdorff_less_than(const PrimitiveSet& x, const PrimitiveSet& y, double eps);

/// q lies in the open eps-neighbourhood B_eps(X).
bool epsilon_neighborhood_contains(const PrimitiveSet& x, double eps, const Vector& q);
bool epsilon_neighborhood_contains(const PolygonalSet& x, double eps, const Vector& q);
bool epsilon_neighborhood_contains(const PointCloud& x, double eps, const Vector& q);

/// Sum of gauge lengths of the segments.
double norm_length(const PolygonalSet& set, const NormModel& norm);

/// Polygonal approximant within Hausdorff distance tol of `set` whose
/// segments are chords of the original chains (so no gauge length grows),
/// with the origin as a segment endpoint. Throws DomainError on
/// disconnected input.
PolygonalSet simplify(const PolygonalSet& set, double tol);

}  // namespace perclab
