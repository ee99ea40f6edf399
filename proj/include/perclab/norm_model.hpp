#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "perclab/types.hpp"

namespace perclab {

/// One row of a per-scale decay table: -log P(u_n in C_n) at scale n.
struct ScaleSample {
  int scale = 0;
  double neg_log_p = 0.0;
  // Interval for -log P, mapped monotonically from the probability interval.
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::uint64_t replicates = 0;
  std::uint64_t hits = 0;
  double boundary_touch_fraction = 0.0;
};

/// Affine fit -log P ~ slope * n + intercept along one direction. The slope
/// estimates the correlation norm of the direction and -intercept estimates
/// log alpha in the bound P <= alpha * exp(-n ||u||).
struct RateFit {
  Vector direction;
  std::vector<ScaleSample> per_scale;  // every measured scale, kept for provenance
  std::vector<int> scales;             // scales that entered the fit
  double slope = 0.0;
  double intercept = 0.0;
  std::vector<double> residuals;
  double p = 0.0;
  std::uint64_t seed = 0;
};

enum class GaugeKind { euclidean, l1, linf, weighted_l2, hull };

std::string to_string(GaugeKind kind);
GaugeKind gauge_kind_from_string(const std::string& name);

/// Sample of the estimated unit-ball boundary: ||direction|| = value.
struct BoundarySample {
  Vector direction;
  double value = 0.0;
};

/// Convex gauge standing in for the correlation norm. Either an analytic
/// test gauge or the Minkowski functional of a centrally symmetric polytope
/// closed under coordinate permutations and sign flips.
///
/// Hull models are stored in both representations: vertices of the unit
/// ball and facet normals scaled so that each facet is {x : n.x = 1}. The
/// gauge is then max_f n_f . u, evaluated at the canonical representative of
/// u (absolute values sorted in decreasing order) so that lattice symmetry
/// holds bit for bit.
class NormModel {
 public:
  static NormModel euclidean(int dimension);
  static NormModel l1(int dimension);
  static NormModel linf(int dimension);
  /// sqrt(sum_i w_i u_i^2), w_i > 0.
  static NormModel weighted_l2(const Vector& weights);
  /// Convex hull of `points` closed under the hyperoctahedral group.
  static NormModel from_boundary_points(std::span<const Vector> points);

  double operator()(const Vector& u) const { return evaluate(u); }
  double evaluate(const Vector& u) const;
  /// An element of the subdifferential at u (zero at u = 0).
  Vector subgradient(const Vector& u) const;
  /// min over the Euclidean unit sphere of the gauge.
  double euclidean_lower_constant() const;

  int dimension() const { return dimension_; }
  GaugeKind kind() const { return kind_; }
  const Vector& weights() const { return weights_; }
  /// d x V, empty for analytic gauges.
  const Matrix& hull_vertices() const { return vertices_; }
  /// d x F, empty for analytic gauges.
  const Matrix& facet_normals() const { return facets_; }

  std::vector<BoundarySample> boundary_samples;
  std::vector<RateFit> fits;

 private:
  NormModel(int dimension, GaugeKind kind) : dimension_(dimension), kind_(kind) {}

  int dimension_;
  GaugeKind kind_;
  Vector weights_;
  Matrix vertices_;
  Matrix facets_;
};

/// All 2^d d! signed permutation matrices.
std::vector<Eigen::MatrixXi> hyperoctahedral_group(int dimension);

/// |u| sorted in decreasing order.
Vector canonical_representative(const Vector& u);

inline double evaluate_norm(const NormModel& model, const Vector& u) { return model.evaluate(u); }

}  // namespace perclab
