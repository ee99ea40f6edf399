#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "perclab/events.hpp"
#include "perclab/lattice.hpp"
#include "perclab/norm_model.hpp"
#include "perclab/stats.hpp"
#include "perclab/steiner.hpp"

namespace perclab {

/// Box radius (in lattice units at scale n) with room 1.5 (reach + eps)
/// around the origin, where reach is the sup-norm extent of the input.
int harness_box_radius(double reach, double epsilon, int n);

struct ScaleRate {
  int n = 0;
  EstimateWithCI estimate;
  double rate = 0.0;       // -(1/n) log p_hat, +inf without hits
  double rate_low = 0.0;   // from the upper Wilson bound
  double rate_high = 0.0;  // from the lower Wilson bound, +inf if it is 0
  bool boundary_flag = false;  // boundary-touch fraction above the threshold
  bool under_resolved = false; // eps <= 2/n: lattice spacing too coarse for eps
};

struct RateEstimate {
  std::string event;  // event name
  double epsilon = 0.0;
  std::vector<ScaleRate> rows;       // every scale, for output
  std::vector<ScaleRate> per_scale;  // scales with at least one hit
  std::optional<double> trend;       // least-squares slope of rate against n
  double lambda_reference = 0.0;     // NaN when no gauge is supplied
  /// Every scale without hits: the rate is only known to be at least this.
  std::optional<double> rate_lower_bound;
};

struct RateOptions {
  std::uint64_t replicates = 10000;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  double z = kZ95;
  double boundary_touch_max = 1e-3;
};

/// Finite-scale rates of P(delta(S, C_n) < eps). Scales with eps <= 2/n are
/// computed but flagged under_resolved. Scale n draws from
/// derive_seed(seed, n) on the box of harness_box_radius. `config` supplies
/// d, p and the p_c override.
RateEstimate estimate_rate(const PolygonalSet& set, double epsilon, std::span<const int> scales,
                           const LatticeConfig& config, const RateOptions& options,
                           const NormModel* norm = nullptr);

/// Finite-scale rates of P(every a^i_n in C_n), with the Steiner minimum
/// length as reference when a gauge is supplied.
RateEstimate estimate_points_rate(std::span<const Vector> points, std::span<const int> scales,
                                  const LatticeConfig& config, const RateOptions& options,
                                  const NormModel* norm = nullptr, const SteinerOptions& steiner = {});

struct ConditionedSampleReport {
  int n = 0;
  std::vector<Vector> points;
  std::uint64_t attempts = 0;
  std::uint64_t acceptances = 0;
  std::uint64_t boundary_touches = 0;  // among accepted clusters
  std::vector<double> distances;       // min_j delta(C_n, T_j), per accepted sample
  std::uint64_t failures = 0;          // distances >= epsilon
  EstimateWithCI failure;              // failure fraction with Wilson interval
  bool inconclusive = false;
};

struct ConditionedSample {
  std::vector<Cluster> clusters;  // accepted, in replicate order
  std::vector<std::uint64_t> replicates;
  ConditionedSampleReport report;
};

/// Rejection sampling of the origin cluster given that it contains every
/// a^i_n. Replicates 0..budget-1 of `seed` are drawn on the box of `config`
/// at scale n.
ConditionedSample sample_conditioned(std::span<const Vector> points, int n, const LatticeConfig& config,
                                     std::uint64_t budget, std::uint64_t seed, unsigned workers = 1);

/// Reduced spanning tree of a cluster through its marked vertices.
struct SkeletonTree {
  std::vector<int> marked;           // cluster columns, origin first, distinct
  std::vector<int> branch_vertices;  // kept vertices of degree >= 3
  std::vector<int> kept;             // vertices of the pruned tree
  std::vector<std::vector<int>> paths;  // lattice paths between key vertices
  std::size_t edge_count = 0;
  int scale = 1;

  double length() const { return double(edge_count) / double(scale); }
  bool paths_edge_disjoint() const;
};

/// BFS spanning tree from the origin, pruned to the marked points; the
/// branch-vertex bound and path disjointness are checked.
SkeletonTree extract_skeleton(const Cluster& cluster, std::span<const Vector> points);

struct ConcentrationOptions {
  std::uint64_t seed = 0;
  unsigned workers = 1;
  std::uint64_t min_acceptances = 30;
  double z = kZ95;
  SteinerOptions steiner;
};

struct ConcentrationResult {
  SteinerSolution solution;
  double epsilon = 0.0;
  std::vector<ConditionedSampleReport> per_scale;
  /// Upper bound on inf lambda(S) - lambda(T) over sets S at Hausdorff
  /// distance >= eps from every minimal tree, from a finite candidate family.
  /// Empty when no candidate qualifies.
  std::optional<double> gap_upper_bound;
};

/// Failure fraction of conditioned clusters at each scale. budgets[i]
/// belongs to scales[i]; scale n draws from derive_seed(seed, n).
ConcentrationResult steiner_concentration(std::span<const Vector> points, double epsilon,
                                          std::span<const int> scales, std::span<const std::uint64_t> budgets,
                                          const LatticeConfig& config, const NormModel& norm,
                                          const ConcentrationOptions& options = {});

/// Candidate-family bound on the gap (see ConcentrationResult).
std::optional<double> steiner_gap_upper_bound(const SteinerSolution& solution, double epsilon,
                                              const NormModel& norm);

}  // namespace perclab
