#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "perclab/geometry.hpp"
#include "perclab/norm_model.hpp"

namespace perclab {

inline constexpr int kMaxSteinerTerminals = 6;

/// Tree over m labelled terminals (nodes 0..m-1) and s unlabelled Steiner
/// points (nodes m..m+s-1), every Steiner point of degree >= 3.
struct SteinerTopology {
  int terminals = 0;
  int steiner_points = 0;
  std::vector<std::pair<int, int>> edges;

  int node_count() const { return terminals + steiner_points; }
  std::vector<int> degrees() const;
  /// Every terminal is a leaf and s = m - 2.
  bool is_full() const;
  /// Isomorphism invariant fixing terminal labels.
  std::string canonical_form() const;
  /// Throws DomainError if not a tree or a Steiner point has degree < 3.
  void validate() const;
};

/// All topologies on m terminals with 0..m-2 Steiner points, up to
/// isomorphism fixing terminal labels, sorted by canonical form. 2 <= m <= 6.
std::vector<SteinerTopology> enumerate_topologies(int terminals);

struct SteinerOptions {
  double tol = 1e-9;             // certified objective gap, relative to max(1, length)
  double tie_rel = 1e-6;         // relative tie tolerance for "all minimal trees"
  double geometric_tol = 1e-6;   // collapse distance and Hausdorff dedupe radius
  std::size_t max_iterations = 100000;
  unsigned workers = 1;
};

struct SteinerTree {
  SteinerTopology topology;     // after collapsing coincident points
  SteinerTopology source_topology;
  Matrix terminals;             // d x m, column 0 is the origin in solve_steiner
  Matrix steiner;               // d x s
  double total_length = 0.0;
  double lower_bound = 0.0;     // certified lower bound for the source topology
  bool converged = false;
  std::size_t iterations = 0;

  Vector node(int i) const {
    return i < topology.terminals ? Vector(terminals.col(i)) : Vector(steiner.col(i - topology.terminals));
  }
  PolygonalSet as_set() const;
};

/// Minimizes the total gauge length over the Steiner coordinates of a fixed
/// topology with the central-cut ellipsoid method. Each iteration yields the
/// certified bound f* >= f(x) - sqrt(g' P g); iteration stops once the best
/// value is within tol of that bound. The start ellipsoid is a ball around
/// `start` (default: every Steiner point at the terminal centroid) that
/// provably contains an optimal configuration. Afterwards, Steiner points
/// within geometric_tol of a neighbour are merged into it.
SteinerTree optimize_positions(const SteinerTopology& topology, const Matrix& terminals, const NormModel& norm,
                               const SteinerOptions& options = {}, const std::optional<Matrix>& start = {});

struct SteinerSolution {
  double minimum_length = 0.0;
  std::vector<SteinerTree> minimal;   // tied within tie_rel, deduplicated
  std::vector<SteinerTree> per_topology;
  std::size_t unconverged = 0;
};

/// Steiner trees spanning `points` and the origin. Points must be distinct
/// and nonzero; at most 5 of them.
SteinerSolution solve_steiner(std::span<const Vector> points, const NormModel& norm,
                              const SteinerOptions& options = {});

/// Length of a tree with the given node coordinates (d x nodes).
double tree_length(const SteinerTopology& topology, const Matrix& nodes, const NormModel& norm);

}  // namespace perclab
