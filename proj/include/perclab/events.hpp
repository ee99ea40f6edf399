#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "perclab/geometry.hpp"
#include "perclab/lattice.hpp"
#include "perclab/stats.hpp"

namespace perclab {

/// u_n in C_n.
struct PointInCluster {
  Vector target;
};

/// Every a^i_n in C_n.
struct PointsInCluster {
  std::vector<Vector> targets;
};

/// delta(S, C_n) < epsilon, with C_n taken as its vertex set.
struct HausdorffBall {
  PolygonalSet set;
  double epsilon;
};

/// a_n and b_n joined by an open path whose vertices all lie within
/// distance epsilon of the corridor set (closed neighbourhood). For a
/// segment corridor from a to b this is the path lying within Hausdorff
/// distance epsilon of the segment.
struct ConstrainedConnection {
  Vector from;
  Vector to;
  PolygonalSet corridor;
  double epsilon;
};

/// Some open path joins a site at distance >= outer from S to a site at
/// distance < inner from S. With inner = eps/4, outer = eps/2 this is the
/// escape event used to confine clusters around a segment skeleton.
struct AnnulusCrossing {
  PolygonalSet set;
  double inner;
  double outer;
};

using EventSpec = std::variant<PointInCluster, PointsInCluster, HausdorffBall, ConstrainedConnection, AnnulusCrossing>;

std::string event_name(const EventSpec& event);
/// Increasing in the set of open edges.
bool is_increasing(const EventSpec& event);

/// Event resolved against one lattice: target sites and per-site masks.
/// Construction validates the event (targets inside the box, radii > 0).
class CompiledEvent {
 public:
  CompiledEvent(LatticePtr lattice, EventSpec event);

  const Lattice& lattice() const { return *lattice_; }
  const EventSpec& spec() const { return event_; }

  struct Outcome {
    bool hit = false;
    bool touches_boundary = false;
  };

  /// Evaluates the event for the edge states given by open(edge id).
  Outcome evaluate(Explorer& explorer, const std::function<bool(EdgeId)>& open) const;
  Outcome evaluate(Explorer& explorer, const EdgeSampler& sampler) const;
  /// Edge states from a bit mask over lattice().edges() (bit i = edge i).
  bool holds_on_mask(Explorer& explorer, std::uint64_t mask) const;

 private:
  template <class Open>
  Outcome run(Explorer& explorer, Open&& open) const;

  LatticePtr lattice_;
  EventSpec event_;
  std::vector<std::size_t> targets_;
  std::vector<char> allowed_;  // corridor / Hausdorff interior
  std::vector<char> inner_;
  std::vector<char> outer_;
  std::vector<std::size_t> edge_bit_;  // edge id -> bit, for masks
  PrimitiveSet set_;
};

/// Exact event counts by number of open edges; P(p) = sum_k c_k p^k (1-p)^(E-k).
struct ExactCounts {
  std::size_t edges = 0;
  std::vector<std::uint64_t> by_open_count;

  double probability(double p) const;
  std::uint64_t total() const;
};

inline constexpr std::size_t kEnumerationCap = 24;

/// Enumerates all 2^E configurations of the lattice. Throws
/// EnumerationCapExceeded when E > cap.
ExactCounts enumerate_counts(const Lattice& lattice, const std::function<bool(std::uint64_t mask)>& predicate,
                             std::size_t cap = kEnumerationCap);
ExactCounts enumerate_event(const CompiledEvent& event, std::size_t cap = kEnumerationCap);

/// Exact probability at the lattice's configured p. No subcriticality gate.
double exact_event_probability(const LatticePtr& lattice, const EventSpec& event, std::size_t cap = kEnumerationCap);

/// Monte Carlo hit fraction with a Wilson interval at the given z. Rejects
/// p >= p_c bound. Deterministic in (lattice, event, replicates, seed) for
/// every worker count.
EstimateWithCI estimate_event_probability(const LatticePtr& lattice, const EventSpec& event,
                                          std::uint64_t replicates, std::uint64_t seed, unsigned workers = 1,
                                          double z = kZ95);

/// Minimal witnesses (as edge bit masks) of a connection event: every
/// self-avoiding path between the two endpoints inside the allowed sites.
/// Defined for PointInCluster and ConstrainedConnection.
std::vector<std::uint64_t> connection_witnesses(const CompiledEvent& event);

/// A and B occur on disjoint edge sets: some witness pair fits in `mask`
/// without sharing an edge.
bool occurs_disjointly(std::span<const std::uint64_t> witnesses_a, std::span<const std::uint64_t> witnesses_b,
                       std::uint64_t mask);

}  // namespace perclab
