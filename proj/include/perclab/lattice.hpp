#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "perclab/geometry.hpp"
#include "perclab/rng.hpp"
#include "perclab/types.hpp"

namespace perclab {

/// Bernoulli bond percolation on (1/n)Z^d restricted to a finite box.
struct LatticeConfig {
  int dimension = 2;
  int scale = 1;  // n: lattice spacing 1/n
  double p = 0.0;
  int box_radius = 1;  // sites with integer coordinates in [-R, R]^d
  std::optional<double> p_c_override;

  /// Throws DomainError unless d >= 2, n >= 1, 0 <= p <= 1, R >= 1.
  void validate() const;
};

/// Configured subcritical bound: 1/2 for d = 2, 0.2 for d >= 3.
double p_c_bound(int dimension);
double effective_p_c_bound(const LatticeConfig& config);
/// Throws SubcriticalityViolation when p >= bound.
void require_subcritical(const LatticeConfig& config);

/// Nearest point of (1/n)Z^d, ties rounded toward +infinity per coordinate.
Vector round_to_lattice(const Vector& u, int n);
/// Integer site of round_to_lattice(u, n).
Site lattice_site(const Vector& u, int n);

using EdgeId = std::uint64_t;

/// Sites of an integer rectangle [lo, hi] and the nearest-neighbour edges
/// between them, optionally restricted to a subset. Edge id site * d + k is
/// the edge from a site to its +e_k neighbour.
class Lattice {
 public:
  /// [-R, R]^d.
  static std::shared_ptr<const Lattice> box(const LatticeConfig& config);
  static std::shared_ptr<const Lattice> rectangle(const LatticeConfig& config, const Site& lo, const Site& hi);
  /// Only the listed edges of [-R, R]^d are present.
  static std::shared_ptr<const Lattice> from_edges(const LatticeConfig& config,
                                                   std::span<const std::pair<Site, Site>> edges);

  const LatticeConfig& config() const { return config_; }
  int dimension() const { return config_.dimension; }
  int scale() const { return config_.scale; }
  const Site& lo() const { return lo_; }
  const Site& hi() const { return hi_; }

  std::size_t site_count() const { return std::size_t(coords_.cols()); }
  auto site(std::size_t index) const { return coords_.col(Eigen::Index(index)); }
  std::optional<std::size_t> site_index(const Site& s) const;
  std::size_t origin_index() const { return origin_; }
  Vector physical(std::size_t index) const { return site(index).cast<double>() / double(config_.scale); }
  bool on_boundary(std::size_t index) const;

  bool has_edge(EdgeId e) const;
  /// Present edges in increasing id order.
  const std::vector<EdgeId>& edges() const { return edges_; }
  std::pair<std::size_t, std::size_t> edge_sites(EdgeId e) const {
    const auto d = std::uint64_t(config_.dimension);
    const std::size_t from = std::size_t(e / d);
    return {from, from + strides_[std::size_t(e % d)]};
  }
  std::string edge_label(EdgeId e) const;

  template <class F>
  void for_each_neighbor(std::size_t index, F&& f) const {
    const int d = config_.dimension;
    for (int k = 0; k < d; ++k) {
      const int c = coords_(k, Eigen::Index(index));
      const std::size_t stride = strides_[std::size_t(k)];
      if (c < hi_(k)) {
        const EdgeId e = EdgeId(index) * EdgeId(d) + EdgeId(k);
        if (mask_.empty() || mask_[e]) f(e, index + stride);
      }
      if (c > lo_(k)) {
        const EdgeId e = EdgeId(index - stride) * EdgeId(d) + EdgeId(k);
        if (mask_.empty() || mask_[e]) f(e, index - stride);
      }
    }
  }

 private:
  Lattice(const LatticeConfig& config, Site lo, Site hi);

  LatticeConfig config_;
  Site lo_;
  Site hi_;
  std::vector<std::size_t> strides_;
  Eigen::MatrixXi coords_;
  std::size_t origin_ = 0;
  std::vector<bool> mask_;  // empty = all rectangle edges present
  std::vector<EdgeId> edges_;
};

using LatticePtr = std::shared_ptr<const Lattice>;

/// Independent Bernoulli(p) state of every edge for one replicate, drawn
/// lazily from a counter-based stream keyed by the edge id.
class EdgeSampler {
 public:
  EdgeSampler(double p, std::uint64_t seed, std::uint64_t replicate);
  bool open(EdgeId e) const { return all_open_ || stream_.draw(e) < threshold_; }

 private:
  ReplicateStream stream_;
  std::uint64_t threshold_;
  bool all_open_;
};

/// Sample-space element: the set of open edges.
struct BondConfiguration {
  LatticePtr lattice;
  std::vector<EdgeId> open_edges;  // sorted

  bool is_open(EdgeId e) const;
  std::vector<std::string> edge_labels() const;
};

enum class SubcriticalGate { enforce, disabled };

BondConfiguration sample_configuration(const LatticePtr& lattice, std::uint64_t seed,
                                       std::uint64_t replicate = 0,
                                       SubcriticalGate gate = SubcriticalGate::enforce);

/// Open cluster of the origin, in unscaled coordinates; the metric view
/// (point_cloud) is rescaled by 1/n.
struct Cluster {
  Eigen::MatrixXi vertices;  // d x V, column 0 is the origin
  std::vector<std::pair<int, int>> open_edges;  // column pairs
  bool touches_boundary = false;
  int scale = 1;

  Eigen::Index size() const { return vertices.cols(); }
  int dimension() const { return int(vertices.rows()); }
  std::optional<int> find(const Site& s) const;
  bool contains(const Site& s) const { return find(s).has_value(); }
  PointCloud point_cloud() const;
  PrimitiveSet primitives() const { return PrimitiveSet::of(point_cloud()); }
};

double hausdorff_distance(const Cluster& c, const PolygonalSet& s);
double hausdorff_distance(const Cluster& c, const PointCloud& s);

/// Reusable BFS state for repeated explorations of one lattice (one per
/// thread). Visited marks are stamped so no per-run clearing is needed.
class Explorer {
 public:
  explicit Explorer(const Lattice& lattice);

  struct Result {
    std::vector<std::size_t> sites;  // discovery order
    std::vector<std::pair<int, int>> edges;  // positions in `sites`
    bool touches_boundary = false;
    bool stopped = false;
  };

  /// Component(s) of `sources` under open edges, restricted to sites with
  /// allowed(index) true. visit(index) returning false stops early.
  template <class Open, class Allowed, class Visit>
  Result explore(std::span<const std::size_t> sources, Open&& open, Allowed&& allowed, Visit&& visit,
                 bool record_edges) {
    Result r;
    if (++stamp_ == 0) {
      std::fill(marks_.begin(), marks_.end(), 0u);
      stamp_ = 1;
    }
    for (auto s : sources) {
      if (!allowed(s) || marks_[s] == stamp_) continue;
      marks_[s] = stamp_;
      position_[s] = int(r.sites.size());
      r.sites.push_back(s);
    }
    for (std::size_t head = 0; head < r.sites.size(); ++head) {
      const std::size_t at = r.sites[head];
      if (lattice_.on_boundary(at)) r.touches_boundary = true;
      if (!visit(at)) {
        r.stopped = true;
        return r;
      }
      lattice_.for_each_neighbor(at, [&](EdgeId e, std::size_t next) {
        if (!allowed(next) || !open(e)) return;
        if (marks_[next] != stamp_) {
          marks_[next] = stamp_;
          position_[next] = int(r.sites.size());
          r.sites.push_back(next);
        }
        // Each open edge is seen from both ends; record it from the lower id.
        if (record_edges && at < next) r.edges.emplace_back(position_[at], position_[next]);
      });
    }
    return r;
  }

  Cluster to_cluster(const Result& r) const;

 private:
  const Lattice& lattice_;
  std::vector<std::uint32_t> marks_;
  std::vector<int> position_;
  std::uint32_t stamp_ = 0;
};

/// Origin cluster of a materialized configuration.
Cluster extract_origin_cluster(const BondConfiguration& bc);

/// Origin cluster of replicate `replicate`, sampled lazily.
Cluster sample_origin_cluster(const Lattice& lattice, Explorer& explorer, std::uint64_t seed,
                              std::uint64_t replicate);

}  // namespace perclab
