#include "perclab/harness.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "perclab/errors.hpp"
#include "perclab/parallel.hpp"
#include "perclab/rng.hpp"

namespace perclab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double neg_log_over_n(double p, int n) { return p > 0.0 ? -std::log(p) / double(n) : kInf; }

double sup_reach(std::span<const Vector> points) {
  double r = 0.0;
  for (const auto& p : points) r = std::max(r, p.cwiseAbs().maxCoeff());
  return r;
}

void check_scales(std::span<const int> scales) {
  if (scales.empty()) throw DomainError("no scales given");
  for (int n : scales) {
    if (n < 1) throw DomainError(fmt::format("scale {} must be >= 1", n));
  }
}

template <class MakeEvent>
RateEstimate rate_table(std::string name, double epsilon, double reach, std::span<const int> scales,
                        const LatticeConfig& config, const RateOptions& options, MakeEvent&& make_event) {
  RateEstimate out;
  out.event = std::move(name);
  out.epsilon = epsilon;
  for (int n : scales) {
    LatticeConfig c = config;
    c.scale = n;
    c.box_radius = harness_box_radius(reach, epsilon, n);
    auto lattice = Lattice::box(c);
    const auto est = estimate_event_probability(lattice, make_event(n), options.replicates,
                                                derive_seed(options.seed, std::uint64_t(n)), options.workers, options.z);
    ScaleRate row;
    row.n = n;
    row.estimate = est;
    row.rate = neg_log_over_n(est.value, n);
    row.rate_low = neg_log_over_n(est.ci_high, n);
    row.rate_high = neg_log_over_n(est.ci_low, n);
    row.boundary_flag = est.boundary_touch_fraction() > options.boundary_touch_max;
    out.rows.push_back(row);
    if (est.hits > 0) out.per_scale.push_back(row);
  }
  if (out.per_scale.empty()) {
    double bound = 0.0;
    for (const auto& r : out.rows) bound = std::max(bound, r.rate_low);
    out.rate_lower_bound = bound;
  }
  std::vector<double> x, y, w;
  for (const auto& r : out.per_scale) {
    x.push_back(double(r.n));
    y.push_back(r.rate);
    w.push_back(1.0);
  }
  if (std::set<double>(x.begin(), x.end()).size() >= 2) out.trend = weighted_affine_fit(x, y, w).slope;
  return out;
}

}  // namespace

int harness_box_radius(double reach, double epsilon, int n) {
  return std::max(1, int(std::ceil(1.5 * double(n) * (reach + epsilon))) + 1);
}

RateEstimate estimate_rate(const PolygonalSet& set, double epsilon, std::span<const int> scales,
                           const LatticeConfig& config, const RateOptions& options, const NormModel* norm) {
  check_scales(scales);
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw DomainError("epsilon must be positive and finite");
  if (set.dimension() != config.dimension) throw DomainError("set dimension differs from the lattice");
  require_subcritical(config);
  const auto vertices = set.vertices();
  auto est = rate_table("hausdorff-ball", epsilon, sup_reach(vertices), scales, config, options,
                        [&](int) { return EventSpec{HausdorffBall{set, epsilon}}; });
  for (auto* rows : {&est.rows, &est.per_scale}) {
    for (auto& row : *rows) row.under_resolved = !(epsilon > 2.0 / double(row.n));
  }
  est.lambda_reference = norm ? norm_length(set, *norm) : std::numeric_limits<double>::quiet_NaN();
  return est;
}

RateEstimate estimate_points_rate(std::span<const Vector> points, std::span<const int> scales,
                                  const LatticeConfig& config, const RateOptions& options, const NormModel* norm,
                                  const SteinerOptions& steiner) {
  check_scales(scales);
  if (points.empty()) throw DomainError("points-in-cluster rate needs at least one point");
  require_subcritical(config);
  std::vector<Vector> targets(points.begin(), points.end());
  auto est = rate_table("points-in-cluster", 0.0, sup_reach(points), scales, config, options,
                        [&](int) { return EventSpec{PointsInCluster{targets}}; });
  est.lambda_reference = std::numeric_limits<double>::quiet_NaN();
  if (norm) est.lambda_reference = solve_steiner(points, *norm, steiner).minimum_length;
  return est;
}

namespace {

struct SampleTally {
  std::vector<Cluster> clusters;
  std::vector<std::uint64_t> replicates;
  std::uint64_t boundary = 0;
  void merge(SampleTally& o) {
    for (auto& c : o.clusters) clusters.push_back(std::move(c));
    replicates.insert(replicates.end(), o.replicates.begin(), o.replicates.end());
    boundary += o.boundary;
  }
};

}  // namespace

ConditionedSample sample_conditioned(std::span<const Vector> points, int n, const LatticeConfig& config,
                                     std::uint64_t budget, std::uint64_t seed, unsigned workers) {
  if (budget < 1) throw DomainError("sampling budget must be at least 1");
  LatticeConfig c = config;
  c.scale = n;
  require_subcritical(c);
  const auto lattice = Lattice::box(c);
  std::vector<std::size_t> targets;
  for (const auto& a : points) {
    if (a.size() != c.dimension) throw DomainError("point dimension differs from the lattice");
    const auto idx = lattice->site_index(lattice_site(a, n));
    if (!idx) throw DomainError(fmt::format("point ({}) lies outside the box", fmt::join(a, ",")));
    targets.push_back(*idx);
  }

  auto tally = run_replicates<SampleTally>(budget, workers, [&](std::uint64_t first, std::uint64_t last, SampleTally& t) {
    Explorer explorer(*lattice);
    const std::size_t origin = lattice->origin_index();
    for (auto r = first; r < last; ++r) {
      const EdgeSampler sampler(c.p, seed, r);
      auto result = explorer.explore(
          std::span(&origin, 1), [&](EdgeId e) { return sampler.open(e); },
          [](std::size_t) { return true; }, [](std::size_t) { return true; }, false);
      // cheap membership test first; edges are only recorded for accepted clusters
      bool accepted = true;
      for (auto s : targets) {
        if (std::find(result.sites.begin(), result.sites.end(), s) == result.sites.end()) {
          accepted = false;
          break;
        }
      }
      if (!accepted) continue;
      result = explorer.explore(
          std::span(&origin, 1), [&](EdgeId e) { return sampler.open(e); },
          [](std::size_t) { return true; }, [](std::size_t) { return true; }, true);
      auto cluster = explorer.to_cluster(result);
      if (cluster.touches_boundary) ++t.boundary;
      t.clusters.push_back(std::move(cluster));
      t.replicates.push_back(r);
    }
  });

  ConditionedSample out;
  out.clusters = std::move(tally.clusters);
  out.replicates = std::move(tally.replicates);
  auto& rep = out.report;
  rep.n = n;
  rep.points.assign(points.begin(), points.end());
  rep.attempts = budget;
  rep.acceptances = out.clusters.size();
  rep.boundary_touches = tally.boundary;
  return out;
}

bool SkeletonTree::paths_edge_disjoint() const {
  std::set<std::pair<int, int>> seen;
  for (const auto& path : paths) {
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
      const auto e = std::minmax(path[i], path[i + 1]);
      if (!seen.insert(e).second) return false;
    }
  }
  return true;
}

SkeletonTree extract_skeleton(const Cluster& cluster, std::span<const Vector> points) {
  const int V = int(cluster.size());
  SkeletonTree sk;
  sk.scale = cluster.scale;
  std::vector<char> marked(static_cast<std::size_t>(V), 0);
  marked[0] = 1;
  sk.marked.push_back(0);
  for (const auto& a : points) {
    const auto col = cluster.find(lattice_site(a, cluster.scale));
    if (!col) throw DomainError(fmt::format("point ({}) is not in the cluster", fmt::join(a, ",")));
    if (!marked[std::size_t(*col)]) {
      marked[std::size_t(*col)] = 1;
      sk.marked.push_back(*col);
    }
  }

  std::vector<std::vector<int>> adj(static_cast<std::size_t>(V));
  for (const auto& [u, v] : cluster.open_edges) {
    adj[std::size_t(u)].push_back(v);
    adj[std::size_t(v)].push_back(u);
  }
  for (auto& a : adj) std::sort(a.begin(), a.end());

  // BFS tree from the origin
  std::vector<int> parent(static_cast<std::size_t>(V), -2), order;
  parent[0] = -1;
  order.push_back(0);
  for (std::size_t head = 0; head < order.size(); ++head) {
    const int u = order[head];
    for (int w : adj[std::size_t(u)]) {
      if (parent[std::size_t(w)] != -2) continue;
      parent[std::size_t(w)] = u;
      order.push_back(w);
    }
  }
  if (int(order.size()) != V) throw ComputationFailure("cluster is not connected");

  // keep vertices whose subtree holds a marked vertex
  std::vector<char> keep(marked.begin(), marked.end());
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if (keep[std::size_t(*it)] && parent[std::size_t(*it)] >= 0) keep[std::size_t(parent[std::size_t(*it)])] = 1;
  }
  std::vector<int> degree(static_cast<std::size_t>(V), 0);
  for (int v : order) {
    if (!keep[std::size_t(v)]) continue;
    sk.kept.push_back(v);
    if (parent[std::size_t(v)] >= 0) {
      ++degree[std::size_t(v)];
      ++degree[std::size_t(parent[std::size_t(v)])];
      ++sk.edge_count;
    }
  }
  for (int v : sk.kept) {
    if (degree[std::size_t(v)] >= 3) sk.branch_vertices.push_back(v);
  }
  auto is_key = [&](int v) { return marked[std::size_t(v)] || degree[std::size_t(v)] >= 3; };
  for (int v : sk.kept) {
    if (v == 0 || !is_key(v)) continue;
    std::vector<int> path{v};
    int u = v;
    do {
      u = parent[std::size_t(u)];
      path.push_back(u);
    } while (!is_key(u));
    std::reverse(path.begin(), path.end());
    sk.paths.push_back(std::move(path));
  }

  const int k = int(sk.marked.size());
  if (int(sk.branch_vertices.size()) > std::max(0, k - 2)) {
    throw ComputationFailure(fmt::format("skeleton has {} branch vertices for {} marked points",
                                         sk.branch_vertices.size(), k));
  }
  if (!sk.paths_edge_disjoint()) throw ComputationFailure("skeleton paths share an edge");
  return sk;
}

namespace {

std::vector<Vector> probe_directions(int d) {
  std::vector<Vector> dirs;
  Eigen::VectorXi digit = Eigen::VectorXi::Constant(d, -1);
  while (true) {
    if (!digit.isZero()) dirs.push_back(digit.cast<double>().normalized());
    int i = 0;
    while (i < d && digit(i) == 1) digit(i++) = -1;
    if (i == d) break;
    ++digit(i);
  }
  return dirs;
}

}  // namespace

std::optional<double> steiner_gap_upper_bound(const SteinerSolution& solution, double epsilon,
                                              const NormModel& norm) {
  if (solution.minimal.empty()) return std::nullopt;
  const int d = int(solution.minimal.front().terminals.rows());
  std::vector<PrimitiveSet> refs;
  double diameter = 0.0;
  for (const auto& t : solution.minimal) {
    refs.push_back(PrimitiveSet::of(t.as_set()));
    for (int i = 0; i < t.topology.node_count(); ++i) diameter = std::max(diameter, t.node(i).norm());
  }
  const double far = 10.0 * (epsilon + 2.0 * diameter);
  auto clear_of_all = [&](const Vector& q) {
    for (const auto& r : refs) {
      if (distance_to_set(q, r) < epsilon) return false;
    }
    return true;
  };
  // smallest step along dir from base (found by growth then bisection) that
  // lands at distance >= eps from every minimal tree
  auto push = [&](const Vector& base, const Vector& dir) -> std::optional<Vector> {
    double t = epsilon;
    while (!clear_of_all(base + t * dir)) {
      t *= 1.25;
      if (t > far) return std::nullopt;
    }
    double lo = t / 1.25, hi = t;
    for (int it = 0; it < 40; ++it) {
      const double mid = 0.5 * (lo + hi);
      (clear_of_all(base + mid * dir) ? hi : lo) = mid;
    }
    return Vector(base + hi * dir);
  };
  auto valid = [&](const PolygonalSet& s) {
    const auto prim = PrimitiveSet::of(s);
    for (const auto& r : refs) {
      if (hausdorff_distance(prim, r) < epsilon) return false;
    }
    return true;
  };

  const double base_length = solution.minimum_length;
  std::optional<double> best;
  auto consider = [&](const PolygonalSet& s) {
    if (!valid(s)) return;
    const double gap = norm_length(s, norm) - base_length;
    if (!best || gap < *best) best = gap;
  };
  const auto dirs = probe_directions(d);

  for (const auto& tree : solution.minimal) {
    const auto& topo = tree.topology;
    std::vector<Segment> segs;
    for (const auto& [u, v] : topo.edges) segs.push_back({tree.node(u), tree.node(v)});
    // spikes from nodes and edge midpoints
    std::vector<Vector> anchors;
    for (int i = 0; i < topo.node_count(); ++i) anchors.push_back(tree.node(i));
    for (const auto& s : segs) anchors.push_back(s.at(0.5));
    if (segs.empty()) anchors.push_back(Vector::Zero(d));
    for (const auto& a : anchors) {
      for (const auto& dir : dirs) {
        if (auto tip = push(a, dir)) {
          auto with = segs;
          with.push_back({a, *tip});
          consider(PolygonalSet::unchecked(d, std::move(with)));
        }
      }
    }
    // bent edges
    for (std::size_t e = 0; e < segs.size(); ++e) {
      const Vector along = (segs[e].b - segs[e].a).normalized();
      for (const auto& dir : dirs) {
        Vector perp = dir - dir.dot(along) * along;
        if (perp.norm() < 1e-9) continue;
        perp.normalize();
        if (auto apex = push(segs[e].at(0.5), perp)) {
          auto bent = segs;
          bent[e] = {segs[e].a, *apex};
          bent.push_back({*apex, segs[e].b});
          consider(PolygonalSet::unchecked(d, std::move(bent)));
        }
      }
    }
    // Steiner points moved off the tree
    for (int w = topo.terminals; w < topo.node_count(); ++w) {
      for (const auto& dir : dirs) {
        auto moved = push(tree.node(w), dir);
        if (!moved) continue;
        std::vector<Segment> shifted;
        for (const auto& [u, v] : topo.edges) {
          shifted.push_back({u == w ? *moved : tree.node(u), v == w ? *moved : tree.node(v)});
        }
        consider(PolygonalSet::unchecked(d, std::move(shifted)));
      }
    }
  }
  // optimal trees of other topologies
  for (const auto& t : solution.per_topology) {
    if (t.converged) consider(t.as_set());
  }
  return best;
}

ConcentrationResult steiner_concentration(std::span<const Vector> points, double epsilon,
                                          std::span<const int> scales, std::span<const std::uint64_t> budgets,
                                          const LatticeConfig& config, const NormModel& norm,
                                          const ConcentrationOptions& options) {
  check_scales(scales);
  if (budgets.size() != scales.size()) throw DomainError("need one budget per scale");
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
  require_subcritical(config);

  ConcentrationResult out;
  out.epsilon = epsilon;
  out.solution = solve_steiner(points, norm, options.steiner);
  std::vector<PolygonalSet> trees;
  double reach = sup_reach(points);
  for (const auto& t : out.solution.minimal) {
    trees.push_back(t.as_set());
    for (int i = 0; i < t.topology.node_count(); ++i) reach = std::max(reach, t.node(i).cwiseAbs().maxCoeff());
  }
  out.gap_upper_bound = steiner_gap_upper_bound(out.solution, epsilon, norm);

  for (std::size_t i = 0; i < scales.size(); ++i) {
    const int n = scales[i];
    LatticeConfig c = config;
    c.box_radius = harness_box_radius(reach, epsilon, n);
    auto sample = sample_conditioned(points, n, c, budgets[i], derive_seed(options.seed, std::uint64_t(n)),
                                     options.workers);
    auto rep = std::move(sample.report);
    for (const auto& cluster : sample.clusters) {
      double best = kInf;
      for (const auto& t : trees) best = std::min(best, hausdorff_distance(cluster, t));
      rep.distances.push_back(best);
      if (best >= epsilon) ++rep.failures;
    }
    if (rep.acceptances > 0) {
      rep.failure = wilson_interval(rep.failures, rep.acceptances, options.z);
    } else {
      rep.failure = EstimateWithCI{};
    }
    rep.failure.boundary_touches = rep.boundary_touches;
    rep.inconclusive = rep.acceptances < options.min_acceptances;
    out.per_scale.push_back(std::move(rep));
  }
  return out;
}

}  // namespace perclab
