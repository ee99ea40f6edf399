#include "perclab/steiner.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <set>

#include "perclab/errors.hpp"
#include "perclab/parallel.hpp"

namespace perclab {

std::vector<int> SteinerTopology::degrees() const {
  std::vector<int> deg(static_cast<std::size_t>(node_count()), 0);
  for (const auto& [u, v] : edges) {
    ++deg[std::size_t(u)];
    ++deg[std::size_t(v)];
  }
  return deg;
}

bool SteinerTopology::is_full() const {
  if (steiner_points != terminals - 2) return false;
  const auto deg = degrees();
  return std::all_of(deg.begin(), deg.begin() + terminals, [](int d) { return d == 1; });
}

namespace {

// Labels: terminal id >= 0, Steiner -1.
struct LabelledTree {
  std::vector<int> label;
  std::vector<std::pair<int, int>> edges;

  std::vector<std::vector<int>> adjacency() const {
    std::vector<std::vector<int>> adj(label.size());
    for (const auto& [u, v] : edges) {
      adj[std::size_t(u)].push_back(v);
      adj[std::size_t(v)].push_back(u);
    }
    return adj;
  }

  std::string canonical() const {
    const auto adj = adjacency();
    int root = 0;
    for (std::size_t i = 0; i < label.size(); ++i) {
      if (label[i] == 0) root = int(i);
    }
    std::function<std::string(int, int)> code = [&](int v, int parent) {
      std::vector<std::string> kids;
      for (int w : adj[std::size_t(v)]) {
        if (w != parent) kids.push_back(code(w, v));
      }
      std::sort(kids.begin(), kids.end());
      std::string out = "(";
      out += label[std::size_t(v)] >= 0 ? "t" + std::to_string(label[std::size_t(v)]) : "s";
      for (const auto& k : kids) out += k;
      return out + ")";
    };
    return code(root, -1);
  }
};

LabelledTree to_labelled(const SteinerTopology& t) {
  LabelledTree lt;
  for (int i = 0; i < t.node_count(); ++i) lt.label.push_back(i < t.terminals ? i : -1);
  lt.edges = t.edges;
  return lt;
}

SteinerTopology from_labelled(const LabelledTree& lt, int terminals) {
  std::vector<int> id(lt.label.size());
  int next_steiner = terminals;
  for (std::size_t i = 0; i < lt.label.size(); ++i) id[i] = lt.label[i] >= 0 ? lt.label[i] : next_steiner++;
  SteinerTopology t;
  t.terminals = terminals;
  t.steiner_points = next_steiner - terminals;
  for (const auto& [u, v] : lt.edges) {
    t.edges.emplace_back(std::min(id[std::size_t(u)], id[std::size_t(v)]),
                         std::max(id[std::size_t(u)], id[std::size_t(v)]));
  }
  std::sort(t.edges.begin(), t.edges.end());
  return t;
}

}  // namespace

std::string SteinerTopology::canonical_form() const { return to_labelled(*this).canonical(); }

void SteinerTopology::validate() const {
  const int n = node_count();
  if (terminals < 1) throw DomainError("topology needs at least one terminal");
  if (int(edges.size()) != n - 1) throw DomainError("topology is not a tree: wrong edge count");
  std::vector<int> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int i) { return parent[std::size_t(i)] == i ? i : parent[std::size_t(i)] = find(parent[std::size_t(i)]); };
  for (const auto& [u, v] : edges) {
    if (u < 0 || v < 0 || u >= n || v >= n || u == v) throw DomainError("topology edge out of range");
    const int a = find(u), b = find(v);
    if (a == b) throw DomainError("topology contains a cycle");
    parent[std::size_t(a)] = b;
  }
  const auto deg = degrees();
  for (int i = terminals; i < n; ++i) {
    if (deg[std::size_t(i)] < 3) throw DomainError(fmt::format("Steiner point {} has degree {}", i, deg[std::size_t(i)]));
  }
  if (n > 1) {
    for (int i = 0; i < terminals; ++i) {
      if (deg[std::size_t(i)] < 1) throw DomainError(fmt::format("terminal {} is isolated", i));
    }
  }
}

std::vector<SteinerTopology> enumerate_topologies(int terminals) {
  if (terminals < 2 || terminals > kMaxSteinerTerminals) {
    throw DomainError(fmt::format("terminal count {} outside the supported range 2..{}", terminals,
                                  kMaxSteinerTerminals));
  }
  std::map<std::string, LabelledTree> level;
  level.emplace("(t0)", LabelledTree{{0}, {}});
  for (int t = 1; t < terminals; ++t) {
    std::map<std::string, LabelledTree> next;
    auto keep = [&](LabelledTree tree) {
      auto key = tree.canonical();
      next.emplace(std::move(key), std::move(tree));
    };
    for (const auto& [key, tree] : level) {
      const int nodes = int(tree.label.size());
      // new leaf on any node
      for (int v = 0; v < nodes; ++v) {
        LabelledTree c = tree;
        c.label.push_back(t);
        c.edges.emplace_back(v, nodes);
        keep(std::move(c));
      }
      for (std::size_t e = 0; e < tree.edges.size(); ++e) {
        const auto [u, v] = tree.edges[e];
        // terminal subdividing the edge
        LabelledTree c = tree;
        c.label.push_back(t);
        c.edges[e] = {u, nodes};
        c.edges.emplace_back(nodes, v);
        keep(std::move(c));
        // new Steiner point on the edge carrying the terminal as a leaf
        LabelledTree s = tree;
        s.label.push_back(-1);
        s.label.push_back(t);
        s.edges[e] = {u, nodes};
        s.edges.emplace_back(nodes, v);
        s.edges.emplace_back(nodes, nodes + 1);
        keep(std::move(s));
      }
      // Steiner point promoted to the terminal
      for (int v = 0; v < nodes; ++v) {
        if (tree.label[std::size_t(v)] >= 0) continue;
        LabelledTree c = tree;
        c.label[std::size_t(v)] = t;
        keep(std::move(c));
      }
    }
    level = std::move(next);
  }
  std::vector<SteinerTopology> out;
  out.reserve(level.size());
  for (const auto& [key, tree] : level) out.push_back(from_labelled(tree, terminals));
  return out;
}

double tree_length(const SteinerTopology& topology, const Matrix& nodes, const NormModel& norm) {
  double total = 0.0;
  for (const auto& [u, v] : topology.edges) total += norm(Vector(nodes.col(u) - nodes.col(v)));
  return total;
}

PolygonalSet SteinerTree::as_set() const {
  std::vector<Segment> segs;
  for (const auto& [u, v] : topology.edges) segs.push_back({node(u), node(v)});
  return PolygonalSet::unchecked(int(terminals.rows()), std::move(segs));
}

namespace {

Matrix node_matrix(const Matrix& terminals, const Vector& z, int steiner) {
  const auto d = terminals.rows();
  Matrix nodes(d, terminals.cols() + steiner);
  nodes.leftCols(terminals.cols()) = terminals;
  for (int j = 0; j < steiner; ++j) nodes.col(terminals.cols() + j) = z.segment(j * d, d);
  return nodes;
}

// Merges Steiner points lying within `radius` of a neighbour.
void collapse(SteinerTopology& topo, Matrix& nodes, double radius) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t e = 0; e < topo.edges.size(); ++e) {
      auto [u, v] = topo.edges[e];
      if (u >= topo.terminals && v < topo.terminals) std::swap(u, v);
      if (v < topo.terminals) continue;  // both terminals
      if ((nodes.col(u) - nodes.col(v)).norm() >= radius) continue;
      // v is Steiner: fold it into u
      if (u >= topo.terminals) nodes.col(u) = 0.5 * (nodes.col(u) + nodes.col(v));
      topo.edges.erase(topo.edges.begin() + std::ptrdiff_t(e));
      for (auto& [a, b] : topo.edges) {
        if (a == v) a = u;
        if (b == v) b = u;
      }
      // drop node v, shift later indices
      const int last = topo.node_count() - 1;
      Matrix shrunk(nodes.rows(), last);
      shrunk.leftCols(v) = nodes.leftCols(v);
      shrunk.rightCols(last - v) = nodes.rightCols(last - v);
      nodes = std::move(shrunk);
      for (auto& [a, b] : topo.edges) {
        if (a > v) --a;
        if (b > v) --b;
        if (a > b) std::swap(a, b);
      }
      --topo.steiner_points;
      std::sort(topo.edges.begin(), topo.edges.end());
      changed = true;
      break;
    }
  }
}

}  // namespace

SteinerTree optimize_positions(const SteinerTopology& topology, const Matrix& terminals, const NormModel& norm,
                               const SteinerOptions& options, const std::optional<Matrix>& start) {
  topology.validate();
  const int m = topology.terminals;
  const int s = topology.steiner_points;
  const auto d = terminals.rows();
  if (terminals.cols() != m) throw DomainError("terminal matrix does not match the topology");
  if (d != norm.dimension()) throw DomainError("terminal dimension differs from the gauge");

  SteinerTree tree;
  tree.source_topology = topology;
  tree.terminals = terminals;

  const Vector centroid = terminals.rowwise().mean();
  const int k = int(d) * s;
  Vector x = Vector::Zero(k);
  for (int j = 0; j < s; ++j) x.segment(j * d, d) = centroid;
  const Vector base = x;
  if (start) {
    if (start->rows() != d || start->cols() != s) throw DomainError("start matrix has the wrong shape");
    for (int j = 0; j < s; ++j) x.segment(j * d, d) = start->col(j);
  }

  auto objective = [&](const Vector& z, Vector* grad) {
    const Matrix nodes = node_matrix(terminals, z, s);
    double f = 0.0;
    if (grad) grad->setZero(k);
    for (const auto& [u, v] : topology.edges) {
      const Vector w = nodes.col(u) - nodes.col(v);
      f += norm(w);
      if (!grad) continue;
      const Vector g = norm.subgradient(w);
      if (u >= m) grad->segment((u - m) * d, d) += g;
      if (v >= m) grad->segment((v - m) * d, d) -= g;
    }
    return f;
  };

  Vector best_x = x;
  double best = objective(x, nullptr);
  double lower = -std::numeric_limits<double>::infinity();
  std::size_t iter = 0;
  bool converged = s == 0;
  if (s == 0) lower = best;

  if (s > 0) {
    // Each Steiner point of an optimal tree is joined to a terminal by a path
    // no longer than the star from terminal 0, hence within this radius.
    double star = 0.0;
    for (int i = 1; i < m; ++i) star += norm(Vector(terminals.col(i) - terminals.col(0)));
    const double spread = (terminals.colwise() - centroid).colwise().norm().maxCoeff();
    const double per_point = spread + star / norm.euclidean_lower_constant();
    const double radius = std::sqrt(double(s)) * per_point * 1.01 + (x - base).norm() + 1e-12;
    Matrix P = Matrix::Identity(k, k) * radius * radius;
    const double kk = double(k);
    Vector g(k);
    for (iter = 0; iter < options.max_iterations; ++iter) {
      // Outside the region known to contain an optimum: feasibility cut.
      int outside = -1;
      for (int j = 0; j < s && outside < 0; ++j) {
        if ((x.segment(j * d, d) - centroid).norm() > per_point * 1.01) outside = j;
      }
      double gpg = 0.0;
      if (outside >= 0) {
        g.setZero();
        g.segment(outside * d, d) = x.segment(outside * d, d) - centroid;
        gpg = g.dot(P * g);
      } else {
        const double f = objective(x, &g);
        if (f < best) {
          best = f;
          best_x = x;
        }
        gpg = g.dot(P * g);
        // gpg == 0 means the ellipsoid, which holds an optimum, lies in the
        // hyperplane through x orthogonal to g, so f is optimal.
        if (g.isZero(0.0) || !(gpg > 0.0)) {
          lower = std::max(lower, f);
        } else if (std::isfinite(gpg)) {
          lower = std::max(lower, f - std::sqrt(gpg));
        }
        if (best - lower <= options.tol * std::max(1.0, std::abs(best))) {
          converged = true;
          break;
        }
      }
      if (!(gpg > 0.0) || !std::isfinite(gpg)) break;
      const Vector pg = P * g / std::sqrt(gpg);
      x -= pg / (kk + 1.0);
      P = (kk * kk / (kk * kk - 1.0)) * (P - (2.0 / (kk + 1.0)) * pg * pg.transpose());
      P = 0.5 * (P + P.transpose()).eval();
    }
  }

  Matrix nodes = node_matrix(terminals, best_x, s);
  SteinerTopology topo = topology;
  collapse(topo, nodes, options.geometric_tol);
  topo.validate();
  tree.topology = topo;
  tree.steiner = nodes.rightCols(topo.steiner_points);
  tree.total_length = tree_length(topo, nodes, norm);
  tree.lower_bound = lower;
  tree.converged = converged;
  tree.iterations = iter;
  return tree;
}

namespace {

struct TreeTally {
  std::vector<SteinerTree> trees;
  void merge(TreeTally& o) {
    for (auto& t : o.trees) trees.push_back(std::move(t));
  }
};

}  // namespace

SteinerSolution solve_steiner(std::span<const Vector> points, const NormModel& norm, const SteinerOptions& options) {
  if (points.empty()) throw DomainError("Steiner problem needs at least one point besides the origin");
  const int d = norm.dimension();
  const int m = int(points.size()) + 1;
  if (m > kMaxSteinerTerminals) {
    throw DomainError(fmt::format("{} terminals exceed the cap of {}", m, kMaxSteinerTerminals));
  }
  Matrix terminals = Matrix::Zero(d, m);
  for (int i = 1; i < m; ++i) {
    const auto& p = points[std::size_t(i - 1)];
    if (p.size() != d) throw DomainError("point dimension differs from the gauge");
    terminals.col(i) = p;
  }
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      if ((terminals.col(i) - terminals.col(j)).norm() == 0.0) {
        throw DomainError("Steiner terminals (points and origin) must be distinct");
      }
    }
  }

  const auto topologies = enumerate_topologies(m);
  auto tally = run_replicates<TreeTally>(topologies.size(), options.workers,
                                         [&](std::uint64_t first, std::uint64_t last, TreeTally& t) {
                                           for (auto i = first; i < last; ++i) {
                                             t.trees.push_back(optimize_positions(topologies[i], terminals, norm, options));
                                           }
                                         });
  SteinerSolution sol;
  sol.per_topology = std::move(tally.trees);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& t : sol.per_topology) {
    if (!t.converged) {
      ++sol.unconverged;
      continue;
    }
    best = std::min(best, t.total_length);
  }
  if (!std::isfinite(best)) throw ComputationFailure("no topology converged");
  sol.minimum_length = best;
  const double cutoff = best * (1.0 + options.tie_rel) + options.tol;
  for (const auto& t : sol.per_topology) {
    if (!t.converged || t.total_length > cutoff) continue;
    const auto set = t.as_set();
    bool duplicate = false;
    for (const auto& kept : sol.minimal) {
      if (hausdorff_distance(PrimitiveSet::of(set), PrimitiveSet::of(kept.as_set())) < options.geometric_tol) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) sol.minimal.push_back(t);
  }
  return sol;
}

}  // namespace perclab
