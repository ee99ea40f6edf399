// Independent reference computations for the test suite. Nothing here calls
// into the library's exploration, metric or optimization code.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

namespace oracle {

using Pt = Eigen::VectorXd;
using ISite = std::vector<int>;

struct Grid {
  std::vector<ISite> sites;
  std::vector<std::pair<int, int>> edges;
  int origin = -1;

  int find(const ISite& s) const {
    for (std::size_t i = 0; i < sites.size(); ++i) {
      if (sites[i] == s) return int(i);
    }
    return -1;
  }
};

// All integer sites of the rectangle [lo, hi] and nearest-neighbour edges.
inline Grid rectangle(const ISite& lo, const ISite& hi) {
  Grid g;
  const int d = int(lo.size());
  ISite cur = lo;
  while (true) {
    g.sites.push_back(cur);
    int k = 0;
    while (k < d && cur[k] == hi[k]) cur[k] = lo[k], ++k;
    if (k == d) break;
    ++cur[k];
  }
  for (std::size_t i = 0; i < g.sites.size(); ++i) {
    for (std::size_t j = i + 1; j < g.sites.size(); ++j) {
      int diff = 0;
      for (int k = 0; k < d; ++k) diff += std::abs(g.sites[i][k] - g.sites[j][k]);
      if (diff == 1) g.edges.emplace_back(int(i), int(j));
    }
  }
  g.origin = g.find(ISite(std::size_t(d), 0));
  return g;
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

// Configurations satisfying an event, tallied by number of open edges. The
// event is a predicate on the open-edge mask and the union-find of open
// edges (restricted to `usable` edges).
inline std::vector<std::uint64_t> counts(const Grid& g,
                                         const std::function<bool(std::uint64_t, UnionFind&)>& event,
                                         const std::function<bool(int, int)>& usable = {}) {
  const std::size_t E = g.edges.size();
  std::vector<std::uint64_t> by_open(E + 1, 0);
  for (std::uint64_t mask = 0; mask < (std::uint64_t(1) << E); ++mask) {
    UnionFind uf(g.sites.size());
    int open = 0;
    for (std::size_t e = 0; e < E; ++e) {
      if (!(mask >> e & 1)) continue;
      ++open;
      const auto [a, b] = g.edges[e];
      if (!usable || usable(a, b)) uf.unite(a, b);
    }
    if (event(mask, uf)) ++by_open[std::size_t(open)];
  }
  return by_open;
}

inline double evaluate(const std::vector<std::uint64_t>& by_open, double p) {
  const std::size_t E = by_open.size() - 1;
  long double total = 0.0L;
  for (std::size_t k = 0; k <= E; ++k) {
    total += (long double)by_open[k] * std::pow((long double)p, (long double)k) *
             std::pow(1.0L - p, (long double)(E - k));
  }
  return double(total);
}

inline double probability(const Grid& g, double p, const std::function<bool(std::uint64_t, UnionFind&)>& event,
                          const std::function<bool(int, int)>& usable = {}) {
  return evaluate(counts(g, event, usable), p);
}

inline Pt physical(const ISite& s, int n) {
  Pt v(Eigen::Index(s.size()));
  for (std::size_t k = 0; k < s.size(); ++k) v(Eigen::Index(k)) = double(s[k]) / n;
  return v;
}

inline double point_segment(const Pt& q, const Pt& a, const Pt& b) {
  const Pt ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0 ? (q - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (q - (a + t * ab)).norm();
}

using Seg = std::pair<Pt, Pt>;

inline double dist_to_segments(const Pt& q, const std::vector<Seg>& segs) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& [a, b] : segs) best = std::min(best, point_segment(q, a, b));
  return best;
}

// sup over a segment of the distance to a finite point set: the maximum of a
// lower envelope of convex functions is attained at an endpoint or where two
// distances tie (bisector crossings).
inline double sup_segment_to_points(const Pt& a, const Pt& b, const std::vector<Pt>& pts) {
  std::vector<double> ts{0.0, 1.0};
  const Pt dir = b - a;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      // |a + t dir - p_i|^2 = |a + t dir - p_j|^2 is linear in t
      const double coef = 2.0 * dir.dot(pts[j] - pts[i]);
      const double rhs = pts[j].squaredNorm() - pts[i].squaredNorm() - 2.0 * a.dot(pts[j] - pts[i]);
      if (std::abs(coef) < 1e-300) continue;
      const double t = rhs / coef;
      if (t > 0.0 && t < 1.0) ts.push_back(t);
    }
  }
  double best = 0.0;
  for (double t : ts) {
    const Pt q = a + t * dir;
    double m = std::numeric_limits<double>::infinity();
    for (const auto& p : pts) m = std::min(m, (q - p).norm());
    best = std::max(best, m);
  }
  return best;
}

// Hausdorff distance between a polygonal set (segments; a lone point is a
// degenerate segment) and a finite point set.
inline double hausdorff_segments_points(const std::vector<Seg>& segs, const std::vector<Pt>& pts) {
  double h = 0.0;
  for (const auto& p : pts) h = std::max(h, dist_to_segments(p, segs));
  for (const auto& [a, b] : segs) h = std::max(h, sup_segment_to_points(a, b, pts));
  return h;
}

// Minimum spanning tree length under a gauge (Prim).
inline double mst_length(const std::vector<Pt>& pts, const std::function<double(const Pt&)>& norm) {
  const std::size_t n = pts.size();
  if (n < 2) return 0.0;
  std::vector<double> key(n, std::numeric_limits<double>::infinity());
  std::vector<char> in(n, 0);
  key[0] = 0.0;
  double total = 0.0;
  for (std::size_t it = 0; it < n; ++it) {
    std::size_t u = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (!in[i] && (u == n || key[i] < key[u])) u = i;
    }
    in[u] = 1;
    total += key[u];
    for (std::size_t v = 0; v < n; ++v) {
      if (!in[v]) key[v] = std::min(key[v], norm(Pt(pts[v] - pts[u])));
    }
  }
  return total;
}

// Steiner minimum by brute force over Steiner points on a grid: the
// shortest tree equals min over sets X of at most m-2 extra points of
// MST(terminals + X). Planar terminals, m <= 4. One extra point: full grid
// of spacing `fine`. Two extra points: all pairs on a grid of spacing
// `coarse`, then alternating full-grid refinement at spacing `fine`.
inline double grid_steiner(const std::vector<Pt>& terminals, const std::function<double(const Pt&)>& norm,
                           double fine = 1e-3, double coarse = 2e-2) {
  const std::size_t m = terminals.size();
  double best = mst_length(terminals, norm);
  if (m < 3) return best;
  Eigen::Vector2d lo = terminals[0], hi = terminals[0];
  for (const auto& t : terminals) {
    lo = lo.cwiseMin(Eigen::Vector2d(t));
    hi = hi.cwiseMax(Eigen::Vector2d(t));
  }
  auto axis = [&](double step, double a, double b) {
    std::vector<double> v;
    for (double x = a; x <= b + 1e-12; x += step) v.push_back(x);
    return v;
  };
  std::vector<Pt> pts = terminals;
  pts.push_back(Pt::Zero(2));
  auto with_one = [&](const Pt& x) {
    pts.back() = x;
    return mst_length(pts, norm);
  };
  const auto fx = axis(fine, lo.x(), hi.x());
  const auto fy = axis(fine, lo.y(), hi.y());
  Pt single(2);
  for (double x : fx) {
    for (double y : fy) {
      single << x, y;
      best = std::min(best, with_one(single));
    }
  }
  if (m < 4) return best;
  std::vector<Pt> two = terminals;
  two.push_back(Pt::Zero(2));
  two.push_back(Pt::Zero(2));
  auto with_two = [&](const Pt& x, const Pt& y) {
    two[m] = x;
    two[m + 1] = y;
    return mst_length(two, norm);
  };
  const auto cx = axis(coarse, lo.x(), hi.x());
  const auto cy = axis(coarse, lo.y(), hi.y());
  std::vector<Pt> grid;
  for (double x : cx) {
    for (double y : cy) {
      Pt q(2);
      q << x, y;
      grid.push_back(q);
    }
  }
  double pair_best = std::numeric_limits<double>::infinity();
  Pt bx, by;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = i + 1; j < grid.size(); ++j) {
      const double l = with_two(grid[i], grid[j]);
      if (l < pair_best) pair_best = l, bx = grid[i], by = grid[j];
    }
  }
  // alternate: optimize one point on the fine grid near its coarse value
  for (int round = 0; round < 6; ++round) {
    for (int which = 0; which < 2; ++which) {
      Pt& moving = which == 0 ? bx : by;
      const Pt fixed = which == 0 ? by : bx;
      const Pt centre = moving;
      const int span = int(std::ceil(2 * coarse / fine));
      for (int ix = -span; ix <= span; ++ix) {
        for (int iy = -span; iy <= span; ++iy) {
          Pt q = centre;
          q(0) += ix * fine;
          q(1) += iy * fine;
          const double l = which == 0 ? with_two(q, fixed) : with_two(fixed, q);
          if (l < pair_best) pair_best = l, moving = q;
        }
      }
    }
  }
  return std::min(best, pair_best);
}

// Number of topologies on m labelled terminals and up to m-2 unlabelled
// Steiner points of degree >= 3, by Pruefer enumeration of labelled trees
// on m + s vertices divided by the s! relabellings of the Steiner points
// (Steiner points of degree >= 3 have no nontrivial automorphisms fixing
// the terminals, so each class has exactly s! labellings).
inline std::size_t topology_count(int m) {
  std::size_t total = 0;
  for (int s = 0; s <= m - 2; ++s) {
    const int n = m + s;
    if (n < 2) continue;
    std::size_t labelled = 0;
    if (n == 2) {
      labelled = (s == 0) ? 1 : 0;
    } else {
      std::vector<int> code(std::size_t(n - 2), 0);
      while (true) {
        std::vector<int> deg(std::size_t(n), 1);
        for (int c : code) ++deg[std::size_t(c)];
        bool ok = true;
        for (int v = m; v < n; ++v) ok = ok && deg[std::size_t(v)] >= 3;
        if (ok) ++labelled;
        int k = 0;
        while (k < n - 2 && code[std::size_t(k)] == n - 1) code[std::size_t(k++)] = 0;
        if (k == n - 2) break;
        ++code[std::size_t(k)];
      }
    }
    std::size_t fact = 1;
    for (int i = 2; i <= s; ++i) fact *= std::size_t(i);
    total += labelled / fact;
  }
  return total;
}

// Same count from the degree-sequence formula: labelled trees on n vertices
// with degrees d_i number (n-2)! / prod (d_i - 1)!.
inline std::size_t topology_count_by_degrees(int m) {
  std::size_t total = 0;
  for (int s = 0; s <= m - 2; ++s) {
    const int n = m + s;
    if (n == 2) {
      total += 1;
      continue;
    }
    // distribute the excess 2n - 2 - n = n - 2 over vertices, Steiner points needing 2 each
    const int excess = n - 2 - 2 * s;
    if (excess < 0) continue;
    std::vector<int> extra(std::size_t(n), 0);
    long double sum = 0.0L;
    std::function<void(int, int, long double)> rec = [&](int v, int left, long double denom) {
      if (v == n) {
        if (left == 0) sum += std::tgamma((long double)(n - 1)) / denom;
        return;
      }
      for (int k = 0; k <= left; ++k) {
        const int dm1 = (v >= m ? 2 : 0) + k;  // degree minus one
        rec(v + 1, left - k, denom * std::tgamma((long double)(dm1 + 1)));
      }
    };
    rec(0, excess, 1.0L);
    long double fact = 1.0L;
    for (int i = 2; i <= s; ++i) fact *= i;
    total += std::size_t(std::llround(sum / fact));
  }
  return total;
}

// Full topologies: every terminal a leaf, s = m - 2.
inline std::size_t full_topology_count(int m) {
  std::size_t r = 1;
  for (int k = 2 * m - 5; k > 1; k -= 2) r *= std::size_t(k);
  return r;
}

}  // namespace oracle
