#include "perclab/geometry.hpp"

#include <fmt/format.h>

#include <cmath>
#include <map>
#include <numeric>
#include <queue>

#include "perclab/errors.hpp"
#include "perclab/norm_model.hpp"

namespace perclab {

namespace {

constexpr double kCoincide = 1e-12;

bool same_point(const Vector& a, const Vector& b) { return (a - b).norm() <= kCoincide; }

// Closest approach between two closed segments in R^d.
double segment_segment_distance(const Segment& s1, const Segment& s2) {
  const Vector d1 = s1.b - s1.a;
  const Vector d2 = s2.b - s2.a;
  const Vector r = s1.a - s2.a;
  const double a = d1.squaredNorm();
  const double e = d2.squaredNorm();
  const double f = d2.dot(r);
  double s = 0.0;
  double t = 0.0;
  if (a == 0.0 && e == 0.0) return r.norm();
  if (a == 0.0) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = d1.dot(r);
    if (e == 0.0) {
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = d1.dot(d2);
      const double denom = a * e - b * b;
      s = denom > 0.0 ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  return ((s1.a + s * d1) - (s2.a + t * d2)).norm();
}

// Segments meet only at shared endpoints (or not at all).
bool meet_only_at_endpoints(const Segment& s1, const Segment& s2) {
  const Vector* e1[2] = {&s1.a, &s1.b};
  const Vector* e2[2] = {&s2.a, &s2.b};
  int shared = 0;
  const Vector* p = nullptr;
  const Vector* q1 = nullptr;
  const Vector* q2 = nullptr;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      if (same_point(*e1[i], *e2[j])) {
        ++shared;
        p = e1[i];
        q1 = e1[1 - i];
        q2 = e2[1 - j];
      }
    }
  }
  if (s1.degenerate() || s2.degenerate()) {
    if (shared > 0) return true;
    return segment_segment_distance(s1, s2) > kCoincide;
  }
  if (shared == 0) return segment_segment_distance(s1, s2) > kCoincide;
  if (shared >= 2) return false;
  const Vector u1 = *q1 - *p;
  const Vector u2 = *q2 - *p;
  const double cross2 = u1.squaredNorm() * u2.squaredNorm() - std::pow(u1.dot(u2), 2);
  const bool collinear = cross2 <= 1e-20 * u1.squaredNorm() * u2.squaredNorm();
  return !(collinear && u1.dot(u2) > 0.0);
}

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  }
  void unite(std::size_t i, std::size_t j) { parent[find(i)] = find(j); }
};

bool segments_connected(const std::vector<Segment>& segments) {
  if (segments.size() <= 1) return true;
  UnionFind uf(segments.size());
  for (std::size_t i = 0; i < segments.size(); ++i) {
    for (std::size_t j = i + 1; j < segments.size(); ++j) {
      if (segment_segment_distance(segments[i], segments[j]) <= kCoincide) uf.unite(i, j);
    }
  }
  const auto root = uf.find(0);
  for (std::size_t i = 1; i < segments.size(); ++i) {
    if (uf.find(i) != root) return false;
  }
  return true;
}

}  // namespace

PointCloud::PointCloud(Matrix points) : points_(std::move(points)) {
  if (points_.cols() == 0) throw DomainError("point cloud must be nonempty");
}

PointCloud PointCloud::from_points(std::span<const Vector> points) {
  if (points.empty()) throw DomainError("point cloud must be nonempty");
  Matrix m(points.front().size(), Eigen::Index(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) m.col(Eigen::Index(i)) = points[i];
  return PointCloud(std::move(m));
}

PolygonalSet::PolygonalSet(int dimension, std::vector<Segment> segments)
    : PolygonalSet(dimension, std::move(segments), true) {}

PolygonalSet::PolygonalSet(int dimension, std::vector<Segment> segments, bool validate)
    : dimension_(dimension), segments_(std::move(segments)) {
  if (dimension_ < 1) throw DomainError("dimension must be positive");
  for (const auto& s : segments_) {
    if (s.a.size() != dimension_ || s.b.size() != dimension_) {
      throw DomainError(fmt::format("segment endpoint dimension differs from {}", dimension_));
    }
  }
  if (!validate) return;
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    for (std::size_t j = i + 1; j < segments_.size(); ++j) {
      if (!meet_only_at_endpoints(segments_[i], segments_[j])) {
        throw DomainError(fmt::format("segments {} and {} meet away from shared endpoints", i, j));
      }
    }
  }
  if (!segments_connected(segments_)) throw DomainError("polygonal set is not connected");
  if (!segments_.empty() &&
      distance_to_set(Vector::Zero(dimension_), PrimitiveSet::of(*this)) > kCoincide) {
    throw DomainError("polygonal set does not contain the origin");
  }
}

PolygonalSet PolygonalSet::unchecked(int dimension, std::vector<Segment> segments) {
  return PolygonalSet(dimension, std::move(segments), false);
}

PolygonalSet PolygonalSet::origin(int dimension) { return PolygonalSet(dimension, {}, false); }

PolygonalSet PolygonalSet::polyline(std::span<const Vector> vertices) {
  if (vertices.empty()) throw DomainError("polyline needs at least one vertex");
  std::vector<Segment> segs;
  for (std::size_t i = 1; i < vertices.size(); ++i) segs.push_back({vertices[i - 1], vertices[i]});
  return PolygonalSet(int(vertices.front().size()), std::move(segs));
}

std::vector<Vector> PolygonalSet::vertices() const {
  std::vector<Vector> out;
  if (segments_.empty()) {
    out.push_back(Vector::Zero(dimension_));
    return out;
  }
  auto add = [&](const Vector& v) {
    for (const auto& w : out) {
      if (same_point(v, w)) return;
    }
    out.push_back(v);
  };
  for (const auto& s : segments_) {
    add(s.a);
    add(s.b);
  }
  return out;
}

PolygonalSet PolygonalSet::scaled(double t) const {
  std::vector<Segment> segs;
  segs.reserve(segments_.size());
  for (const auto& s : segments_) segs.push_back({t * s.a, t * s.b});
  return PolygonalSet(dimension_, std::move(segs), false);
}

PolygonalSet PolygonalSet::transformed(const Matrix& linear) const {
  std::vector<Segment> segs;
  segs.reserve(segments_.size());
  for (const auto& s : segments_) segs.push_back({linear * s.a, linear * s.b});
  return PolygonalSet(dimension_, std::move(segs), false);
}

PrimitiveSet PrimitiveSet::of(const PolygonalSet& set) {
  PrimitiveSet out{set.dimension(), set.segments()};
  if (out.primitives.empty()) {
    const Vector o = Vector::Zero(set.dimension());
    out.primitives.push_back({o, o});
  }
  return out;
}

PrimitiveSet PrimitiveSet::of(const PointCloud& cloud) {
  PrimitiveSet out{cloud.dimension(), {}};
  out.primitives.reserve(std::size_t(cloud.size()));
  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    const Vector p = cloud.point(i);
    out.primitives.push_back({p, p});
  }
  return out;
}

double distance_to_set(const Vector& q, const PrimitiveSet& set) {
  if (set.primitives.empty()) throw DomainError("distance to an empty set");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : set.primitives) best = std::min(best, point_segment_distance(q, s.a, s.b));
  return best;
}

namespace {

struct Node {
  double t0;
  double t1;
  std::size_t e0;  // index into evaluation storage
  std::size_t e1;
  double upper;
  bool operator<(const Node& o) const { return upper < o.upper; }
};

// sup_{t in [0,1]} min_k dist(s(t), Y_k), bounded from both sides. Intervals
// whose upper bound cannot beat `floor` are discarded.
DirectedBounds directed_segment(const Segment& s, const PrimitiveSet& y, double tol, double threshold,
                                double floor) {
  if (s.degenerate()) {
    const double v = distance_to_set(s.a, y);
    return {v, v};
  }
  const std::size_t k = y.primitives.size();
  std::vector<std::vector<double>> evals;
  auto evaluate = [&](double t) {
    const Vector q = s.at(t);
    std::vector<double> f(k);
    for (std::size_t i = 0; i < k; ++i) {
      f[i] = point_segment_distance(q, y.primitives[i].a, y.primitives[i].b);
    }
    evals.push_back(std::move(f));
    return evals.size() - 1;
  };
  auto min_of = [&](std::size_t e) { return *std::min_element(evals[e].begin(), evals[e].end()); };
  auto upper_of = [&](std::size_t e0, std::size_t e1) {
    double u = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < k; ++i) u = std::min(u, std::max(evals[e0][i], evals[e1][i]));
    return u;
  };

  const std::size_t e0 = evaluate(0.0);
  const std::size_t e1 = evaluate(1.0);
  double lower = std::max(min_of(e0), min_of(e1));
  const bool decide = !std::isnan(threshold);
  std::priority_queue<Node> queue;
  queue.push({0.0, 1.0, e0, e1, upper_of(e0, e1)});
  constexpr int kMaxSplits = 200000;
  for (int split = 0; split < kMaxSplits && !queue.empty(); ++split) {
    const Node top = queue.top();
    if (top.upper <= std::max(lower, floor) + tol) return {lower, std::max(top.upper, lower)};
    if (decide && (lower >= threshold || top.upper < threshold)) return {lower, top.upper};
    queue.pop();
    const double tm = 0.5 * (top.t0 + top.t1);
    const std::size_t em = evaluate(tm);
    lower = std::max(lower, min_of(em));
    const Node left{top.t0, tm, top.e0, em, upper_of(top.e0, em)};
    const Node right{tm, top.t1, em, top.e1, upper_of(em, top.e1)};
    if (left.upper > std::max(lower, floor)) queue.push(left);
    if (right.upper > std::max(lower, floor)) queue.push(right);
  }
  return {lower, queue.empty() ? lower : std::max(queue.top().upper, lower)};
}

}  // namespace

DirectedBounds directed_hausdorff(const PrimitiveSet& x, const PrimitiveSet& y, double tol,
                                  double threshold) {
  if (x.primitives.empty() || y.primitives.empty()) throw DomainError("Hausdorff distance of an empty set");
  DirectedBounds out{0.0, 0.0};
  const bool decide = !std::isnan(threshold);
  // Points first: they are exact and raise the floor for segment pruning.
  std::vector<std::size_t> order(x.primitives.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_partition(order.begin(), order.end(),
                        [&](std::size_t i) { return x.primitives[i].degenerate(); });
  for (std::size_t i : order) {
    const auto b = directed_segment(x.primitives[i], y, tol, threshold, out.lower);
    out.lower = std::max(out.lower, b.lower);
    out.upper = std::max(out.upper, b.upper);
    if (decide && out.lower >= threshold) return out;
  }
  return out;
}

double hausdorff_distance(const PrimitiveSet& x, const PrimitiveSet& y, double tol) {
  const auto xy = directed_hausdorff(x, y, tol);
  const auto yx = directed_hausdorff(y, x, tol);
  return std::max(0.5 * (xy.lower + xy.upper), 0.5 * (yx.lower + yx.upper));
}

double hausdorff_distance(const PolygonalSet& x, const PolygonalSet& y) {
  return hausdorff_distance(PrimitiveSet::of(x), PrimitiveSet::of(y));
}
double hausdorff_distance(const PolygonalSet& x, const PointCloud& y) {
  return hausdorff_distance(PrimitiveSet::of(x), PrimitiveSet::of(y));
}
double hausdorff_distance(const PointCloud& x, const PolygonalSet& y) {
  return hausdorff_distance(PrimitiveSet::of(x), PrimitiveSet::of(y));
}
double hausdorff_distance(const PointCloud& x, const PointCloud& y) {
  return hausdorff_distance(PrimitiveSet::of(x), PrimitiveSet::of(y));
}

bool hausdorff_less_than(const PrimitiveSet& x, const PrimitiveSet& y, double eps) {
  constexpr double tol = 1e-9;
  auto below = [&](const PrimitiveSet& from, const PrimitiveSet& to) {
    const auto b = directed_hausdorff(from, to, tol, eps);
    if (b.lower >= eps) return false;
    return b.upper < eps || 0.5 * (b.lower + b.upper) < eps;
  };
  return below(x, y) && below(y, x);
}

bool epsilon_neighborhood_contains(const PrimitiveSet& x, double eps, const Vector& q) {
  if (!(eps > 0.0)) throw DomainError("neighbourhood radius must be positive");
  return distance_to_set(q, x) < eps;
}
bool epsilon_neighborhood_contains(const PolygonalSet& x, double eps, const Vector& q) {
  return epsilon_neighborhood_contains(PrimitiveSet::of(x), eps, q);
}
bool epsilon_neighborhood_contains(const PointCloud& x, double eps, const Vector& q) {
  return epsilon_neighborhood_contains(PrimitiveSet::of(x), eps, q);
}

double norm_length(const PolygonalSet& set, const NormModel& norm) {
  double total = 0.0;
  for (const auto& s : set.segments()) total += norm(s.b - s.a);
  return total;
}

namespace {

// Douglas-Peucker on one chain; keeps indices into `chain`.
void douglas_peucker(const std::vector<Vector>& chain, std::size_t first, std::size_t last, double tol,
                     std::vector<bool>& keep) {
  if (last <= first + 1) return;
  double worst = -1.0;
  std::size_t at = first;
  for (std::size_t i = first + 1; i < last; ++i) {
    const double d = point_segment_distance(chain[i], chain[first], chain[last]);
    if (d > worst) {
      worst = d;
      at = i;
    }
  }
  if (worst > tol) {
    keep[at] = true;
    douglas_peucker(chain, first, at, tol, keep);
    douglas_peucker(chain, at, last, tol, keep);
  }
}

struct VertexGraph {
  std::vector<Vector> vertices;
  std::vector<std::vector<std::size_t>> adjacent;  // vertex -> edge ids
  std::vector<std::pair<std::size_t, std::size_t>> edges;

  std::size_t vertex(const Vector& v) {
    for (std::size_t i = 0; i < vertices.size(); ++i) {
      if (same_point(v, vertices[i])) return i;
    }
    vertices.push_back(v);
    adjacent.emplace_back();
    return vertices.size() - 1;
  }
  void add_edge(const Vector& a, const Vector& b) {
    const auto i = vertex(a);
    const auto j = vertex(b);
    edges.emplace_back(i, j);
    adjacent[i].push_back(edges.size() - 1);
    adjacent[j].push_back(edges.size() - 1);
  }
};

std::vector<Segment> simplify_chains(const VertexGraph& g, std::size_t origin, double tol) {
  std::vector<bool> key(g.vertices.size(), false);
  for (std::size_t v = 0; v < g.vertices.size(); ++v) key[v] = g.adjacent[v].size() != 2 || v == origin;
  std::vector<bool> used(g.edges.size(), false);
  std::vector<Segment> out;

  auto emit_chain = [&](const std::vector<std::size_t>& ids) {
    std::vector<Vector> chain;
    for (auto id : ids) chain.push_back(g.vertices[id]);
    std::vector<std::size_t> cuts{0, chain.size() - 1};
    if (ids.front() == ids.back()) {
      // Closed loop: split at the vertex farthest from the start.
      std::size_t far = 0;
      double best = -1.0;
      for (std::size_t i = 0; i < chain.size(); ++i) {
        const double d = (chain[i] - chain[0]).norm();
        if (d > best) {
          best = d;
          far = i;
        }
      }
      cuts = {0, far, chain.size() - 1};
    }
    std::vector<bool> keep(chain.size(), false);
    for (auto c : cuts) keep[c] = true;
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) douglas_peucker(chain, cuts[c], cuts[c + 1], tol, keep);
    std::size_t prev = 0;
    for (std::size_t i = 1; i < chain.size(); ++i) {
      if (!keep[i]) continue;
      out.push_back({chain[prev], chain[i]});
      prev = i;
    }
  };

  auto walk = [&](std::size_t start, std::size_t edge) {
    std::vector<std::size_t> ids{start};
    std::size_t at = start;
    while (true) {
      used[edge] = true;
      const auto [i, j] = g.edges[edge];
      at = (i == at) ? j : i;
      ids.push_back(at);
      if (key[at]) break;
      std::size_t next = g.edges.size();
      for (auto e : g.adjacent[at]) {
        if (!used[e]) next = e;
      }
      if (next == g.edges.size()) break;
      edge = next;
    }
    emit_chain(ids);
  };

  for (std::size_t v = 0; v < g.vertices.size(); ++v) {
    if (!key[v]) continue;
    for (auto e : g.adjacent[v]) {
      if (!used[e]) walk(v, e);
    }
  }
  return out;
}

}  // namespace

PolygonalSet simplify(const PolygonalSet& set, double tol) {
  if (!(tol > 0.0)) throw DomainError("simplification tolerance must be positive");
  const int d = set.dimension();
  if (set.is_point()) return set;
  if (!segments_connected(set.segments())) throw DomainError("cannot simplify a disconnected set");
  const Vector origin = Vector::Zero(d);

  // Make the origin a vertex, splitting a segment through it if needed.
  std::vector<Segment> segs;
  bool origin_found = false;
  for (const auto& s : set.segments()) {
    if (s.degenerate()) continue;
    if (same_point(s.a, origin) || same_point(s.b, origin)) origin_found = true;
  }
  for (const auto& s : set.segments()) {
    if (s.degenerate()) continue;
    if (!origin_found && point_segment_distance(origin, s.a, s.b) <= kCoincide) {
      segs.push_back({s.a, origin});
      segs.push_back({origin, s.b});
      origin_found = true;
    } else {
      segs.push_back(s);
    }
  }
  if (!origin_found) throw DomainError("cannot simplify a set that misses the origin");
  if (segs.empty()) return PolygonalSet::origin(d);

  VertexGraph g;
  for (const auto& s : segs) g.add_edge(s.a, s.b);
  const std::size_t origin_id = g.vertex(origin);

  for (double t = tol; t > tol * 1e-6; t *= 0.5) {
    auto out = simplify_chains(g, origin_id, t);
    try {
      return PolygonalSet(d, std::move(out));
    } catch (const DomainError&) {
      // chords of different chains crossed; tighten and retry
    }
  }
  return PolygonalSet::unchecked(d, std::move(segs));
}

}  // namespace perclab
