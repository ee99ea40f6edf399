#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "perclab/errors.hpp"
#include "perclab/norm_model.hpp"

namespace perclab {

std::string to_string(GaugeKind kind) {
  switch (kind) {
    case GaugeKind::euclidean: return "euclidean";
    case GaugeKind::l1: return "l1";
    case GaugeKind::linf: return "linf";
    case GaugeKind::weighted_l2: return "weighted-l2";
    case GaugeKind::hull: return "hull";
  }
  return "unknown";
}

GaugeKind gauge_kind_from_string(const std::string& name) {
  for (auto k : {GaugeKind::euclidean, GaugeKind::l1, GaugeKind::linf, GaugeKind::weighted_l2, GaugeKind::hull}) {
    if (to_string(k) == name) return k;
  }
  throw DomainError(fmt::format("unknown gauge '{}'", name));
}

std::vector<Eigen::MatrixXi> hyperoctahedral_group(int dimension) {
  std::vector<int> perm(static_cast<std::size_t>(dimension));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<Eigen::MatrixXi> out;
  do {
    for (unsigned signs = 0; signs < (1u << dimension); ++signs) {
      Eigen::MatrixXi g = Eigen::MatrixXi::Zero(dimension, dimension);
      for (int i = 0; i < dimension; ++i) g(i, perm[std::size_t(i)]) = (signs >> i) & 1u ? -1 : 1;
      out.push_back(std::move(g));
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

Vector canonical_representative(const Vector& u) {
  Vector c = u.cwiseAbs();
  std::sort(c.data(), c.data() + c.size(), std::greater<>());
  return c;
}

NormModel NormModel::euclidean(int dimension) { return NormModel(dimension, GaugeKind::euclidean); }
NormModel NormModel::l1(int dimension) { return NormModel(dimension, GaugeKind::l1); }
NormModel NormModel::linf(int dimension) { return NormModel(dimension, GaugeKind::linf); }

NormModel NormModel::weighted_l2(const Vector& weights) {
  if ((weights.array() <= 0.0).any()) throw DomainError("weighted-l2 weights must be positive");
  NormModel m(int(weights.size()), GaugeKind::weighted_l2);
  m.weights_ = weights;
  return m;
}

namespace {

constexpr double kFacetSlack = 1e-10;

// Counter-clockwise hull (Andrew's monotone chain), collinear points dropped.
std::vector<Vector> planar_hull(std::vector<Vector> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vector& a, const Vector& b) {
    return a(0) < b(0) || (a(0) == b(0) && a(1) < b(1));
  });
  auto cross = [](const Vector& o, const Vector& a, const Vector& b) {
    return (a(0) - o(0)) * (b(1) - o(1)) - (a(1) - o(1)) * (b(0) - o(0));
  };
  std::vector<Vector> hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 1e-14) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 1e-14) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

void add_unique(std::vector<Vector>& list, const Vector& v, double tol) {
  for (const auto& w : list) {
    if ((w - v).norm() <= tol) return;
  }
  list.push_back(v);
}

Matrix columns(const std::vector<Vector>& vs, int d) {
  Matrix m(d, Eigen::Index(vs.size()));
  for (std::size_t i = 0; i < vs.size(); ++i) m.col(Eigen::Index(i)) = vs[i];
  return m;
}

// Facet normals n with n.v <= 1 on all points and equality on a facet.
std::vector<Vector> brute_force_facets(const std::vector<Vector>& pts, int d) {
  const std::size_t count = pts.size();
  double combos = 1.0;
  for (int i = 0; i < d; ++i) combos *= double(count - std::size_t(i)) / double(i + 1);
  if (combos > 5e7) {
    throw ComputationFailure(
        fmt::format("hull of {} points in dimension {} is too large for facet enumeration", count, d));
  }
  std::vector<Vector> facets;
  std::vector<std::size_t> pick(static_cast<std::size_t>(d));
  std::iota(pick.begin(), pick.end(), 0);
  Matrix m(d, d);
  while (true) {
    for (int r = 0; r < d; ++r) m.row(r) = pts[pick[std::size_t(r)]].transpose();
    Eigen::FullPivLU<Matrix> lu(m);
    if (lu.rank() == d) {
      const Vector n = lu.solve(Vector::Ones(d));
      bool supporting = true;
      for (const auto& v : pts) {
        if (n.dot(v) > 1.0 + kFacetSlack) {
          supporting = false;
          break;
        }
      }
      if (supporting) add_unique(facets, n, 1e-9);
    }
    // next combination
    int i = d - 1;
    while (i >= 0 && pick[std::size_t(i)] == count - std::size_t(d - i)) --i;
    if (i < 0) break;
    ++pick[std::size_t(i)];
    for (int j = i + 1; j < d; ++j) pick[std::size_t(j)] = pick[std::size_t(j - 1)] + 1;
  }
  return facets;
}

}  // namespace

NormModel NormModel::from_boundary_points(std::span<const Vector> points) {
  if (points.empty()) throw DomainError("norm model needs boundary points");
  const int d = int(points.front().size());
  if (d < 2) throw DomainError("norm model dimension must be at least 2");
  const auto group = hyperoctahedral_group(d);
  std::vector<Vector> closed;
  for (const auto& p : points) {
    if (p.size() != d) throw DomainError("boundary points disagree in dimension");
    if (!(p.norm() > 0.0) || !p.allFinite()) throw DomainError("boundary points must be finite and nonzero");
    for (const auto& g : group) add_unique(closed, g.cast<double>() * p, 1e-12);
  }

  NormModel m(d, GaugeKind::hull);
  std::vector<Vector> facets;
  std::vector<Vector> verts;
  if (d == 2) {
    verts = planar_hull(closed);
    for (std::size_t i = 0; i < verts.size(); ++i) {
      Matrix e(2, 2);
      e.row(0) = verts[i].transpose();
      e.row(1) = verts[(i + 1) % verts.size()].transpose();
      facets.push_back(e.fullPivLu().solve(Vector::Ones(2)));
    }
  } else {
    facets = brute_force_facets(closed, d);
    for (const auto& v : closed) {
      int tight = 0;
      for (const auto& n : facets) tight += std::abs(n.dot(v) - 1.0) <= 1e-9;
      if (tight >= d) verts.push_back(v);
    }
  }
  if (facets.size() < std::size_t(d + 1)) throw ComputationFailure("degenerate unit ball: hull is not full-dimensional");
  m.vertices_ = columns(verts, d);
  m.facets_ = columns(facets, d);
  return m;
}

double NormModel::evaluate(const Vector& u) const {
  if (u.size() != dimension_) {
    throw DomainError(fmt::format("vector of size {} passed to a {}-dimensional gauge", u.size(), dimension_));
  }
  switch (kind_) {
    case GaugeKind::euclidean: return canonical_representative(u).norm();
    case GaugeKind::l1: return canonical_representative(u).sum();
    case GaugeKind::linf: return u.cwiseAbs().maxCoeff();
    case GaugeKind::weighted_l2: return std::sqrt((weights_.array() * u.array().square()).sum());
    case GaugeKind::hull: {
      const Vector c = canonical_representative(u);
      return std::max(0.0, (facets_.transpose() * c).maxCoeff());
    }
  }
  return 0.0;
}

Vector NormModel::subgradient(const Vector& u) const {
  Vector g = Vector::Zero(dimension_);
  if (u.isZero(0.0)) return g;
  switch (kind_) {
    case GaugeKind::euclidean: return u / u.norm();
    case GaugeKind::l1: return u.unaryExpr([](double x) { return double((x > 0) - (x < 0)); });
    case GaugeKind::linf: {
      Eigen::Index i;
      u.cwiseAbs().maxCoeff(&i);
      g(i) = u(i) > 0 ? 1.0 : -1.0;
      return g;
    }
    case GaugeKind::weighted_l2: return (weights_.array() * u.array()).matrix() / evaluate(u);
    case GaugeKind::hull: {
      Eigen::Index f;
      (facets_.transpose() * u).maxCoeff(&f);
      return facets_.col(f);
    }
  }
  return g;
}

double NormModel::euclidean_lower_constant() const {
  switch (kind_) {
    case GaugeKind::euclidean: return 1.0;
    case GaugeKind::l1: return 1.0;
    case GaugeKind::linf: return 1.0 / std::sqrt(double(dimension_));
    case GaugeKind::weighted_l2: return std::sqrt(weights_.minCoeff());
    case GaugeKind::hull: return 1.0 / vertices_.colwise().norm().maxCoeff();
  }
  return 0.0;
}

}  // namespace perclab
