#include <doctest.h>

#include <cmath>
#include <map>

#include "oracles.hpp"
#include "perclab/errors.hpp"
#include "perclab/harness.hpp"
#include "perclab/rng.hpp"

using namespace perclab;

namespace {

Vector v2(double x, double y) { return Eigen::Vector2d(x, y); }

LatticeConfig config(double p, int radius = 1) {
  LatticeConfig c;
  c.p = p;
  c.box_radius = radius;
  return c;
}

Cluster make_cluster(const std::vector<std::array<int, 2>>& sites, const std::vector<std::pair<int, int>>& edges) {
  Cluster c;
  c.vertices.resize(2, Eigen::Index(sites.size()));
  for (std::size_t i = 0; i < sites.size(); ++i) c.vertices.col(Eigen::Index(i)) << sites[i][0], sites[i][1];
  c.open_edges = edges;
  return c;
}

int l1(const Eigen::MatrixXi& v, int a, int b) { return (v.col(a) - v.col(b)).cwiseAbs().sum(); }

}  // namespace

TEST_CASE("box radius sizing") {
  CHECK(harness_box_radius(1.0, 0.4, 2) == 6);
  CHECK(harness_box_radius(0.0, 0.5, 8) == 7);
}

TEST_CASE("zero-rate control for the origin") {
  RateOptions opt;
  opt.replicates = 10000;
  opt.seed = 4;
  const std::vector<int> scales{2, 4, 8};
  const auto r = estimate_rate(PolygonalSet::origin(2), 0.5, scales, config(0.2), opt, nullptr);
  REQUIRE(r.rows.size() == 3);
  // at n = 2 the open half-unit ball holds only the origin: P = (1-p)^4
  CHECK(r.rows[0].estimate.contains(std::pow(0.8, 4)));
  CHECK(r.rows[2].rate < 0.05);
  CHECK(r.rows[2].rate_low < 0.05);
  CHECK(r.rows[2].rate_low >= 0.0);
  CHECK_FALSE(r.rate_lower_bound.has_value());
  CHECK(r.rows[0].under_resolved);
  CHECK(r.rows[1].under_resolved);
  CHECK_FALSE(r.rows[2].under_resolved);
  CHECK(std::isnan(r.lambda_reference));
  const auto e = NormModel::euclidean(2);
  CHECK(estimate_rate(PolygonalSet::origin(2), 0.5, scales, config(0.2), opt, &e).lambda_reference == 0.0);
}

TEST_CASE("rate guards") {
  RateOptions opt;
  opt.replicates = 10;
  const std::vector<int> scales{1, 2};
  CHECK_THROWS_AS(estimate_rate(PolygonalSet::origin(2), 0.0, scales, config(0.2), opt), DomainError);
  CHECK_THROWS_AS(estimate_rate(PolygonalSet::origin(2), 3.0, scales, config(0.6), opt), SubcriticalityViolation);
}

TEST_CASE("segment event at n = 1 has a closed form") {
  // within 0.6 of the unit segment and vice versa only if C = {0, e1}
  RateOptions opt;
  opt.replicates = 100000;
  opt.seed = 11;
  opt.z = kZ99;
  const std::vector<int> scales{1};
  const auto seg = PolygonalSet(2, {{v2(0, 0), v2(1, 0)}});
  for (double p : {0.1, 0.3}) {
    const auto r = estimate_rate(seg, 0.6, scales, config(p), opt);
    CHECK(r.rows[0].estimate.contains(p * std::pow(1 - p, 6)));
  }
}

TEST_CASE("points rate references the Steiner length") {
  RateOptions opt;
  opt.replicates = 2000;
  const std::vector<int> scales{1, 2};
  const std::vector<Vector> pts{v2(1, 0)};
  const auto e = NormModel::euclidean(2);
  const auto r = estimate_points_rate(pts, scales, config(0.3), opt, &e);
  CHECK(r.lambda_reference == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.rows.size() == 2);
}

TEST_CASE("conditioned acceptance matches the exact probability") {
  const auto g = oracle::rectangle({-1, -1}, {1, 1});
  const int target = g.find({1, 0});
  const double p = 0.3;
  const auto counts = oracle::counts(g, [&](std::uint64_t, oracle::UnionFind& uf) {
    return uf.find(g.origin) == uf.find(target);
  });
  const double exact = oracle::evaluate(counts, p);
  const std::uint64_t budget = 50000;
  const auto s = sample_conditioned(std::vector<Vector>{v2(1, 0)}, 1, config(p), budget, 3);
  const double frac = double(s.report.acceptances) / double(budget);
  CHECK(std::abs(frac - exact) <= 3.0 * std::sqrt(exact * (1 - exact) / double(budget)));
  CHECK(s.report.attempts == budget);
  CHECK(s.clusters.size() == s.report.acceptances);
  for (const auto& c : s.clusters) CHECK(c.contains(Site(Eigen::Vector2i(1, 0))));

  // conditional law of the cluster size against exact enumeration
  std::map<int, std::uint64_t> seen;
  for (const auto& c : s.clusters) ++seen[int(c.size())];
  std::map<int, std::vector<std::uint64_t>> by_size;
  for (int size = 2; size <= 9; ++size) {
    by_size[size] = oracle::counts(g, [&](std::uint64_t, oracle::UnionFind& uf) {
      if (uf.find(g.origin) != uf.find(target)) return false;
      int k = 0;
      for (std::size_t v = 0; v < g.sites.size(); ++v) k += uf.find(int(v)) == uf.find(g.origin);
      return k == size;
    });
  }
  const double acc = double(s.report.acceptances);
  for (const auto& [size, cnt] : by_size) {
    const double q = oracle::evaluate(cnt, p) / exact;
    const double f = double(seen[size]) / acc;
    CHECK(std::abs(f - q) <= 4.0 * std::sqrt(q * (1 - q) / acc) + 1e-12);
  }
}

TEST_CASE("degenerate conditioning") {
  const auto all = sample_conditioned(std::vector<Vector>{}, 1, config(0.3), 500, 1);
  CHECK(all.report.acceptances == 500);
  const auto none = sample_conditioned(std::vector<Vector>{v2(1, 0)}, 1, config(0.0), 500, 1);
  CHECK(none.report.acceptances == 0);
  CHECK(none.clusters.empty());
  CHECK(none.report.attempts == 500);
  CHECK_THROWS_AS(sample_conditioned(std::vector<Vector>{v2(5, 0)}, 1, config(0.3), 10, 1), DomainError);
  CHECK_THROWS_AS(sample_conditioned(std::vector<Vector>{v2(1, 0)}, 1, config(0.3), 0, 1), DomainError);
}

TEST_CASE("skeleton examples") {
  // L path with a dangling branch
  const auto l = make_cluster({{0, 0}, {1, 0}, {1, 1}, {2, 0}}, {{0, 1}, {1, 2}, {1, 3}});
  const auto one = extract_skeleton(l, std::vector<Vector>{v2(1, 1)});
  CHECK(one.edge_count == 2);
  CHECK(one.branch_vertices.empty());
  CHECK(one.paths.size() == 1);
  CHECK(one.length() == 2.0);

  const auto two = extract_skeleton(l, std::vector<Vector>{v2(1, 1), v2(2, 0)});
  CHECK(two.edge_count == 3);
  CHECK(two.branch_vertices == std::vector<int>{1});
  CHECK(two.paths.size() == 3);
  CHECK(two.paths_edge_disjoint());

  // a cycle: the BFS tree drops one edge
  const auto ring = make_cluster({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{0, 1}, {1, 2}, {2, 3}, {3, 0}});
  const auto r = extract_skeleton(ring, std::vector<Vector>{v2(1, 1)});
  CHECK(r.edge_count == 2);
  CHECK_THROWS_AS(extract_skeleton(ring, std::vector<Vector>{v2(2, 2)}), DomainError);
  CHECK(extract_skeleton(ring, std::vector<Vector>{}).edge_count == 0);
}

TEST_CASE("skeletons of conditioned clusters") {
  const std::vector<std::vector<Vector>> marks{{v2(1, 1)}, {v2(1, 0), v2(-1, 1)}, {v2(0.5, 0.5), v2(-0.5, 0)}};
  int idx = 0;
  for (const auto& pts : marks) {
    const int n = idx == 2 ? 2 : 1;
    const auto s = sample_conditioned(pts, n, config(0.4, 2), 4000, 7 + idx++);
    REQUIRE(s.report.acceptances > 20);
    for (const auto& c : s.clusters) {
      const auto sk = extract_skeleton(c, pts);
      const int k = int(sk.marked.size());
      CHECK(int(sk.branch_vertices.size()) <= std::max(0, k - 2));
      CHECK(sk.paths_edge_disjoint());
      // the tree joins every marked pair, so it is at least as long as the lattice distance
      int far = 0;
      for (int a : sk.marked) {
        for (int b : sk.marked) far = std::max(far, l1(c.vertices, a, b));
      }
      CHECK(int(sk.edge_count) >= far);
      CHECK(sk.edge_count + 1 == sk.kept.size());
      CHECK(sk.edge_count <= c.open_edges.size());
    }
  }
}

TEST_CASE("concentration: vacuous radius and exact small scales") {
  const auto e = NormModel::euclidean(2);
  const std::vector<Vector> pts{v2(1, 0)};
  ConcentrationOptions opt;
  opt.seed = 5;
  const std::vector<int> scales{1, 2};
  const std::vector<std::uint64_t> budgets{20000, 100000};
  const auto r = steiner_concentration(pts, 0.4, scales, budgets, config(0.05), e, opt);
  REQUIRE(r.per_scale.size() == 2);
  // at n = 1 the midpoint of the segment is 1/2 from every site
  CHECK(r.per_scale[0].failures == r.per_scale[0].acceptances);
  // at n = 2 success means the cluster is exactly the straight path
  LatticeConfig c2 = config(0.05, harness_box_radius(1.0, 0.4, 2));
  c2.scale = 2;
  const auto s = sample_conditioned(pts, 2, c2, budgets[1], derive_seed(opt.seed, 2));
  std::uint64_t straight = 0;
  for (const auto& c : s.clusters) straight += c.size() == 3 && c.contains(Site(Eigen::Vector2i(1, 0)));
  CHECK(s.report.acceptances == r.per_scale[1].acceptances);
  CHECK(r.per_scale[1].acceptances - r.per_scale[1].failures == straight);
  CHECK(r.per_scale[1].acceptances >= 30);
  CHECK(r.gap_upper_bound.has_value());
  CHECK(*r.gap_upper_bound > 0.0);

  // eps beyond the box diameter: no failures anywhere
  const std::vector<std::uint64_t> small{2000, 2000};
  const auto v = steiner_concentration(pts, 50.0, scales, small, config(0.3), e, opt);
  for (const auto& row : v.per_scale) {
    CHECK(row.acceptances > 0);
    CHECK(row.failures == 0);
  }
  const auto few = steiner_concentration(pts, 0.4, std::vector<int>{4}, std::vector<std::uint64_t>{50}, config(0.05),
                                         e, opt);
  CHECK(few.per_scale[0].inconclusive);
}
