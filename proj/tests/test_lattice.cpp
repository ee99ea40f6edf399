#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "oracles.hpp"
#include "perclab/errors.hpp"
#include "perclab/lattice.hpp"

using namespace perclab;

namespace {

Vector v2(double x, double y) { return Eigen::Vector2d(x, y); }

LatticeConfig cfg(double p, int radius, int scale = 1, int d = 2) {
  LatticeConfig c;
  c.dimension = d;
  c.p = p;
  c.box_radius = radius;
  c.scale = scale;
  return c;
}

EdgeId edge_between(const Lattice& lat, const Site& a, const Site& b) {
  const auto ia = *lat.site_index(a);
  const auto ib = *lat.site_index(b);
  for (auto e : lat.edges()) {
    const auto [x, y] = lat.edge_sites(e);
    if ((x == ia && y == ib) || (x == ib && y == ia)) return e;
  }
  FAIL("no such edge");
  return 0;
}

}  // namespace

TEST_CASE("rounding examples") {
  CHECK(round_to_lattice(v2(0, 0), 7) == v2(0, 0));
  CHECK(round_to_lattice(v2(0.26, -0.9), 2) == v2(0.5, -1.0));
  CHECK(round_to_lattice(v2(0.25, 0.25), 2) == v2(0.5, 0.5));
  CHECK(round_to_lattice(v2(-0.25, -0.75), 2) == v2(0.0, -0.5));
}

TEST_CASE("rounding stays within half a spacing") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int i = 0; i < 2000; ++i) {
    const int n = 1 + int(rng() % 9);
    const Vector x = v2(u(rng), u(rng));
    const Vector r = round_to_lattice(x, n);
    CHECK((r - x).cwiseAbs().maxCoeff() <= 0.5 / n + 1e-12);
    CHECK((r * n - (r * n).array().round().matrix()).norm() < 1e-9);
    CHECK(lattice_site(x, n).cast<double>().isApprox(r * n));
  }
}

TEST_CASE("box geometry") {
  const auto lat = Lattice::box(cfg(0.2, 2));
  CHECK(lat->site_count() == 25);
  CHECK(lat->edges().size() == 40);
  CHECK(lat->site(lat->origin_index()) == Eigen::Vector2i(0, 0));
  const auto three = Lattice::box(cfg(0.1, 1, 1, 3));
  CHECK(three->site_count() == 27);
  CHECK(three->edges().size() == 54);
  const auto rect = Lattice::rectangle(cfg(0.2, 1), Site::Zero(2), Eigen::Vector2i(1, 1));
  CHECK(rect->edges().size() == 4);
  CHECK(rect->edge_label(edge_between(*rect, Eigen::Vector2i(0, 0), Eigen::Vector2i(1, 0))) == "0,0-1,0");
  CHECK_THROWS_AS(Lattice::rectangle(cfg(0.2, 1), Eigen::Vector2i(1, 1), Eigen::Vector2i(2, 2)), DomainError);
}

TEST_CASE("config validation and subcritical gate") {
  CHECK_THROWS_AS(cfg(0.2, 0).validate(), DomainError);
  CHECK_THROWS_AS(cfg(1.5, 1).validate(), DomainError);
  CHECK_THROWS_AS(cfg(0.2, 1, 1, 1).validate(), DomainError);
  CHECK(p_c_bound(2) == 0.5);
  CHECK(p_c_bound(3) == 0.2);
  CHECK_THROWS_AS(require_subcritical(cfg(0.5, 1)), SubcriticalityViolation);
  CHECK_THROWS_AS(require_subcritical(cfg(0.2, 1, 1, 3)), SubcriticalityViolation);
  auto c = cfg(0.6, 1);
  c.p_c_override = 0.7;
  CHECK_NOTHROW(require_subcritical(c));
}

TEST_CASE("degenerate Bernoulli") {
  CHECK(sample_configuration(Lattice::box(cfg(0.0, 3)), 5).open_edges.empty());
  const auto lat = Lattice::box(cfg(1.0, 2));
  CHECK_THROWS_AS(sample_configuration(lat, 5), SubcriticalityViolation);
  const auto all = sample_configuration(lat, 5, 0, SubcriticalGate::disabled);
  CHECK(all.open_edges == lat->edges());
}

TEST_CASE("open fraction within three binomial standard errors") {
  const auto lat = Lattice::box(cfg(0.3, 4));
  const std::uint64_t reps = 100000;
  std::uint64_t open = 0;
  for (std::uint64_t r = 0; r < reps; ++r) {
    const EdgeSampler s(0.3, 99, r);
    for (auto e : lat->edges()) open += s.open(e);
  }
  const double trials = double(reps) * double(lat->edges().size());
  const double se = std::sqrt(0.3 * 0.7 / trials);
  CHECK(std::abs(double(open) / trials - 0.3) < 3 * se);
}

TEST_CASE("sampling is deterministic and lazy sampling matches") {
  const auto lat = Lattice::box(cfg(0.3, 3));
  const auto a = sample_configuration(lat, 7, 3);
  const auto b = sample_configuration(lat, 7, 3);
  CHECK(a.open_edges == b.open_edges);
  CHECK(a.open_edges != sample_configuration(lat, 7, 4).open_edges);
  Explorer ex(*lat);
  for (std::uint64_t r = 0; r < 50; ++r) {
    const auto lazy = sample_origin_cluster(*lat, ex, 7, r);
    const auto full = extract_origin_cluster(sample_configuration(lat, 7, r));
    CHECK(lazy.vertices == full.vertices);
    CHECK(lazy.touches_boundary == full.touches_boundary);
  }
}

TEST_CASE("origin cluster examples") {
  const auto empty = extract_origin_cluster(sample_configuration(Lattice::box(cfg(0.0, 2)), 1));
  CHECK(empty.size() == 1);
  CHECK_FALSE(empty.touches_boundary);

  const auto full_lat = Lattice::box(cfg(1.0, 1));
  const auto full = extract_origin_cluster(sample_configuration(full_lat, 1, 0, SubcriticalGate::disabled));
  CHECK(std::size_t(full.size()) == full_lat->site_count());
  CHECK(full.touches_boundary);

  const auto lat = Lattice::box(cfg(0.3, 6));
  BondConfiguration bc{lat, {edge_between(*lat, Eigen::Vector2i(0, 0), Eigen::Vector2i(1, 0)),
                             edge_between(*lat, Eigen::Vector2i(1, 0), Eigen::Vector2i(1, 1)),
                             edge_between(*lat, Eigen::Vector2i(5, 5), Eigen::Vector2i(5, 6))}};
  std::sort(bc.open_edges.begin(), bc.open_edges.end());
  const auto c = extract_origin_cluster(bc);
  CHECK(c.size() == 3);
  CHECK(c.contains(Eigen::Vector2i(1, 1)));
  CHECK_FALSE(c.contains(Eigen::Vector2i(5, 5)));
  CHECK_FALSE(c.touches_boundary);
  CHECK(c.open_edges.size() == 2);
}

TEST_CASE("cluster agrees with union-find on random configurations") {
  const auto lat = Lattice::box(cfg(0.45, 3));
  const auto g = oracle::rectangle({-3, -3}, {3, 3});
  for (std::uint64_t r = 0; r < 200; ++r) {
    const auto bc = sample_configuration(lat, 21, r);
    oracle::UnionFind uf(g.sites.size());
    for (auto e : bc.open_edges) {
      const auto [a, b] = lat->edge_sites(e);
      const auto sa = lat->site(a), sb = lat->site(b);
      uf.unite(g.find({sa(0), sa(1)}), g.find({sb(0), sb(1)}));
    }
    std::set<std::vector<int>> expect;
    for (std::size_t i = 0; i < g.sites.size(); ++i) {
      if (uf.find(int(i)) == uf.find(g.origin)) expect.insert(g.sites[i]);
    }
    const auto c = extract_origin_cluster(bc);
    std::set<std::vector<int>> got;
    for (Eigen::Index i = 0; i < c.size(); ++i) got.insert({c.vertices(0, i), c.vertices(1, i)});
    CHECK(got == expect);
    bool touches = false;
    for (const auto& s : expect) touches = touches || std::abs(s[0]) == 3 || std::abs(s[1]) == 3;
    CHECK(c.touches_boundary == touches);
  }
}

TEST_CASE("cluster metric view is rescaled") {
  const auto lat = Lattice::box(cfg(1.0, 1, 4));
  const auto c = extract_origin_cluster(sample_configuration(lat, 1, 0, SubcriticalGate::disabled));
  CHECK(c.point_cloud().points().cwiseAbs().maxCoeff() == doctest::Approx(0.25));
}
