#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "perclab/correlation_norm.hpp"
#include "perclab/errors.hpp"
#include "perclab/events.hpp"

using namespace perclab;

namespace {

Vector v2(double x, double y) { return Eigen::Vector2d(x, y); }

RateFit synthetic_fit(const Vector& e, double slope) {
  RateFit f;
  f.direction = e;
  f.slope = slope;
  return f;
}

NormModel circle_model(int directions) {
  std::vector<RateFit> fits;
  for (int j = 0; j < directions; ++j) {
    const double t = 2.0 * std::numbers::pi * j / directions;
    fits.push_back(synthetic_fit(v2(std::cos(t), std::sin(t)), 1.0));
  }
  return build_norm_model(fits);
}

std::vector<NormModel> gauges() {
  Eigen::Vector3d w(1.0, 2.0, 0.5);
  std::vector<NormModel> out{NormModel::euclidean(2), NormModel::l1(2),        NormModel::linf(2),
                             NormModel::l1(3),        NormModel::weighted_l2(w), circle_model(64),
                             circle_model(7)};
  std::vector<Vector> pts{Eigen::Vector3d(1, 0.2, 0.1), Eigen::Vector3d(0.5, 0.5, 0.4)};
  out.push_back(NormModel::from_boundary_points(pts));
  return out;
}

Vector random_vector(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> g;
  Vector u(d);
  for (int i = 0; i < d; ++i) u(i) = g(rng);
  return u;
}

double exact_pic(const Vector& u, int n, double p, const Site& lo, const Site& hi) {
  LatticeConfig c;
  c.dimension = 2;
  c.scale = n;
  c.p = p;
  return exact_event_probability(Lattice::rectangle(c, lo, hi), PointInCluster{u});
}

}  // namespace

TEST_CASE("gauge examples") {
  for (const auto& g : gauges()) CHECK(g(Vector::Zero(g.dimension())) == 0.0);
  CHECK(NormModel::euclidean(2)(v2(3, 4)) == 5.0);
  CHECK(NormModel::l1(2)(v2(3, -4)) == 7.0);
  CHECK(NormModel::linf(2)(v2(3, -4)) == 4.0);
  CHECK(circle_model(64)(v2(3, 4)) == doctest::Approx(5.0).epsilon(2e-3));
  CHECK_THROWS_AS(NormModel::euclidean(2)(Vector::Zero(3)), DomainError);
  CHECK_THROWS_AS(gauge_kind_from_string("l7"), DomainError);
}

TEST_CASE("hyperoctahedral group") {
  CHECK(hyperoctahedral_group(2).size() == 8);
  CHECK(hyperoctahedral_group(3).size() == 48);
  for (const auto& g : hyperoctahedral_group(3)) {
    CHECK((g.transpose() * g - Eigen::MatrixXi::Identity(3, 3)).cwiseAbs().maxCoeff() == 0);
  }
}

TEST_CASE("gauge axioms") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> t(-5.0, 5.0);
  for (const auto& g : gauges()) {
    const int d = g.dimension();
    const auto group = hyperoctahedral_group(d);
    const bool symmetric = g.kind() != GaugeKind::weighted_l2;
    const double c = g.euclidean_lower_constant();
    for (int i = 0; i < 1000; ++i) {
      const Vector u = random_vector(rng, d);
      const Vector v = random_vector(rng, d);
      const double nu = g(u);
      CHECK(nu > 0.0);
      CHECK(nu >= c * u.norm() * (1 - 1e-12));
      CHECK(g(u * 4.0) == 4.0 * nu);
      CHECK(g(-u) == nu);
      const double s = t(rng);
      CHECK(std::abs(g(s * u) - std::abs(s) * nu) <= 1e-14 * std::abs(s) * nu + 1e-300);
      CHECK(g(u + v) <= nu + g(v) + 1e-12 * (nu + g(v)));
      const Vector sg = g.subgradient(u);
      CHECK(sg.dot(u) == doctest::Approx(nu).epsilon(1e-10));
      CHECK(g(v) >= nu + sg.dot(v - u) - 1e-10 * (nu + g(v)));
      if (symmetric) {
        const auto& h = group[std::size_t(i) % group.size()];
        CHECK(g(h.cast<double>() * u) == nu);
      }
    }
  }
}

TEST_CASE("hull reconstruction") {
  // inscribed 64-gon: gauge error at most 1/cos(pi/64) - 1
  const auto model = circle_model(64);
  const double bound = 1.0 / std::cos(std::numbers::pi / 64.0) - 1.0;
  std::mt19937_64 rng(3);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Vector u = random_vector(rng, 2);
    worst = std::max(worst, std::abs(model(u) - u.norm()) / u.norm());
  }
  CHECK(worst <= bound + 1e-12);
  CHECK(worst < 0.005);

  // slope = l1 norm along axes and diagonals reproduces the cross-polytope
  std::vector<RateFit> fits;
  for (int j = 0; j < 8; ++j) {
    const double a = std::numbers::pi / 4.0 * j;
    const Vector e = v2(std::cos(a), std::sin(a));
    fits.push_back(synthetic_fit(e, e.cwiseAbs().sum()));
  }
  const auto cross = build_norm_model(fits);
  const auto l1 = NormModel::l1(2);
  for (int i = 0; i < 200; ++i) {
    const Vector u = random_vector(rng, 2);
    CHECK(cross(u) == doctest::Approx(l1(u)).epsilon(1e-12));
  }
  CHECK(cross.hull_vertices().cols() == 4);
}

TEST_CASE("norm model guards") {
  CHECK_THROWS_AS(build_norm_model(std::vector<RateFit>{}), DomainError);
  CHECK_THROWS_AS(build_norm_model(std::vector<RateFit>{synthetic_fit(v2(1, 0), 1.0)}), DomainError);
  CHECK_THROWS_AS(build_norm_model(std::vector<RateFit>{synthetic_fit(v2(1, 0), 1.0), synthetic_fit(v2(0, 1), -1.0)}),
                  DomainError);
  // symmetry closure makes a single axis direction span the plane
  CHECK_NOTHROW(build_norm_model(std::vector<RateFit>{synthetic_fit(v2(1, 0), 1.0), synthetic_fit(v2(0, 1), 2.0)}));
  LatticeConfig c;
  c.p = 0.2;
  const std::vector<int> scales{1, 2, 3};
  CHECK_THROWS_AS(measure_direction(v2(0, 0), scales, c, 100, 1), DomainError);
  CHECK_THROWS_AS(measure_direction(v2(1, 0), std::vector<int>{1, 2, 2}, c, 100, 1), DomainError);
  c.p = 0.6;
  CHECK_THROWS_AS(measure_direction(v2(1, 0), scales, c, 100, 1), SubcriticalityViolation);
}

TEST_CASE("rate fit on a forced path is exact") {
  for (double p : {0.1, 0.3, 0.45}) {
    std::vector<ScaleSample> samples;
    for (int n = 1; n <= 3; ++n) {
      const double prob = exact_pic(v2(1, 0), n, p, Site::Zero(2), Site(Eigen::Vector2i(n, 0)));
      CHECK(prob == doctest::Approx(std::pow(p, n)).epsilon(1e-14));
      samples.push_back({n, -std::log(prob), 0.0, 0.0, 0, 1, 0.0});
    }
    const auto fit = fit_rate(v2(1, 0), samples);
    CHECK(fit.slope == doctest::Approx(-std::log(p)).epsilon(1e-12));
    CHECK(std::abs(fit.intercept) < 1e-12);
    for (double r : fit.residuals) CHECK(std::abs(r) < 1e-12);
  }
}

TEST_CASE("rate fit matches a hand regression on exact probabilities") {
  double previous = std::numeric_limits<double>::infinity();
  for (double p : {0.1, 0.2, 0.3}) {
    std::vector<ScaleSample> samples;
    std::vector<double> x, y;
    for (int n = 1; n <= 3; ++n) {
      const double prob = exact_pic(v2(1, 0), n, p, Site(Eigen::Vector2i(0, -1)), Site(Eigen::Vector2i(n, 1)));
      samples.push_back({n, -std::log(prob), 0.0, 0.0, 0, 1, 0.0});
      x.push_back(n);
      y.push_back(-std::log(prob));
    }
    const double mx = (x[0] + x[1] + x[2]) / 3, my = (y[0] + y[1] + y[2]) / 3;
    double sxy = 0, sxx = 0;
    for (int i = 0; i < 3; ++i) {
      sxy += (x[i] - mx) * (y[i] - my);
      sxx += (x[i] - mx) * (x[i] - mx);
    }
    const auto fit = fit_rate(v2(1, 0), samples, FitWeighting::uniform);
    CHECK(fit.slope == doctest::Approx(sxy / sxx).epsilon(1e-12));
    CHECK(fit.intercept == doctest::Approx(my - sxy / sxx * mx).epsilon(1e-12));
    CHECK(fit.slope < previous);
    previous = fit.slope;
  }
  std::vector<ScaleSample> two{{1, 1.0, 0.9, 1.1, 10, 5, 0}, {2, 2.0, 1.9, 2.1, 10, 5, 0}};
  CHECK_THROWS_AS(fit_rate(v2(1, 0), two), ComputationFailure);
  two.push_back({3, 3.0, 2.9, 3.1, 10, 0, 0});  // zero hits is dropped
  CHECK_THROWS_AS(fit_rate(v2(1, 0), two), ComputationFailure);
}

TEST_CASE("measured direction is reproducible and positive") {
  LatticeConfig c;
  c.p = 0.3;
  const std::vector<int> scales{1, 2, 3};
  const auto a = measure_direction(v2(1, 0), scales, c, 20000, 9, 1);
  const auto b = measure_direction(v2(1, 0), scales, c, 20000, 9, 4);
  CHECK(a.slope == b.slope);
  CHECK(a.slope > 0.0);
  for (const auto& s : a.per_scale) CHECK(s.ci_low <= s.neg_log_p);
  const auto dirs = default_directions(2);
  CHECK(dirs.size() == 32);
  CHECK(default_directions(3).size() == 3);
}

TEST_CASE("finite-scale superadditivity") {
  for (double p : {0.1, 0.3, 0.45}) {
    LatticeConfig c;
    c.p = p;
    const auto model = NormModel::euclidean(2);
    const auto forced = norm_upper_bound_check(model, v2(1, 0), 1, c, Site::Zero(2), Site(Eigen::Vector2i(1, 0)));
    CHECK(forced.holds);
    CHECK(forced.rate_n == doctest::Approx(-std::log(p)).epsilon(1e-14));
    CHECK(forced.rate_2n == doctest::Approx(-std::log(p)).epsilon(1e-14));
    for (const Vector& u : {v2(1, 0), v2(0, 1), v2(1, 1)}) {
      const auto r = norm_upper_bound_check(model, u, 1, c, Site::Zero(2), Site(Eigen::Vector2i(1, 1)));
      CHECK(r.holds);
      CHECK_FALSE(r.vacuous);
      // independent enumeration of both sides
      const auto g1 = oracle::rectangle({0, 0}, {1, 1});
      const auto g2 = oracle::rectangle({0, 0}, {2, 2});
      const int t1 = g1.find({int(u(0)), int(u(1))});
      const int t2 = g2.find({2 * int(u(0)), 2 * int(u(1))});
      const double p1 = oracle::probability(g1, p, [&](std::uint64_t, oracle::UnionFind& uf) {
        return uf.find(g1.origin) == uf.find(t1);
      });
      const double p2 = oracle::probability(g2, p, [&](std::uint64_t, oracle::UnionFind& uf) {
        return uf.find(g2.origin) == uf.find(t2);
      });
      CHECK(r.probability_n == doctest::Approx(p1).epsilon(1e-12));
      CHECK(r.probability_2n == doctest::Approx(p2).epsilon(1e-12));
    }
  }
  LatticeConfig zero;
  zero.p = 0.0;
  const auto v = norm_upper_bound_check(NormModel::euclidean(2), v2(1, 0), 1, zero, Site::Zero(2),
                                        Site(Eigen::Vector2i(1, 1)));
  CHECK(v.vacuous);
  CHECK(v.holds);
}
