#include "perclab/selftest.hpp"

#include <fmt/format.h>

#include <cmath>
#include <functional>

#include "perclab/config.hpp"
#include "perclab/correlation_norm.hpp"
#include "perclab/errors.hpp"
#include "perclab/events.hpp"
#include "perclab/geometry.hpp"
#include "perclab/harness.hpp"
#include "perclab/lattice.hpp"
#include "perclab/steiner.hpp"

namespace perclab {

namespace {

Vector v2(double x, double y) { return Eigen::Vector2d(x, y); }

LatticeConfig lattice2(double p, int radius = 1, int scale = 1) {
  LatticeConfig c;
  c.dimension = 2;
  c.p = p;
  c.box_radius = radius;
  c.scale = scale;
  return c;
}

bool near(double a, double b, double tol = 1e-12) { return std::abs(a - b) <= tol; }

template <class E, class F>
bool throws(F&& f) {
  try {
    f();
  } catch (const E&) {
    return true;
  }
  return false;
}

}  // namespace

std::vector<SelftestCase> run_selftest() {
  std::vector<SelftestCase> cases;
  auto check = [&](const char* module, const char* name, const std::function<bool()>& body) {
    SelftestCase c{module, name, false, {}};
    try {
      c.passed = body();
    } catch (const std::exception& e) {
      c.detail = e.what();
    }
    cases.push_back(std::move(c));
  };

  // percolation_core
  check("percolation_core", "round origin", [] { return round_to_lattice(v2(0, 0), 7) == v2(0, 0); });
  check("percolation_core", "round nearest", [] { return round_to_lattice(v2(0.26, -0.9), 2) == v2(0.5, -1.0); });
  check("percolation_core", "round tie up", [] { return round_to_lattice(v2(0.25, 0.25), 2) == v2(0.5, 0.5); });
  check("percolation_core", "p=0 closed", [] {
    return sample_configuration(Lattice::box(lattice2(0.0, 3)), 17).open_edges.empty();
  });
  check("percolation_core", "p=1 open", [] {
    const auto lat = Lattice::box(lattice2(1.0, 2));
    return sample_configuration(lat, 17, 0, SubcriticalGate::disabled).open_edges.size() == lat->edges().size();
  });
  check("percolation_core", "isolated origin", [] {
    const auto c = extract_origin_cluster(sample_configuration(Lattice::box(lattice2(0.0, 2)), 1));
    return c.size() == 1 && !c.touches_boundary;
  });
  check("percolation_core", "full box", [] {
    const auto lat = Lattice::box(lattice2(1.0, 1));
    const auto c = extract_origin_cluster(sample_configuration(lat, 1, 0, SubcriticalGate::disabled));
    return std::size_t(c.size()) == lat->site_count() && c.touches_boundary;
  });
  check("percolation_core", "origin event", [] {
    return exact_event_probability(Lattice::box(lattice2(0.3)), PointInCluster{v2(0, 0)}) == 1.0;
  });
  check("percolation_core", "single edge", [] {
    const auto lat = Lattice::rectangle(lattice2(0.5), Site::Zero(2), Eigen::Vector2i(1, 0));
    return near(exact_event_probability(lat, PointInCluster{v2(1, 0)}), 0.5);
  });
  check("percolation_core", "mc origin", [] {
    const auto e = estimate_event_probability(Lattice::box(lattice2(0.3)), PointInCluster{v2(0, 0)}, 100, 5);
    return e.value == 1.0 && e.ci_low < 1.0;
  });
  check("percolation_core", "mc p=0", [] {
    return estimate_event_probability(Lattice::box(lattice2(0.0)), PointInCluster{v2(1, 0)}, 100, 5).value == 0.0;
  });
  check("percolation_core", "subcritical gate", [] {
    return throws<SubcriticalityViolation>([] { sample_configuration(Lattice::box(lattice2(0.6)), 1); });
  });

  // set_geometry
  const auto seg = PolygonalSet(2, {{v2(0, 0), v2(1, 0)}});
  check("set_geometry", "identity", [&] { return hausdorff_distance(seg, seg) == 0.0; });
  check("set_geometry", "point pair", [] {
    return near(hausdorff_distance(PointCloud::from_points(std::vector<Vector>{v2(0, 0)}),
                                   PointCloud::from_points(std::vector<Vector>{v2(3, 4)})),
                5.0);
  });
  check("set_geometry", "segment vs endpoints", [&] {
    return near(hausdorff_distance(seg, PointCloud::from_points(std::vector<Vector>{v2(0, 0), v2(1, 0)})), 0.5, 1e-9);
  });
  const auto origin = PolygonalSet::origin(2);
  check("set_geometry", "neighborhood inside", [&] { return epsilon_neighborhood_contains(origin, 1.0, v2(0.999, 0)); });
  check("set_geometry", "neighborhood strict", [&] { return !epsilon_neighborhood_contains(origin, 1.0, v2(1, 0)); });
  check("set_geometry", "neighborhood segment", [] {
    return epsilon_neighborhood_contains(PolygonalSet(2, {{v2(0, 0), v2(2, 0)}}), 0.5, v2(1, 0.4));
  });
  const auto euclid = NormModel::euclidean(2);
  check("set_geometry", "length of point", [&] { return norm_length(origin, euclid) == 0.0; });
  check("set_geometry", "length of segment", [&] { return near(norm_length(seg, NormModel::l1(2)), 1.0); });
  check("set_geometry", "length additive", [&] {
    return near(norm_length(PolygonalSet(2, {{v2(0, 0), v2(1, 0)}, {v2(0, 0), v2(0, 1)}}), euclid), 2.0);
  });
  check("set_geometry", "simplify collinear", [] {
    std::vector<Vector> pts;
    for (int i = 0; i < 1000; ++i) pts.push_back(v2(i / 999.0, 0));
    const auto s = simplify(PolygonalSet::polyline(pts), 0.01);
    return s.segments().size() == 1;
  });

  // correlation_norm
  check("correlation_norm", "zero direction", [] {
    std::vector<int> scales{1, 2, 3};
    return throws<DomainError>([&] { measure_direction(v2(0, 0), scales, lattice2(0.2), 10, 1); });
  });
  check("correlation_norm", "rank guard", [] {
    RateFit f;
    f.direction = v2(1, 0);
    f.slope = 1.0;
    return throws<DomainError>([&] { build_norm_model(std::vector<RateFit>{f}); });
  });
  check("correlation_norm", "gauge at origin", [&] { return euclid(v2(0, 0)) == 0.0; });
  check("correlation_norm", "homogeneity", [] {
    const auto m = NormModel::from_boundary_points(std::vector<Vector>{v2(1, 0), v2(0.8, 0.8)});
    return near(m(v2(0.6, 1.4)), 0.5 * m(v2(1.2, 2.8)));
  });
  check("correlation_norm", "known norm", [&] { return near(euclid(v2(3, 4)), 5.0); });
  check("correlation_norm", "vacuous check", [&] {
    auto c = lattice2(0.0);
    const auto r = norm_upper_bound_check(euclid, v2(1, 0), 1, c, Site::Zero(2), Eigen::Vector2i(1, 1));
    return r.vacuous && r.probability_n == 0.0 && r.probability_2n == 0.0;
  });

  // steiner_solver
  check("steiner_solver", "two terminals", [] { return enumerate_topologies(2).size() == 1; });
  check("steiner_solver", "segment tree", [] {
    const auto sol = solve_steiner(std::vector<Vector>{v2(2, 1)}, NormModel::l1(2));
    return sol.minimal.size() == 1 && near(sol.minimum_length, 3.0, 1e-9);
  });
  check("steiner_solver", "collinear collapse", [] {
    const auto sol = solve_steiner(std::vector<Vector>{v2(-1, 0), v2(1, 0)}, NormModel::linf(2));
    for (const auto& t : sol.minimal) {
      if (t.topology.steiner_points != 0) return false;
    }
    return near(sol.minimum_length, 2.0, 1e-6);
  });

  // ldp_harness
  check("ldp_harness", "empty conditioning", [] {
    const auto s = sample_conditioned({}, 1, lattice2(0.3, 2), 50, 3);
    return s.report.acceptances == 50;
  });
  check("ldp_harness", "impossible conditioning", [] {
    const auto s = sample_conditioned(std::vector<Vector>{v2(1, 0)}, 1, lattice2(0.0, 2), 50, 3);
    return s.report.acceptances == 0 && s.clusters.empty();
  });
  check("ldp_harness", "path skeleton", [] {
    Cluster c;
    c.vertices = Eigen::MatrixXi(2, 3);
    c.vertices << 0, 1, 2, 0, 0, 0;
    c.open_edges = {{0, 1}, {1, 2}};
    const auto sk = extract_skeleton(c, std::vector<Vector>{v2(2, 0)});
    return sk.branch_vertices.empty() && sk.edge_count == 2;
  });
  check("ldp_harness", "plus skeleton", [] {
    Cluster c;
    c.vertices = Eigen::MatrixXi(2, 5);
    c.vertices << 0, 1, -1, 0, 0, 0, 0, 0, 1, -1;
    c.open_edges = {{0, 1}, {0, 2}, {0, 3}, {0, 4}};
    // origin is the center; mark three arm tips
    const auto sk = extract_skeleton(c, std::vector<Vector>{v2(1, 0), v2(-1, 0), v2(0, 1)});
    return sk.branch_vertices.size() == 1 && sk.edge_count == 3;
  });
  check("ldp_harness", "vacuous concentration", [] {
    std::vector<int> scales{1, 2};
    std::vector<std::uint64_t> budgets{2000, 2000};
    const auto r = steiner_concentration(std::vector<Vector>{v2(1, 0)}, 100.0, scales, budgets, lattice2(0.3),
                                         NormModel::euclidean(2));
    for (const auto& s : r.per_scale) {
      if (s.failures != 0) return false;
    }
    return true;
  });

  // cli_runner
  check("cli_runner", "empty config", [] {
    const auto v = validate_config({});
    return v.ok() && v.applied_defaults.size() == config_keys().size();
  });
  check("cli_runner", "p_c gate", [] {
    RawConfig raw;
    raw["lattice"]["p"] = "0.7";
    const auto v = validate_config(raw);
    return !v.ok() && v.infeasible_only();
  });
  check("cli_runner", "idempotent", [] {
    RawConfig raw;
    raw["lattice"]["p"] = "0.30";
    const auto once = validate_config(raw);
    const auto twice = validate_config(parse_ini(once.ini()));
    return once.ini() == twice.ini();
  });
  return cases;
}

}  // namespace perclab
