#include "perclab/serialization.hpp"

#include <fmt/format.h>
#include <openssl/evp.h>

#include <cmath>
#include <limits>

#include "perclab/errors.hpp"

namespace perclab {

Json vector_to_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Vector vector_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) throw DomainError("expected a nonempty number array");
  Vector v(Eigen::Index(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw DomainError("expected a number");
    v(Eigen::Index(i)) = j[i].get<double>();
  }
  return v;
}

namespace {

void require_version(const Json& j, const char* version) {
  if (!j.is_object() || !j.contains("version") || j["version"] != version) {
    throw DomainError(fmt::format("expected a \"{}\" document", version));
  }
}

Json matrix_columns(const Matrix& m) {
  Json a = Json::array();
  for (Eigen::Index c = 0; c < m.cols(); ++c) a.push_back(vector_to_json(m.col(c)));
  return a;
}

}  // namespace

Json to_json(const PolygonalSet& set) {
  Json segs = Json::array();
  for (const auto& s : set.segments()) segs.push_back(Json::array({vector_to_json(s.a), vector_to_json(s.b)}));
  return Json{{"version", "omega-set/1"}, {"dimension", set.dimension()}, {"segments", segs}};
}

PolygonalSet polygonal_set_from_json(const Json& j) {
  require_version(j, "omega-set/1");
  const int d = j.at("dimension").get<int>();
  std::vector<Segment> segs;
  for (const auto& s : j.at("segments")) {
    if (!s.is_array() || s.size() != 2) throw DomainError("a segment is a pair of points");
    Segment seg{vector_from_json(s[0]), vector_from_json(s[1])};
    if (seg.a.size() != d || seg.b.size() != d) throw DomainError("segment dimension mismatch");
    segs.push_back(std::move(seg));
  }
  if (segs.empty()) return PolygonalSet::origin(d);
  return PolygonalSet(d, std::move(segs));
}

Json to_json(const RateFit& fit) {
  Json rows = Json::array();
  for (const auto& s : fit.per_scale) {
    rows.push_back({{"scale", s.scale},
                    {"neg_log_p", format_number(s.neg_log_p)},
                    {"ci_low", format_number(s.ci_low)},
                    {"ci_high", format_number(s.ci_high)},
                    {"replicates", s.replicates},
                    {"hits", s.hits},
                    {"boundary_touch_fraction", s.boundary_touch_fraction}});
  }
  return Json{{"direction", vector_to_json(fit.direction)},
              {"slope", fit.slope},
              {"intercept", fit.intercept},
              {"scales", fit.scales},
              {"residuals", fit.residuals},
              {"p", fit.p},
              {"seed", fit.seed},
              {"per_scale", rows}};
}

namespace {

double number_from_json(const Json& j) {
  if (j.is_number()) return j.get<double>();
  const auto s = j.get<std::string>();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  return std::stod(s);
}

}  // namespace

RateFit rate_fit_from_json(const Json& j) {
  RateFit f;
  f.direction = vector_from_json(j.at("direction"));
  f.slope = j.at("slope").get<double>();
  f.intercept = j.at("intercept").get<double>();
  f.scales = j.at("scales").get<std::vector<int>>();
  f.residuals = j.at("residuals").get<std::vector<double>>();
  f.p = j.at("p").get<double>();
  f.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& r : j.at("per_scale")) {
    ScaleSample s;
    s.scale = r.at("scale").get<int>();
    s.neg_log_p = number_from_json(r.at("neg_log_p"));
    s.ci_low = number_from_json(r.at("ci_low"));
    s.ci_high = number_from_json(r.at("ci_high"));
    s.replicates = r.at("replicates").get<std::uint64_t>();
    s.hits = r.at("hits").get<std::uint64_t>();
    s.boundary_touch_fraction = r.at("boundary_touch_fraction").get<double>();
    f.per_scale.push_back(s);
  }
  return f;
}

namespace {

Json gauge_json(const NormModel& model) {
  Json j{{"version", "corr-norm/1"}, {"dimension", model.dimension()}, {"gauge", to_string(model.kind())}};
  if (model.kind() == GaugeKind::weighted_l2) j["weights"] = vector_to_json(model.weights());
  if (model.kind() == GaugeKind::hull) j["hull_vertices"] = matrix_columns(model.hull_vertices());
  return j;
}

}  // namespace

Json to_json(const NormModel& model) {
  Json j = gauge_json(model);
  Json samples = Json::array();
  for (const auto& b : model.boundary_samples) {
    samples.push_back({{"direction", vector_to_json(b.direction)}, {"value", b.value}});
  }
  Json fits = Json::array();
  for (const auto& f : model.fits) fits.push_back(to_json(f));
  j["provenance"] = {{"boundary_samples", samples}, {"fits", fits}};
  return j;
}

NormModel norm_model_from_json(const Json& j) {
  require_version(j, "corr-norm/1");
  const int d = j.at("dimension").get<int>();
  const auto kind = gauge_kind_from_string(j.at("gauge").get<std::string>());
  NormModel model = [&] {
    switch (kind) {
      case GaugeKind::euclidean: return NormModel::euclidean(d);
      case GaugeKind::l1: return NormModel::l1(d);
      case GaugeKind::linf: return NormModel::linf(d);
      case GaugeKind::weighted_l2: return NormModel::weighted_l2(vector_from_json(j.at("weights")));
      case GaugeKind::hull: break;
    }
    std::vector<Vector> pts;
    for (const auto& v : j.at("hull_vertices")) pts.push_back(vector_from_json(v));
    return NormModel::from_boundary_points(pts);
  }();
  if (model.dimension() != d) throw DomainError("gauge dimension mismatch");
  if (j.contains("provenance")) {
    const auto& prov = j["provenance"];
    for (const auto& b : prov.value("boundary_samples", Json::array())) {
      model.boundary_samples.push_back({vector_from_json(b.at("direction")), b.at("value").get<double>()});
    }
    for (const auto& f : prov.value("fits", Json::array())) model.fits.push_back(rate_fit_from_json(f));
  }
  return model;
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw ComputationFailure("SHA-256 failed");
  }
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

std::string norm_fingerprint(const NormModel& model) { return sha256_hex(gauge_json(model).dump()); }

Json to_json(const SteinerTree& tree, const std::string& gauge_fingerprint) {
  Json edges = Json::array();
  for (const auto& [u, v] : tree.topology.edges) edges.push_back(Json::array({u, v}));
  return Json{{"version", "steiner/1"},
              {"set", to_json(tree.as_set())},
              {"metadata",
               {{"terminals", matrix_columns(tree.terminals)},
                {"steiner_points", matrix_columns(tree.steiner)},
                {"edges", edges},
                {"topology", tree.topology.canonical_form()},
                {"source_topology", tree.source_topology.canonical_form()},
                {"length", tree.total_length},
                {"lower_bound", tree.lower_bound},
                {"converged", tree.converged},
                {"iterations", tree.iterations},
                {"gauge_fingerprint", gauge_fingerprint}}}};
}

Json to_json(const SteinerSolution& solution, const NormModel& norm) {
  const auto fp = norm_fingerprint(norm);
  Json trees = Json::array();
  for (const auto& t : solution.minimal) trees.push_back(to_json(t, fp));
  return Json{{"version", "steiner/1"},
              {"minimum_length", solution.minimum_length},
              {"tied_trees", solution.minimal.size()},
              {"topologies", solution.per_topology.size()},
              {"unconverged", solution.unconverged},
              {"gauge_fingerprint", fp},
              {"trees", trees}};
}

Json to_json(const BondConfiguration& configuration, const Cluster& cluster) {
  Json verts = Json::array();
  for (Eigen::Index c = 0; c < cluster.vertices.cols(); ++c) {
    Json v = Json::array();
    for (Eigen::Index k = 0; k < cluster.vertices.rows(); ++k) v.push_back(cluster.vertices(k, c));
    verts.push_back(v);
  }
  return Json{{"scale", cluster.scale},
              {"open_edges", configuration.edge_labels()},
              {"cluster",
               {{"vertices", verts}, {"open_edges", cluster.open_edges}, {"touches_boundary", cluster.touches_boundary}}}};
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return fmt::format("{}", x);
}

namespace {

constexpr const char* kRateHeader =
    "scale_n,replicates,hits,p_hat,ci_low,ci_high,neg_log_p_over_n,lambda_ref,boundary_touch_frac";

}  // namespace

std::string rate_csv(const RateEstimate& estimate) {
  std::string out = std::string(kRateHeader) + "\n";
  for (const auto& r : estimate.rows) {
    const auto& e = r.estimate;
    out += fmt::format("{},{},{},{},{},{},{},{},{}\n", r.n, e.replicates, e.hits, format_number(e.value),
                       format_number(e.ci_low), format_number(e.ci_high), format_number(r.rate),
                       format_number(estimate.lambda_reference), format_number(e.boundary_touch_fraction()));
  }
  return out;
}

std::string concentration_csv(const ConcentrationResult& result) {
  std::string out = std::string(kRateHeader) + ",attempts,acceptances,inconclusive,gap_upper_bound\n";
  const double gap = result.gap_upper_bound.value_or(std::numeric_limits<double>::quiet_NaN());
  for (const auto& r : result.per_scale) {
    const auto& f = r.failure;
    const double rate = r.acceptances > 0 && f.value > 0 ? -std::log(f.value) / double(r.n)
                                                         : std::numeric_limits<double>::infinity();
    const double touch = r.acceptances ? double(r.boundary_touches) / double(r.acceptances) : 0.0;
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{}\n", r.n, r.acceptances, r.failures,
                       format_number(f.value), format_number(f.ci_low), format_number(f.ci_high), format_number(rate),
                       format_number(result.solution.minimum_length), format_number(touch), r.attempts,
                       r.acceptances, r.inconclusive ? 1 : 0, format_number(gap));
  }
  return out;
}

std::string fit_csv(const std::vector<RateFit>& fits) {
  std::string out = "direction," + std::string(kRateHeader) + "\n";
  for (const auto& fit : fits) {
    std::vector<std::string> coords;
    for (Eigen::Index i = 0; i < fit.direction.size(); ++i) coords.push_back(format_number(fit.direction(i)));
    const auto dir = fmt::format("{}", fmt::join(coords, ";"));
    for (const auto& s : fit.per_scale) {
      const double p = s.replicates ? double(s.hits) / double(s.replicates) : 0.0;
      out += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", dir, s.scale, s.replicates, s.hits, format_number(p),
                         format_number(std::exp(-s.ci_high)), format_number(std::exp(-s.ci_low)),
                         format_number(s.neg_log_p / double(s.scale)), format_number(fit.slope),
                         format_number(s.boundary_touch_fraction));
    }
  }
  return out;
}

}  // namespace perclab
