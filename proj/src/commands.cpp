#include "perclab/commands.hpp"

#include <fmt/format.h>

#include <boost/algorithm/string.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

#include "perclab/correlation_norm.hpp"
#include "perclab/errors.hpp"
#include "perclab/events.hpp"
#include "perclab/harness.hpp"
#include "perclab/selftest.hpp"

namespace perclab {

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"sample",  "oracle",       "estimate-norm", "build-norm", "steiner",
                                                 "ldp-rate", "conditioned", "concentration", "selftest"};
  return names;
}

Vector parse_point(const std::string& text, int dimension) {
  std::vector<std::string> parts;
  const auto trimmed = boost::algorithm::trim_copy(text);
  boost::algorithm::split(parts, trimmed, boost::is_any_of(","));
  if (int(parts.size()) != dimension) {
    throw DomainError(fmt::format("point '{}' needs {} coordinates", text, dimension));
  }
  Vector v(dimension);
  for (int i = 0; i < dimension; ++i) {
    std::size_t pos = 0;
    const auto s = boost::algorithm::trim_copy(parts[std::size_t(i)]);
    try {
      v(i) = std::stod(s, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (s.empty() || pos != s.size() || !std::isfinite(v(i))) throw DomainError(fmt::format("bad coordinate '{}'", s));
  }
  return v;
}

std::vector<Vector> parse_points(const std::string& text, int dimension) {
  std::vector<std::string> parts;
  const auto trimmed = boost::algorithm::trim_copy(text);
  if (trimmed.empty()) return {};
  boost::algorithm::split(parts, trimmed, boost::is_any_of("; \t"), boost::token_compress_on);
  std::vector<Vector> out;
  for (const auto& p : parts) {
    if (!p.empty()) out.push_back(parse_point(p, dimension));
  }
  return out;
}

namespace {

bool analytic_gauge(const std::string& spec) {
  return spec == "euclidean" || spec == "l1" || spec == "linf" || boost::starts_with(spec, "weighted-l2:");
}

bool inline_set(const std::string& spec, int dimension) {
  if (spec == "origin") return true;
  try {
    parse_points(spec, dimension);
    return true;
  } catch (const DomainError&) {
    return false;
  }
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError(fmt::format("cannot open input file '{}'", path));
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw DomainError(fmt::format("'{}' is not valid JSON: {}", path, e.what()));
  }
}

bool uses_gauge(const std::string& command) {
  return command == "steiner" || command == "ldp-rate" || command == "concentration";
}

bool uses_set(const std::string& command) { return command == "ldp-rate" || command == "oracle"; }

}  // namespace

void embed_inputs(const std::string& command, const Settings& settings, Json& args) {
  if (uses_gauge(command) && !args.contains("norm_model") && !analytic_gauge(settings.norm_model)) {
    args["norm_model"] = read_json_file(settings.norm_model);
  }
  if (uses_set(command) && !args.contains("set") && !inline_set(settings.set, settings.lattice.dimension)) {
    args["set"] = read_json_file(settings.set);
  }
  if (args.contains("fits_path")) {
    args["fits"] = read_json_file(args["fits_path"].get<std::string>());
    args.erase("fits_path");
  }
}

NormModel resolve_gauge(const Settings& settings, const Json& args) {
  const int d = settings.lattice.dimension;
  if (args.contains("norm_model")) {
    auto model = norm_model_from_json(args["norm_model"]);
    if (model.dimension() != d) throw DomainError("gauge dimension differs from lattice.dimension");
    return model;
  }
  const auto& spec = settings.norm_model;
  if (spec == "euclidean") return NormModel::euclidean(d);
  if (spec == "l1") return NormModel::l1(d);
  if (spec == "linf") return NormModel::linf(d);
  if (boost::starts_with(spec, "weighted-l2:")) return NormModel::weighted_l2(parse_point(spec.substr(12), d));
  throw DomainError(fmt::format("norm.model '{}' is neither an analytic gauge nor a loaded file", spec));
}

PolygonalSet resolve_set(const Settings& settings, const Json& args) {
  const int d = settings.lattice.dimension;
  if (args.contains("set")) {
    auto set = polygonal_set_from_json(args["set"]);
    if (set.dimension() != d) throw DomainError("set dimension differs from lattice.dimension");
    return set;
  }
  if (settings.set == "origin") return PolygonalSet::origin(d);
  auto pts = parse_points(settings.set, d);
  if (pts.empty() || !pts.front().isZero()) pts.insert(pts.begin(), Vector::Zero(d));
  if (pts.size() == 1) return PolygonalSet::origin(d);
  return PolygonalSet::polyline(pts);
}

namespace {

std::vector<Vector> json_points(const Json& j, int d) {
  std::vector<Vector> out;
  for (const auto& p : j) {
    auto v = vector_from_json(p);
    if (v.size() != d) throw DomainError("point dimension differs from lattice.dimension");
    out.push_back(std::move(v));
  }
  return out;
}

double reach_of(std::span<const Vector> pts) {
  double r = 0.0;
  for (const auto& p : pts) r = std::max(r, p.cwiseAbs().maxCoeff());
  return r;
}

LatticeConfig base_lattice(const Settings& s) { return s.lattice; }

CommandOutput cmd_sample(const Settings& s, const Json& args) {
  auto c = base_lattice(s);
  if (s.auto_box_radius) c.box_radius = std::max(1, 2 * c.scale);
  const auto replicate = args.value("replicate", std::uint64_t(0));
  const auto lattice = Lattice::box(c);
  const auto bc = sample_configuration(lattice, s.seed, replicate);
  const auto cluster = extract_origin_cluster(bc);
  CommandOutput out;
  out.files.emplace_back("sample.json", to_json(bc, cluster).dump(2) + "\n");
  out.summary = fmt::format("open_edges {}\ncluster_size {}\ntouches_boundary {}\n", bc.open_edges.size(),
                            cluster.size(), cluster.touches_boundary);
  return out;
}

CommandOutput cmd_oracle(const Settings& s, const Json& args) {
  auto c = base_lattice(s);
  const int d = c.dimension;
  const int n = c.scale;
  const auto name = args.value("event", std::string("point-in-cluster"));
  const auto targets = json_points(args.value("targets", Json::array()), d);
  const double eps = args.value("epsilon", s.epsilon);

  EventSpec event;
  double reach = reach_of(targets);
  double margin = 0.0;
  if (name == "point-in-cluster") {
    if (targets.size() != 1) throw DomainError("point-in-cluster needs exactly one target");
    event = PointInCluster{targets[0]};
  } else if (name == "points-in-cluster") {
    if (targets.empty()) throw DomainError("points-in-cluster needs targets");
    event = PointsInCluster{targets};
  } else if (name == "hausdorff-ball") {
    auto set = resolve_set(s, args);
    reach = std::max(reach, reach_of(set.vertices()));
    margin = eps;
    event = HausdorffBall{std::move(set), eps};
  } else if (name == "constrained-connection") {
    if (targets.empty() || targets.size() > 2) throw DomainError("constrained-connection needs one or two targets");
    const Vector from = targets.size() == 2 ? targets[0] : Vector::Zero(d);
    const Vector to = targets.back();
    auto corridor = PolygonalSet::unchecked(d, {{from, to}});
    reach = std::max(reach, reach_of(std::vector<Vector>{from, to}));
    margin = eps;
    event = ConstrainedConnection{from, to, std::move(corridor), eps};
  } else if (name == "annulus-crossing") {
    auto set = resolve_set(s, args);
    const double inner = args.value("inner", eps / 4.0);
    const double outer = args.value("outer", eps / 2.0);
    reach = std::max(reach, reach_of(set.vertices()));
    margin = outer;
    event = AnnulusCrossing{std::move(set), inner, outer};
  } else {
    throw DomainError(fmt::format("unknown event '{}'", name));
  }

  LatticePtr lattice;
  if (args.value("unit_square", false)) {
    lattice = Lattice::rectangle(c, Site::Zero(d), Site::Ones(d));
  } else {
    if (s.auto_box_radius) c.box_radius = std::max(1, int(std::ceil(double(n) * (reach + margin))));
    lattice = Lattice::box(c);
  }
  const auto counts = enumerate_event(CompiledEvent(lattice, event), s.enumeration_cap);
  const double exact = counts.probability(c.p);

  Json doc{{"event", event_name(event)},
           {"p", c.p},
           {"scale", n},
           {"edges", counts.edges},
           {"exact", exact},
           {"counts_by_open_edges", counts.by_open_count}};
  const int precision = args.value("precision", 4);
  std::string summary = fmt::format("{:.{}f}\n", exact, precision);
  if (args.value("monte_carlo", false)) {
    const auto est = estimate_event_probability(lattice, event, s.replicates, s.seed, s.effective_workers(), s.z());
    doc["monte_carlo"] = {{"replicates", est.replicates}, {"hits", est.hits}, {"p_hat", est.value},
                          {"ci_low", est.ci_low},         {"ci_high", est.ci_high}};
    summary += fmt::format("monte_carlo {:.{}f} [{:.{}f}, {:.{}f}]\n", est.value, precision, est.ci_low, precision,
                           est.ci_high, precision);
  }
  CommandOutput out;
  out.files.emplace_back("oracle.json", doc.dump(2) + "\n");
  out.summary = summary;
  return out;
}

std::vector<Vector> directions_of(const Settings& s) {
  if (s.norm_directions == "default") return default_directions(s.lattice.dimension);
  auto dirs = parse_points(s.norm_directions, s.lattice.dimension);
  for (auto& v : dirs) {
    if (v.isZero()) throw DomainError("zero direction");
    v.normalize();
  }
  return dirs;
}

CommandOutput model_output(const NormModel& model, std::vector<RateFit> fits, std::string summary) {
  CommandOutput out;
  out.files.emplace_back("fits.csv", fit_csv(fits));
  out.files.emplace_back("norm.json", to_json(model).dump(2) + "\n");
  out.norm_fingerprint = norm_fingerprint(model);
  out.summary = std::move(summary) + fmt::format("fingerprint {}\n", out.norm_fingerprint);
  return out;
}

CommandOutput cmd_estimate_norm(const Settings& s, const Json&) {
  const auto dirs = directions_of(s);
  std::vector<RateFit> fits;
  std::string summary;
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    fits.push_back(measure_direction(dirs[i], s.norm_scales, s.lattice, s.norm_replicates,
                                     derive_seed(s.seed, std::uint64_t(i)), s.effective_workers()));
    summary += fmt::format("direction {} slope {:.6g}\n", i, fits.back().slope);
  }
  const auto model = build_norm_model(fits);
  return model_output(model, fits, summary);
}

CommandOutput cmd_build_norm(const Settings&, const Json& args) {
  if (!args.contains("fits")) throw DomainError("build-norm needs --fits");
  const auto& j = args["fits"];
  std::vector<RateFit> fits;
  if (j.is_object() && j.contains("provenance")) {
    for (const auto& f : j["provenance"].at("fits")) fits.push_back(rate_fit_from_json(f));
  } else {
    for (const auto& f : j) fits.push_back(rate_fit_from_json(f));
  }
  const auto model = build_norm_model(fits);
  return model_output(model, fits, fmt::format("directions {}\n", fits.size()));
}

CommandOutput cmd_steiner(const Settings& s, const Json& args) {
  const int d = s.lattice.dimension;
  auto pts = json_points(args.value("terminals", Json::array()), d);
  std::erase_if(pts, [](const Vector& v) { return v.isZero(); });
  if (int(pts.size()) + 1 > s.max_terminals) {
    throw DomainError(fmt::format("{} terminals exceed steiner.max_terminals = {}", pts.size() + 1, s.max_terminals));
  }
  const auto norm = resolve_gauge(s, args);
  auto opts = s.steiner;
  opts.workers = s.effective_workers();
  const auto sol = solve_steiner(pts, norm, opts);
  CommandOutput out;
  out.files.emplace_back("steiner.json", to_json(sol, norm).dump(2) + "\n");
  out.norm_fingerprint = norm_fingerprint(norm);
  out.summary = fmt::format("minimum {:.10g}\ntied_trees {}\ntopologies {}\nunconverged {}\n", sol.minimum_length,
                            sol.minimal.size(), sol.per_topology.size(), sol.unconverged);
  return out;
}

std::string rate_summary(const RateEstimate& est) {
  std::string out;
  for (const auto& r : est.rows) {
    out += fmt::format("n={} hits={}/{} rate={} [{}, {}]{}{}\n", r.n, r.estimate.hits, r.estimate.replicates,
                       format_number(r.rate), format_number(r.rate_low), format_number(r.rate_high),
                       r.boundary_flag ? " boundary-flag" : "", r.under_resolved ? " under-resolved" : "");
  }
  if (est.rate_lower_bound) out += fmt::format("rate >= {}\n", format_number(*est.rate_lower_bound));
  if (est.trend) out += fmt::format("trend {}\n", format_number(*est.trend));
  out += fmt::format("lambda_ref {}\n", format_number(est.lambda_reference));
  return out;
}

CommandOutput cmd_ldp_rate(const Settings& s, const Json& args) {
  const auto set = resolve_set(s, args);
  const auto norm = resolve_gauge(s, args);
  RateOptions opts;
  opts.replicates = s.harness_replicates;
  opts.seed = s.seed;
  opts.workers = s.effective_workers();
  opts.z = s.z();
  opts.boundary_touch_max = s.boundary_touch_max;
  const auto est = estimate_rate(set, s.epsilon, s.harness_scales, s.lattice, opts, &norm);
  CommandOutput out;
  out.files.emplace_back("rates.csv", rate_csv(est));
  Json doc{{"event", est.event},
           {"epsilon", est.epsilon},
           {"set", to_json(set)},
           {"trend", est.trend ? Json(*est.trend) : Json(nullptr)},
           {"rate_lower_bound", est.rate_lower_bound ? Json(*est.rate_lower_bound) : Json(nullptr)},
           {"lambda_reference", est.lambda_reference}};
  Json under = Json::array();
  for (const auto& r : est.rows) {
    if (r.under_resolved) under.push_back(r.n);
  }
  doc["under_resolved_scales"] = under;
  out.files.emplace_back("rate.json", doc.dump(2) + "\n");
  out.norm_fingerprint = norm_fingerprint(norm);
  out.summary = rate_summary(est);
  return out;
}

CommandOutput cmd_conditioned(const Settings& s, const Json&) {
  const int d = s.lattice.dimension;
  const auto pts = parse_points(s.points, d);
  auto c = base_lattice(s);
  if (s.auto_box_radius) c.box_radius = harness_box_radius(reach_of(pts), s.epsilon, c.scale);
  const auto sample = sample_conditioned(pts, c.scale, c, s.budget(0), s.seed, s.effective_workers());
  const auto& rep = sample.report;
  const auto acc = wilson_interval(rep.acceptances, rep.attempts, s.z());
  std::string summary_csv =
      "scale_n,attempts,acceptances,acceptance_fraction,ci_low,ci_high,boundary_touch_frac,min_acceptances_met\n";
  summary_csv += fmt::format("{},{},{},{},{},{},{},{}\n", rep.n, rep.attempts, rep.acceptances,
                             format_number(acc.value), format_number(acc.ci_low), format_number(acc.ci_high),
                             format_number(rep.acceptances ? double(rep.boundary_touches) / double(rep.acceptances) : 0.0),
                             rep.acceptances >= s.min_acceptances ? 1 : 0);
  std::string samples = "replicate,vertices,open_edges,touches_boundary,skeleton_edges,branch_vertices\n";
  for (std::size_t i = 0; i < sample.clusters.size(); ++i) {
    const auto& cl = sample.clusters[i];
    const auto sk = extract_skeleton(cl, pts);
    samples += fmt::format("{},{},{},{},{},{}\n", sample.replicates[i], cl.size(), cl.open_edges.size(),
                           cl.touches_boundary ? 1 : 0, sk.edge_count, sk.branch_vertices.size());
  }
  CommandOutput out;
  out.files.emplace_back("conditioned.csv", summary_csv);
  out.files.emplace_back("samples.csv", samples);
  out.summary = fmt::format("accepted {}/{}\n", rep.acceptances, rep.attempts);
  return out;
}

CommandOutput cmd_concentration(const Settings& s, const Json& args) {
  const int d = s.lattice.dimension;
  const auto pts = parse_points(s.points, d);
  const auto norm = resolve_gauge(s, args);
  std::vector<std::uint64_t> budgets;
  for (std::size_t i = 0; i < s.harness_scales.size(); ++i) budgets.push_back(s.budget(i));
  ConcentrationOptions opts;
  opts.seed = s.seed;
  opts.workers = s.effective_workers();
  opts.min_acceptances = s.min_acceptances;
  opts.z = s.z();
  opts.steiner = s.steiner;
  opts.steiner.workers = opts.workers;
  const auto res = steiner_concentration(pts, s.epsilon, s.harness_scales, budgets, s.lattice, norm, opts);
  CommandOutput out;
  out.files.emplace_back("concentration.csv", concentration_csv(res));
  out.files.emplace_back("steiner.json", to_json(res.solution, norm).dump(2) + "\n");
  out.norm_fingerprint = norm_fingerprint(norm);
  for (const auto& r : res.per_scale) {
    out.summary += fmt::format("n={} accepted {}/{} failure {} [{}, {}]{}\n", r.n, r.acceptances, r.attempts,
                               format_number(r.failure.value), format_number(r.failure.ci_low),
                               format_number(r.failure.ci_high), r.inconclusive ? " inconclusive" : "");
  }
  out.summary += fmt::format("gap_upper_bound {}\n",
                             res.gap_upper_bound ? format_number(*res.gap_upper_bound) : std::string("none"));
  return out;
}

CommandOutput cmd_selftest(const Settings&, const Json&) {
  CommandOutput out;
  std::string report;
  for (const auto& c : run_selftest()) {
    report += fmt::format("{} {}/{}{}\n", c.passed ? "PASS" : "FAIL", c.module, c.name,
                          c.detail.empty() ? "" : ": " + c.detail);
    out.success = out.success && c.passed;
  }
  out.files.emplace_back("selftest.txt", report);
  out.summary = report;
  return out;
}

}  // namespace

CommandOutput run_command(const std::string& command, const Settings& settings, const Json& args) {
  if (command == "sample") return cmd_sample(settings, args);
  if (command == "oracle") return cmd_oracle(settings, args);
  if (command == "estimate-norm") return cmd_estimate_norm(settings, args);
  if (command == "build-norm") return cmd_build_norm(settings, args);
  if (command == "steiner") return cmd_steiner(settings, args);
  if (command == "ldp-rate") return cmd_ldp_rate(settings, args);
  if (command == "conditioned") return cmd_conditioned(settings, args);
  if (command == "concentration") return cmd_concentration(settings, args);
  if (command == "selftest") return cmd_selftest(settings, args);
  throw DomainError(fmt::format("unknown command '{}'", command));
}

}  // namespace perclab
