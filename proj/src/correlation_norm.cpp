#include "perclab/correlation_norm.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "perclab/errors.hpp"
#include "perclab/events.hpp"
#include "perclab/stats.hpp"

namespace perclab {

RateFit fit_rate(const Vector& direction, std::vector<ScaleSample> samples, FitWeighting weighting) {
  RateFit fit;
  fit.direction = direction;
  fit.per_scale = samples;
  std::vector<ScaleSample> used;
  for (const auto& s : samples) {
    if (s.replicates > 0 && s.hits == 0) continue;
    if (!std::isfinite(s.neg_log_p)) continue;
    used.push_back(s);
  }
  std::set<int> distinct;
  for (const auto& s : used) distinct.insert(s.scale);
  if (distinct.size() < 3) {
    throw ComputationFailure(fmt::format("rate fit along ({}) has {} usable scales, need 3",
                                         fmt::join(direction.data(), direction.data() + direction.size(), ","),
                                         distinct.size()));
  }
  std::vector<double> x, y, w;
  bool exact = weighting == FitWeighting::uniform;
  for (const auto& s : used) {
    const double width = s.ci_high - s.ci_low;
    if (!(width > 0.0) || !std::isfinite(width)) exact = true;
  }
  for (const auto& s : used) {
    x.push_back(double(s.scale));
    y.push_back(s.neg_log_p);
    w.push_back(exact ? 1.0 : 1.0 / std::pow(s.ci_high - s.ci_low, 2));
    fit.scales.push_back(s.scale);
  }
  const auto f = weighted_affine_fit(x, y, w);
  fit.slope = f.slope;
  fit.intercept = f.intercept;
  for (std::size_t i = 0; i < x.size(); ++i) fit.residuals.push_back(y[i] - (f.slope * x[i] + f.intercept));
  return fit;
}

int auto_box_radius(const Site& target) {
  const int reach = target.cwiseAbs().maxCoeff();
  return std::max(1, int(std::ceil(1.5 * double(reach))));
}

RateFit measure_direction(const Vector& direction, std::span<const int> scales, const LatticeConfig& config,
                          std::uint64_t replicates, std::uint64_t seed, unsigned workers) {
  if (std::abs(direction.norm() - 1.0) > 1e-9) throw DomainError("direction must be a Euclidean unit vector");
  if (direction.size() != config.dimension) throw DomainError("direction dimension differs from the lattice");
  if (std::set<int>(scales.begin(), scales.end()).size() < 3) {
    throw DomainError("direction measurement needs at least 3 distinct scales");
  }
  config.validate();
  require_subcritical(config);
  std::vector<ScaleSample> samples;
  for (int n : scales) {
    LatticeConfig c = config;
    c.scale = n;
    const Site target = lattice_site(direction, n);
    c.box_radius = auto_box_radius(target);
    const auto lattice = Lattice::box(c);
    const auto est =
        estimate_event_probability(lattice, PointInCluster{direction}, replicates, derive_seed(seed, std::uint64_t(n)),
                                   workers);
    ScaleSample s;
    s.scale = n;
    s.replicates = est.replicates;
    s.hits = est.hits;
    s.neg_log_p = -std::log(est.value);
    s.ci_low = -std::log(est.ci_high);
    s.ci_high = -std::log(est.ci_low);
    s.boundary_touch_fraction = est.boundary_touch_fraction();
    samples.push_back(s);
  }
  RateFit fit = fit_rate(direction, std::move(samples));
  fit.p = config.p;
  fit.seed = seed;
  return fit;
}

NormModel build_norm_model(std::span<const RateFit> fits) {
  if (fits.empty()) throw DomainError("norm model needs at least one rate fit");
  const int d = int(fits.front().direction.size());
  Matrix dirs(d, Eigen::Index(fits.size()));
  std::vector<Vector> points;
  std::vector<BoundarySample> samples;
  for (std::size_t i = 0; i < fits.size(); ++i) {
    const auto& f = fits[i];
    if (f.direction.size() != d) throw DomainError("rate fits disagree in dimension");
    if (!(f.slope > 0.0) || !std::isfinite(f.slope)) {
      throw DomainError(fmt::format("nonpositive slope {} along direction ({})", f.slope,
                                    fmt::join(f.direction.data(), f.direction.data() + d, ",")));
    }
    const double len = f.direction.norm();
    if (!(len > 0.0)) throw DomainError("rate fit with zero direction");
    const Vector e = f.direction / len;
    dirs.col(Eigen::Index(i)) = e;
    points.push_back(e / f.slope);
    samples.push_back({e, f.slope});
  }
  if (Eigen::FullPivLU<Matrix>(dirs).rank() < d) {
    throw DomainError(fmt::format("need {} linearly independent directions", d));
  }
  NormModel model = NormModel::from_boundary_points(points);
  model.boundary_samples = std::move(samples);
  model.fits.assign(fits.begin(), fits.end());
  return model;
}

std::vector<Vector> default_directions(int dimension) {
  if (dimension < 2) throw DomainError("dimension must be at least 2");
  std::vector<Vector> out;
  if (dimension == 2) {
    for (int j = 0; j < 32; ++j) {
      const double t = std::numbers::pi / 4.0 * double(j) / 31.0;
      Vector e(2);
      e << std::cos(t), std::sin(t);
      out.push_back(e);
    }
    return out;
  }
  for (int k = 1; k <= dimension; ++k) {
    Vector e = Vector::Zero(dimension);
    e.head(k).setConstant(1.0 / std::sqrt(double(k)));
    out.push_back(e);
  }
  return out;
}

SuperadditivityCheck norm_upper_bound_check(const NormModel& model, const Vector& u, int n,
                                            const LatticeConfig& config, const Site& lo, const Site& hi,
                                            double slack) {
  if (n < 1) throw DomainError("scale must be at least 1");
  SuperadditivityCheck out;
  out.model_value = model(u);
  LatticeConfig c1 = config;
  c1.scale = n;
  LatticeConfig c2 = config;
  c2.scale = 2 * n;
  const auto l1 = Lattice::rectangle(c1, lo, hi);
  const auto l2 = Lattice::rectangle(c2, Site(2 * lo), Site(2 * hi));
  out.probability_n = exact_event_probability(l1, PointInCluster{u});
  out.probability_2n = exact_event_probability(l2, PointInCluster{u});
  if (!(out.probability_n > 0.0)) {
    out.vacuous = true;
    out.holds = true;
    out.rate_n = std::numeric_limits<double>::infinity();
    out.rate_2n = out.probability_2n > 0.0 ? -std::log(out.probability_2n) / double(2 * n)
                                           : std::numeric_limits<double>::infinity();
    return out;
  }
  out.rate_n = -std::log(out.probability_n) / double(n);
  out.rate_2n = -std::log(out.probability_2n) / double(2 * n);
  out.holds = out.rate_2n <= out.rate_n + slack;
  return out;
}

}  // namespace perclab
