#include "perclab/lattice.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>

#include "perclab/errors.hpp"
#include "perclab/parallel.hpp"

namespace perclab {

SubcriticalityViolation::SubcriticalityViolation(int dimension, double p, double bound)
    : std::domain_error(fmt::format("p = {} is not below the configured p_c bound {} for d = {}", p, bound,
                                    dimension)),
      dimension_(dimension),
      p_(p),
      bound_(bound) {}

EnumerationCapExceeded::EnumerationCapExceeded(std::size_t edges, std::size_t cap)
    : std::runtime_error(fmt::format("exact enumeration refused: {} edges exceeds the cap of {}", edges, cap)),
      edges_(edges),
      cap_(cap) {}

unsigned default_workers() {
  if (const char* env = std::getenv("PERCLAB_WORKERS")) {
    const int n = std::atoi(env);
    if (n > 0) return unsigned(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void LatticeConfig::validate() const {
  if (dimension < 2) throw DomainError(fmt::format("dimension must be at least 2, got {}", dimension));
  if (scale < 1) throw DomainError(fmt::format("scale must be at least 1, got {}", scale));
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError(fmt::format("p must lie in [0, 1], got {}", p));
  if (box_radius < 1) throw DomainError(fmt::format("box radius must be at least 1, got {}", box_radius));
  if (p_c_override && !(*p_c_override > 0.0 && *p_c_override <= 1.0)) {
    throw DomainError("p_c override must lie in (0, 1]");
  }
}

double p_c_bound(int dimension) {
  if (dimension < 2) throw DomainError("p_c bound is only configured for d >= 2");
  return dimension == 2 ? 0.5 : 0.2;
}

double effective_p_c_bound(const LatticeConfig& config) {
  return config.p_c_override.value_or(p_c_bound(config.dimension));
}

void require_subcritical(const LatticeConfig& config) {
  const double bound = effective_p_c_bound(config);
  if (!(config.p < bound)) throw SubcriticalityViolation(config.dimension, config.p, bound);
}

namespace {

long round_half_up(double x) { return long(std::floor(x + 0.5)); }

}  // namespace

Site lattice_site(const Vector& u, int n) {
  if (n < 1) throw DomainError("scale must be at least 1");
  Site s(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const long r = round_half_up(u(i) * double(n));
    if (std::abs(r) > std::numeric_limits<int>::max() / 2) throw DomainError("point too far from the origin");
    s(i) = int(r);
  }
  return s;
}

Vector round_to_lattice(const Vector& u, int n) { return lattice_site(u, n).cast<double>() / double(n); }

Lattice::Lattice(const LatticeConfig& config, Site lo, Site hi)
    : config_(config), lo_(std::move(lo)), hi_(std::move(hi)) {
  config_.validate();
  const int d = config_.dimension;
  if (lo_.size() != d || hi_.size() != d) throw DomainError("rectangle corners must have the lattice dimension");
  std::size_t count = 1;
  strides_.resize(std::size_t(d));
  for (int k = 0; k < d; ++k) {
    if (lo_(k) > 0 || hi_(k) < 0) throw DomainError("lattice rectangle must contain the origin");
    strides_[std::size_t(k)] = count;
    count *= std::size_t(hi_(k) - lo_(k) + 1);
    if (count > (std::size_t(1) << 26)) throw DomainError("lattice rectangle too large");
  }
  coords_.resize(d, Eigen::Index(count));
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t rest = i;
    for (int k = 0; k < d; ++k) {
      const std::size_t extent = std::size_t(hi_(k) - lo_(k) + 1);
      coords_(k, Eigen::Index(i)) = lo_(k) + int(rest % extent);
      rest /= extent;
    }
  }
  origin_ = *site_index(Site::Zero(d));
  for (std::size_t i = 0; i < count; ++i) {
    for (int k = 0; k < d; ++k) {
      if (coords_(k, Eigen::Index(i)) < hi_(k)) edges_.push_back(EdgeId(i) * EdgeId(d) + EdgeId(k));
    }
  }
}

LatticePtr Lattice::box(const LatticeConfig& config) {
  config.validate();
  const Site r = Site::Constant(config.dimension, config.box_radius);
  return LatticePtr(new Lattice(config, -r, r));
}

LatticePtr Lattice::rectangle(const LatticeConfig& config, const Site& lo, const Site& hi) {
  config.validate();
  return LatticePtr(new Lattice(config, lo, hi));
}

LatticePtr Lattice::from_edges(const LatticeConfig& config, std::span<const std::pair<Site, Site>> edges) {
  config.validate();
  const Site r = Site::Constant(config.dimension, config.box_radius);
  auto lattice = std::shared_ptr<Lattice>(new Lattice(config, -r, r));
  const int d = config.dimension;
  lattice->mask_.assign(lattice->site_count() * std::size_t(d), false);
  std::vector<EdgeId> ids;
  for (const auto& [a, b] : edges) {
    const auto ia = lattice->site_index(a);
    const auto ib = lattice->site_index(b);
    if (!ia || !ib) throw DomainError("restricted edge leaves the box");
    const Site diff = b - a;
    if (diff.cwiseAbs().sum() != 1) throw DomainError("restricted edge does not join adjacent sites");
    Eigen::Index k;
    diff.cwiseAbs().maxCoeff(&k);
    const std::size_t from = diff(k) > 0 ? *ia : *ib;
    const EdgeId e = EdgeId(from) * EdgeId(d) + EdgeId(k);
    lattice->mask_[e] = true;
    ids.push_back(e);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  lattice->edges_ = std::move(ids);
  return lattice;
}

std::optional<std::size_t> Lattice::site_index(const Site& s) const {
  if (s.size() != config_.dimension) return std::nullopt;
  std::size_t index = 0;
  for (int k = 0; k < config_.dimension; ++k) {
    if (s(k) < lo_(k) || s(k) > hi_(k)) return std::nullopt;
    index += std::size_t(s(k) - lo_(k)) * strides_[std::size_t(k)];
  }
  return index;
}

bool Lattice::on_boundary(std::size_t index) const {
  const auto c = site(index);
  for (int k = 0; k < config_.dimension; ++k) {
    if (c(k) == lo_(k) || c(k) == hi_(k)) return true;
  }
  return false;
}

bool Lattice::has_edge(EdgeId e) const { return std::binary_search(edges_.begin(), edges_.end(), e); }

std::string Lattice::edge_label(EdgeId e) const {
  const auto [a, b] = edge_sites(e);
  auto fmt_site = [&](std::size_t i) {
    const auto c = site(i);
    std::string out;
    for (Eigen::Index k = 0; k < c.size(); ++k) out += (k ? "," : "") + std::to_string(c(k));
    return out;
  };
  return fmt_site(a) + "-" + fmt_site(b);
}

EdgeSampler::EdgeSampler(double p, std::uint64_t seed, std::uint64_t replicate)
    : stream_(seed, replicate), threshold_(0), all_open_(p >= 1.0) {
  if (!all_open_ && p > 0.0) threshold_ = std::uint64_t(std::ldexp(p, 64));
}

bool BondConfiguration::is_open(EdgeId e) const {
  return std::binary_search(open_edges.begin(), open_edges.end(), e);
}

std::vector<std::string> BondConfiguration::edge_labels() const {
  std::vector<std::string> out;
  out.reserve(open_edges.size());
  for (auto e : open_edges) out.push_back(lattice->edge_label(e));
  return out;
}

BondConfiguration sample_configuration(const LatticePtr& lattice, std::uint64_t seed, std::uint64_t replicate,
                                       SubcriticalGate gate) {
  if (gate == SubcriticalGate::enforce) require_subcritical(lattice->config());
  const EdgeSampler sampler(lattice->config().p, seed, replicate);
  BondConfiguration bc{lattice, {}};
  for (auto e : lattice->edges()) {
    if (sampler.open(e)) bc.open_edges.push_back(e);
  }
  return bc;
}

std::optional<int> Cluster::find(const Site& s) const {
  for (Eigen::Index i = 0; i < vertices.cols(); ++i) {
    if (vertices.col(i) == s) return int(i);
  }
  return std::nullopt;
}

PointCloud Cluster::point_cloud() const { return PointCloud(vertices.cast<double>() / double(scale)); }

double hausdorff_distance(const Cluster& c, const PolygonalSet& s) {
  return hausdorff_distance(c.primitives(), PrimitiveSet::of(s));
}
double hausdorff_distance(const Cluster& c, const PointCloud& s) {
  return hausdorff_distance(c.primitives(), PrimitiveSet::of(s));
}

Explorer::Explorer(const Lattice& lattice)
    : lattice_(lattice), marks_(lattice.site_count(), 0), position_(lattice.site_count(), -1) {}

Cluster Explorer::to_cluster(const Result& r) const {
  Cluster c;
  c.scale = lattice_.scale();
  c.vertices.resize(lattice_.dimension(), Eigen::Index(r.sites.size()));
  for (std::size_t i = 0; i < r.sites.size(); ++i) c.vertices.col(Eigen::Index(i)) = lattice_.site(r.sites[i]);
  c.open_edges = r.edges;
  c.touches_boundary = r.touches_boundary;
  return c;
}

Cluster extract_origin_cluster(const BondConfiguration& bc) {
  Explorer explorer(*bc.lattice);
  const std::size_t origin = bc.lattice->origin_index();
  const auto r = explorer.explore(
      std::span(&origin, 1), [&](EdgeId e) { return bc.is_open(e); }, [](std::size_t) { return true; },
      [](std::size_t) { return true; }, true);
  return explorer.to_cluster(r);
}

Cluster sample_origin_cluster(const Lattice& lattice, Explorer& explorer, std::uint64_t seed,
                              std::uint64_t replicate) {
  const EdgeSampler sampler(lattice.config().p, seed, replicate);
  const std::size_t origin = lattice.origin_index();
  const auto r = explorer.explore(
      std::span(&origin, 1), [&](EdgeId e) { return sampler.open(e); }, [](std::size_t) { return true; },
      [](std::size_t) { return true; }, true);
  return explorer.to_cluster(r);
}

}  // namespace perclab
