#include "perclab/events.hpp"

#include <fmt/format.h>

#include <bit>
#include <cmath>

#include "perclab/errors.hpp"
#include "perclab/parallel.hpp"

namespace perclab {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::size_t require_site(const Lattice& lattice, const Vector& u, const char* what) {
  if (u.size() != lattice.dimension()) {
    throw DomainError(fmt::format("{} has dimension {}, lattice has {}", what, u.size(), lattice.dimension()));
  }
  const auto index = lattice.site_index(lattice_site(u, lattice.scale()));
  if (!index) throw DomainError(fmt::format("{} lies outside the lattice box after rounding", what));
  return *index;
}

void require_positive(double eps, const char* what) {
  if (!(eps > 0.0)) throw DomainError(fmt::format("{} must be positive", what));
}

void require_dimension(const PolygonalSet& s, const Lattice& lattice) {
  if (s.dimension() != lattice.dimension()) throw DomainError("event set dimension differs from the lattice");
}

struct HitTally {
  std::uint64_t hits = 0;
  std::uint64_t touches = 0;
  void merge(const HitTally& o) {
    hits += o.hits;
    touches += o.touches;
  }
};

}  // namespace

std::string event_name(const EventSpec& event) {
  return std::visit(overloaded{[](const PointInCluster&) { return std::string("point-in-cluster"); },
                               [](const PointsInCluster&) { return std::string("points-in-cluster"); },
                               [](const HausdorffBall&) { return std::string("hausdorff-ball"); },
                               [](const ConstrainedConnection&) { return std::string("constrained-connection"); },
                               [](const AnnulusCrossing&) { return std::string("annulus-crossing"); }},
                    event);
}

bool is_increasing(const EventSpec& event) { return !std::holds_alternative<HausdorffBall>(event); }

CompiledEvent::CompiledEvent(LatticePtr lattice, EventSpec event)
    : lattice_(std::move(lattice)), event_(std::move(event)) {
  const Lattice& L = *lattice_;
  const std::size_t sites = L.site_count();
  auto distances_to = [&](const PolygonalSet& s) {
    require_dimension(s, L);
    set_ = PrimitiveSet::of(s);
    std::vector<double> dist(sites);
    for (std::size_t i = 0; i < sites; ++i) dist[i] = distance_to_set(L.physical(i), set_);
    return dist;
  };
  std::visit(overloaded{
                 [&](const PointInCluster& e) { targets_.push_back(require_site(L, e.target, "target")); },
                 [&](const PointsInCluster& e) {
                   for (const auto& t : e.targets) {
                     const auto s = require_site(L, t, "target");
                     if (std::find(targets_.begin(), targets_.end(), s) == targets_.end()) targets_.push_back(s);
                   }
                 },
                 [&](const HausdorffBall& e) {
                   require_positive(e.epsilon, "Hausdorff ball radius");
                   const auto dist = distances_to(e.set);
                   allowed_.resize(sites);
                   for (std::size_t i = 0; i < sites; ++i) allowed_[i] = dist[i] < e.epsilon;
                 },
                 [&](const ConstrainedConnection& e) {
                   require_positive(e.epsilon, "corridor radius");
                   targets_.push_back(require_site(L, e.from, "connection start"));
                   targets_.push_back(require_site(L, e.to, "connection end"));
                   const auto dist = distances_to(e.corridor);
                   allowed_.resize(sites);
                   for (std::size_t i = 0; i < sites; ++i) allowed_[i] = dist[i] <= e.epsilon;
                 },
                 [&](const AnnulusCrossing& e) {
                   require_positive(e.inner, "inner radius");
                   if (!(e.outer >= e.inner)) throw DomainError("outer radius must be at least the inner radius");
                   const auto dist = distances_to(e.set);
                   inner_.resize(sites);
                   outer_.resize(sites);
                   for (std::size_t i = 0; i < sites; ++i) {
                     inner_[i] = dist[i] < e.inner;
                     outer_[i] = dist[i] >= e.outer;
                   }
                 }},
             event_);
  if (L.edges().size() <= 64) {
    edge_bit_.assign(sites * std::size_t(L.dimension()), 0);
    for (std::size_t i = 0; i < L.edges().size(); ++i) edge_bit_[L.edges()[i]] = i;
  }
}

template <class Open>
CompiledEvent::Outcome CompiledEvent::run(Explorer& explorer, Open&& open) const {
  const Lattice& L = *lattice_;
  const auto everywhere = [](std::size_t) { return true; };
  const std::size_t origin = L.origin_index();
  Outcome out;
  std::visit(
      overloaded{
          [&](const PointInCluster&) {
            const auto r = explorer.explore(std::span(&origin, 1), open, everywhere, everywhere, false);
            out.touches_boundary = r.touches_boundary;
            out.hit = std::find(r.sites.begin(), r.sites.end(), targets_[0]) != r.sites.end();
          },
          [&](const PointsInCluster&) {
            std::size_t found = 0;
            const auto r = explorer.explore(
                std::span(&origin, 1), open, everywhere,
                [&](std::size_t s) {
                  found += std::find(targets_.begin(), targets_.end(), s) != targets_.end();
                  return true;
                },
                false);
            out.touches_boundary = r.touches_boundary;
            out.hit = found == targets_.size();
          },
          [&](const HausdorffBall& e) {
            const auto r = explorer.explore(
                std::span(&origin, 1), open, everywhere, [&](std::size_t s) { return bool(allowed_[s]); }, false);
            out.touches_boundary = r.touches_boundary;
            if (r.stopped) return;
            PrimitiveSet cloud{L.dimension(), {}};
            cloud.primitives.reserve(r.sites.size());
            for (auto s : r.sites) {
              const Vector x = L.physical(s);
              cloud.primitives.push_back({x, x});
            }
            const auto b = directed_hausdorff(set_, cloud, 1e-9, e.epsilon);
            out.hit = b.lower < e.epsilon && (b.upper < e.epsilon || 0.5 * (b.lower + b.upper) < e.epsilon);
          },
          [&](const ConstrainedConnection&) {
            const std::size_t from = targets_[0];
            const std::size_t to = targets_[1];
            if (!allowed_[from] || !allowed_[to]) return;
            const auto r = explorer.explore(
                std::span(&from, 1), open, [&](std::size_t s) { return bool(allowed_[s]); },
                [&](std::size_t s) { return s != to; }, false);
            out.touches_boundary = r.touches_boundary;
            out.hit = r.stopped;
          },
          [&](const AnnulusCrossing&) {
            std::vector<std::size_t> sources;
            for (std::size_t i = 0; i < inner_.size(); ++i) {
              if (inner_[i]) sources.push_back(i);
            }
            const auto r = explorer.explore(sources, open, everywhere,
                                            [&](std::size_t s) { return !outer_[s]; }, false);
            out.touches_boundary = r.touches_boundary;
            out.hit = r.stopped;
          }},
      event_);
  return out;
}

CompiledEvent::Outcome CompiledEvent::evaluate(Explorer& explorer, const std::function<bool(EdgeId)>& open) const {
  return run(explorer, open);
}

CompiledEvent::Outcome CompiledEvent::evaluate(Explorer& explorer, const EdgeSampler& sampler) const {
  return run(explorer, [&](EdgeId e) { return sampler.open(e); });
}

bool CompiledEvent::holds_on_mask(Explorer& explorer, std::uint64_t mask) const {
  if (edge_bit_.empty()) throw EnumerationCapExceeded(lattice_->edges().size(), 64);
  return run(explorer, [&](EdgeId e) { return (mask >> edge_bit_[e]) & 1u; }).hit;
}

double ExactCounts::probability(double p) const {
  // Sum over whichever of the event and its complement has fewer
  // configurations, so certain and impossible events come out exact.
  std::vector<std::uint64_t> binom(edges + 1, 0);
  binom[0] = 1;
  for (std::size_t e = 1; e <= edges; ++e) {
    for (std::size_t k = e; k >= 1; --k) binom[k] += binom[k - 1];
  }
  const std::uint64_t hits = total();
  const bool complement = hits > (std::uint64_t(1) << edges) / 2;
  double sum = 0.0;
  for (std::size_t k = 0; k <= edges; ++k) {
    const std::uint64_t c = k < by_open_count.size() ? by_open_count[k] : 0;
    const std::uint64_t m = complement ? binom[k] - c : c;
    if (m == 0) continue;
    sum += double(m) * std::pow(p, double(k)) * std::pow(1.0 - p, double(edges - k));
  }
  return std::clamp(complement ? 1.0 - sum : sum, 0.0, 1.0);
}

std::uint64_t ExactCounts::total() const {
  std::uint64_t t = 0;
  for (auto c : by_open_count) t += c;
  return t;
}

ExactCounts enumerate_counts(const Lattice& lattice, const std::function<bool(std::uint64_t)>& predicate,
                             std::size_t cap) {
  const std::size_t e = lattice.edges().size();
  if (e > cap || e > 62) throw EnumerationCapExceeded(e, std::min<std::size_t>(cap, 62));
  ExactCounts counts{e, std::vector<std::uint64_t>(e + 1, 0)};
  const std::uint64_t end = std::uint64_t(1) << e;
  for (std::uint64_t mask = 0; mask < end; ++mask) {
    if (predicate(mask)) ++counts.by_open_count[std::size_t(std::popcount(mask))];
  }
  return counts;
}

ExactCounts enumerate_event(const CompiledEvent& event, std::size_t cap) {
  Explorer explorer(event.lattice());
  return enumerate_counts(event.lattice(), [&](std::uint64_t mask) { return event.holds_on_mask(explorer, mask); },
                          cap);
}

double exact_event_probability(const LatticePtr& lattice, const EventSpec& event, std::size_t cap) {
  if (lattice->edges().size() > cap) throw EnumerationCapExceeded(lattice->edges().size(), cap);
  const CompiledEvent compiled(lattice, event);
  return enumerate_event(compiled, cap).probability(lattice->config().p);
}

EstimateWithCI estimate_event_probability(const LatticePtr& lattice, const EventSpec& event,
                                          std::uint64_t replicates, std::uint64_t seed, unsigned workers, double z) {
  if (replicates < 1) throw DomainError("at least one replicate is required");
  require_subcritical(lattice->config());
  const CompiledEvent compiled(lattice, event);
  const double p = lattice->config().p;
  const auto tally = run_replicates<HitTally>(replicates, workers, [&](std::uint64_t first, std::uint64_t last,
                                                                       HitTally& t) {
    Explorer explorer(*lattice);
    for (std::uint64_t i = first; i < last; ++i) {
      const auto o = compiled.evaluate(explorer, EdgeSampler(p, seed, i));
      t.hits += o.hit;
      t.touches += o.touches_boundary;
    }
  });
  auto est = wilson_interval(tally.hits, replicates, z);
  est.boundary_touches = tally.touches;
  return est;
}

std::vector<std::uint64_t> connection_witnesses(const CompiledEvent& event) {
  const Lattice& L = event.lattice();
  if (L.edges().size() > 64) throw EnumerationCapExceeded(L.edges().size(), 64);
  std::size_t from = L.origin_index();
  std::size_t to = 0;
  std::vector<char> allowed(L.site_count(), 1);
  std::visit(overloaded{[&](const PointInCluster& e) { to = *L.site_index(lattice_site(e.target, L.scale())); },
                        [&](const ConstrainedConnection& e) {
                          from = *L.site_index(lattice_site(e.from, L.scale()));
                          to = *L.site_index(lattice_site(e.to, L.scale()));
                          const auto set = PrimitiveSet::of(e.corridor);
                          for (std::size_t i = 0; i < allowed.size(); ++i) {
                            allowed[i] = distance_to_set(L.physical(i), set) <= e.epsilon;
                          }
                        },
                        [](const auto&) { throw DomainError("witnesses are defined for connection events only"); }},
             event.spec());

  std::vector<std::size_t> bit(L.site_count() * std::size_t(L.dimension()), 0);
  for (std::size_t i = 0; i < L.edges().size(); ++i) bit[L.edges()[i]] = i;

  std::vector<std::uint64_t> out;
  if (!allowed[from] || !allowed[to]) return out;
  if (from == to) {
    out.push_back(0);
    return out;
  }
  std::vector<char> on_path(L.site_count(), 0);
  constexpr std::size_t kMaxWitnesses = 1u << 20;
  auto dfs = [&](auto&& self, std::size_t at, std::uint64_t used) -> void {
    if (out.size() >= kMaxWitnesses) throw ComputationFailure("too many connection witnesses");
    if (at == to) {
      out.push_back(used);
      return;
    }
    on_path[at] = 1;
    L.for_each_neighbor(at, [&](EdgeId e, std::size_t next) {
      if (!allowed[next] || on_path[next]) return;
      self(self, next, used | (std::uint64_t(1) << bit[e]));
    });
    on_path[at] = 0;
  };
  dfs(dfs, from, 0);
  return out;
}

bool occurs_disjointly(std::span<const std::uint64_t> witnesses_a, std::span<const std::uint64_t> witnesses_b,
                       std::uint64_t mask) {
  std::vector<std::uint64_t> b_open;
  for (auto w : witnesses_b) {
    if ((w & mask) == w) b_open.push_back(w);
  }
  if (b_open.empty()) return false;
  for (auto a : witnesses_a) {
    if ((a & mask) != a) continue;
    for (auto b : b_open) {
      if ((a & b) == 0) return true;
    }
  }
  return false;
}

}  // namespace perclab
