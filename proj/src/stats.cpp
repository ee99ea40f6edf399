#include "perclab/stats.hpp"

#include <algorithm>
#include <cmath>

#include "perclab/errors.hpp"

namespace perclab {

EstimateWithCI wilson_interval(std::uint64_t hits, std::uint64_t trials, double z) {
  if (trials == 0) throw DomainError("Wilson interval needs at least one trial");
  if (hits > trials) throw DomainError("more hits than trials");
  const double n = double(trials);
  const double phat = double(hits) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (phat + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
  EstimateWithCI e;
  e.value = phat;
  e.replicates = trials;
  e.hits = hits;
  e.ci_low = hits == 0 ? 0.0 : std::clamp(centre - half, 0.0, phat);
  e.ci_high = hits == trials ? 1.0 : std::clamp(centre + half, phat, 1.0);
  return e;
}

AffineFit weighted_affine_fit(std::span<const double> x, std::span<const double> y, std::span<const double> w) {
  if (x.size() != y.size() || x.size() != w.size()) throw DomainError("fit inputs differ in length");
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
  }
  if (!(sw > 0.0)) throw ComputationFailure("fit needs positive total weight");
  const double mx = sx / sw;
  const double my = sy / sw;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += w[i] * (x[i] - mx) * (x[i] - mx);
    sxy += w[i] * (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw ComputationFailure("fit needs at least two distinct abscissae");
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

}  // namespace perclab
