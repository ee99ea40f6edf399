#pragma once

#include <cstdint>
#include <span>

namespace perclab {

inline constexpr double kZ95 = 1.959963984540054;
inline constexpr double kZ99 = 2.5758293035489004;

/// Binomial proportion with a Wilson score interval.
struct EstimateWithCI {
  double value = 0.0;
  double ci_low = 0.0;
  double ci_high = 1.0;
  std::uint64_t replicates = 0;
  std::uint64_t hits = 0;
  std::uint64_t boundary_touches = 0;

  bool contains(double x) const { return ci_low <= x && x <= ci_high; }
  double boundary_touch_fraction() const {
    return replicates == 0 ? 0.0 : double(boundary_touches) / double(replicates);
  }
};

/// Wilson score interval for `hits` successes out of `trials`. With zero
/// hits the lower end is 0 and the upper end is z^2 / (n + z^2).
EstimateWithCI wilson_interval(std::uint64_t hits, std::uint64_t trials, double z = kZ95);

/// Two intervals share at least one point.
inline bool intervals_overlap(double lo1, double hi1, double lo2, double hi2) {
  return lo1 <= hi2 && lo2 <= hi1;
}

struct AffineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Weighted least squares y = slope * x + intercept. Needs at least two
/// distinct x with positive weight.
AffineFit weighted_affine_fit(std::span<const double> x, std::span<const double> y,
                              std::span<const double> w);

}  // namespace perclab
