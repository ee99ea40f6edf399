#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "perclab/lattice.hpp"
#include "perclab/norm_model.hpp"

namespace perclab {

enum class FitWeighting {
  inverse_ci_width,  // 1 / (width of the -log P interval)^2
  uniform,
};

/// Fits -log P = slope * n + intercept over the finite samples. Samples with
/// zero hits are dropped; fewer than three surviving distinct scales is a
/// ComputationFailure. Exact inputs (zero-width intervals) fall back to
/// uniform weights.
RateFit fit_rate(const Vector& direction, std::vector<ScaleSample> samples,
                 FitWeighting weighting = FitWeighting::inverse_ci_width);

/// Box radius that keeps the target within 2/3 of the box.
int auto_box_radius(const Site& target);

/// Monte Carlo decay table of P(e_n in C_n) over `scales`, fitted with
/// fit_rate. `config` supplies d, p and the p_c override; scale and box
/// radius are set per scale. Scale n draws from seed derive_seed(seed, n).
RateFit measure_direction(const Vector& direction, std::span<const int> scales, const LatticeConfig& config,
                          std::uint64_t replicates, std::uint64_t seed, unsigned workers = 1);

/// Unit-ball model from fitted slopes: boundary points e / slope(e), closed
/// under lattice symmetries, convex hull. Rejects nonpositive slopes and
/// direction sets of rank < d.
NormModel build_norm_model(std::span<const RateFit> fits);

/// Directions measured by default: a fundamental domain of the lattice
/// symmetry group. d = 2: 32 angles in [0, pi/4]; d >= 3: the normalized
/// vectors (1,..,1,0,..,0), whose orbits are the axes and the face, edge and
/// corner diagonals (26 directions for d = 3).
std::vector<Vector> default_directions(int dimension);

/// Finite-scale superadditivity check between scale n on the rectangle
/// [lo, hi] and scale 2n on [2 lo, 2 hi], both exact.
struct SuperadditivityCheck {
  double probability_n = 0.0;
  double probability_2n = 0.0;
  double rate_n = 0.0;   // -(1/n) log P_n
  double rate_2n = 0.0;  // -(1/(2n)) log P_2n
  bool holds = false;    // rate_2n <= rate_n + slack
  bool vacuous = false;  // P_n = 0: rates undefined
  double model_value = 0.0;  // N(u), for comparison with the finite rates
};

SuperadditivityCheck norm_upper_bound_check(const NormModel& model, const Vector& u, int n,
                                            const LatticeConfig& config, const Site& lo, const Site& hi,
                                            double slack = 1e-12);

}  // namespace perclab
