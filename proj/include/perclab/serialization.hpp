#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "perclab/geometry.hpp"
#include "perclab/harness.hpp"
#include "perclab/lattice.hpp"
#include "perclab/norm_model.hpp"
#include "perclab/steiner.hpp"

namespace perclab {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "0.1.0";

Json vector_to_json(const Vector& v);
Vector vector_from_json(const Json& j);

/// {"version": "omega-set/1", "dimension", "segments": [[a, b], ...]}.
Json to_json(const PolygonalSet& set);
/// Validated; rejects other versions.
PolygonalSet polygonal_set_from_json(const Json& j);

/// {"version": "corr-norm/1", "dimension", "gauge", ["weights"],
/// ["hull_vertices"], "provenance": {"boundary_samples", "fits"}}.
Json to_json(const NormModel& model);
NormModel norm_model_from_json(const Json& j);
Json to_json(const RateFit& fit);
RateFit rate_fit_from_json(const Json& j);

/// SHA-256 of the gauge-defining part of the model (provenance excluded).
std::string norm_fingerprint(const NormModel& model);
std::string sha256_hex(const std::string& data);

/// {"version": "steiner/1", "set": omega-set/1, "metadata": {...}}.
Json to_json(const SteinerTree& tree, const std::string& gauge_fingerprint);
Json to_json(const SteinerSolution& solution, const NormModel& norm);

/// Open edges and origin cluster of one configuration.
Json to_json(const BondConfiguration& configuration, const Cluster& cluster);

/// Shortest round-trip decimal; "inf", "-inf", "nan" for non-finite values.
std::string format_number(double x);

/// CSV with the rate columns; one row per scale.
std::string rate_csv(const RateEstimate& estimate);
/// Rate columns for the failure fraction, followed by attempts,
/// acceptances, inconclusive and gap_upper_bound.
std::string concentration_csv(const ConcentrationResult& result);
/// scale_n, direction, rate columns: decay table of direction fits.
std::string fit_csv(const std::vector<RateFit>& fits);

}  // namespace perclab
