#pragma once

#include <string>
#include <utility>
#include <vector>

#include "perclab/config.hpp"
#include "perclab/serialization.hpp"

namespace perclab {

struct CommandOutput {
  std::vector<std::pair<std::string, std::string>> files;  // name, content
  std::string summary;
  std::string norm_fingerprint;  // empty when no gauge is involved
  bool success = true;
};

const std::vector<std::string>& command_names();

/// Pure function of (settings, args): every file input must already be
/// embedded in args (see embed_inputs).
CommandOutput run_command(const std::string& command, const Settings& settings, const Json& args);

/// Loads files named by the configuration or by "*_path" arguments into args.
void embed_inputs(const std::string& command, const Settings& settings, Json& args);

/// "x,y;x,y;..." (also accepts whitespace between points).
std::vector<Vector> parse_points(const std::string& text, int dimension);
Vector parse_point(const std::string& text, int dimension);

/// euclidean, l1, linf, weighted-l2:w1,..,wd, or an embedded corr-norm/1 model.
NormModel resolve_gauge(const Settings& settings, const Json& args);
/// origin, a polyline "x,y;..." starting at the origin, or an embedded omega-set/1 document.
PolygonalSet resolve_set(const Settings& settings, const Json& args);

}  // namespace perclab
