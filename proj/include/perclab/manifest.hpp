#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "perclab/commands.hpp"
#include "perclab/config.hpp"
#include "perclab/serialization.hpp"

namespace perclab {

struct RunRecord {
  std::filesystem::path directory;
  Json manifest;
  CommandOutput output;
};

/// Content hash of a manifest: everything except timestamps, output paths,
/// the output root and the worker count, none of which affect results.
std::string manifest_hash(const Json& manifest);

/// Runs a validated command, writes its outputs and manifest.json into
/// <settings.out>/<hash prefix>, and returns the record.
RunRecord execute_run(const std::string& command, const ValidationResult& config, Json args);

/// Re-runs the experiment described by a manifest. `out_root` replaces the
/// recorded output root when nonempty.
RunRecord replay_manifest(const Json& manifest, const std::string& out_root = {});

/// Normalized configuration as a JSON object of sections.
Json config_to_json(const RawConfig& config);
RawConfig config_from_json(const Json& j);

}  // namespace perclab
