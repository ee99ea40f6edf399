#include "perclab/manifest.hpp"

#include <fmt/chrono.h>
#include <fmt/format.h>

#include <chrono>
#include <fstream>

#include "perclab/errors.hpp"

namespace perclab {

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  return fmt::format("{:%Y-%m-%dT%H:%M:%S}Z", fmt::gmtime(std::chrono::system_clock::to_time_t(now)));
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ComputationFailure(fmt::format("cannot write '{}'", path.string()));
  out << content;
}

}  // namespace

Json config_to_json(const RawConfig& config) {
  Json j = Json::object();
  for (const auto& k : config_keys()) {
    const auto s = config.find(k.section);
    if (s == config.end()) continue;
    const auto v = s->second.find(k.key);
    if (v != s->second.end()) j[k.section][k.key] = v->second;
  }
  return j;
}

RawConfig config_from_json(const Json& j) {
  RawConfig raw;
  for (const auto& [section, keys] : j.items()) {
    for (const auto& [key, value] : keys.items()) raw[section][key] = value.get<std::string>();
  }
  return raw;
}

std::string manifest_hash(const Json& manifest) {
  Json core = manifest;
  core.erase("timestamps");
  core.erase("outputs");
  core.erase("applied_defaults");
  core.erase("content_hash");
  if (core.contains("config") && core["config"].contains("run")) {
    core["config"]["run"].erase("out");
    core["config"]["run"].erase("workers");
  }
  return sha256_hex(core.dump());
}

RunRecord execute_run(const std::string& command, const ValidationResult& config, Json args) {
  if (!config.settings) throw DomainError("configuration did not validate");
  const auto& settings = *config.settings;
  embed_inputs(command, settings, args);
  const auto started = utc_now();
  RunRecord rec;
  rec.output = run_command(command, settings, args);
  const auto finished = utc_now();

  Json m{{"version", "manifest/1"},
         {"command", command},
         {"tool_version", kToolVersion},
         {"seed", settings.seed},
         {"config", config_to_json(config.normalized)},
         {"applied_defaults", config.applied_defaults},
         {"arguments", args},
         {"norm_fingerprint", rec.output.norm_fingerprint.empty() ? Json(nullptr) : Json(rec.output.norm_fingerprint)}};
  const auto hash = manifest_hash(m);
  rec.directory = std::filesystem::path(settings.out) / hash.substr(0, 16);
  std::filesystem::create_directories(rec.directory);
  Json outputs = Json::array();
  for (const auto& [name, content] : rec.output.files) {
    write_file(rec.directory / name, content);
    outputs.push_back(name);
  }
  m["timestamps"] = {{"started", started}, {"finished", finished}};
  m["outputs"] = outputs;
  m["content_hash"] = hash;
  write_file(rec.directory / "manifest.json", m.dump(2) + "\n");
  rec.manifest = std::move(m);
  return rec;
}

RunRecord replay_manifest(const Json& manifest, const std::string& out_root) {
  if (!manifest.is_object() || manifest.value("version", "") != "manifest/1") {
    throw DomainError("expected a \"manifest/1\" document");
  }
  auto raw = config_from_json(manifest.at("config"));
  if (!out_root.empty()) raw["run"]["out"] = out_root;
  auto config = validate_config(raw);
  if (!config.ok()) throw DomainError(fmt::format("manifest config invalid: {}", config.diagnostics.front().message));
  // The replayed manifest keeps the original list of applied defaults.
  config.applied_defaults = manifest.value("applied_defaults", std::vector<std::string>{});
  return execute_run(manifest.at("command").get<std::string>(), config, manifest.at("arguments"));
}

}  // namespace perclab
