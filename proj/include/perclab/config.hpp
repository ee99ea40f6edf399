#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "perclab/lattice.hpp"
#include "perclab/steiner.hpp"

namespace perclab {

/// section -> key -> raw value.
using RawConfig = std::map<std::string, std::map<std::string, std::string>>;

/// Parses INI text. Throws DomainError with the line number on syntax errors.
RawConfig parse_ini(const std::string& text);

/// Applies "section.key=value".
void apply_override(RawConfig& raw, const std::string& assignment);

struct Settings {
  std::uint64_t seed = 0;
  unsigned workers = 0;  // 0: environment or hardware default
  std::string out;

  LatticeConfig lattice;      // box_radius resolved per command when auto
  bool auto_box_radius = true;
  std::size_t enumeration_cap = 24;
  double ci_level = 0.95;
  double gate_ci_level = 0.99;
  std::uint64_t replicates = 100000;

  std::vector<int> norm_scales;
  std::uint64_t norm_replicates = 0;
  std::string norm_directions;
  std::string norm_model;

  SteinerOptions steiner;
  int max_terminals = 6;

  double epsilon = 0.5;
  std::vector<int> harness_scales;
  std::uint64_t harness_replicates = 0;
  std::vector<std::uint64_t> budgets;
  std::uint64_t min_acceptances = 30;
  double boundary_touch_max = 1e-3;
  std::string points;
  std::string set;

  /// Normal quantile for ci_level.
  double z() const;
  double gate_z() const;
  unsigned effective_workers() const;
  /// Budget for the i-th harness scale.
  std::uint64_t budget(std::size_t i) const { return budgets.size() == 1 ? budgets[0] : budgets.at(i); }
};

struct Diagnostic {
  std::string field;
  std::string message;
  bool infeasible = false;  // well-formed but violates a precondition
};

struct ValidationResult {
  RawConfig normalized;  // every known key, canonical formatting
  std::vector<std::string> applied_defaults;
  std::vector<Diagnostic> diagnostics;
  std::optional<Settings> settings;  // present when diagnostics is empty

  bool ok() const { return diagnostics.empty(); }
  bool infeasible_only() const;
  /// Normalized INI in canonical section and key order.
  std::string ini() const;
};

/// Fills defaults, checks types and ranges, rejects unknown keys.
ValidationResult validate_config(const RawConfig& raw);

/// (section, key, default) in canonical order.
struct KeySpec {
  const char* section;
  const char* key;
  const char* default_value;
  const char* help;
};
const std::vector<KeySpec>& config_keys();

}  // namespace perclab
