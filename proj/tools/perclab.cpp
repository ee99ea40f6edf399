// perclab command-line runner.

#include <CLI11.hpp>
#include <fmt/format.h>

#include <fstream>
#include <iostream>
#include <sstream>

#include "perclab/commands.hpp"
#include "perclab/config.hpp"
#include "perclab/errors.hpp"
#include "perclab/manifest.hpp"
#include "perclab/serialization.hpp"

using namespace perclab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitInfeasible = 3;

int report_error(int code, const std::string& kind, const std::string& message, Json diagnostics = Json::array()) {
  Json j{{"error", kind}, {"message", message}, {"exit_code", code}, {"diagnostics", std::move(diagnostics)}};
  std::cerr << j.dump() << "\n";
  return code;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError(fmt::format("cannot open '{}'", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Flags {
  std::string config;
  std::vector<std::string> overrides;
  std::optional<std::string> seed, workers, out, p, dimension, scale, box_radius, p_c_bound, epsilon, scales,
      replicates, budget, points, gauge, omega_set;
};

// Flag -> config key; some keys depend on the subcommand.
void apply_flags(const Flags& f, const std::string& command, RawConfig& raw) {
  auto put = [&](const std::optional<std::string>& v, const char* section, const char* key) {
    if (v) raw[section][key] = *v;
  };
  put(f.seed, "run", "seed");
  put(f.workers, "run", "workers");
  put(f.out, "run", "out");
  put(f.p, "lattice", "p");
  put(f.dimension, "lattice", "dimension");
  put(f.scale, "lattice", "scale");
  put(f.box_radius, "lattice", "box_radius");
  put(f.p_c_bound, "lattice", "p_c_bound");
  put(f.epsilon, "harness", "epsilon");
  put(f.budget, "harness", "budget");
  put(f.points, "harness", "points");
  put(f.gauge, "norm", "model");
  put(f.omega_set, "harness", "set");
  if (command == "estimate-norm") {
    put(f.scales, "norm", "scales");
    put(f.replicates, "norm", "replicates");
  } else if (command == "ldp-rate") {
    put(f.scales, "harness", "scales");
    put(f.replicates, "harness", "replicates");
  } else {
    put(f.scales, "harness", "scales");
    put(f.replicates, "percolation", "replicates");
  }
  for (const auto& o : f.overrides) apply_override(raw, o);
}

Json diagnostics_json(const ValidationResult& v) {
  Json d = Json::array();
  for (const auto& x : v.diagnostics) d.push_back({{"field", x.field}, {"message", x.message}, {"infeasible", x.infeasible}});
  return d;
}

Json point_array(const std::vector<std::string>& items, int dimension) {
  Json a = Json::array();
  for (const auto& s : items) {
    for (const auto& v : parse_points(s, dimension)) a.push_back(vector_to_json(v));
  }
  return a;
}

int guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const SubcriticalityViolation& e) {
    return report_error(kExitInfeasible, "subcriticality_violation", e.what());
  } catch (const EnumerationCapExceeded& e) {
    return report_error(kExitInfeasible, "enumeration_cap_exceeded", e.what());
  } catch (const DomainError& e) {
    return report_error(kExitInvalid, "invalid_input", e.what());
  } catch (const ComputationFailure& e) {
    return report_error(kExitFailure, "computation_failure", e.what());
  } catch (const Json::exception& e) {
    return report_error(kExitInvalid, "invalid_json", e.what());
  } catch (const std::exception& e) {
    return report_error(kExitFailure, "error", e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Subcritical bond percolation lab"};
  app.require_subcommand(1);
  app.fallthrough();
  Flags f;
  app.add_option("--config", f.config, "INI configuration file");
  app.add_option("--set", f.overrides, "Override section.key=value")->take_all();
  app.add_option("--seed", f.seed, "Master seed");
  app.add_option("--workers", f.workers, "Worker threads (default: PERCLAB_WORKERS or hardware)");
  app.add_option("--out", f.out, "Output root directory");
  app.add_option("--p", f.p, "Bond probability");
  app.add_option("--dimension", f.dimension, "Lattice dimension");
  app.add_option("--n", f.scale, "Lattice scale n (spacing 1/n)");
  app.add_option("--box-radius", f.box_radius, "Box radius in lattice units");
  app.add_option("--p-c-bound", f.p_c_bound, "Override the subcritical bound");
  app.add_option("--epsilon", f.epsilon, "Hausdorff radius");
  app.add_option("--scales", f.scales, "Comma-separated scales");
  app.add_option("--replicates", f.replicates, "Replicates");
  app.add_option("--budget", f.budget, "Rejection budget(s), comma-separated");
  app.add_option("--points", f.points, "Conditioning points x,y;x,y");
  app.add_option("--gauge", f.gauge, "euclidean, l1, linf, weighted-l2:w1,w2 or a corr-norm/1 file");
  app.add_option("--omega-set", f.omega_set, "origin, polyline x,y;x,y or an omega-set/1 file");

  auto* sample = app.add_subcommand("sample", "Sample one configuration and its origin cluster");
  std::uint64_t replicate = 0;
  sample->add_option("--replicate", replicate, "Replicate index");

  auto* oracle = app.add_subcommand("oracle", "Exact event probability by enumeration");
  std::string event = "point-in-cluster";
  std::vector<std::string> targets;
  bool unit_square = false, monte_carlo = false;
  std::optional<double> inner, outer;
  int precision = 4;
  oracle->add_option("--event", event, "point-in-cluster, points-in-cluster, hausdorff-ball, "
                                       "constrained-connection, annulus-crossing");
  oracle->add_option("--target", targets, "Target point(s) x,y")->take_all();
  oracle->add_flag("--unit-square", unit_square, "Restrict to the unit square [0,1]^d");
  oracle->add_option("--inner", inner, "Annulus inner radius");
  oracle->add_option("--outer", outer, "Annulus outer radius");
  oracle->add_flag("--monte-carlo", monte_carlo, "Also report a Monte Carlo estimate");
  oracle->add_option("--precision", precision, "Printed decimals");

  auto* estimate = app.add_subcommand("estimate-norm", "Measure decay rates and build a norm model");
  std::optional<std::string> directions;
  estimate->add_option("--directions", directions, "default or x,y;x,y");

  auto* build = app.add_subcommand("build-norm", "Build a norm model from saved fits");
  std::string fits_path;
  build->add_option("--fits", fits_path, "fits JSON array or corr-norm/1 file")->required();

  auto* steiner = app.add_subcommand("steiner", "All minimal Steiner trees through the origin");
  std::vector<std::string> terminals;
  steiner->add_option("--terminals", terminals, "Terminal points x,y (origin is added)")->take_all()->required();

  auto* ldp = app.add_subcommand("ldp-rate", "Finite-scale rates of Hausdorff-ball events");
  auto* conditioned = app.add_subcommand("conditioned", "Rejection-sample conditioned clusters");
  auto* concentration = app.add_subcommand("concentration", "Steiner concentration of conditioned clusters");
  auto* selftest = app.add_subcommand("selftest", "Run the built-in example suite");
  auto* validate = app.add_subcommand("validate", "Validate and normalize a configuration");
  auto* replay = app.add_subcommand("replay", "Re-run an experiment from its manifest");
  std::string manifest_path;
  replay->add_option("manifest", manifest_path, "manifest.json")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error(kExitInvalid, "usage", e.what());
  }

  CLI::App* chosen = app.get_subcommands().front();
  const std::string command = chosen->get_name();

  return guarded([&]() -> int {
    if (command == "replay") {
      const auto manifest = Json::parse(read_text(manifest_path));
      const auto rec = replay_manifest(manifest, f.out.value_or(""));
      std::cout << rec.output.summary << "run " << rec.directory.string() << "\n";
      return rec.output.success ? kExitOk : kExitFailure;
    }

    RawConfig raw;
    if (!f.config.empty()) raw = parse_ini(read_text(f.config));
    apply_flags(f, command, raw);
    if (directions) raw["norm"]["directions"] = *directions;
    const auto config = validate_config(raw);

    if (command == "validate") {
      if (!config.ok()) {
        return report_error(config.infeasible_only() ? kExitInfeasible : kExitInvalid,
                            config.infeasible_only() ? "infeasible_config" : "invalid_config",
                            "configuration rejected", diagnostics_json(config));
      }
      std::cout << config.ini();
      for (const auto& d : config.applied_defaults) std::cerr << "default " << d << "\n";
      return kExitOk;
    }
    if (!config.ok()) {
      return report_error(config.infeasible_only() ? kExitInfeasible : kExitInvalid,
                          config.infeasible_only() ? "infeasible_config" : "invalid_config",
                          "configuration rejected", diagnostics_json(config));
    }
    const int d = config.settings->lattice.dimension;
    Json args = Json::object();
    if (chosen == sample) args["replicate"] = replicate;
    if (chosen == oracle) {
      args["event"] = event;
      args["targets"] = point_array(targets, d);
      args["unit_square"] = unit_square;
      args["monte_carlo"] = monte_carlo;
      args["precision"] = precision;
      if (inner) args["inner"] = *inner;
      if (outer) args["outer"] = *outer;
    }
    if (chosen == build) args["fits_path"] = fits_path;
    if (chosen == steiner) args["terminals"] = point_array(terminals, d);
    (void)estimate;
    (void)ldp;
    (void)conditioned;
    (void)concentration;
    (void)selftest;

    const auto rec = execute_run(command, config, std::move(args));
    std::cout << rec.output.summary << "run " << rec.directory.string() << "\n";
    return rec.output.success ? kExitOk : kExitFailure;
  });
}
