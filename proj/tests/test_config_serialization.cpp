#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "perclab/commands.hpp"
#include "perclab/config.hpp"
#include "perclab/correlation_norm.hpp"
#include "perclab/errors.hpp"
#include "perclab/manifest.hpp"
#include "perclab/serialization.hpp"

using namespace perclab;
namespace fs = std::filesystem;

namespace {

Vector v2(double x, double y) { return Eigen::Vector2d(x, y); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("perclab_test_" + name);
  fs::remove_all(dir);
  return dir;
}

ValidationResult configure(const std::vector<std::string>& overrides) {
  RawConfig raw;
  for (const auto& o : overrides) apply_override(raw, o);
  return validate_config(raw);
}

bool has_diagnostic(const ValidationResult& r, const std::string& field) {
  for (const auto& d : r.diagnostics) {
    if (d.field == field) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("ini parsing") {
  const auto raw = parse_ini("[lattice]\np = 0.3\n\n[run]\nseed=7\n");
  CHECK(raw.at("lattice").at("p") == "0.3");
  CHECK(raw.at("run").at("seed") == "7");
  CHECK_THROWS_AS(parse_ini("[lattice\np=1\n"), DomainError);
  RawConfig r;
  apply_override(r, "harness.epsilon=0.4");
  CHECK(r["harness"]["epsilon"] == "0.4");
  CHECK_THROWS_AS(apply_override(r, "epsilon=0.4"), DomainError);
  CHECK_THROWS_AS(apply_override(r, "harness.epsilon"), DomainError);
}

TEST_CASE("validation examples") {
  const auto defaults = validate_config({});
  REQUIRE(defaults.ok());
  CHECK(defaults.applied_defaults.size() == config_keys().size());
  CHECK(defaults.settings->lattice.p == 0.2);
  CHECK(defaults.settings->harness_scales == std::vector<int>{2, 4, 8});

  const auto hot = configure({"lattice.p=0.7"});
  CHECK_FALSE(hot.ok());
  CHECK(hot.infeasible_only());
  CHECK(has_diagnostic(hot, "lattice.p"));

  const auto unknown = configure({"lattice.q=1"});
  CHECK_FALSE(unknown.ok());
  CHECK_FALSE(unknown.infeasible_only());
  CHECK_FALSE(configure({"widgets.p=1"}).ok());
  CHECK_FALSE(configure({"lattice.p=abc"}).ok());
  CHECK_FALSE(configure({"lattice.dimension=1"}).ok());
  CHECK_FALSE(configure({"harness.budget=1,2"}).ok());  // 3 scales
  const auto per_scale = configure({"harness.budget=10,20,30"});
  REQUIRE(per_scale.ok());
  CHECK(per_scale.settings->budget(2) == 30);
  CHECK(configure({"harness.budget=5"}).settings->budget(1) == 5);
}

TEST_CASE("normalized configuration is canonical and idempotent") {
  const auto a = configure({"lattice.p=.30", "run.seed=0012", "harness.scales=2, 4,6"});
  REQUIRE(a.ok());
  const auto text = a.ini();
  const auto b = validate_config(parse_ini(text));
  REQUIRE(b.ok());
  CHECK(b.ini() == text);
  CHECK(b.applied_defaults.empty());
  CHECK(a.normalized.at("lattice").at("p") == "0.3");
  CHECK(a.normalized.at("run").at("seed") == "12");
  CHECK(config_from_json(config_to_json(a.normalized)) == a.normalized);
}

TEST_CASE("serialization round trips") {
  const auto set = PolygonalSet(2, {{v2(0, 0), v2(1, 0.5)}, {v2(0, 0), v2(-0.25, 1)}});
  const auto back = polygonal_set_from_json(to_json(set));
  CHECK(hausdorff_distance(set, back) == 0.0);
  CHECK(to_json(back) == to_json(set));
  CHECK_THROWS_AS(polygonal_set_from_json(Json{{"format", "nope"}}), DomainError);

  std::vector<RateFit> fits;
  for (int j = 0; j < 5; ++j) {
    RateFit f;
    f.direction = v2(std::cos(0.3 * j), std::sin(0.3 * j));
    f.slope = 1.0 + 0.1 * j;
    f.per_scale.push_back({1, std::numeric_limits<double>::infinity(), 0.5, 2.0, 10, 0, 0.0});
    fits.push_back(f);
  }
  const auto model = build_norm_model(fits);
  const auto j = to_json(model);
  const auto model2 = norm_model_from_json(j);
  CHECK(to_json(model2).dump() == j.dump());
  CHECK(norm_fingerprint(model2) == norm_fingerprint(model));
  CHECK(std::isinf(model2.fits[0].per_scale[0].neg_log_p));
  for (const Vector& u : {v2(1, 2), v2(-3, 0.5)}) CHECK(model2(u) == model(u));

  // the fingerprint covers the gauge, not its provenance
  auto bare = model;
  bare.fits.clear();
  bare.boundary_samples.clear();
  CHECK(norm_fingerprint(bare) == norm_fingerprint(model));
  CHECK(norm_fingerprint(NormModel::euclidean(2)) != norm_fingerprint(NormModel::l1(2)));
  CHECK(norm_fingerprint(NormModel::euclidean(2)) == norm_fingerprint(NormModel::euclidean(2)));
  for (const auto& g : {NormModel::euclidean(3), NormModel::linf(2), NormModel::weighted_l2(v2(1, 2))}) {
    CHECK(norm_fingerprint(norm_model_from_json(to_json(g))) == norm_fingerprint(g));
  }
  CHECK(vector_from_json(vector_to_json(v2(0.1, -3))) == v2(0.1, -3));
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("number formatting") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(2.0) == "2");
  CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_number(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(format_number(std::nan("")) == "nan");
  CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("point parsing") {
  CHECK(parse_points("1,0;0.5,0.5", 2).size() == 2);
  CHECK(parse_points("1,0 0.5,0.5", 2)[1] == v2(0.5, 0.5));
  CHECK(parse_points("", 2).empty());
  CHECK_THROWS_AS(parse_point("1,2,3", 2), DomainError);
  CHECK_THROWS_AS(parse_point("1,x", 2), DomainError);
}

TEST_CASE("manifest replay reproduces outputs byte for byte") {
  const auto root = scratch("replay");
  for (const auto& [command, extra] : std::vector<std::pair<std::string, std::vector<std::string>>>{
           {"ldp-rate", {"harness.replicates=2000", "harness.scales=4,8"}},
           {"concentration", {"harness.points=1,0", "harness.scales=2,4", "harness.budget=3000", "harness.epsilon=0.4"}},
           {"conditioned", {"harness.points=1,0", "harness.scales=2", "harness.budget=2000"}},
           {"steiner", {}}}) {
    std::vector<std::string> o{"run.seed=3", "run.workers=1", "run.out=" + (root / "a").string()};
    o.insert(o.end(), extra.begin(), extra.end());
    Json args = Json::object();
    if (command == "steiner") args["terminals"] = Json::array({Json::array({1, 0}), Json::array({0.5, 0.8})});
    const auto first = execute_run(command, configure(o), args);
    CHECK(first.directory.filename().string() == first.manifest["content_hash"].get<std::string>().substr(0, 16));
    CHECK(manifest_hash(first.manifest) == first.manifest["content_hash"].get<std::string>());

    const auto recorded = Json::parse(slurp(first.directory / "manifest.json"));
    const auto again = replay_manifest(recorded, (root / "b").string());
    CHECK(again.directory.filename() == first.directory.filename());
    REQUIRE_FALSE(first.output.files.empty());
    for (const auto& [name, content] : first.output.files) {
      CHECK_FALSE(content.empty());
      CHECK(slurp(first.directory / name) == content);
      CHECK(slurp(again.directory / name) == content);
    }

    o[1] = "run.workers=8";
    o[2] = "run.out=" + (root / "c").string();
    const auto parallel = execute_run(command, configure(o), args);
    CHECK(parallel.directory.filename() == first.directory.filename());
    for (const auto& [name, content] : first.output.files) {
      CHECK(slurp(parallel.directory / name) == slurp(first.directory / name));
    }
  }
  CHECK_THROWS_AS(replay_manifest(Json{{"version", "other"}}), DomainError);
  fs::remove_all(root);
}

TEST_CASE("seed changes the run") {
  const auto root = scratch("seed");
  auto run = [&](int seed) {
    return execute_run("ldp-rate",
                       configure({"run.seed=" + std::to_string(seed), "run.out=" + root.string(),
                                  "harness.replicates=500", "harness.scales=4,8"}),
                       Json::object());
  };
  const auto a = run(1);
  const auto b = run(2);
  CHECK(a.directory != b.directory);
  fs::remove_all(root);
}
