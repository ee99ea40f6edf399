#include "perclab/config.hpp"

#include <fmt/format.h>

#include <boost/algorithm/string.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <limits>
#include <set>
#include <sstream>

#include "perclab/errors.hpp"
#include "perclab/parallel.hpp"

namespace perclab {

RawConfig parse_ini(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw DomainError(fmt::format("config line {}: {}", e.line(), e.message()));
  }
  RawConfig raw;
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      throw DomainError(fmt::format("config key '{}' is outside any section", section));
    }
    for (const auto& [key, value] : body) raw[section][key] = boost::algorithm::trim_copy(value.data());
  }
  return raw;
}

void apply_override(RawConfig& raw, const std::string& assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
    throw DomainError(fmt::format("override '{}' is not of the form section.key=value", assignment));
  }
  raw[assignment.substr(0, dot)][assignment.substr(dot + 1, eq - dot - 1)] =
      boost::algorithm::trim_copy(assignment.substr(eq + 1));
}

const std::vector<KeySpec>& config_keys() {
  static const std::vector<KeySpec> keys = {
      {"run", "seed", "0", "master seed"},
      {"run", "workers", "0", "worker threads, 0 = PERCLAB_WORKERS or hardware"},
      {"run", "out", "runs", "output root; each run writes to <out>/<manifest hash>"},
      {"lattice", "dimension", "2", "d >= 2"},
      {"lattice", "scale", "1", "lattice spacing 1/n"},
      {"lattice", "p", "0.2", "bond probability"},
      {"lattice", "p_c_bound", "auto", "subcritical bound; auto = 0.5 (d = 2), 0.2 (d >= 3)"},
      {"lattice", "box_radius", "auto", "box [-R, R]^d in lattice units; auto sizes from the inputs"},
      {"percolation", "enumeration_cap", "24", "largest edge count for exact enumeration"},
      {"percolation", "ci_level", "0.95", "reported confidence level"},
      {"percolation", "gate_ci_level", "0.99", "confidence level of test gates"},
      {"percolation", "replicates", "100000", "Monte Carlo replicates"},
      {"norm", "scales", "2,4,6,8", "scales of the decay tables"},
      {"norm", "replicates", "100000", "replicates per scale and direction"},
      {"norm", "directions", "default", "default or x,y;x,y;..."},
      {"norm", "model", "euclidean", "euclidean, l1, linf, weighted-l2:w1,w2,... or a corr-norm/1 file"},
      {"steiner", "tol", "1e-09", "certified relative objective gap"},
      {"steiner", "tie_rel", "1e-06", "relative tolerance for tied minimal trees"},
      {"steiner", "geometric_tol", "1e-06", "collapse and dedupe distance"},
      {"steiner", "max_iterations", "100000", "iterations per topology"},
      {"steiner", "max_terminals", "6", "terminal cap, origin included"},
      {"harness", "epsilon", "0.5", "Hausdorff radius"},
      {"harness", "scales", "2,4,8", "scales of rate and concentration runs"},
      {"harness", "replicates", "10000", "replicates per scale for rates"},
      {"harness", "budget", "100000", "rejection budget, one value or one per scale"},
      {"harness", "min_acceptances", "30", "acceptances needed for a conclusive scale"},
      {"harness", "boundary_touch_max", "0.001", "boundary-touch fraction that flags a scale"},
      {"harness", "points", "", "conditioning points x,y;x,y;..."},
      {"harness", "set", "origin", "origin, polyline x,y;x,y;... from the origin, or an omega-set/1 file"},
  };
  return keys;
}

namespace {

template <class T>
T parse_integer(const std::string& s) {
  T v{};
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || s.empty()) throw std::invalid_argument(fmt::format("'{}' is not an integer", s));
  return v;
}

double parse_double(const std::string& s) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (s.empty() || pos != s.size() || !std::isfinite(v)) throw std::invalid_argument(fmt::format("'{}' is not a number", s));
  return v;
}

template <class T>
std::vector<T> parse_list(const std::string& s, const std::function<T(const std::string&)>& item) {
  std::vector<std::string> parts;
  boost::algorithm::split(parts, s, boost::is_any_of(","));
  std::vector<T> out;
  for (auto& p : parts) out.push_back(item(boost::algorithm::trim_copy(p)));
  return out;
}

using Normalizer = std::function<std::string(const std::string&)>;

Normalizer integer_in(long long lo, long long hi) {
  return [=](const std::string& s) {
    const auto v = parse_integer<long long>(s);
    if (v < lo || v > hi) throw std::invalid_argument(fmt::format("{} outside [{}, {}]", v, lo, hi));
    return std::to_string(v);
  };
}

Normalizer unsigned64(std::uint64_t lo) {
  return [=](const std::string& s) {
    const auto v = parse_integer<std::uint64_t>(s);
    if (v < lo) throw std::invalid_argument(fmt::format("{} is below {}", v, lo));
    return std::to_string(v);
  };
}

Normalizer real(double lo, double hi, bool open_lo, bool open_hi) {
  return [=](const std::string& s) {
    const double v = parse_double(s);
    if (v < lo || v > hi || (open_lo && v == lo) || (open_hi && v == hi)) {
      throw std::invalid_argument(fmt::format("{} outside {}{}, {}{}", v, open_lo ? "(" : "[", lo, hi, open_hi ? ")" : "]"));
    }
    return fmt::format("{}", v);
  };
}

Normalizer or_auto(Normalizer inner) {
  return [=](const std::string& s) { return s == "auto" ? s : inner(s); };
}

Normalizer scale_list() {
  return [](const std::string& s) {
    const auto v = parse_list<int>(s, [](const std::string& x) { return parse_integer<int>(x); });
    for (int n : v) {
      if (n < 1) throw std::invalid_argument("scales must be >= 1");
    }
    return fmt::format("{}", fmt::join(v, ","));
  };
}

Normalizer budget_list() {
  return [](const std::string& s) {
    const auto v = parse_list<std::uint64_t>(s, [](const std::string& x) { return parse_integer<std::uint64_t>(x); });
    for (auto b : v) {
      if (b < 1) throw std::invalid_argument("budgets must be >= 1");
    }
    return fmt::format("{}", fmt::join(v, ","));
  };
}

Normalizer text() {
  return [](const std::string& s) { return s; };
}

const std::map<std::string, Normalizer>& normalizers() {
  constexpr double inf = std::numeric_limits<double>::infinity();
  static const std::map<std::string, Normalizer> n = {
      {"run.seed", unsigned64(0)},
      {"run.workers", integer_in(0, 4096)},
      {"run.out", text()},
      {"lattice.dimension", integer_in(2, 8)},
      {"lattice.scale", integer_in(1, 1 << 20)},
      {"lattice.p", real(0, 1, false, false)},
      {"lattice.p_c_bound", or_auto(real(0, 1, true, false))},
      {"lattice.box_radius", or_auto(integer_in(1, 1 << 20))},
      {"percolation.enumeration_cap", integer_in(1, 30)},
      {"percolation.ci_level", real(0, 1, true, true)},
      {"percolation.gate_ci_level", real(0, 1, true, true)},
      {"percolation.replicates", unsigned64(1)},
      {"norm.scales", scale_list()},
      {"norm.replicates", unsigned64(1)},
      {"norm.directions", text()},
      {"norm.model", text()},
      {"steiner.tol", real(0, inf, true, false)},
      {"steiner.tie_rel", real(0, inf, false, false)},
      {"steiner.geometric_tol", real(0, inf, true, false)},
      {"steiner.max_iterations", integer_in(1, 100000000)},
      {"steiner.max_terminals", integer_in(2, kMaxSteinerTerminals)},
      {"harness.epsilon", real(0, inf, true, false)},
      {"harness.scales", scale_list()},
      {"harness.replicates", unsigned64(1)},
      {"harness.budget", budget_list()},
      {"harness.min_acceptances", unsigned64(1)},
      {"harness.boundary_touch_max", real(0, 1, false, false)},
      {"harness.points", text()},
      {"harness.set", text()},
  };
  return n;
}

std::vector<int> int_list(const std::string& s) {
  return parse_list<int>(s, [](const std::string& x) { return parse_integer<int>(x); });
}

}  // namespace

double Settings::z() const {
  return boost::math::quantile(boost::math::normal(), 0.5 + 0.5 * ci_level);
}

double Settings::gate_z() const {
  return boost::math::quantile(boost::math::normal(), 0.5 + 0.5 * gate_ci_level);
}

unsigned Settings::effective_workers() const { return workers > 0 ? workers : default_workers(); }

bool ValidationResult::infeasible_only() const {
  return !diagnostics.empty() &&
         std::all_of(diagnostics.begin(), diagnostics.end(), [](const Diagnostic& d) { return d.infeasible; });
}

std::string ValidationResult::ini() const {
  std::string out;
  std::string section;
  for (const auto& k : config_keys()) {
    if (k.section != section) {
      if (!section.empty()) out += "\n";
      section = k.section;
      out += fmt::format("[{}]\n", section);
    }
    const auto s = normalized.find(k.section);
    const std::string value = s == normalized.end() ? "" : s->second.at(k.key);
    out += fmt::format("{}={}\n", k.key, value);
  }
  return out;
}

ValidationResult validate_config(const RawConfig& raw) {
  ValidationResult res;
  std::set<std::string> known;
  for (const auto& k : config_keys()) known.insert(std::string(k.section) + "." + k.key);
  for (const auto& [section, keys] : raw) {
    for (const auto& [key, value] : keys) {
      const auto field = section + "." + key;
      if (!known.count(field)) res.diagnostics.push_back({field, "unknown key", false});
    }
  }
  for (const auto& k : config_keys()) {
    const auto field = std::string(k.section) + "." + k.key;
    std::string value = k.default_value;
    bool defaulted = true;
    if (auto s = raw.find(k.section); s != raw.end()) {
      if (auto v = s->second.find(k.key); v != s->second.end()) {
        value = v->second;
        defaulted = false;
      }
    }
    if (defaulted) res.applied_defaults.push_back(fmt::format("{}={}", field, value));
    try {
      value = normalizers().at(field)(value);
    } catch (const std::exception& e) {
      res.diagnostics.push_back({field, e.what(), false});
    }
    res.normalized[k.section][k.key] = value;
  }
  if (!res.diagnostics.empty()) return res;

  const auto& n = res.normalized;
  auto get = [&](const char* s, const char* k) -> const std::string& { return n.at(s).at(k); };
  Settings st;
  st.seed = parse_integer<std::uint64_t>(get("run", "seed"));
  st.workers = unsigned(parse_integer<int>(get("run", "workers")));
  st.out = get("run", "out");
  st.lattice.dimension = parse_integer<int>(get("lattice", "dimension"));
  st.lattice.scale = parse_integer<int>(get("lattice", "scale"));
  st.lattice.p = parse_double(get("lattice", "p"));
  if (get("lattice", "p_c_bound") != "auto") st.lattice.p_c_override = parse_double(get("lattice", "p_c_bound"));
  st.auto_box_radius = get("lattice", "box_radius") == "auto";
  st.lattice.box_radius = st.auto_box_radius ? 1 : parse_integer<int>(get("lattice", "box_radius"));
  st.enumeration_cap = parse_integer<std::size_t>(get("percolation", "enumeration_cap"));
  st.ci_level = parse_double(get("percolation", "ci_level"));
  st.gate_ci_level = parse_double(get("percolation", "gate_ci_level"));
  st.replicates = parse_integer<std::uint64_t>(get("percolation", "replicates"));
  st.norm_scales = int_list(get("norm", "scales"));
  st.norm_replicates = parse_integer<std::uint64_t>(get("norm", "replicates"));
  st.norm_directions = get("norm", "directions");
  st.norm_model = get("norm", "model");
  st.steiner.tol = parse_double(get("steiner", "tol"));
  st.steiner.tie_rel = parse_double(get("steiner", "tie_rel"));
  st.steiner.geometric_tol = parse_double(get("steiner", "geometric_tol"));
  st.steiner.max_iterations = parse_integer<std::size_t>(get("steiner", "max_iterations"));
  st.max_terminals = parse_integer<int>(get("steiner", "max_terminals"));
  st.epsilon = parse_double(get("harness", "epsilon"));
  st.harness_scales = int_list(get("harness", "scales"));
  st.harness_replicates = parse_integer<std::uint64_t>(get("harness", "replicates"));
  st.budgets = parse_list<std::uint64_t>(get("harness", "budget"),
                                         [](const std::string& x) { return parse_integer<std::uint64_t>(x); });
  st.min_acceptances = parse_integer<std::uint64_t>(get("harness", "min_acceptances"));
  st.boundary_touch_max = parse_double(get("harness", "boundary_touch_max"));
  st.points = get("harness", "points");
  st.set = get("harness", "set");
  st.steiner.workers = st.effective_workers();

  if (st.budgets.size() != 1 && st.budgets.size() != st.harness_scales.size()) {
    res.diagnostics.push_back({"harness.budget",
                               fmt::format("{} budgets for {} scales; give one or one per scale", st.budgets.size(),
                                           st.harness_scales.size()),
                               false});
  }
  const double bound = effective_p_c_bound(st.lattice);
  if (st.lattice.p >= bound) {
    res.diagnostics.push_back({"lattice.p",
                               fmt::format("p = {} is not below p_c_bound({}) = {}", st.lattice.p,
                                           st.lattice.dimension, bound),
                               true});
  }
  if (res.diagnostics.empty()) res.settings = st;
  return res;
}

}  // namespace perclab
