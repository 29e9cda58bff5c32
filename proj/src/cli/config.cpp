#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "caloric/cli.hpp"
#include "caloric/errors.hpp"

namespace caloric::cli {

namespace {

KeySpec integer(std::string name, int fallback, double lo, double hi, std::string help) {
  return {std::move(name), KeyType::integer, std::to_string(fallback), lo, hi, {}, std::move(help)};
}
KeySpec real(std::string name, std::string fallback, double lo, double hi, std::string help) {
  return {std::move(name), KeyType::real, std::move(fallback), lo, hi, {}, std::move(help)};
}
KeySpec text(std::string name, std::string fallback, std::vector<std::string> choices, std::string help) {
  return {std::move(name), KeyType::text, std::move(fallback), 0, 0, std::move(choices), std::move(help)};
}
KeySpec flag(std::string name, bool fallback, std::string help) {
  return {std::move(name), KeyType::boolean, fallback ? "true" : "false", 0, 0, {}, std::move(help)};
}
KeySpec list(std::string name, std::string fallback, std::string help) {
  return {std::move(name), KeyType::real_list, std::move(fallback), -1e300, 1e300, {}, std::move(help)};
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

const KeySpec& spec_of(const std::string& key) {
  for (const KeySpec& k : key_specs())
    if (k.name == key) return k;
  throw ConfigError("unknown key '" + key + "'");
}

double parse_real(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty() || !std::isfinite(x)) throw ConfigError("key '" + key + "': '" + v + "' is not a finite number");
  return x;
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_real(key, trim(item)));
  if (out.empty()) throw ConfigError("key '" + key + "': empty list");
  return out;
}

void check_range(const KeySpec& k, double x) {
  if (x < k.lo || x > k.hi) {
    std::ostringstream os;
    os << "key '" << k.name << "': " << x << " outside [" << k.lo << ", " << k.hi << "]";
    throw ConfigError(os.str());
  }
}

// Normalizes and validates a value for its key.
std::string normalized(const KeySpec& k, const std::string& value) {
  const std::string v = trim(value);
  switch (k.type) {
    case KeyType::integer: {
      const double x = parse_real(k.name, v);
      if (x != std::floor(x)) throw ConfigError("key '" + k.name + "': '" + v + "' is not an integer");
      check_range(k, x);
      return std::to_string(static_cast<long long>(x));
    }
    case KeyType::real: {
      const double x = parse_real(k.name, v);
      check_range(k, x);
      return format_number(x);
    }
    case KeyType::boolean:
      if (v == "true" || v == "1" || v == "yes") return "true";
      if (v == "false" || v == "0" || v == "no") return "false";
      throw ConfigError("key '" + k.name + "': '" + v + "' is not a boolean");
    case KeyType::real_list: {
      std::string out;
      for (double x : parse_list(k.name, v)) {
        check_range(k, x);
        out += (out.empty() ? "" : ",") + format_number(x);
      }
      return out;
    }
    case KeyType::text:
      if (!k.choices.empty()) {
        for (const auto& c : k.choices)
          if (c == v) return v;
        std::string all;
        for (const auto& c : k.choices) all += (all.empty() ? "" : "|") + c;
        throw ConfigError("key '" + k.name + "': '" + v + "' is not one of " + all);
      }
      return v;
  }
  return v;
}

}  // namespace

const std::vector<KeySpec>& key_specs() {
  static const std::vector<KeySpec> specs = {
      // problem
      integer("m", 2, 1, 8, "target dimension"),
      integer("n", 128, 16, 4096, "cells per side"),
      real("half_width", "8", 1e-6, 1e6, "half side length L of the square"),
      integer("margin", 2, 2, 64, "Dirichlet ring width in cells"),
      integer("seed", 1, 0, 4294967295.0, "seed of the random-smooth generator"),
      text("data", "geodesic-gaussian", {"constant", "geodesic-gaussian", "multibump", "random-smooth", "two-scale"},
           "initial data generator"),
      real("amplitude", "1", 0, 1e3, "bump amplitude (geodesic distance)"),
      real("sigma", "1", 1e-6, 1e6, "bump width"),
      real("velocity", "0.5", -1e3, 1e3, "velocity profile amplitude"),
      text("velocity_profile", "dipole", {"dipole", "gaussian", "zero"}, "phi1 profile of geodesic data"),
      real("center_x", "0", -1e6, 1e6, "data centre"),
      real("center_y", "0", -1e6, 1e6, "data centre"),
      integer("bumps", 4, 1, 64, "bump count of random-smooth data"),
      real("scale_ratio", "8", 1, 1e6, "radius ratio of the two-scale bumps"),
      // wave solver
      real("cfl", "0.25", 1e-6, 0.5, "time step / h"),
      real("t_end", "1", 1e-12, 1e6, "final time of simulate"),
      integer("outputs", 8, 1, 100000, "output slices of simulate"),
      integer("simulate.levels", 0, 0, 6, "grid halvings of the geodesic oracle study (coarser grids)"),
      real("simulate.drift_tol", "1e-4", 0, 1, "relative energy drift bound"),
      real("simulate.leak_tol", "1e-6", 0, 1, "light-cone leak bound relative to E"),
      real("simulate.oracle_order", "1.9", 0, 10, "minimum order of the geodesic oracle error"),
      // heat flow
      real("rho", "1.1", 1.0001, 4, "ladder ratio"),
      real("s_min", "0", 0, 1e6, "smallest positive ladder point (0: h^2/4)"),
      real("s_max", "10", 1e-12, 1e9, "largest ladder point"),
      real("substep_c", "0.2", 1e-6, 4, "substeps satisfy ds <= c h^2 (above 0.25 the flow is unstable and aborts)"),
      real("energy_tol", "1e-10", 0, 1, "allowed relative Dirichlet energy increase"),
      real("flat_tol", "1e-3", 1e-15, 1e3, "flatness tolerance of heatflow"),
      flag("heatflow.require_flat", false, "fail when the map is not flat by s_max"),
      // energy spectral density
      flag("esd.identity", true, "check the energy identity (needs a ladder long enough for the tail)"),
      real("esd.identity_tol", "1e-3", 0, 1, "energy identity bound"),
      flag("esd.oracle", true, "compare geodesic data with the scalar spectral oracle"),
      real("esd.oracle_s_max", "10", 0, 1e9, "oracle window upper end (lower end 4 h^2)"),
      real("esd.oracle_tol", "0.01", 0, 1, "relative oracle bound"),
      flag("esd.symmetry", true, "translation and time-reversal checks"),
      real("esd.symmetry_tol", "1e-10", 0, 1, "translation and time-reversal bound"),
      integer("esd.translation_cells", 4, -1000, 1000, "lattice shift along y of the translation check"),
      real("esd.translation_s_hi", "0.25", 0, 1e9, "translation comparison window end"),
      flag("esd.dilation", false, "dilation check"),
      real("esd.dilation_lambda", "2", 1e-3, 1e3, "dilation factor"),
      real("esd.dilation_s_lo", "0", 0, 1e9, "dilation comparison window start"),
      real("esd.dilation_tol", "0.01", 0, 1, "dilation bound"),
      // identity suite
      text("verify.suite", "identities,covariant", {}, "comma list of identities, tension, covariant, metric"),
      integer("verify.levels", 0, 0, 6, "grid halvings below n (refinement study)"),
      real("verify.s_max", "0.05", 1e-12, 1e9, "ladder end of the identity study"),
      real("verify.s_floor", "0.01", 0, 1e9, "identity residuals are taken over s >= s_floor"),
      text("verify.gauge", "transported", {"transported", "caloric"}, "frames of the identity study"),
      real("verify.abelian_tol", "1e-8", 0, 1, "bound of the abelian residuals"),
      real("verify.order_min", "1.9", 0, 10, "minimum refinement order"),
      real("verify.tension_tol", "1e-3", 0, 1, "bound of ||w|| / sqrt(E)"),
      real("verify.tension_ratio", "3.5", 0, 100, "minimum reduction of ||w|| per halving"),
      integer("verify.tension_step", 8, 2, 1000000, "wave step (on the coarsest grid) where w is evaluated"),
      real("verify.dominance_tol", "1e-6", 0, 1, "dominance bound relative to sup |u0|"),
      real("verify.covariant_s_max", "1", 1e-12, 1e9, "ladder end of the covariant heat checks"),
      real("verify.mass_order_min", "1", 0, 10, "minimum refinement order of the mass-diffusion residual"),
      real("verify.metric_flat_tol", "1e-4", 1e-15, 1e3, "flatness tolerance of the caloric gauge in the metric checks"),
      real("verify.metric_s_max", "200", 1e-12, 1e9, "heat-time cap of the metric checks"),
      real("verify.metric_angle", "1.1", -10, 10, "rotation angle of the quotient check"),
      real("verify.metric_tol", "1e-8", 0, 1, "bound of d(Psi, Psi) and of the quotient distance"),
      real("verify.metric_energy_tol", "1e-3", 0, 1, "relative bound of |d(Psi, 0)^2 - E|"),
      // localization
      real("localize.eps", "0.5", 1e-12, 1e300, "frequency threshold relative to the total ESD mass (< 1)"),
      real("localize.radius_factor", "2", 1e-6, 1e6, "centre scan radius in units of sqrt(s0)"),
      list("localize.K_list", "100,50,20,10,5,2", "pigeonhole K values"),
      real("localize.gap_floor", "-1", -1, 1e300, "absolute annulus floor (negative: 1e-12 of the total)"),
      list("localize.tightness_R", "0.5,1,2,4", "tightness radii in units of sqrt(s0)"),
      real("localize.tightness_exponent", "-1.5", -100, 100, "bound of the fitted tightness exponent"),
      flag("localize.dilation_check", true, "frequency-scale equivariance under dilation by 2"),
      flag("localize.require_gap", false, "fail without a gap record between the scales"),
      real("localize.gap_s_hi", "0", 0, 1e300, "upper end of the pigeonhole window (0: s_max)"),
      flag("localize.roundtrip", true, "normalize_data round trip"),
      flag("localize.tightness_check", true, "check monotonicity and the fitted exponent of the tightness table"),
  };
  return specs;
}

RunConfig::RunConfig() {
  for (const KeySpec& k : key_specs()) values_[k.name] = normalized(k, k.fallback);
}

void RunConfig::set(const std::string& key, const std::string& value) {
  const KeySpec& k = spec_of(trim(key));
  values_[k.name] = normalized(k, value);
}

void RunConfig::set_assignment(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + assignment + "'");
  set(assignment.substr(0, eq), assignment.substr(eq + 1));
}

void RunConfig::load_text(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    try {
      if (line.rfind("preset", 0) == 0 && line.find('=') != std::string::npos &&
          trim(line.substr(0, line.find('='))) == "preset") {
        apply_preset(trim(line.substr(line.find('=') + 1)));
      } else {
        set_assignment(line);
      }
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + std::to_string(number) + ": " + e.what());
    }
  }
}

void RunConfig::load_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  load_text(ss.str(), path);
}

const std::string& RunConfig::raw(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown key '" + key + "'");
  return it->second;
}

int RunConfig::get_int(const std::string& key) const { return static_cast<int>(std::stoll(raw(key))); }
double RunConfig::get_double(const std::string& key) const { return std::stod(raw(key)); }
bool RunConfig::get_bool(const std::string& key) const { return raw(key) == "true"; }
const std::string& RunConfig::get_string(const std::string& key) const { return raw(key); }
std::vector<double> RunConfig::get_list(const std::string& key) const { return parse_list(key, raw(key)); }

std::string RunConfig::canonical() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
  return out;
}

std::string RunConfig::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void RunConfig::validate() const {
  if (get_int("n") % 2 != 0) throw ConfigError("key 'n': must be even so that the origin is a node");
  if (2 * get_int("margin") + 4 > get_int("n")) throw ConfigError("key 'margin': leaves no interior");
  if (get_double("localize.eps") >= 1.0)
    throw ConfigError("key 'localize.eps': must be below the total ESD mass (relative value < 1)");
  for (double K : get_list("localize.K_list"))
    if (!(K > 1.0)) throw ConfigError("key 'localize.K_list': every K must exceed 1");
  for (double R : get_list("localize.tightness_R"))
    if (!(R > 0.0)) throw ConfigError("key 'localize.tightness_R': radii must be positive");
  std::stringstream ss(get_string("verify.suite"));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item != "identities" && item != "tension" && item != "covariant" && item != "metric")
      throw ConfigError("key 'verify.suite': unknown entry '" + item + "'");
  }
  const std::string& kind = get_string("data");
  if ((kind == "multibump" || kind == "two-scale") && get_int("m") < 2)
    throw ConfigError("key 'data': " + kind + " needs m >= 2");
  if (get_double("s_min") > 0.0 && get_double("s_min") > get_double("s_max"))
    throw ConfigError("key 's_min': exceeds s_max");
}

std::string format_number(double v) {
  // shortest of 15..17 significant digits that reads back exactly
  char buf[40];
  for (int digits = 15; digits <= 17; ++digits) {
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

}  // namespace caloric::cli
