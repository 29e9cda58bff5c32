#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>

#include "caloric/cli.hpp"
#include "caloric/errors.hpp"

namespace caloric::cli {

namespace {

struct Preset {
  std::string name;
  std::vector<std::pair<std::string, std::string>> keys;
};

// Acceptance fixtures. Widths are chosen so that every bump spans several cells and the data stays clear
// of the Dirichlet ring for the symmetry actions the commands apply.
const std::vector<Preset>& presets() {
  static const std::vector<Preset> p = {
      {"geodesic-gaussian",
       {{"data", "geodesic-gaussian"}, {"m", "2"}, {"n", "128"}, {"half_width", "16"}, {"sigma", "2"},
        {"amplitude", "1"}, {"velocity", "0.5"}, {"velocity_profile", "dipole"}, {"center_x", "0"}, {"center_y", "0"},
        {"s_max", "40"}}},
      {"multibump",
       {{"data", "multibump"}, {"m", "2"}, {"n", "128"}, {"half_width", "12"}, {"sigma", "1"}, {"amplitude", "0.8"},
        {"velocity", "0.4"}, {"s_max", "80"}}},
      {"random-smooth",
       {{"data", "random-smooth"}, {"m", "2"}, {"n", "64"}, {"half_width", "4.5"}, {"sigma", "0.5"},
        {"amplitude", "0.8"}, {"velocity", "0.5"}, {"bumps", "4"}, {"seed", "1"}, {"s_max", "0.05"},
        {"verify.s_max", "0.05"}}},
      {"dilation",
       {{"data", "geodesic-gaussian"}, {"m", "2"}, {"n", "256"}, {"half_width", "12"}, {"sigma", "0.75"},
        {"amplitude", "1"}, {"velocity", "0.5"}, {"velocity_profile", "dipole"}, {"s_max", "1"}, {"esd.identity", "false"},
        {"esd.oracle", "false"}, {"esd.dilation", "true"}, {"esd.dilation_s_lo", "0.05"}}},
      {"wave",
       {{"data", "geodesic-gaussian"}, {"m", "2"}, {"n", "256"}, {"half_width", "16"}, {"sigma", "1.5"},
        {"amplitude", "1"}, {"velocity", "0.5"}, {"velocity_profile", "gaussian"}, {"t_end", "1"},
        {"simulate.levels", "2"}, {"verify.levels", "2"}, {"verify.suite", "identities,tension"}}},
      {"offset-bump",
       {{"data", "geodesic-gaussian"}, {"m", "2"}, {"n", "160"}, {"half_width", "20"}, {"sigma", "1.2"},
        {"amplitude", "0.6"}, {"velocity", "0.3"}, {"velocity_profile", "gaussian"}, {"center_x", "0.5"},
        {"center_y", "-0.25"}, {"s_max", "8"}, {"localize.eps", "0.8"}}},
      {"two-scale",
       {{"data", "two-scale"}, {"m", "2"}, {"n", "192"}, {"half_width", "10"}, {"sigma", "1"}, {"scale_ratio", "8"},
        {"amplitude", "0.6"}, {"velocity", "0"}, {"s_max", "10"}, {"localize.require_gap", "true"},
        {"localize.gap_s_hi", "2"}, {"localize.roundtrip", "false"}, {"localize.dilation_check", "false"},
        {"localize.tightness_check", "false"}}},
  };
  return p;
}

// Uniform in [0, 1) from the top 53 bits, identical on every platform.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

Vec spatial_axis(int m, int a) {
  Vec v(m, 0.0);
  v[a % m] = 1.0;
  return v;
}

double support_radius(const DataPair& d, const Point2& c) {
  const auto e = energy_density(d);
  const GridSpec& g = d.phi0.grid();
  double r = 0.0;
  for (int iy = 0; iy < g.n; ++iy)
    for (int ix = 0; ix < g.n; ++ix)
      if (e.t00[g.index(ix, iy)] > 0.0) r = std::max(r, std::hypot(g.coord(ix) - c[0], g.coord(iy) - c[1]));
  return r + g.h;
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& p : presets()) out.push_back(p.name);
  return out;
}

void RunConfig::apply_preset(const std::string& name) {
  for (const auto& p : presets())
    if (p.name == name) {
      for (const auto& [k, v] : p.keys) set(k, v);
      return;
    }
  std::string all;
  for (const auto& n : preset_names()) all += (all.empty() ? "" : "|") + n;
  throw ConfigError("unknown preset '" + name + "' (expected " + all + ")");
}

GridSpec grid_of(const RunConfig& cfg) {
  try {
    return GridSpec::make(cfg.get_int("n"), cfg.get_double("half_width"), cfg.get_int("margin"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }
}

DataSetup make_data(const RunConfig& cfg, const GridSpec& g) {
  const int m = cfg.get_int("m");
  const auto base = HyperbolicPoint::basepoint(m);
  const std::string& kind = cfg.get_string("data");
  const double A = cfg.get_double("amplitude"), sigma = cfg.get_double("sigma"), v = cfg.get_double("velocity");
  const Point2 c{cfg.get_double("center_x"), cfg.get_double("center_y")};
  DataSetup s;
  s.kind = kind;
  s.center = c;
  try {
    if (kind == "constant") {
      s.data = DataPair::constant(g, base);
    } else if (kind == "geodesic-gaussian") {
      s.geodesic = true;
      s.direction = base_direction(base, spatial_axis(m, 0));
      const Profile u0 = gaussian_profile(A, sigma, c);
      Profile u1 = zero_profile();
      const std::string& vp = cfg.get_string("velocity_profile");
      if (vp == "gaussian") {
        u1 = gaussian_profile(v, sigma, c);
      } else if (vp == "dipole") {
        // zero mean, so every part of the heat-time spectrum decays like s^-3
        const Profile a = gaussian_profile(v, sigma, {c[0] + 0.5 * sigma, c[1]});
        const Profile b = gaussian_profile(v, sigma, {c[0] - 0.5 * sigma, c[1]});
        u1 = [a, b](double x, double y) { return a(x, y) - b(x, y); };
      }
      s.u0 = sample_profile(g, u0);
      s.u1 = sample_profile(g, u1);
      s.data = make_geodesic_data(g, base, s.direction, s.u0, s.u1);
    } else if (kind == "multibump") {
      Bump a;
      a.amplitude = A;
      a.scale = sigma;
      a.center = {c[0] - sigma, c[1]};
      a.direction = base_direction(base, spatial_axis(m, 0));
      a.velocity = v;
      a.velocity_direction = base_direction(base, spatial_axis(m, 1));
      Bump b = a;
      b.center = {c[0] + sigma, c[1] + 0.6 * sigma};
      b.direction = base_direction(base, spatial_axis(m, 1));
      Vec diag(m, 0.0);
      diag[0] = diag[1] = 1.0;
      b.velocity_direction = base_direction(base, diag);
      auto r = make_multibump_data(g, base, {a, b});
      s.data = std::move(r.data);
      s.warnings = std::move(r.warnings);
    } else if (kind == "random-smooth") {
      std::mt19937_64 rng(static_cast<std::uint64_t>(cfg.get_int("seed")));
      std::vector<Bump> bumps;
      const int count = cfg.get_int("bumps");
      for (int i = 0; i < count; ++i) {
        Bump b;
        const double r = 2.0 * sigma * std::sqrt(unit(rng)), th = 2.0 * M_PI * unit(rng);
        b.center = {c[0] + r * std::cos(th), c[1] + r * std::sin(th)};
        b.scale = sigma * (0.7 + 0.6 * unit(rng));
        b.amplitude = A * (0.5 + 0.5 * unit(rng));
        Vec dir(m), vdir(m);
        for (int a = 0; a < m; ++a) dir[a] = 2.0 * unit(rng) - 1.0;
        for (int a = 0; a < m; ++a) vdir[a] = 2.0 * unit(rng) - 1.0;
        b.direction = base_direction(base, dir);
        b.velocity = v * (2.0 * unit(rng) - 1.0);
        b.velocity_direction = base_direction(base, vdir);
        bumps.push_back(std::move(b));
      }
      auto r = make_multibump_data(g, base, bumps);
      s.data = std::move(r.data);
      s.warnings = std::move(r.warnings);
    } else if (kind == "two-scale") {
      // a narrow bump inside a wide one, pointing in different directions; compact profiles keep
      // the wide one inside a small box
      Bump a;
      a.compact = true;
      a.amplitude = A;
      a.scale = sigma;
      a.center = c;
      a.direction = base_direction(base, spatial_axis(m, 0));
      a.velocity = v;
      Bump b = a;
      b.scale = sigma * cfg.get_double("scale_ratio");
      b.direction = base_direction(base, spatial_axis(m, 1));
      auto r = make_multibump_data(g, base, {a, b});
      s.data = std::move(r.data);
      s.warnings = std::move(r.warnings);
    } else {
      throw ConfigError("key 'data': unknown kind '" + kind + "'");
    }
  } catch (const SupportError& e) {
    std::ostringstream os;
    os << "data: " << e.what() << " (set half_width >= " << e.required_half_width << ")";
    throw ConfigError(os.str());
  }
  s.support_radius = support_radius(s.data, c);
  return s;
}

}  // namespace caloric::cli
