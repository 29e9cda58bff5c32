#include <cmath>
#include <random>
#include <vector>

#include "caloric/localization.hpp"
#include "doctest.h"

using namespace caloric;

namespace {

Vec e1_at(const HyperbolicPoint& base) { return base_direction(base, {1, 0}); }

// Profile on a ladder with f(s) = hat(log s) / s: the log trapezoid integrates it exactly when the
// hat's knots are ladder points, so masses have a closed form.
struct Hat {
  double a, b, c, height;  // knots in log s
  double operator()(double t) const {
    if (t <= a || t >= c) return 0.0;
    return t < b ? height * (t - a) / (b - a) : height * (c - t) / (c - b);
  }
  // integral of the hat over [t0, t1]
  double mass(double t0, double t1) const {
    auto F = [&](double t) {
      t = std::clamp(t, a, c);
      if (t <= b) return 0.5 * height * (t - a) * (t - a) / (b - a);
      return 0.5 * height * (b - a) + height * ((t - b) - 0.5 * (t - b) * (t - b) / (c - b));
    };
    return F(t1) - F(t0);
  }
};

ESDProfile hat_profile(const std::vector<Hat>& hats, int k_lo, int k_hi, double rho = 1.1) {
  ESDProfile p;
  p.s.push_back(0.0);
  for (int k = k_lo; k <= k_hi; ++k) p.s.push_back(std::pow(rho, k));
  for (double s : p.s) {
    double f = 0.0;
    if (s > 0.0)
      for (const Hat& h : hats) f += h(std::log(s)) / s;
    p.esd.push_back(f);
  }
  p.weight = ladder_weights(p.s);
  for (size_t k = 0; k < p.s.size(); ++k) p.integral += p.weight[k] * p.esd[k];
  p.tail.method = "zero";
  p.s_max = p.s.back();
  return p;
}

Hat hat_at(int k_a, int k_b, int k_c, double height, double rho = 1.1) {
  const double l = std::log(rho);
  return {k_a * l, k_b * l, k_c * l, height};
}

EnergyDensityField density(const GridSpec& g, const std::function<double(double, double)>& f) {
  EnergyDensityField e{g, Vec(g.cells(), 0.0)};
  for (int iy = 0; iy < g.n; ++iy)
    for (int ix = 0; ix < g.n; ++ix) e.t00[g.index(ix, iy)] = f(g.coord(ix), g.coord(iy));
  return e;
}

}  // namespace

TEST_CASE("cumulative mass agrees with the ladder quadrature") {
  const auto p = hat_profile({hat_at(-20, -5, 10, 1.0)}, -40, 30);
  for (size_t K = 2; K < p.s.size(); K += 7) {
    const std::vector<double> s(p.s.begin(), p.s.begin() + K);
    const auto w = ladder_weights(s);
    double acc = 0.0;
    for (size_t k = 0; k < K; ++k) acc += w[k] * p.esd[k];
    CHECK(esd_cumulative(p, s.back()) == doctest::Approx(acc).epsilon(1e-13));
  }
  // exact for the hat, including off-ladder endpoints
  const Hat h = hat_at(-20, -5, 10, 1.0);
  const double l = std::log(1.1);
  CHECK(esd_total(p) == doctest::Approx(0.5 * 30 * l).epsilon(1e-12));
  CHECK(esd_cumulative(p, std::exp(-11.3 * l)) == doctest::Approx(h.mass(-1e9, -11.3 * l)).epsilon(1e-12));
}

TEST_CASE("frequency scale on constructed profiles") {
  const double l = std::log(1.1);
  // two humps; the first carries eps / 4, so the eps / 2 level is reached inside the second
  const Hat first = hat_at(-60, -50, -40, 1.0);
  const double m1 = first.mass(-1e9, 1e9);
  const double eps = 4.0 * m1;
  const Hat second = hat_at(0, 10, 20, 10.0 * m1 / (10 * l));
  const auto p = hat_profile({first, second}, -80, 40);
  const double s0 = find_frequency_scale(p, eps);
  CHECK(s0 > std::exp(-40 * l));
  CHECK(s0 >= 1.0);
  // smallest ladder point reaching eps / 2
  CHECK(esd_cumulative(p, s0) >= 0.5 * eps);
  size_t k = 0;
  while (p.s[k] != s0) ++k;
  CHECK(esd_cumulative(p, p.s[k - 1]) < 0.5 * eps);
  CHECK_THROWS_AS(find_frequency_scale(p, esd_total(p)), std::invalid_argument);
}

TEST_CASE("pigeonhole gap") {
  const double l = std::log(1.1);
  SUBCASE("disjoint support") {
    // supported in [1/2, 2], scanned over [10, 100]
    const auto p = hat_profile({hat_at(-7, 0, 7, 1.0)}, -60, 80);
    const auto g = pigeonhole_gap(p, 10, 100, {2, 3});
    CHECK(g.floor_met);
    CHECK(g.mass == 0.0);
    CHECK(g.K == 3);
  }
  SUBCASE("uniform profile has no gap") {
    ESDProfile p;
    p.s.push_back(0.0);
    for (int k = -30; k <= 60; ++k) p.s.push_back(std::pow(1.1, k));
    for (double s : p.s) p.esd.push_back(s > 0 ? 1.0 / s : 1.0 / p.s[1]);
    p.weight = ladder_weights(p.s);
    for (size_t k = 0; k < p.s.size(); ++k) p.integral += p.weight[k] * p.esd[k];
    p.tail.method = "zero";
    const auto g = pigeonhole_gap(p, 1.0, 10.0, {4, 2});
    CHECK_FALSE(g.floor_met);
    // brute-force minimum over the same scan
    double best = 1e300;
    for (double K : {4.0, 2.0})
      for (double s : p.s)
        if (s >= 1.0 && s <= 10.0) best = std::min(best, esd_cumulative(p, K * s) - esd_cumulative(p, s / K));
    CHECK(g.mass == doctest::Approx(best));
    CHECK(g.K == 2);
  }
  SUBCASE("two humps far apart") {
    // humps centred at s = 1 and s = 1e3, each a decade and a half wide
    const int k3 = static_cast<int>(std::round(3 * std::log(10) / l));
    const Hat a = hat_at(-18, 0, 18, 1.0), b = hat_at(k3 - 18, k3, k3 + 18, 1.0);
    const auto p = hat_profile({a, b}, -60, k3 + 60);
    const auto g = pigeonhole_gap(p, 2.0, 500.0, {50, 20, 10, 5, 3, 2});
    CHECK(g.floor_met);
    CHECK(g.K >= 5);
    CHECK(g.s_prime > 10.0);
    CHECK(g.s_prime < 100.0);
    // the reported annulus mass matches the closed form
    const double t0 = std::log(g.s_prime / g.K), t1 = std::log(g.s_prime * g.K);
    CHECK(g.mass == doctest::Approx(a.mass(t0, t1) + b.mass(t0, t1)).epsilon(1e-10));
    // no larger K admits a gap anywhere in the range (brute force)
    for (double K : {50.0, 20.0, 10.0, 5.0, 3.0, 2.0}) {
      if (K <= g.K) break;
      for (double s : p.s)
        if (s >= 2.0 && s <= 500.0) CHECK(a.mass(std::log(s / K), std::log(s * K)) + b.mass(std::log(s / K), std::log(s * K)) > 1e-12 * esd_total(p));
    }
  }
  CHECK_THROWS_AS(pigeonhole_gap(hat_profile({hat_at(-7, 0, 7, 1.0)}, -10, 10), 5.0, 1.0, {2}), std::invalid_argument);
}

TEST_CASE("spatial centre: accelerated scan equals the exhaustive scan") {
  const auto g = GridSpec::make(24, 3.0);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    EnergyDensityField e{g, Vec(g.cells())};
    const bool sparse = trial % 2 == 0;
    for (double& v : e.t00) v = sparse ? (U(rng) < 0.05 ? U(rng) : 0.0) : U(rng);
    for (double r : {0.2, 0.55, 1.3}) {
      const auto a = find_spatial_center(e, r);
      const auto b = find_spatial_center_bruteforce(e, r);
      CHECK(a.cell == b.cell);
      CHECK(a.captured == b.captured);
    }
  }
}

TEST_CASE("spatial centre cases") {
  const auto g = GridSpec::make(48, 3.0);
  SUBCASE("single bump") {
    const Point2 x0{0.63, -0.41};
    const auto e = density(g, [&](double x, double y) { return std::exp(-((x - x0[0]) * (x - x0[0]) + (y - x0[1]) * (y - x0[1])) / 0.18); });
    const auto c = find_spatial_center(e, 0.5);
    CHECK(std::abs(c.x[0] - x0[0]) <= g.h);
    CHECK(std::abs(c.x[1] - x0[1]) <= g.h);
  }
  SUBCASE("zero density") {
    const auto c = find_spatial_center(density(g, [](double, double) { return 0.0; }), 0.5);
    CHECK(c.cell == 0);
    CHECK(c.captured == 0.0);
  }
  SUBCASE("two equal bumps") {
    // mirror images across x = 0 on lattice points; the lower cell index wins
    const double a = 8 * g.h;
    auto bump = [](double x, double y) { return std::exp(-(x * x + y * y) / 0.1); };
    const auto e = density(g, [&](double x, double y) { return bump(x - a, y) + bump(x + a, y); });
    const auto c = find_spatial_center(e, 0.4);
    CHECK(c.x[0] == doctest::Approx(-a));
    CHECK(c.x[1] == doctest::Approx(0.0));
  }
}

TEST_CASE("spatial centre moves with lattice translations") {
  const auto g = GridSpec::make(48, 4.0);
  const auto base = HyperbolicPoint::basepoint(2);
  const auto d = make_geodesic_data(g, base, e1_at(base), gaussian_profile(0.7, 0.3, {0.4, -0.2}),
                                    gaussian_profile(0.3, 0.3, {0.2, 0.1}));
  const auto c0 = find_spatial_center(energy_density(d), 0.5);
  for (Point2 shift : {Point2{3 * g.h, 0.0}, Point2{-2 * g.h, 5 * g.h}}) {
    const auto c1 = find_spatial_center(energy_density(sym_translate(d, shift)), 0.5);
    CHECK(c1.x[0] == doctest::Approx(c0.x[0] + shift[0]).epsilon(1e-12));
    CHECK(c1.x[1] == doctest::Approx(c0.x[1] + shift[1]).epsilon(1e-12));
  }
}

TEST_CASE("concentration radius against the radial tail") {
  const auto g = GridSpec::make(128, 4.0);
  const double sig = 0.4;
  const auto e = density(g, [&](double x, double y) { return std::exp(-(x * x + y * y) / (2 * sig * sig)); });
  const double total = e.total();
  double prev = 0.0;
  for (double frac : {0.5, 0.2, 0.1, 0.01, 1e-3}) {
    const double eps = frac * total;
    const double R = concentration_radius(e, {0, 0}, eps);
    // exterior of a Gaussian: total * exp(-R^2 / 2 sigma^2)
    const double R_exact = sig * std::sqrt(-2 * std::log(frac));
    CHECK(std::abs(R - R_exact) < 2 * g.h);
    CHECK(R >= prev);  // smaller eps, larger radius
    prev = R;
  }
  CHECK(concentration_radius(e, {0, 0}, total) == 0.0);
  // everything but the centre cell may lie outside: R is 0 or one cell
  const double centre = g.h * g.h * e.t00[g.index(g.n / 2, g.n / 2)];
  CHECK(concentration_radius(e, {0, 0}, total - 0.5 * centre) <= g.h * (1 + 1e-12));
}

TEST_CASE("frequency scale of a geodesic bump and its dilation") {
  // For u0 = A exp(-r^2 / 2 sigma^2), ESD(s) is proportional to (2s + sigma^2)^-3, so the fraction of the
  // mass below s is 1 - (sigma^2 / (2s + sigma^2))^2 and the eps / 2 level sits at
  // s* = sigma^2 / 2 ((1 - eps / 2)^-1/2 - 1).
  const auto base = HyperbolicPoint::basepoint(2);
  const double sigma = 0.5;
  const auto g = GridSpec::make(128, 8.0);
  const auto d = make_geodesic_data(g, base, e1_at(base), gaussian_profile(0.6, sigma), zero_profile());
  LadderParams p;
  p.s_max = 4.0;
  const auto prof = esd(d, p);
  LadderParams q = p;
  q.s_max = 16.0;
  const auto prof2 = esd(sym_dilate(d, 2.0), q);
  for (double frac : {0.2, 0.8}) {
    const double s0 = find_frequency_scale(prof, frac * esd_total(prof));
    const double expect = 0.5 * sigma * sigma * (1.0 / std::sqrt(1.0 - 0.5 * frac) - 1.0);
    MESSAGE("eps " << frac << " s0 " << s0 << " continuum " << expect);
    CHECK(s0 >= expect * (1 - 1e-9));
    CHECK(s0 <= expect * 1.1 * 1.02);
    const double s1 = find_frequency_scale(prof2, frac * esd_total(prof2));
    MESSAGE("dilated s0 " << s1);
    CHECK(s1 / s0 >= 4.0 / 1.1 * (1 - 1e-12));
    CHECK(s1 / s0 <= 4.0 * 1.1 * (1 + 1e-12));
    if (frac == 0.8) {
      CHECK(s0 >= sigma * sigma / 10);
      CHECK(s0 <= 10 * sigma * sigma);
    }
  }
}

TEST_CASE("tightness report") {
  const auto base = HyperbolicPoint::basepoint(2);
  const auto g = GridSpec::make(64, 6.0);
  LadderParams p;
  p.s_max = 2.0;
  CarryOptions carry;
  carry.frames = true;
  SUBCASE("constant data") {
    const auto d = DataPair::constant(g, base);
    carry.sections = {d.phi1};
    const auto L = heat_flow(d.phi0, p, carry);
    const auto t = tightness_report(derivative_fields(L, transported_gauge(L), 0), 0.01, 1.0, {0.5, 1.0, 2.0});
    for (const auto& r : t.rows) {
      CHECK(r.psi_s_exterior == 0.0);
      CHECK(r.psi_s_outside == 0.0);
      CHECK(r.psi_t_exterior == 0.0);
    }
  }
  SUBCASE("compact bump") {
    const auto d = make_geodesic_data(g, base, e1_at(base), compact_bump_profile(0.8, 0.6), compact_bump_profile(0.4, 0.6));
    carry.sections = {d.phi1};
    const auto L = heat_flow(d.phi0, p, carry);
    const std::vector<double> R{0.4, 0.6, 0.8, 1.0, 1.2};
    const auto t = tightness_report(derivative_fields(L, transported_gauge(L), 0), 0.01, 0.3, R);
    for (size_t i = 1; i < t.rows.size(); ++i) {
      CHECK(t.rows[i].psi_s_exterior <= t.rows[i - 1].psi_s_exterior);
      CHECK(t.rows[i].psi_s_outside <= t.rows[i - 1].psi_s_outside);
      CHECK(t.rows[i].psi_t_exterior <= t.rows[i - 1].psi_t_exterior);
      CHECK(t.rows[i].psi_s_outside >= t.rows[i].psi_s_exterior);
    }
    // least-squares slope of log mass against log R
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& r : t.rows) {
      const double x = std::log(r.R), y = std::log(r.psi_s_exterior);
      sx += x, sy += y, sxx += x * x, sxy += x * y;
    }
    const double nrow = static_cast<double>(t.rows.size());
    const double slope = (nrow * sxy - sx * sy) / (nrow * sxx - sx * sx);
    MESSAGE("tightness exponent " << slope);
    CHECK(slope <= -1.5);
  }
}

TEST_CASE("normalization by the symmetries") {
  const auto base = HyperbolicPoint::basepoint(2);
  const auto g = GridSpec::make(160, 20.0);
  const Point2 x0{0.5, -0.25};
  const auto d = make_geodesic_data(g, base, e1_at(base), gaussian_profile(0.6, 1.2, x0), gaussian_profile(0.3, 1.2, x0));
  LocalizationParams lp;
  lp.ladder.s_max = 8.0;
  lp.eps = 0.8;
  const auto r0 = localize(d, lp);
  MESSAGE("scale " << r0.s_scale << " centre " << r0.x_center[0] << " " << r0.x_center[1]);
  CHECK(std::abs(r0.x_center[0] - x0[0]) <= g.h);
  CHECK(std::abs(r0.x_center[1] - x0[1]) <= g.h);
  for (size_t i = 1; i < r0.radius_table.size(); ++i) CHECK(r0.radius_table[i].second >= r0.radius_table[i - 1].second);

  const auto n = normalize_data(d, r0.s_scale, r0.x_center);
  // the dilation changes the resolution of the bump; see the next case for the resolved bound
  CHECK(total_energy(n) == doctest::Approx(total_energy(d)).epsilon(1e-2));
  const auto r1 = localize(n, lp);
  MESSAGE("normalized scale " << r1.s_scale << " centre " << r1.x_center[0] << " " << r1.x_center[1]);
  CHECK(r1.s_scale >= 1 / 1.1 * (1 - 1e-12));
  CHECK(r1.s_scale <= 1.1 * (1 + 1e-12));
  CHECK(std::abs(r1.x_center[0]) <= g.h);
  CHECK(std::abs(r1.x_center[1]) <= g.h);
}

TEST_CASE("normalization preserves the energy") {
  // relative change is O(h^2) from the change of resolution and below 1e-3 once the bump spans 20 cells
  const auto base = HyperbolicPoint::basepoint(2);
  std::vector<double> rel;
  for (int n : {160, 320, 640}) {
    const auto g = GridSpec::make(n, 20.0);
    const Point2 x0{0.5, -0.25};
    const auto d = make_geodesic_data(g, base, e1_at(base), gaussian_profile(0.6, 1.2, x0), gaussian_profile(0.3, 1.2, x0));
    rel.push_back(std::abs(total_energy(normalize_data(d, 0.26, x0)) / total_energy(d) - 1));
  }
  MESSAGE("relative energy change " << rel[0] << " " << rel[1] << " " << rel[2]);
  CHECK(rel[0] / rel[1] > 3.0);
  CHECK(rel[1] / rel[2] > 3.0);
  CHECK(rel[2] < 1e-3);
}
