#include "caloric/localization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "caloric/grid.hpp"

namespace caloric {

double esd_total(const ESDProfile& p) { return p.integral + p.tail.value; }

double esd_cumulative(const ESDProfile& p, double x) {
  const auto& s = p.s;
  const auto& f = p.esd;
  if (s.empty() || x <= 0.0) return 0.0;
  if (s.size() == 1) return 0.0;
  double acc = 0.0;
  // [0, s_1]: trapezoid in s
  if (x < s[1]) {
    const double fx = f[0] + (f[1] - f[0]) * x / s[1];
    return 0.5 * x * (f[0] + fx);
  }
  acc += 0.5 * s[1] * (f[0] + f[1]);
  for (size_t k = 1; k + 1 < s.size(); ++k) {
    const double ga = s[k] * f[k], gb = s[k + 1] * f[k + 1];
    const double full = std::log(s[k + 1] / s[k]);
    if (x < s[k + 1]) {
      const double t = std::log(x / s[k]);
      const double gx = ga + (gb - ga) * t / full;
      return acc + 0.5 * t * (ga + gx);
    }
    acc += 0.5 * full * (ga + gb);
  }
  if (x > s.back()) acc += p.tail.value;
  return acc;
}

double find_frequency_scale(const ESDProfile& p, double eps) {
  const double total = esd_total(p);
  if (!(total > 0.0)) throw std::invalid_argument("find_frequency_scale: profile has no mass");
  if (!(eps > 0.0) || eps >= total) throw std::invalid_argument("find_frequency_scale: eps must lie in (0, total mass)");
  for (double s : p.s)
    if (esd_cumulative(p, s) >= 0.5 * eps) return s;
  return p.s.back();
}

GapResult pigeonhole_gap(const ESDProfile& p, double s_lo, double s_hi, std::vector<double> K_list, double floor) {
  if (!(s_lo < s_hi)) throw std::invalid_argument("pigeonhole_gap: empty range");
  if (K_list.empty()) throw std::invalid_argument("pigeonhole_gap: empty K list");
  std::vector<double> centres;
  for (double s : p.s)
    if (s >= s_lo && s <= s_hi && s > 0.0) centres.push_back(s);
  if (centres.empty()) throw std::invalid_argument("pigeonhole_gap: no ladder point in range");
  std::sort(K_list.begin(), K_list.end(), std::greater<>());
  const double cap = floor < 0.0 ? 1e-12 * esd_total(p) : floor;
  GapResult best;
  bool have = false;
  for (double K : K_list) {
    if (!(K > 1.0)) throw std::invalid_argument("pigeonhole_gap: K must exceed 1");
    const double threshold = std::max(std::pow(K, -100.0), cap);
    for (double sp : centres) {
      const double mass = std::max(0.0, esd_cumulative(p, K * sp) - esd_cumulative(p, sp / K));
      if (mass <= threshold) return {sp, K, mass, true};
      if (!have || mass < best.mass) {
        best = {sp, K, mass, false};
        have = true;
      }
    }
  }
  return best;
}

namespace {

Point2 cell_point(const GridSpec& g, int c) { return {g.coord(c % g.n), g.coord(c / g.n)}; }

}  // namespace

CenterResult find_spatial_center_bruteforce(const EnergyDensityField& e, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("find_spatial_center: r must be positive");
  const GridSpec& g = e.grid;
  CenterResult best{cell_point(g, 0), 0, local_energy(e, cell_point(g, 0), r)};
  for (int c = 1; c < g.cells(); ++c) {
    const double v = local_energy(e, cell_point(g, c), r);
    if (v > best.captured) best = {cell_point(g, c), c, v};
  }
  return best;
}

CenterResult find_spatial_center(const EnergyDensityField& e, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("find_spatial_center: r must be positive");
  const GridSpec& g = e.grid;
  const int n = g.n;
  double total = 0.0;
  for (double v : e.t00) total += v;
  if (!(total > 0.0)) return {cell_point(g, 0), 0, local_energy(e, cell_point(g, 0), r)};

  // summed-area table of the density; a square of half-side k >= r/h contains the disk
  std::vector<double> S(static_cast<size_t>(n + 1) * (n + 1), 0.0);
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix)
      S[(iy + 1) * (n + 1) + ix + 1] = e.t00[g.index(ix, iy)] + S[iy * (n + 1) + ix + 1] + S[(iy + 1) * (n + 1) + ix] -
                                       S[iy * (n + 1) + ix];
  const int k = static_cast<int>(std::floor(r / g.h)) + 1;
  std::vector<double> bound(g.cells());
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) {
      const int x0 = std::max(0, ix - k), x1 = std::min(n, ix + k + 1);
      const int y0 = std::max(0, iy - k), y1 = std::min(n, iy + k + 1);
      const double v = S[y1 * (n + 1) + x1] - S[y0 * (n + 1) + x1] - S[y1 * (n + 1) + x0] + S[y0 * (n + 1) + x0];
      bound[g.index(ix, iy)] = g.h * g.h * v;
    }
  std::vector<int> order(g.cells());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return bound[a] > bound[b]; });
  // the table's differences carry rounding of the order of eps * total
  const double slack = 1e-10 * g.h * g.h * total;
  CenterResult best;
  bool have = false;
  for (int c : order) {
    if (have && bound[c] + slack < best.captured) break;
    const double v = local_energy(e, cell_point(g, c), r);
    if (!have || v > best.captured || (v == best.captured && c < best.cell)) {
      best = {cell_point(g, c), c, v};
      have = true;
    }
  }
  return best;
}

double concentration_radius(const EnergyDensityField& e, const Point2& x, double eps) {
  const GridSpec& g = e.grid;
  const double h2 = g.h * g.h;
  std::vector<std::pair<double, double>> cells;  // (distance, mass)
  cells.reserve(g.cells());
  double total = 0.0;
  for (int c = 0; c < g.cells(); ++c) {
    const Point2 p = cell_point(g, c);
    const double m = h2 * e.t00[c];
    total += m;
    cells.emplace_back(std::hypot(p[0] - x[0], p[1] - x[1]), m);
  }
  if (eps >= total) return 0.0;
  std::sort(cells.begin(), cells.end());
  // suffix[i]: mass of cells i.. (summed from the far end)
  std::vector<double> suffix(cells.size() + 1, 0.0);
  for (size_t i = cells.size(); i-- > 0;) suffix[i] = suffix[i + 1] + cells[i].second;
  // exterior of R = mass strictly farther than R
  auto exterior = [&](double R) {
    const auto it = std::upper_bound(cells.begin(), cells.end(), std::make_pair(R, std::numeric_limits<double>::infinity()));
    return suffix[static_cast<size_t>(it - cells.begin())];
  };
  if (exterior(0.0) <= eps) return 0.0;
  // exterior is nonincreasing along the sorted distances: bisection over them
  size_t lo = 0, hi = cells.size() - 1;
  while (lo < hi) {
    const size_t mid = (lo + hi) / 2;
    if (exterior(cells[mid].first) <= eps)
      hi = mid;
    else
      lo = mid + 1;
  }
  return cells[lo].first;
}

DataPair normalize_data(const DataPair& d, double s0, const Point2& x) {
  if (!(s0 > 0.0)) throw std::invalid_argument("normalize_data: s0 must be positive");
  return sym_dilate(sym_translate(d, {-x[0], -x[1]}), 1.0 / std::sqrt(s0));
}

TightnessReport tightness_report(const DifferentiatedFields& f, double s_lo, double s_hi, const std::vector<double>& R_list) {
  TightnessReport t;
  t.s_lo = s_lo;
  t.s_hi = s_hi;
  const GridSpec& g = f.grid;
  const int m = f.m;
  const double h2 = g.h * g.h;
  const auto w = ladder_weights(f.s);
  int fixed = -1;
  for (size_t k = 0; k < f.size(); ++k)
    if (f.s[k] >= s_lo && f.s[k] <= s_hi) {
      fixed = static_cast<int>(k);
      break;
    }
  if (fixed < 0) throw std::invalid_argument("tightness_report: no ladder point in the window");
  t.s_fixed = f.s[fixed];
  auto sq = [&](const Vec& v, int c) {
    double a = 0.0;
    for (int i = 0; i < m; ++i) a += v[static_cast<size_t>(c) * m + i] * v[static_cast<size_t>(c) * m + i];
    return a;
  };
  for (double R : R_list) {
    TightnessRow row;
    row.R = R;
    const double r2 = 4.0 * R * R;
    for (size_t k = 0; k < f.size(); ++k) {
      const bool inside = f.s[k] >= s_lo && f.s[k] <= s_hi;
      const SliceFields& sl = f.slices[k];
      double ext = 0.0, all = 0.0;
      for (int c = 0; c < g.cells(); ++c) {
        const Point2 p = cell_point(g, c);
        const double v = sq(sl.psi_s, c);
        all += v;
        if (p[0] * p[0] + p[1] * p[1] > r2) ext += v;
      }
      if (inside) row.psi_s_exterior += w[k] * h2 * ext;
      row.psi_s_outside += w[k] * h2 * (inside ? ext : all);
      if (static_cast<int>(k) == fixed && !sl.psi_t.empty()) {
        double et = 0.0;
        for (int c = 0; c < g.cells(); ++c) {
          const Point2 p = cell_point(g, c);
          if (p[0] * p[0] + p[1] * p[1] > r2) et += sq(sl.psi_t, c);
        }
        row.psi_t_exterior = h2 * et;
      }
    }
    t.rows.push_back(row);
  }
  return t;
}

LocalizationReport localize(const DataPair& d, const LocalizationParams& params) {
  LocalizationReport rep;
  d.validate();
  rep.energy = total_energy(d);
  CarryOptions carry;
  carry.frames = true;
  carry.sections.push_back(d.phi1);
  const HeatLadder L = heat_flow(d.phi0, params.ladder, carry);
  rep.profile = esd_from_ladder(L, 0, rep.energy);
  const double total = esd_total(rep.profile);
  rep.s_scale = find_frequency_scale(rep.profile, params.eps * total);
  const double len = std::sqrt(rep.s_scale);

  const EnergyDensityField e = energy_density(d);
  const CenterResult c = find_spatial_center(e, params.center_radius_factor * len);
  rep.x_center = c.x;
  rep.captured = c.captured;
  for (double eps : params.radius_eps)
    rep.radius_table.emplace_back(eps, concentration_radius(e, c.x, eps * rep.energy) / len);

  if (rep.s_scale < rep.profile.s_max) {
    try {
      rep.gap = pigeonhole_gap(rep.profile, rep.s_scale, rep.profile.s_max, params.K_list, params.gap_floor);
    } catch (const std::invalid_argument&) {
      rep.gap.reset();
    }
  }

  const FrameField F = transported_gauge(L);
  const DifferentiatedFields f = derivative_fields(L, F, 0);
  std::vector<double> R;
  for (double r : params.tightness_R) R.push_back(r * len);
  rep.tightness = tightness_report(f, 0.1 * rep.s_scale, 10.0 * rep.s_scale, R);
  return rep;
}

}  // namespace caloric
