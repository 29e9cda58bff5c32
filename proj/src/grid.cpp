#include "caloric/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "caloric/errors.hpp"
#include "caloric/parallel.hpp"

namespace caloric {

GridSpec GridSpec::make(int n, double half_width, int margin) {
  GridSpec g{n, 2.0 * half_width / n, margin};
  g.validate();
  return g;
}

void GridSpec::validate() const {
  if (n < 16) throw std::invalid_argument("grid: n must be >= 16");
  if (n % 2 != 0) throw std::invalid_argument("grid: n must be even");
  if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("grid: h must be positive");
  if (margin < 2 || 2 * margin >= n) throw std::invalid_argument("grid: margin must be >= 2 and < n/2");
}

MapField::MapField(const GridSpec& g, const HyperbolicPoint& base) : CellVectors(g, base.m()), base_(base) {
  g.validate();
  for (int c = 0; c < g.cells(); ++c) std::copy(base.coords().begin(), base.coords().end(), at(c));
}

HyperbolicPoint MapField::point(int ix, int iy) const {
  const double* p = at(ix, iy);
  return HyperbolicPoint::from_coords(Vec(p, p + dim()));
}

void MapField::validate(double tol) const {
  const int D = dim();
  const double* b = base_.coords().data();
  for (int iy = 0; iy < grid_.n; ++iy)
    for (int ix = 0; ix < grid_.n; ++ix) {
      const double* p = at(ix, iy);
      for (int i = 0; i < D; ++i)
        if (!std::isfinite(p[i])) throw std::invalid_argument("map: nonfinite value");
      if (std::abs(geom::inner(p, p, D) + 1.0) > tol * std::max(1.0, p[0] * p[0]) || p[0] < 1.0 - tol)
        throw std::invalid_argument("map: value off the upper sheet");
      if (grid_.in_margin(ix, iy))
        for (int i = 0; i < D; ++i)
          if (p[i] != b[i]) throw std::invalid_argument("map: margin value differs from base");
    }
}

DataPair DataPair::constant(const GridSpec& g, const HyperbolicPoint& base) {
  return DataPair{MapField(g, base), TangentField(g, base.m())};
}

void DataPair::validate(double tol) const {
  phi0.validate(tol);
  if (!(phi1.grid() == phi0.grid()) || phi1.m() != phi0.m()) throw std::invalid_argument("data: shape mismatch");
  const GridSpec& g = phi0.grid();
  const int D = phi0.dim();
  for (int iy = 0; iy < g.n; ++iy)
    for (int ix = 0; ix < g.n; ++ix) {
      const double* p = phi0.at(ix, iy);
      const double* v = phi1.at(ix, iy);
      double scale = 1.0;
      for (int i = 0; i < D; ++i) {
        if (!std::isfinite(v[i])) throw std::invalid_argument("data: nonfinite velocity");
        scale = std::max(scale, std::abs(v[i]) * std::abs(p[i]));
      }
      if (std::abs(geom::inner(p, v, D)) > tol * scale) throw std::invalid_argument("data: velocity not tangent");
      if (g.in_margin(ix, iy))
        for (int i = 0; i < D; ++i)
          if (v[i] != 0.0) throw std::invalid_argument("data: velocity nonzero on margin");
    }
}

double EnergyDensityField::total() const {
  const int n = grid.n;
  return grid.h * grid.h * sum_rows(n, [&](int iy) {
           double s = 0.0;
           for (int ix = 0; ix < n; ++ix) s += t00[static_cast<size_t>(iy) * n + ix];
           return s;
         });
}

Vec dirichlet_density(const MapField& phi) {
  const GridSpec& g = phi.grid();
  const int n = g.n, D = phi.dim();
  Vec out(g.cells(), 0.0);
  const double w = 1.0 / (4.0 * g.h * g.h);
  for_rows(n, [&](int r0, int r1) {
    for (int iy = r0; iy < r1; ++iy)
      for (int ix = 0; ix < n; ++ix) {
        const double* p = phi.at(ix, iy);
        double s = 0.0;
        auto add = [&](int jx, int jy) {
          if (jx < 0 || jy < 0 || jx >= n || jy >= n) return;
          const double d = geom::pair_info(p, phi.at(jx, jy), D).dist;
          s += d * d;
        };
        add(ix + 1, iy);
        add(ix - 1, iy);
        add(ix, iy + 1);
        add(ix, iy - 1);
        out[g.index(ix, iy)] = w * s;
      }
  });
  return out;
}

double dirichlet_energy(const MapField& phi) {
  return EnergyDensityField{phi.grid(), dirichlet_density(phi)}.total();
}

EnergyDensityField energy_density(const DataPair& d) {
  EnergyDensityField e{d.phi0.grid(), dirichlet_density(d.phi0)};
  const int D = d.phi0.dim();
  for (int c = 0; c < e.grid.cells(); ++c) {
    const double* v = d.phi1.at(c);
    e.t00[c] += 0.5 * std::max(geom::inner(v, v, D), 0.0);
  }
  return e;
}

double total_energy(const DataPair& d) { return energy_density(d).total(); }

double local_energy(const EnergyDensityField& e, const Point2& x0, double r) {
  const GridSpec& g = e.grid;
  const double r2 = r * r;
  const double s = sum_rows(g.n, [&](int iy) {
    const double dy = g.coord(iy) - x0[1];
    double acc = 0.0;
    for (int ix = 0; ix < g.n; ++ix) {
      const double dx = g.coord(ix) - x0[0];
      if (dx * dx + dy * dy <= r2) acc += e.t00[g.index(ix, iy)];
    }
    return acc;
  });
  return g.h * g.h * s;
}

namespace {

// Smallest half-width that keeps every non-base cell of d out of the margin ring.
double required_half_width(const GridSpec& g, const std::vector<char>& nonbase) {
  double r = 0.0;
  for (int iy = 0; iy < g.n; ++iy)
    for (int ix = 0; ix < g.n; ++ix)
      if (nonbase[g.index(ix, iy)])
        r = std::max({r, std::abs(g.coord(ix)), std::abs(g.coord(iy))});
  return r + (g.margin + 1) * g.h;
}

[[noreturn]] void support_violation(const std::string& op, const GridSpec& g, const std::vector<char>& nonbase) {
  const double hw = required_half_width(g, nonbase);
  std::ostringstream os;
  os << op << ": support reaches the margin ring; required half-width >= " << hw << " (have " << g.half_width()
     << ", margin " << g.margin << " cells)";
  throw SupportError(os.str(), hw);
}

// Resamples d at source positions src(x) (in length units); velocities scaled by vscale.
// Sources on nodes are copied exactly, others use bilinear interpolation of log-coordinates about base.
DataPair resample(const DataPair& d, const std::function<Point2(double, double)>& src, double vscale,
                  const std::string& op) {
  const GridSpec& g = d.phi0.grid();
  const int n = g.n, D = d.phi0.dim();
  const HyperbolicPoint& base = d.phi0.base();
  const double* b = base.coords().data();

  // log-coordinates and base-transported velocities of the source field
  Vec logs(static_cast<size_t>(g.cells()) * D), vels(static_cast<size_t>(g.cells()) * D);
  for (int c = 0; c < g.cells(); ++c) {
    geom::log_map(b, d.phi0.at(c), &logs[static_cast<size_t>(c) * D], D);
    double* v = &vels[static_cast<size_t>(c) * D];
    std::copy(d.phi1.at(c), d.phi1.at(c) + D, v);
    geom::transport(d.phi0.at(c), b, v, D);
  }

  DataPair out = DataPair::constant(g, base);
  std::vector<char> nonbase(g.cells(), 0);
  bool violated = false;
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) {
      const Point2 s = src(g.coord(ix), g.coord(iy));
      const double fx = s[0] / g.h + n / 2, fy = s[1] / g.h + n / 2;
      const double rx = std::round(fx), ry = std::round(fy);
      double* p = out.phi0.at(ix, iy);
      double* v = out.phi1.at(ix, iy);
      bool moved = false;
      if (std::abs(fx - rx) < 1e-9 && std::abs(fy - ry) < 1e-9) {
        const int jx = static_cast<int>(rx), jy = static_cast<int>(ry);
        if (jx >= 0 && jy >= 0 && jx < n && jy < n) {
          const double* q = d.phi0.at(jx, jy);
          const double* w = d.phi1.at(jx, jy);
          for (int i = 0; i < D; ++i) {
            p[i] = q[i];
            v[i] = vscale * w[i];
            moved = moved || q[i] != b[i] || w[i] != 0.0;
          }
        }
      } else {
        const int x0 = static_cast<int>(std::floor(fx)), y0 = static_cast<int>(std::floor(fy));
        const double tx = fx - x0, ty = fy - y0;
        Vec lv(D, 0.0), vv(D, 0.0);
        for (int k = 0; k < 4; ++k) {
          const int jx = x0 + (k & 1), jy = y0 + (k >> 1);
          if (jx < 0 || jy < 0 || jx >= n || jy >= n) continue;
          const double wgt = ((k & 1) ? tx : 1.0 - tx) * ((k >> 1) ? ty : 1.0 - ty);
          const size_t c = static_cast<size_t>(g.index(jx, jy)) * D;
          for (int i = 0; i < D; ++i) {
            lv[i] += wgt * logs[c + i];
            vv[i] += wgt * vels[c + i];
          }
        }
        for (int i = 0; i < D; ++i) moved = moved || lv[i] != 0.0 || vv[i] != 0.0;
        if (moved) {
          geom::project(b, lv.data(), D);
          geom::exp_map(b, lv.data(), p, D);
          geom::project(b, vv.data(), D);
          geom::transport(b, p, vv.data(), D);
          geom::project(p, vv.data(), D);
          for (int i = 0; i < D; ++i) v[i] = vscale * vv[i];
        }
      }
      nonbase[g.index(ix, iy)] = moved;
      if (moved && g.in_margin(ix, iy)) violated = true;
    }
  // Sources outside the grid are base; non-base source cells must all land on the grid too.
  if (violated) support_violation(op, g, nonbase);
  return out;
}

bool is_lattice(double x, double h) {
  const double k = x / h;
  return std::abs(k - std::round(k)) < 1e-12 * std::max(1.0, std::abs(k));
}

}  // namespace

DataPair sym_translate(const DataPair& d, const Point2& x0) {
  const GridSpec& g = d.phi0.grid();
  if (is_lattice(x0[0], g.h) && is_lattice(x0[1], g.h)) {
    const int kx = static_cast<int>(std::round(x0[0] / g.h)), ky = static_cast<int>(std::round(x0[1] / g.h));
    const int n = g.n, D = d.phi0.dim();
    const double* b = d.phi0.base().coords().data();
    DataPair out = DataPair::constant(g, d.phi0.base());
    std::vector<char> nonbase(g.cells(), 0);
    bool violated = false;
    for (int iy = 0; iy < n; ++iy)
      for (int ix = 0; ix < n; ++ix) {
        const double* q = d.phi0.at(ix, iy);
        const double* w = d.phi1.at(ix, iy);
        bool moved = false;
        for (int i = 0; i < D; ++i) moved = moved || q[i] != b[i] || w[i] != 0.0;
        if (!moved) continue;
        const int jx = ix + kx, jy = iy + ky;
        if (jx < 0 || jy < 0 || jx >= n || jy >= n || g.in_margin(jx, jy)) {
          violated = true;
          continue;
        }
        std::copy(q, q + D, out.phi0.at(jx, jy));
        std::copy(w, w + D, out.phi1.at(jx, jy));
        nonbase[g.index(jx, jy)] = 1;
      }
    if (violated) {
      // report the extent the shifted support would need
      double r = 0.0;
      for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix) {
          const double* q = d.phi0.at(ix, iy);
          bool moved = false;
          for (int i = 0; i < D; ++i) moved = moved || q[i] != b[i] || d.phi1.at(ix, iy)[i] != 0.0;
          if (moved)
            r = std::max({r, std::abs(g.coord(ix) + x0[0]), std::abs(g.coord(iy) + x0[1])});
        }
      const double hw = r + (g.margin + 1) * g.h;
      std::ostringstream os;
      os << "sym_translate: support reaches the margin ring; required half-width >= " << hw;
      throw SupportError(os.str(), hw);
    }
    return out;
  }
  return resample(
      d, [&](double x, double y) { return Point2{x - x0[0], y - x0[1]}; }, 1.0, "sym_translate");
}

DataPair sym_time_reverse(const DataPair& d) {
  DataPair out = d;
  for (double& v : out.phi1.raw()) v = -v;
  for (double& v : out.phi1.raw())
    if (v == 0.0) v = 0.0;  // no negative zeros
  return out;
}

DataPair sym_rotate(const DataPair& d, const LorentzRotation& U) {
  if (U.m() != d.phi0.m()) throw std::invalid_argument("sym_rotate: dimension mismatch");
  const GridSpec& g = d.phi0.grid();
  const int D = d.phi0.dim();
  const HyperbolicPoint nb = apply_rotation(U, d.phi0.base());
  DataPair out = DataPair::constant(g, nb);
  for (int iy = 0; iy < g.n; ++iy)
    for (int ix = 0; ix < g.n; ++ix) {
      if (g.in_margin(ix, iy)) continue;
      double* p = out.phi0.at(ix, iy);
      double* v = out.phi1.at(ix, iy);
      U.apply(d.phi0.at(ix, iy), p);
      geom::normalize_point(p, D);
      U.apply(d.phi1.at(ix, iy), v);
      geom::project(p, v, D);
    }
  return out;
}

DataPair sym_dilate(const DataPair& d, double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("sym_dilate: lambda must be positive");
  return resample(
      d, [lambda](double x, double y) { return Point2{x / lambda, y / lambda}; }, 1.0 / lambda, "sym_dilate");
}

Profile zero_profile() {
  return [](double, double) { return 0.0; };
}

namespace {

double smooth_step_down(double t) {
  // 1 for t <= 0, 0 for t >= 1, C-infinity in between
  if (t <= 0.0) return 1.0;
  if (t >= 1.0) return 0.0;
  const double a = std::exp(-1.0 / (1.0 - t)), b = std::exp(-1.0 / t);
  return a / (a + b);
}

}  // namespace

Profile gaussian_profile(double amplitude, double sigma, const Point2& center) {
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_profile: sigma must be positive");
  return [=](double x, double y) {
    const double dx = x - center[0], dy = y - center[1];
    const double r = std::sqrt(dx * dx + dy * dy);
    const double cut = smooth_step_down((r - 5.0 * sigma) / (2.0 * sigma));
    if (cut == 0.0) return 0.0;
    return amplitude * std::exp(-0.5 * r * r / (sigma * sigma)) * cut;
  };
}

Profile compact_bump_profile(double amplitude, double radius, const Point2& center) {
  if (!(radius > 0.0)) throw std::invalid_argument("compact_bump_profile: radius must be positive");
  return [=](double x, double y) {
    const double dx = x - center[0], dy = y - center[1];
    const double q = (dx * dx + dy * dy) / (radius * radius);
    if (q >= 1.0) return 0.0;
    return amplitude * std::exp(1.0 - 1.0 / (1.0 - q));
  };
}

Vec sample_profile(const GridSpec& g, const Profile& u) {
  Vec out(g.cells(), 0.0);
  std::vector<char> nonbase(g.cells(), 0);
  double peak = 0.0, margin_peak = 0.0;
  for (int iy = 0; iy < g.n; ++iy)
    for (int ix = 0; ix < g.n; ++ix) {
      const double v = u(g.coord(ix), g.coord(iy));
      if (!std::isfinite(v)) throw std::invalid_argument("profile: nonfinite value");
      peak = std::max(peak, std::abs(v));
      nonbase[g.index(ix, iy)] = std::abs(v) > 0.0;
      if (g.in_margin(ix, iy))
        margin_peak = std::max(margin_peak, std::abs(v));
      else
        out[g.index(ix, iy)] = v;
    }
  if (margin_peak > 1e-13 * std::max(peak, 1e-300) && margin_peak > 1e-300) {
    for (int c = 0; c < g.cells(); ++c) {
      const int ix = c % g.n, iy = c / g.n;
      nonbase[c] = std::abs(u(g.coord(ix), g.coord(iy))) > 1e-13 * peak;
    }
    support_violation("profile", g, nonbase);
  }
  return out;
}

Vec base_direction(const HyperbolicPoint& base, const Vec& spatial) {
  const int D = base.m() + 1;
  if (static_cast<int>(spatial.size()) != base.m()) throw std::invalid_argument("direction needs m components");
  Vec v(D, 0.0);
  for (int i = 1; i < D; ++i) v[i] = spatial[i - 1];
  geom::project(base.coords().data(), v.data(), D);
  const double nrm = std::sqrt(std::max(geom::tangent_norm2(base.coords().data(), v.data(), D), 0.0));
  if (!(nrm > 0.0)) throw std::invalid_argument("direction must be nonzero");
  for (double& x : v) x /= nrm;
  return v;
}

DataPair make_geodesic_data(const GridSpec& g, const HyperbolicPoint& base, const Vec& e1, const Vec& u0,
                            const Vec& u1) {
  const int D = base.m() + 1;
  if (static_cast<int>(e1.size()) != D) throw std::invalid_argument("geodesic data: direction size mismatch");
  if (static_cast<int>(u0.size()) != g.cells() || static_cast<int>(u1.size()) != g.cells())
    throw std::invalid_argument("geodesic data: profile size mismatch");
  const double* b = base.coords().data();
  if (std::abs(geom::inner(b, e1.data(), D)) > 1e-12) throw std::invalid_argument("geodesic data: e1 not tangent");
  if (std::abs(geom::inner(e1.data(), e1.data(), D) - 1.0) > 1e-12)
    throw std::invalid_argument("geodesic data: e1 not unit");
  DataPair out = DataPair::constant(g, base);
  Vec v(D);
  for (int iy = 0; iy < g.n; ++iy)
    for (int ix = 0; ix < g.n; ++ix) {
      const int c = g.index(ix, iy);
      if (g.in_margin(ix, iy)) {
        if (u0[c] != 0.0 || u1[c] != 0.0) throw std::invalid_argument("geodesic data: profile nonzero on margin");
        continue;
      }
      double* p = out.phi0.at(c);
      if (u0[c] != 0.0) {
        for (int i = 0; i < D; ++i) v[i] = u0[c] * e1[i];
        geom::exp_map(b, v.data(), p, D);
      }
      double* w = out.phi1.at(c);
      if (u1[c] != 0.0) {
        for (int i = 0; i < D; ++i) w[i] = e1[i];
        geom::transport(b, p, w, D);
        geom::project(p, w, D);
        for (int i = 0; i < D; ++i) w[i] *= u1[c];
      }
    }
  return out;
}

DataPair make_geodesic_data(const GridSpec& g, const HyperbolicPoint& base, const Vec& e1, const Profile& u0,
                            const Profile& u1) {
  return make_geodesic_data(g, base, e1, sample_profile(g, u0), sample_profile(g, u1));
}

MultibumpData make_multibump_data(const GridSpec& g, const HyperbolicPoint& base, const std::vector<Bump>& bumps) {
  const int D = base.m() + 1;
  const double* b = base.coords().data();
  MultibumpData out{DataPair::constant(g, base), {}};
  std::vector<Vec> u0s, u1s;
  std::vector<Vec> dirs, vdirs;
  for (const Bump& bp : bumps) {
    if (static_cast<int>(bp.direction.size()) != D) throw std::invalid_argument("bump: direction size mismatch");
    auto unit = [&](Vec v) {
      geom::project(b, v.data(), D);
      const double nrm = std::sqrt(std::max(geom::inner(v.data(), v.data(), D), 0.0));
      if (!(nrm > 0.0)) throw std::invalid_argument("bump: zero direction");
      for (double& x : v) x /= nrm;
      return v;
    };
    dirs.push_back(unit(bp.direction));
    vdirs.push_back(unit(bp.velocity_direction.empty() ? bp.direction : bp.velocity_direction));
    const Profile shape = bp.compact ? compact_bump_profile(1.0, bp.scale, bp.center)
                                     : gaussian_profile(1.0, bp.scale, bp.center);
    Vec s = sample_profile(g, shape);
    Vec a(s), v(s);
    for (double& x : a) x *= bp.amplitude;
    for (double& x : v) x *= bp.velocity;
    u0s.push_back(std::move(a));
    u1s.push_back(std::move(v));
  }
  for (size_t i = 0; i < bumps.size(); ++i)
    for (size_t j = i + 1; j < bumps.size(); ++j) {
      const double dx = bumps[i].center[0] - bumps[j].center[0], dy = bumps[i].center[1] - bumps[j].center[1];
      const double reach = bumps[i].compact || bumps[j].compact ? bumps[i].scale + bumps[j].scale
                                                                : 3.0 * (bumps[i].scale + bumps[j].scale);
      if (std::sqrt(dx * dx + dy * dy) < reach) {
        std::ostringstream os;
        os << "bumps " << i << " and " << j << " overlap (separation " << std::sqrt(dx * dx + dy * dy) << " < "
           << reach << ")";
        out.warnings.push_back(os.str());
      }
    }
  Vec v(D), w(D), tmp(D);
  for (int c = 0; c < g.cells(); ++c) {
    double* p = out.data.phi0.at(c);
    for (size_t k = 0; k < bumps.size(); ++k) {
      if (u0s[k][c] == 0.0) continue;
      for (int i = 0; i < D; ++i) v[i] = dirs[k][i];
      geom::transport(b, p, v.data(), D);
      geom::project(p, v.data(), D);
      for (int i = 0; i < D; ++i) v[i] *= u0s[k][c];
      geom::exp_map(p, v.data(), tmp.data(), D);
      std::copy(tmp.begin(), tmp.end(), p);
    }
    double* vel = out.data.phi1.at(c);
    for (size_t k = 0; k < bumps.size(); ++k) {
      if (u1s[k][c] == 0.0) continue;
      for (int i = 0; i < D; ++i) w[i] = vdirs[k][i];
      geom::transport(b, p, w.data(), D);
      geom::project(p, w.data(), D);
      for (int i = 0; i < D; ++i) vel[i] += u1s[k][c] * w[i];
    }
  }
  return out;
}

}  // namespace caloric
