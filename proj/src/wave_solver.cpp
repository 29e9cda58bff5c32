#include "caloric/wave_solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "caloric/errors.hpp"
#include "caloric/parallel.hpp"

namespace caloric {

namespace {

// Extrinsic 5-point Laplacian of cell (ix, iy) scaled by k: out = k * sum(nbr - p).
inline void ext_laplacian(const MapField& phi, int ix, int iy, double k, double* out) {
  const int D = phi.dim();
  const double* p = phi.at(ix, iy);
  const double* a = phi.at(ix + 1, iy);
  const double* b = phi.at(ix - 1, iy);
  const double* c = phi.at(ix, iy + 1);
  const double* d = phi.at(ix, iy - 1);
  for (int i = 0; i < D; ++i) out[i] = k * ((a[i] - p[i]) + (b[i] - p[i]) + (c[i] - p[i]) + (d[i] - p[i]));
}

// Writes w - nu*p with nu the small root of nu^2 + 2 nu <w,p> - (<w,w> + 1) = 0; returns the defect.
inline double constrain(const double* p, double* w, int D) {
  const double b = geom::inner(w, p, D);
  const double c0 = geom::inner(w, w, D) + 1.0;
  const double disc = b * b + c0;
  if (!(disc >= 0.0) || !(b < 0.0)) return std::numeric_limits<double>::infinity();
  // already on the sheet within rounding (e.g. constant regions): leave w exact
  if (std::abs(c0) > geom::sheet_tolerance(w, D)) {
    const double nu = -c0 / (-b + std::sqrt(disc));
    for (int i = 0; i < D; ++i) w[i] -= nu * p[i];
  }
  const double defect = std::abs(geom::inner(w, w, D) + 1.0);
  geom::normalize_point(w, D);
  return defect;
}

double advance(const MapField& prev, const MapField& curr, MapField& next, double dt, bool start,
               const TangentField* vel) {
  const GridSpec& g = curr.grid();
  const int n = g.n, D = curr.dim();
  const double k = (start ? 0.5 : 1.0) * dt * dt / (g.h * g.h);
  std::vector<double> defect(n, 0.0);
  for_rows(n, [&](int r0, int r1) {
    Vec w(D);
    for (int iy = r0; iy < r1; ++iy)
      for (int ix = 0; ix < n; ++ix) {
        double* out = next.at(ix, iy);
        if (g.in_margin(ix, iy)) {
          std::copy(curr.at(ix, iy), curr.at(ix, iy) + D, out);
          continue;
        }
        const double* p = curr.at(ix, iy);
        ext_laplacian(curr, ix, iy, k, w.data());
        if (start) {
          const double* v = vel->at(ix, iy);
          for (int i = 0; i < D; ++i) w[i] += p[i] + dt * v[i];
        } else {
          const double* q = prev.at(ix, iy);
          for (int i = 0; i < D; ++i) w[i] += 2.0 * p[i] - q[i];
        }
        const double e = constrain(p, w.data(), D);
        defect[iy] = std::max(defect[iy], e);
        std::copy(w.begin(), w.end(), out);
      }
  });
  double worst = 0.0;
  for (double e : defect) worst = std::max(worst, std::isfinite(e) ? e : std::numeric_limits<double>::infinity());
  return worst;
}

void check_defect(double defect, long step) {
  if (!std::isfinite(defect)) {
    std::ostringstream os;
    os << "nonfinite value or lost constraint root at step " << step;
    throw NumericalAbort("wave_solver", os.str());
  }
  if (defect > 1e-6) {
    std::ostringstream os;
    os << "constraint drift " << defect << " at step " << step;
    throw NumericalAbort("wave_solver", os.str());
  }
}

double gradient_sup(const MapField& phi) {
  const Vec dens = dirichlet_density(phi);
  double s = 0.0;
  for (double x : dens) s = std::max(s, x);
  return std::sqrt(2.0 * s);
}

}  // namespace

LeapfrogState leapfrog_start(const DataPair& d, double dt) {
  LeapfrogState s{d.phi0, d.phi0, dt, 0};
  const double defect = advance(d.phi0, d.phi0, s.curr, dt, true, &d.phi1);
  check_defect(defect, 1);
  s.step = 1;
  return s;
}

double leapfrog_step(LeapfrogState& s) {
  MapField next = s.curr;
  const double defect = advance(s.prev, s.curr, next, s.dt, false, nullptr);
  check_defect(defect, s.step + 1);
  s.prev = std::move(s.curr);
  s.curr = std::move(next);
  ++s.step;
  return defect;
}

DataPair slice_of(const LeapfrogState& s, const MapField& next) {
  const GridSpec& g = s.curr.grid();
  const int D = s.curr.dim();
  DataPair d{s.curr, TangentField(g, s.curr.m())};
  const double inv = 1.0 / (2.0 * s.dt);
  for (int iy = 0; iy < g.n; ++iy)
    for (int ix = 0; ix < g.n; ++ix) {
      if (g.in_margin(ix, iy)) continue;
      const double* a = next.at(ix, iy);
      const double* b = s.prev.at(ix, iy);
      double* v = d.phi1.at(ix, iy);
      for (int i = 0; i < D; ++i) v[i] = (a[i] - b[i]) * inv;
      geom::project(s.curr.at(ix, iy), v, D);
    }
  return d;
}

WaveTrajectory continue_wave(LeapfrogState s, long steps, const std::vector<long>& outputs, double t0) {
  WaveTrajectory tr;
  tr.dt = s.dt;
  tr.cfl = std::abs(s.dt) / s.curr.grid().h;
  std::vector<long> outs(outputs);
  std::sort(outs.begin(), outs.end());
  size_t next_out = 0;
  for (long k = 0; k <= steps; ++k) {
    LeapfrogState ahead = s;
    const double defect = leapfrog_step(ahead);
    tr.max_constraint_drift = std::max(tr.max_constraint_drift, defect);
    while (next_out < outs.size() && outs[next_out] == k) {
      tr.times.push_back(t0 + k * s.dt);
      tr.slices.push_back(slice_of(s, ahead.curr));
      tr.gradient_sup.push_back(gradient_sup(s.curr));
      ++next_out;
    }
    if (k == steps) {
      tr.final_state = s;
      break;
    }
    s = std::move(ahead);
  }
  return tr;
}

WaveTrajectory evolve_wave(const DataPair& d0, double t0, double t1, const WaveOptions& opt) {
  if (!(opt.cfl > 0.0 && opt.cfl <= 0.5)) throw std::invalid_argument("evolve_wave: cfl must be in (0, 0.5]");
  if (!std::isfinite(t0) || !std::isfinite(t1)) throw std::invalid_argument("evolve_wave: nonfinite time span");
  const GridSpec& g = d0.phi0.grid();
  const double span = t1 - t0;
  const long steps = span == 0.0 ? 0 : static_cast<long>(std::ceil(std::abs(span) / (opt.cfl * g.h) - 1e-9));
  const double dt = steps == 0 ? opt.cfl * g.h : span / steps;

  std::vector<double> want = opt.output_times;
  if (want.empty()) want = {t0, t1};
  std::vector<long> idx;
  for (double t : want) {
    const double k = (t - t0) / dt;
    if (k < -1e-9 || k > steps + 1e-9) throw std::invalid_argument("evolve_wave: output time outside span");
    idx.push_back(static_cast<long>(std::llround(k)));
  }
  std::sort(idx.begin(), idx.end());
  idx.erase(std::unique(idx.begin(), idx.end()), idx.end());

  WaveTrajectory tr;
  tr.cfl = opt.cfl;
  tr.dt = dt;
  // Level 0 is output directly from the data; later levels use the centred velocity.
  size_t next_out = 0;
  LeapfrogState cur = leapfrog_start(d0, dt);  // holds (phi^0, phi^1)
  auto emit_with_neighbors = [&](const DataPair& slice, const MapField& before, const MapField& after, long k) {
    tr.times.push_back(t0 + k * dt);
    tr.slices.push_back(slice);
    tr.gradient_sup.push_back(gradient_sup(slice.phi0));
    if (opt.keep_neighbors) tr.neighbors.emplace_back(before, after);
  };
  if (next_out < idx.size() && idx[next_out] == 0) {
    // phi^{-1} implied by the symmetric start: reflect the start in time
    MapField before = d0.phi0;
    if (opt.keep_neighbors) before = leapfrog_start(sym_time_reverse(d0), dt).curr;
    emit_with_neighbors(d0, before, cur.curr, 0);
    ++next_out;
  }
  for (long k = 1; k <= steps; ++k) {
    LeapfrogState ahead = cur;
    const double defect = leapfrog_step(ahead);  // ahead.curr = phi^{k+1}
    tr.max_constraint_drift = std::max(tr.max_constraint_drift, defect);
    while (next_out < idx.size() && idx[next_out] == k) {
      LeapfrogState at{cur.prev, cur.curr, dt, k};
      emit_with_neighbors(slice_of(at, ahead.curr), cur.prev, ahead.curr, k);
      ++next_out;
    }
    if (k == steps) {
      tr.final_state = LeapfrogState{cur.prev, cur.curr, dt, k};
      break;
    }
    cur = std::move(ahead);
  }
  if (steps == 0) tr.final_state = LeapfrogState{d0.phi0, d0.phi0, dt, 0};
  return tr;
}

std::vector<std::pair<double, double>> energy_series(const WaveTrajectory& tr) {
  std::vector<std::pair<double, double>> out;
  for (size_t k = 0; k < tr.slices.size(); ++k) out.emplace_back(tr.times[k], total_energy(tr.slices[k]));
  return out;
}

Vec wave_residual(const MapField& prev, const MapField& curr, const MapField& next, double dt) {
  const GridSpec& g = curr.grid();
  const int D = curr.dim();
  Vec out(g.cells(), 0.0);
  Vec lap(D), r(D);
  const double kt = 1.0 / (dt * dt), kx = 1.0 / (g.h * g.h);
  for (int iy = 0; iy < g.n; ++iy)
    for (int ix = 0; ix < g.n; ++ix) {
      if (g.in_margin(ix, iy)) continue;
      const double* p = curr.at(ix, iy);
      const double* a = prev.at(ix, iy);
      const double* b = next.at(ix, iy);
      ext_laplacian(curr, ix, iy, kx, lap.data());
      for (int i = 0; i < D; ++i) r[i] = ((a[i] - p[i]) + (b[i] - p[i])) * kt - lap[i];
      geom::project(p, r.data(), D);
      out[g.index(ix, iy)] = std::sqrt(std::max(geom::inner(r.data(), r.data(), D), 0.0));
    }
  return out;
}

Vec wave_residual(const WaveTrajectory& tr, size_t k) {
  if (k >= tr.slices.size() || tr.neighbors.size() != tr.slices.size())
    throw std::invalid_argument("wave_residual: slice has no stored neighbours");
  return wave_residual(tr.neighbors[k].first, tr.slices[k].phi0, tr.neighbors[k].second, tr.dt);
}

std::vector<std::pair<double, double>> lightcone_leak(const WaveTrajectory& tr, const Point2& center, double r0) {
  std::vector<std::pair<double, double>> out;
  if (tr.slices.empty()) return out;
  const double t0 = tr.times.front();
  for (size_t k = 0; k < tr.slices.size(); ++k) {
    const EnergyDensityField e = energy_density(tr.slices[k]);
    const double r = r0 + std::abs(tr.times[k] - t0);
    out.emplace_back(tr.times[k], std::max(0.0, e.total() - local_energy(e, center, r)));
  }
  return out;
}

}  // namespace caloric
