#include "caloric/caloric_gauge.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

#include "caloric/errors.hpp"
#include "caloric/parallel.hpp"
#include "caloric/quadrature.hpp"
#include "caloric/stencil.hpp"
#include "caloric/wave_solver.hpp"

namespace caloric {

namespace {

size_t vidx(int c, int m, int a = 0) { return static_cast<size_t>(c) * m + a; }
size_t midx(int c, int m, int a, int b) { return (static_cast<size_t>(c) * m + a) * m + b; }

bool deep_interior(const GridSpec& g, int ix, int iy) {
  return ix > g.margin && iy > g.margin && ix < g.n - g.margin - 1 && iy < g.n - g.margin - 1;
}

// Frame coordinates <e_a, v> of an ambient tangent vector.
void to_frame(const double* frame, const double* v, int m, double* out) {
  const int D = m + 1;
  for (int a = 0; a < m; ++a) out[a] = geom::inner(frame + a * D, v, D);
}

// sqrt(h^2 * sum over rows of row_value)
double l2(const GridSpec& g, const std::function<double(int)>& row_value) {
  return std::sqrt(g.h * g.h * sum_rows(g.n, row_value));
}

}  // namespace

Vec radial_frames(const MapField& phi) {
  const int m = phi.m(), D = phi.dim();
  const GridSpec& g = phi.grid();
  const OrthonormalFrame einf = standard_frame_at(phi.base());
  const double* b = phi.base().coords().data();
  Vec f(static_cast<size_t>(g.cells()) * m * D);
  for (int c = 0; c < g.cells(); ++c)
    for (int a = 0; a < m; ++a) {
      double* e = &f[(vidx(c, m, a)) * D];
      std::copy_n(einf.axis(a).data(), D, e);
      geom::transport(b, phi.at(c), e, D);
    }
  stencil::reorthonormalize(phi, f.data());
  return f;
}

FrameField transported_gauge(const HeatLadder& L) {
  if (L.frames.size() != L.size()) throw std::invalid_argument("transported_gauge: ladder carries no frames");
  FrameField F;
  F.grid = L.grid;
  F.m = L.m();
  F.s = L.s;
  F.frames = L.frames;
  F.e_inf = standard_frame_at(L.base());
  F.kind = "transported";
  F.as_residual = L.as_residual;
  return F;
}

FrameField construct_caloric_gauge(const HeatLadder& L, const OrthonormalFrame& e_inf, double flat_tol) {
  if (L.frames.size() != L.size()) throw std::invalid_argument("construct_caloric_gauge: ladder carries no frames");
  const int m = L.m(), D = m + 1;
  if (e_inf.m() != m) throw std::invalid_argument("construct_caloric_gauge: frame dimension mismatch");
  const MapField& last = L.slices.back();
  const double* pinf = e_inf.base().coords().data();
  double sup = 0.0;
  for (int c = 0; c < L.grid.cells(); ++c) sup = std::max(sup, geom::pair_info(pinf, last.at(c), D).dist);
  if (!(sup <= flat_tol)) {
    std::ostringstream os;
    os << "construct_caloric_gauge: ladder is not flat (sup distance " << sup << " > " << flat_tol << " at s = "
       << L.s.back() << ")";
    throw std::invalid_argument(os.str());
  }
  FrameField F = transported_gauge(L);
  F.e_inf = e_inf;
  F.kind = "caloric";
  // R(x)_ab = <f_a(s_K, x), P e_inf_b>; the caloric frame is f(s) R, constant in s.
  const GridSpec& g = L.grid;
  std::vector<double> R(static_cast<size_t>(g.cells()) * m * m);
  const Vec& fK = L.frames.back();
  for_rows(g.n, [&](int r0, int r1) {
    Vec e(D);
    for (int c = r0 * g.n; c < r1 * g.n; ++c)
      for (int b = 0; b < m; ++b) {
        std::copy_n(e_inf.axis(b).data(), D, e.data());
        geom::transport(pinf, last.at(c), e.data(), D);
        for (int a = 0; a < m; ++a) R[midx(c, m, a, b)] = geom::inner(&fK[vidx(c, m, a) * D], e.data(), D);
      }
  });
  for (size_t k = 0; k < L.size(); ++k) {
    const MapField& phi = L.slices[k];
    Vec& f = F.frames[k];
    for_rows(g.n, [&](int r0, int r1) {
      Vec out(static_cast<size_t>(m) * D);
      for (int c = r0 * g.n; c < r1 * g.n; ++c) {
        std::fill(out.begin(), out.end(), 0.0);
        for (int b = 0; b < m; ++b)
          for (int a = 0; a < m; ++a) {
            const double r = R[midx(c, m, a, b)];
            const double* fa = &f[vidx(c, m, a) * D];
            for (int i = 0; i < D; ++i) out[b * D + i] += r * fa[i];
          }
        std::copy(out.begin(), out.end(), &f[vidx(c, m) * D]);
      }
    });
    stencil::reorthonormalize(phi, f.data());
  }
  return F;
}

DifferentiatedFields derivative_fields(const HeatLadder& L, const FrameField& F, int psi_t_section) {
  if (F.frames.size() != L.size() || !(F.grid == L.grid) || F.m != L.m())
    throw std::invalid_argument("derivative_fields: frame field does not match the ladder");
  if (psi_t_section >= static_cast<int>(L.sections.size()))
    throw std::invalid_argument("derivative_fields: ladder has no such section");
  const GridSpec& g = L.grid;
  const int m = L.m(), D = m + 1, n = g.n;
  DifferentiatedFields out;
  out.grid = g;
  out.m = m;
  out.s = L.s;
  out.psi_t_mode = psi_t_section >= 0 ? "covariant-heat" : "none";
  out.gauge = F.kind;
  stencil::NeighborLogs logs;
  Vec tau(static_cast<size_t>(g.cells()) * D);
  for (size_t k = 0; k < L.size(); ++k) {
    const MapField& phi = L.slices[k];
    const Vec& fr = F.frames[k];
    logs.compute(phi);
    stencil::tension(phi, logs, tau.data());
    SliceFields sf;
    const size_t nv = static_cast<size_t>(g.cells()) * m, nm = nv * m;
    sf.psi_s.assign(nv, 0.0);
    for (auto& v : sf.psi_x) v.assign(nv, 0.0);
    for (auto& a : sf.A_x) a.assign(nm, 0.0);
    const double* V = psi_t_section >= 0 ? L.sections[psi_t_section][k].raw().data() : nullptr;
    if (V) sf.psi_t.assign(nv, 0.0);
    for_rows(n, [&](int r0, int r1) {
      Vec gr(D), w(D), Mp(m * m), Mm(m * m);
      for (int iy = r0; iy < r1; ++iy)
        for (int ix = 0; ix < n; ++ix) {
          if (g.in_margin(ix, iy)) continue;
          const int c = g.index(ix, iy);
          const double* e = &fr[vidx(c, m) * D];
          to_frame(e, &tau[static_cast<size_t>(c) * D], m, &sf.psi_s[vidx(c, m)]);
          if (V) to_frame(e, V + static_cast<size_t>(c) * D, m, &sf.psi_t[vidx(c, m)]);
          for (int axis = 0; axis < 2; ++axis) {
            stencil::centered_gradient(g, logs, c, axis, gr.data());
            to_frame(e, gr.data(), m, &sf.psi_x[axis][vidx(c, m)]);
            const int step = axis == 0 ? 1 : n;
            for (int side = 0; side < 2; ++side) {
              const int y = side == 0 ? c + step : c - step;
              std::vector<double>& M = side == 0 ? Mp : Mm;
              for (int b = 0; b < m; ++b) {
                std::copy_n(&fr[vidx(y, m, b) * D], D, w.data());
                geom::transport(phi.at(y), phi.at(c), w.data(), D);
                for (int a = 0; a < m; ++a) M[a * m + b] = geom::inner(e + a * D, w.data(), D);
              }
            }
            for (int a = 0; a < m; ++a)
              for (int b = 0; b < m; ++b) {
                const double dab = Mp[a * m + b] - Mm[a * m + b], dba = Mp[b * m + a] - Mm[b * m + a];
                sf.A_x[axis][midx(c, m, a, b)] = 0.25 * (dab - dba) / g.h;
              }
          }
        }
    });
    out.slices.push_back(std::move(sf));
  }
  return out;
}

namespace {

// psi wedge phi = psi phi^T - phi psi^T per cell.
Vec wedge_field(const Vec& p, const Vec& q, int m) {
  const size_t cells = p.size() / m;
  Vec out(cells * m * m);
  for (size_t c = 0; c < cells; ++c)
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        out[(c * m + a) * m + b] = p[c * m + a] * q[c * m + b] - q[c * m + a] * p[c * m + b];
  return out;
}

double field_l2(const GridSpec& g, const Vec& v) {
  const size_t per_row = v.size() / g.n;
  return l2(g, [&](int r) {
    double acc = 0.0;
    for (size_t i = r * per_row; i < (r + 1) * per_row; ++i) acc += v[i] * v[i];
    return acc;
  });
}

// integral_{s_k}^infinity W ds for every ladder point, from the back.
std::vector<Vec> integrate_to_infinity(const GridSpec& g, const std::vector<double>& s, const std::vector<Vec>& W) {
  const size_t K = s.size();
  std::vector<double> norms(K);
  for (size_t k = 0; k < K; ++k) norms[k] = field_l2(g, W[k]);
  std::vector<Vec> out(K);
  const TailEstimate t = tail_estimate(s, norms);
  out[K - 1] = W[K - 1];
  const double scale = norms[K - 1] > 0.0 ? t.value / norms[K - 1] : 0.0;
  for (double& v : out[K - 1]) v *= scale;
  for (size_t k = K - 1; k-- > 0;) {
    out[k] = out[k + 1];
    if (k == 0) {
      for (size_t i = 0; i < out[k].size(); ++i) out[k][i] += 0.5 * s[1] * (W[0][i] + W[1][i]);
    } else {
      const double dx = std::log(s[k + 1] / s[k]);
      for (size_t i = 0; i < out[k].size(); ++i) out[k][i] += 0.5 * dx * (s[k] * W[k][i] + s[k + 1] * W[k + 1][i]);
    }
  }
  return out;
}

}  // namespace

IntegralConnection connection_fields_integral(const DifferentiatedFields& f) {
  IntegralConnection out;
  const size_t K = f.size();
  if (K < 2) throw std::invalid_argument("connection_fields_integral: ladder too short");
  out.A_x.resize(K);
  for (int j = 0; j < 2; ++j) {
    std::vector<Vec> W(K);
    for (size_t k = 0; k < K; ++k) W[k] = wedge_field(f.slices[k].psi_s, f.slices[k].psi_x[j], f.m);
    const auto A = integrate_to_infinity(f.grid, f.s, W);
    for (size_t k = 0; k < K; ++k) out.A_x[k][j] = A[k];
  }
  if (!f.slices.front().psi_t.empty()) {
    std::vector<Vec> W(K);
    for (size_t k = 0; k < K; ++k) W[k] = wedge_field(f.slices[k].psi_s, f.slices[k].psi_t, f.m);
    out.A_t = integrate_to_infinity(f.grid, f.s, W);
  }
  return out;
}

std::vector<double> connection_difference(const std::vector<std::array<Vec, 2>>& a, const DifferentiatedFields& f) {
  if (a.size() != f.size()) throw std::invalid_argument("connection_difference: ladder length mismatch");
  std::vector<double> out;
  for (size_t k = 0; k < f.size(); ++k) {
    double acc = 0.0;
    for (int j = 0; j < 2; ++j) {
      Vec d = a[k][j];
      for (size_t i = 0; i < d.size(); ++i) d[i] -= f.slices[k].A_x[j][i];
      const double v = field_l2(f.grid, d);
      acc += v * v;
    }
    out.push_back(std::sqrt(acc));
  }
  return out;
}

namespace {

// Applies kernel(c, out) on deep-interior cells and returns the per-slice L2 norm of the m- or m*m-vector.
std::vector<double> residual_norms(const DifferentiatedFields& f, int width,
                                   const std::function<void(const SliceFields&, int, double*)>& kernel) {
  const GridSpec& g = f.grid;
  std::vector<double> out;
  for (const SliceFields& sf : f.slices) {
    out.push_back(l2(g, [&](int iy) {
      double acc = 0.0;
      Vec r(width);
      for (int ix = 0; ix < g.n; ++ix) {
        if (!deep_interior(g, ix, iy)) continue;
        kernel(sf, g.index(ix, iy), r.data());
        for (double v : r) acc += v * v;
      }
      return acc;
    }));
  }
  return out;
}

}  // namespace

std::vector<double> check_torsion(const DifferentiatedFields& f) {
  const int m = f.m, n = f.grid.n;
  const double k = 0.5 / f.grid.h;
  return residual_norms(f, m, [&](const SliceFields& sf, int c, double* r) {
    const Vec &p1 = sf.psi_x[0], &p2 = sf.psi_x[1];
    for (int a = 0; a < m; ++a) {
      double v = k * (p2[vidx(c + 1, m, a)] - p2[vidx(c - 1, m, a)]) - k * (p1[vidx(c + n, m, a)] - p1[vidx(c - n, m, a)]);
      for (int b = 0; b < m; ++b)
        v += sf.A_x[0][midx(c, m, a, b)] * p2[vidx(c, m, b)] - sf.A_x[1][midx(c, m, a, b)] * p1[vidx(c, m, b)];
      r[a] = v;
    }
  });
}

std::vector<double> check_curvature(const DifferentiatedFields& f) {
  const int m = f.m, n = f.grid.n;
  const double k = 0.5 / f.grid.h;
  return residual_norms(f, m * m, [&](const SliceFields& sf, int c, double* r) {
    const Vec &A1 = sf.A_x[0], &A2 = sf.A_x[1], &p1 = sf.psi_x[0], &p2 = sf.psi_x[1];
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) {
        double v = k * (A2[midx(c + 1, m, a, b)] - A2[midx(c - 1, m, a, b)]) -
                   k * (A1[midx(c + n, m, a, b)] - A1[midx(c - n, m, a, b)]);
        for (int l = 0; l < m; ++l)
          v += A1[midx(c, m, a, l)] * A2[midx(c, m, l, b)] - A2[midx(c, m, a, l)] * A1[midx(c, m, l, b)];
        v += p1[vidx(c, m, a)] * p2[vidx(c, m, b)] - p2[vidx(c, m, a)] * p1[vidx(c, m, b)];
        r[a * m + b] = v;
      }
  });
}

std::vector<double> check_heatflow_eq(const DifferentiatedFields& f) {
  const int m = f.m, n = f.grid.n;
  const double k = 0.5 / f.grid.h;
  return residual_norms(f, m, [&](const SliceFields& sf, int c, double* r) {
    const Vec &p1 = sf.psi_x[0], &p2 = sf.psi_x[1];
    for (int a = 0; a < m; ++a) {
      double v = sf.psi_s[vidx(c, m, a)];
      v -= k * (p1[vidx(c + 1, m, a)] - p1[vidx(c - 1, m, a)]) + k * (p2[vidx(c + n, m, a)] - p2[vidx(c - n, m, a)]);
      for (int b = 0; b < m; ++b)
        v -= sf.A_x[0][midx(c, m, a, b)] * p1[vidx(c, m, b)] + sf.A_x[1][midx(c, m, a, b)] * p2[vidx(c, m, b)];
      r[a] = v;
    }
  });
}

TimeStencil wave_time_stencil(const DataPair& d, long centre, double cfl) {
  if (centre < 2) throw std::invalid_argument("wave_time_stencil: centre step must be >= 2");
  TimeStencil ts;
  ts.dt = cfl * d.phi0.grid().h;
  LeapfrogState s = leapfrog_start(d, ts.dt);
  std::vector<MapField> window{s.prev, s.curr};
  while (s.step < centre + 2) {
    leapfrog_step(s);
    window.push_back(s.curr);
    if (window.size() > 5) window.erase(window.begin());
  }
  for (int i = 0; i < 5; ++i) ts.levels[i] = window[window.size() - 5 + i];
  return ts;
}

WaveTensionField wave_tension(const TimeStencil& ts, const Vec& frames) {
  const MapField& phi = ts.levels[2];
  const GridSpec& g = phi.grid();
  const int m = phi.m(), D = m + 1, n = g.n;
  for (const MapField& l : ts.levels)
    if (!(l.grid() == g) || l.m() != m) throw std::invalid_argument("wave_tension: time levels differ in shape");
  if (frames.size() != static_cast<size_t>(g.cells()) * m * D)
    throw std::invalid_argument("wave_tension: frame field does not match");
  if (!(ts.dt != 0.0)) throw std::invalid_argument("wave_tension: missing time data");
  WaveTensionField out;
  out.grid = g;
  out.m = m;
  out.w.assign(static_cast<size_t>(g.cells()) * m, 0.0);
  // f''(0) = (-f(2) + 16 f(1) + 16 f(-1) - f(-2)) / 12 step^2 with f(0) = 0
  auto second = [&](const double* p, const double* q1, const double* q_1, const double* q2, const double* q_2,
                    double step, double sign, double* acc, double* tmp) {
    const double k = sign / (12.0 * step * step);
    const double* qs[4] = {q1, q_1, q2, q_2};
    const double wts[4] = {16.0, 16.0, -1.0, -1.0};
    for (int j = 0; j < 4; ++j) {
      geom::log_map(p, qs[j], tmp, D);
      for (int i = 0; i < D; ++i) acc[i] += k * wts[j] * tmp[i];
    }
  };
  for_rows(n, [&](int r0, int r1) {
    Vec acc(D), tmp(D);
    for (int iy = r0; iy < r1; ++iy)
      for (int ix = 0; ix < n; ++ix) {
        if (g.in_margin(ix, iy)) continue;
        const int c = g.index(ix, iy);
        const double* p = phi.at(c);
        std::fill(acc.begin(), acc.end(), 0.0);
        second(p, ts.levels[3].at(c), ts.levels[1].at(c), ts.levels[4].at(c), ts.levels[0].at(c), ts.dt, -1.0,
               acc.data(), tmp.data());
        second(p, phi.at(c + 1), phi.at(c - 1), phi.at(c + 2), phi.at(c - 2), g.h, 1.0, acc.data(), tmp.data());
        second(p, phi.at(c + n), phi.at(c - n), phi.at(c + 2 * n), phi.at(c - 2 * n), g.h, 1.0, acc.data(),
               tmp.data());
        geom::project(p, acc.data(), D);
        to_frame(&frames[vidx(c, m) * D], acc.data(), m, &out.w[vidx(c, m)]);
      }
  });
  out.l2 = field_l2(g, out.w);
  return out;
}

namespace {

void require_compatible(const DifferentiatedFields& a, const DifferentiatedFields& b) {
  if (!(a.grid == b.grid) || a.m != b.m || a.s != b.s)
    throw std::invalid_argument("energy_metric: fields live on different grids or ladders");
}

double psi_t0_inner(const DifferentiatedFields& a, const DifferentiatedFields& b, int i, int j) {
  const Vec &pa = a.slices[0].psi_t, &pb = b.slices[0].psi_t;
  if (pa.empty() || pb.empty()) return 0.0;
  double acc = 0.0;
  const size_t cells = pa.size() / a.m;
  for (size_t c = 0; c < cells; ++c) acc += pa[c * a.m + i] * pb[c * a.m + j];
  return acc;
}

}  // namespace

MetricResult energy_metric(const DifferentiatedFields& a, const DifferentiatedFields& b, bool quotient) {
  require_compatible(a, b);
  const int m = a.m;
  const double h2 = a.grid.h * a.grid.h;
  const auto w = ladder_weights(a.s);
  MetricResult r;
  r.rotation.assign(static_cast<size_t>(m) * m, 0.0);
  for (int i = 0; i < m; ++i) r.rotation[i * m + i] = 1.0;
  if (quotient) {
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m, m);
    for (size_t k = 0; k < a.size(); ++k) {
      const Vec &pa = a.slices[k].psi_s, &pb = b.slices[k].psi_s;
      const size_t cells = pa.size() / m;
      for (size_t c = 0; c < cells; ++c)
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < m; ++j) M(i, j) += w[k] * h2 * pa[c * m + i] * pb[c * m + j];
    }
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) M(i, j) += 0.5 * h2 * psi_t0_inner(a, b, i, j);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::MatrixXd Dg = Eigen::MatrixXd::Identity(m, m);
    if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) Dg(m - 1, m - 1) = -1.0;
    const Eigen::MatrixXd U = svd.matrixU() * Dg * svd.matrixV().transpose();
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) r.rotation[i * m + j] = U(i, j);
  }
  const DifferentiatedFields bb = quotient ? rotate_fields(b, r.rotation) : b;
  std::vector<double> prof(a.size());
  for (size_t k = 0; k < a.size(); ++k) {
    const Vec &pa = a.slices[k].psi_s, &pb = bb.slices[k].psi_s;
    double acc = 0.0;
    for (size_t i = 0; i < pa.size(); ++i) acc += (pa[i] - pb[i]) * (pa[i] - pb[i]);
    prof[k] = h2 * acc;
  }
  double sum = 0.0;
  for (size_t k = 0; k < a.size(); ++k) sum += w[k] * prof[k];
  r.tail = tail_estimate(a.s, prof).value;
  sum += r.tail;
  const Vec &ta = a.slices[0].psi_t, &tb = bb.slices[0].psi_t;
  const size_t nt = std::max(ta.size(), tb.size());
  double kin = 0.0;
  for (size_t i = 0; i < nt; ++i) {
    const double d = (ta.empty() ? 0.0 : ta[i]) - (tb.empty() ? 0.0 : tb[i]);
    kin += d * d;
  }
  sum += 0.5 * h2 * kin;
  r.distance = std::sqrt(sum);
  return r;
}

DifferentiatedFields zero_fields_like(const DifferentiatedFields& f) {
  DifferentiatedFields z = f;
  for (SliceFields& sf : z.slices) {
    std::fill(sf.psi_s.begin(), sf.psi_s.end(), 0.0);
    std::fill(sf.psi_t.begin(), sf.psi_t.end(), 0.0);
    for (auto& v : sf.psi_x) std::fill(v.begin(), v.end(), 0.0);
    for (auto& v : sf.A_x) std::fill(v.begin(), v.end(), 0.0);
  }
  return z;
}

DifferentiatedFields rotate_fields(const DifferentiatedFields& f, const std::vector<double>& U) {
  const int m = f.m;
  if (U.size() != static_cast<size_t>(m) * m) throw std::invalid_argument("rotate_fields: rotation size mismatch");
  DifferentiatedFields r = f;
  auto rot_vec = [&](Vec& v) {
    std::vector<double> t(m);
    for (size_t c = 0; c < v.size() / m; ++c) {
      for (int a = 0; a < m; ++a) {
        t[a] = 0.0;
        for (int b = 0; b < m; ++b) t[a] += U[a * m + b] * v[c * m + b];
      }
      std::copy(t.begin(), t.end(), &v[c * m]);
    }
  };
  auto rot_mat = [&](Vec& A) {
    std::vector<double> t(m * m), u(m * m);
    const size_t mm = static_cast<size_t>(m) * m;
    for (size_t c = 0; c < A.size() / mm; ++c) {
      const double* a = &A[c * mm];
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
          double s = 0.0;
          for (int l = 0; l < m; ++l) s += U[i * m + l] * a[l * m + j];
          t[i * m + j] = s;
        }
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
          double s = 0.0;
          for (int l = 0; l < m; ++l) s += t[i * m + l] * U[j * m + l];
          u[i * m + j] = s;
        }
      std::copy(u.begin(), u.end(), &A[c * mm]);
    }
  };
  for (SliceFields& sf : r.slices) {
    rot_vec(sf.psi_s);
    rot_vec(sf.psi_t);
    for (auto& v : sf.psi_x) rot_vec(v);
    for (auto& A : sf.A_x) rot_mat(A);
  }
  return r;
}

}  // namespace caloric
