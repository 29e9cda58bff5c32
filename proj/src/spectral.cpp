#include "caloric/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "caloric/errors.hpp"
#include "caloric/parallel.hpp"
#include "caloric/stencil.hpp"

namespace caloric {

namespace {

bool deep_interior(const GridSpec& g, int ix, int iy) {
  return ix > g.margin && iy > g.margin && ix < g.n - g.margin - 1 && iy < g.n - g.margin - 1;
}

double sup_norm(const TangentField& u) {
  const int D = u.dim();
  double worst = 0.0;
  for (int c = 0; c < u.grid().cells(); ++c) {
    double a = 0.0;
    for (int i = 0; i < D; ++i) a += u.at(c)[i] * u.at(c)[i];
    worst = std::max(worst, a);
  }
  return std::sqrt(worst);
}

// Per-slice pieces shared by the checks: |V|^2 at each cell, edge differences and the wedge.
struct SectionTerms {
  Vec norm2;     // |V|^2
  Vec lv_dot;    // <V, L V>
  Vec edge2;     // per cell: |P V_right - V|^2 + |P V_up - V|^2 (edges owned by the cell)
  Vec cdiff2;    // per cell: sum_i |(P V(x+e_i) - P V(x-e_i)) / 2h|^2
  Vec wedge2;    // per cell: sum_i (|V|^2 |g_i|^2 - <V, g_i>^2)
};

SectionTerms section_terms(const MapField& phi, const TangentField& V, bool with_operator) {
  const GridSpec& g = phi.grid();
  const int D = phi.dim();
  const int n = g.cells();
  stencil::NeighborLogs logs;
  logs.compute(phi);
  SectionTerms t;
  t.norm2.assign(n, 0.0);
  t.edge2.assign(n, 0.0);
  t.cdiff2.assign(n, 0.0);
  t.wedge2.assign(n, 0.0);
  Vec LV;
  if (with_operator) {
    LV.assign(static_cast<size_t>(n) * D, 0.0);
    stencil::covariant_operator(phi, logs, V.raw().data(), LV.data());
    t.lv_dot.assign(n, 0.0);
  }
  for_rows(g.n, [&](int r0, int r1) {
    Vec a(D), b(D), grad(D);
    for (int c = r0 * g.n; c < r1 * g.n; ++c) {
      const double* v = V.at(c);
      t.norm2[c] = geom::inner(v, v, D);
      if (with_operator) t.lv_dot[c] = geom::inner(v, &LV[static_cast<size_t>(c) * D], D);
      for (int dir : {stencil::kRight, stencil::kUp}) {
        const int y = stencil::neighbor(g, c, dir);
        if (y < 0) continue;
        std::copy_n(V.at(y), D, a.data());
        geom::transport(phi.at(y), phi.at(c), a.data(), D);
        double e = 0.0;
        for (int i = 0; i < D; ++i) a[i] -= v[i];
        e = geom::inner(a.data(), a.data(), D);
        t.edge2[c] += e;
      }
      const int ix = c % g.n, iy = c / g.n;
      if (g.in_margin(ix, iy)) continue;
      for (int axis = 0; axis < 2; ++axis) {
        const int yp = stencil::neighbor(g, c, axis == 0 ? stencil::kRight : stencil::kUp);
        const int ym = stencil::neighbor(g, c, axis == 0 ? stencil::kLeft : stencil::kDown);
        std::copy_n(V.at(yp), D, a.data());
        geom::transport(phi.at(yp), phi.at(c), a.data(), D);
        std::copy_n(V.at(ym), D, b.data());
        geom::transport(phi.at(ym), phi.at(c), b.data(), D);
        for (int i = 0; i < D; ++i) a[i] = (a[i] - b[i]) / (2.0 * g.h);
        t.cdiff2[c] += geom::inner(a.data(), a.data(), D);
        stencil::centered_gradient(g, logs, c, axis, grad.data());
        const double vg = geom::inner(v, grad.data(), D);
        t.wedge2[c] += t.norm2[c] * geom::inner(grad.data(), grad.data(), D) - vg * vg;
      }
    }
  });
  return t;
}

double cell_sum(const GridSpec& g, const Vec& f) {
  return sum_rows(g.n, [&](int iy) {
    double acc = 0.0;
    for (int c = iy * g.n; c < (iy + 1) * g.n; ++c) acc += f[c];
    return acc;
  });
}

Vec scalar_laplacian(const GridSpec& g, const Vec& v) {
  Vec out(v.size(), 0.0);
  for_rows(g.n, [&](int r0, int r1) {
    for (int iy = r0; iy < r1; ++iy)
      for (int ix = 0; ix < g.n; ++ix) {
        if (g.in_margin(ix, iy)) continue;
        const int c = g.index(ix, iy);
        out[c] = (v[c + 1] + v[c - 1] + v[c + g.n] + v[c - g.n] - 4.0 * v[c]) / (g.h * g.h);
      }
  });
  return out;
}

}  // namespace

CovariantField covariant_heat_solve(const MapField& phi0, const TangentField& u0, const LadderParams& params,
                                    double growth_tol) {
  CarryOptions carry;
  carry.sections.push_back(u0);
  CovariantField u{heat_flow(phi0, params, carry)};
  const double sup0 = sup_norm(u0);
  for (size_t k = 0; k < u.ladder.size(); ++k) {
    const double sk = sup_norm(u.u()[k]);
    if (!std::isfinite(sk) || sk > sup0 * (1.0 + growth_tol) + 1e-300) {
      std::ostringstream os;
      os << "sup |u| grew from " << sup0 << " to " << sk << " at s = " << u.ladder.s[k];
      throw NumericalAbort("covariant_heat", os.str());
    }
  }
  return u;
}

std::vector<Vec> scalar_heat_on_ladder(const HeatLadder& L, const Vec& f0) {
  const GridSpec& g = L.grid;
  Vec u = f0;
  std::vector<Vec> out{u};
  Vec st(u.size());
  for (size_t k = 0; k + 1 < L.size(); ++k) {
    const int N = L.substeps[k];
    const double ds = (L.s[k + 1] - L.s[k]) / N;
    for (int i = 0; i < N; ++i) {
      const Vec k0 = scalar_laplacian(g, u);
      for (size_t c = 0; c < u.size(); ++c) st[c] = u[c] + ds * k0[c];
      const Vec k1 = scalar_laplacian(g, st);
      for (size_t c = 0; c < u.size(); ++c) u[c] += 0.5 * ds * (k0[c] + k1[c]);
    }
    out.push_back(u);
  }
  return out;
}

double check_pointwise_dominance(const CovariantField& u) {
  const GridSpec& g = u.ladder.grid;
  const int D = u.ladder.m() + 1;
  Vec a0(g.cells());
  for (int c = 0; c < g.cells(); ++c) a0[c] = std::sqrt(std::max(0.0, geom::inner(u.u()[0].at(c), u.u()[0].at(c), D)));
  const auto ref = scalar_heat_on_ladder(u.ladder, a0);
  double worst = -std::numeric_limits<double>::infinity();
  for (size_t k = 0; k < u.ladder.size(); ++k)
    for (int c = 0; c < g.cells(); ++c) {
      const double a = std::sqrt(std::max(0.0, geom::inner(u.u()[k].at(c), u.u()[k].at(c), D)));
      worst = std::max(worst, a - ref[k][c]);
    }
  return worst;
}

std::vector<double> check_mass_diffusion(const CovariantField& u) {
  const GridSpec& g = u.ladder.grid;
  std::vector<double> out;
  for (size_t k = 0; k < u.ladder.size(); ++k) {
    const auto t = section_terms(u.ladder.slices[k], u.u()[k], true);
    const Vec lap = scalar_laplacian(g, t.norm2);
    double acc = 0.0;
    for (int iy = 0; iy < g.n; ++iy)
      for (int ix = 0; ix < g.n; ++ix) {
        if (!deep_interior(g, ix, iy)) continue;
        const int c = g.index(ix, iy);
        const double lhs = 2.0 * t.lv_dot[c];
        const double rhs = lap[c] - 2.0 * t.cdiff2[c] - 2.0 * t.wedge2[c];
        acc += (lhs - rhs) * (lhs - rhs);
      }
    out.push_back(std::sqrt(g.h * g.h * acc));
  }
  return out;
}

std::vector<std::pair<double, double>> check_energy_inequality(const CovariantField& u) {
  const GridSpec& g = u.ladder.grid;
  std::vector<std::pair<double, double>> out;
  for (size_t k = 0; k < u.ladder.size(); ++k) {
    const auto t = section_terms(u.ladder.slices[k], u.u()[k], true);
    const double dmass = 2.0 * g.h * g.h * cell_sum(g, t.lv_dot);
    const double grad2 = cell_sum(g, t.edge2);
    out.emplace_back(u.ladder.s[k], dmass + 2.0 * grad2);
  }
  return out;
}

std::vector<double> covariant_mass(const CovariantField& u) {
  const GridSpec& g = u.ladder.grid;
  const int D = u.ladder.m() + 1;
  std::vector<double> out;
  for (const TangentField& f : u.u()) {
    double acc = 0.0;
    for (int c = 0; c < g.cells(); ++c) acc += geom::inner(f.at(c), f.at(c), D);
    out.push_back(g.h * g.h * acc);
  }
  return out;
}

ESDProfile esd_from_ladder(const HeatLadder& L, int section, double energy) {
  if (section < 0 || static_cast<size_t>(section) >= L.sections.size())
    throw std::invalid_argument("esd: ladder does not carry the time derivative");
  const GridSpec& g = L.grid;
  const int D = L.m() + 1;
  const double h2 = g.h * g.h;
  ESDProfile p;
  p.s = L.s;
  p.energy = energy;
  Vec tau(static_cast<size_t>(g.cells()) * D);
  stencil::NeighborLogs logs;
  for (size_t k = 0; k < L.size(); ++k) {
    const MapField& phi = L.slices[k];
    const TangentField& V = L.sections[section][k];
    logs.compute(phi);
    stencil::tension(phi, logs, tau.data());
    double t2 = 0.0;
    for (int c = 0; c < g.cells(); ++c) t2 += geom::tangent_norm2(phi.at(c), &tau[static_cast<size_t>(c) * D], D);
    const auto t = section_terms(phi, V, false);
    const double a = h2 * t2;
    const double b = cell_sum(g, t.edge2);
    const double w = h2 * cell_sum(g, t.wedge2);
    p.psi_s2.push_back(a);
    p.dpsi_t2.push_back(b);
    p.wedge2.push_back(w);
    p.esd.push_back(a + b + w);
    p.psi_t_l2.push_back(std::sqrt(h2 * cell_sum(g, t.norm2)));
  }
  p.weight = ladder_weights(p.s);
  for (size_t k = 0; k < p.s.size(); ++k) p.integral += p.weight[k] * p.esd[k];
  p.tail = tail_estimate(p.s, p.esd);
  p.s_max = p.s.back();
  p.psi_t_l2_final = p.psi_t_l2.back();
  p.remaining = dirichlet_energy(L.slices.back()) + 0.5 * p.psi_t_l2_final * p.psi_t_l2_final;
  return p;
}

ESDProfile esd(const DataPair& d, const LadderParams& params) {
  double E = 0.0;
  try {
    d.validate();
    E = total_energy(d);
  } catch (const NumericalAbort&) {
    throw;
  } catch (const std::exception& e) {
    throw std::invalid_argument(std::string("esd: data: ") + e.what());
  }
  HeatLadder L;
  try {
    CarryOptions carry;
    carry.sections.push_back(d.phi1);
    L = heat_flow(d.phi0, params, carry);
  } catch (const NumericalAbort& e) {
    throw NumericalAbort("esd/" + e.stage, e.what());
  } catch (const std::exception& e) {
    throw std::invalid_argument(std::string("esd: heat_flow: ") + e.what());
  }
  try {
    return esd_from_ladder(L, 0, E);
  } catch (const std::exception& e) {
    throw std::invalid_argument(std::string("esd: profile: ") + e.what());
  }
}

double energy_identity_residual(const ESDProfile& p) {
  return std::abs(p.energy - p.integral - p.tail.value) / std::max(p.energy, 1e-300);
}

double energy_identity_residual(const DataPair& d, const LadderParams& params) {
  return energy_identity_residual(esd(d, params));
}

DataPair apply_symmetry(const DataPair& d, const SymmetrySpec& sym) {
  switch (sym.kind) {
    case SymmetryKind::translation: return sym_translate(d, sym.shift);
    case SymmetryKind::time_reversal: return sym_time_reverse(d);
    case SymmetryKind::rotation: return sym_rotate(d, sym.rotation);
    case SymmetryKind::dilation: return sym_dilate(d, sym.lambda);
  }
  throw std::invalid_argument("apply_symmetry: unknown kind");
}

namespace {

// Cubic Lagrange interpolation of f in log s on the four samples around x (x inside the sampled range,
// s > 0 samples only). Returns NaN outside.
double interpolate_log(const std::vector<double>& s, const std::vector<double>& f, double x) {
  size_t first = 0;
  while (first < s.size() && s[first] <= 0.0) ++first;
  if (s.size() - first < 4 || x < s[first] || x > s.back()) return std::numeric_limits<double>::quiet_NaN();
  size_t j = first;
  while (j + 1 < s.size() && s[j + 1] < x) ++j;
  size_t lo = j >= first + 1 ? j - 1 : first;
  lo = std::min(lo, s.size() - 4);
  const double t = std::log(x);
  double out = 0.0;
  for (size_t a = lo; a < lo + 4; ++a) {
    double w = 1.0;
    for (size_t b = lo; b < lo + 4; ++b)
      if (b != a) w *= (t - std::log(s[b])) / (std::log(s[a]) - std::log(s[b]));
    out += w * f[a];
  }
  return out;
}

}  // namespace

SymmetryResult esd_symmetry_check(const ESDProfile& base, const ESDProfile& transformed, const SymmetrySpec& sym) {
  SymmetryResult r;
  double diff = 0.0, scale = 0.0;
  for (size_t k = 0; k < transformed.s.size(); ++k) {
    const double s = transformed.s[k];
    if (s < sym.s_lo || s > sym.s_hi) continue;
    double predicted;
    if (sym.kind == SymmetryKind::dilation) {
      const double l2 = sym.lambda * sym.lambda;
      if (s == 0.0) {
        predicted = base.esd.front() / l2;
      } else {
        predicted = interpolate_log(base.s, base.esd, s / l2) / l2;
        if (!std::isfinite(predicted)) continue;
      }
    } else {
      if (k >= base.s.size() || base.s[k] != s) throw std::invalid_argument("esd_symmetry_check: ladders differ");
      predicted = base.esd[k];
    }
    diff = std::max(diff, std::abs(transformed.esd[k] - predicted));
    scale = std::max(scale, std::abs(predicted));
    ++r.compared;
  }
  r.discrepancy = scale > 0.0 ? diff / scale : diff;
  return r;
}

SymmetryResult esd_symmetry_check(const DataPair& d, const SymmetrySpec& sym, const LadderParams& params) {
  const ESDProfile a = esd(d, params);
  LadderParams q = params;
  if (sym.kind == SymmetryKind::dilation) q.s_max = params.s_max * sym.lambda * sym.lambda;
  const ESDProfile b = esd(apply_symmetry(d, sym), q);
  return esd_symmetry_check(a, b, sym);
}

}  // namespace caloric
