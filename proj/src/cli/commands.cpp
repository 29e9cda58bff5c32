#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>

#include "caloric/caloric_gauge.hpp"
#include "caloric/cli.hpp"
#include "caloric/errors.hpp"
#include "caloric/localization.hpp"
#include "caloric/scalar_reference.hpp"
#include "caloric/spectral.hpp"
#include "caloric/wave_solver.hpp"

namespace caloric::cli {

namespace {

LadderParams ladder_of(const RunConfig& cfg) {
  LadderParams p;
  p.rho = cfg.get_double("rho");
  p.s_min = cfg.get_double("s_min");
  p.s_max = cfg.get_double("s_max");
  p.substep_c = cfg.get_double("substep_c");
  p.energy_tol = cfg.get_double("energy_tol");
  return p;
}

RunConfig at_n(const RunConfig& cfg, int n) {
  RunConfig c = cfg;
  c.set("n", std::to_string(n));
  return c;
}

// Grid sizes of a refinement study, coarsest first.
std::vector<int> study_sizes(const RunConfig& cfg) {
  const int n = cfg.get_int("n"), levels = cfg.get_int("verify.levels");
  std::vector<int> out;
  for (int k = levels; k >= 0; --k) {
    if ((n >> k) << k != n || (n >> k) < 16) throw ConfigError("key 'verify.levels': n cannot be halved " + std::to_string(k) + " times");
    out.push_back(n >> k);
  }
  return out;
}

double max_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  return m;
}

double order(double coarse, double fine) { return std::log2(coarse / fine); }

// Least-squares slope of log y against log x over positive pairs; NaN with fewer than two.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int k = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) continue;
    const double a = std::log(x[i]), b = std::log(y[i]);
    sx += a, sy += b, sxx += a * a, sxy += a * b;
    ++k;
  }
  if (k < 2) return std::numeric_limits<double>::quiet_NaN();
  return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

// Largest tangent norm of a section.
double sup_norm(const TangentField& v, const MapField& phi) {
  const int D = phi.dim();
  double m = 0.0;
  for (int c = 0; c < phi.grid().cells(); ++c) m = std::max(m, std::sqrt(std::max(0.0, geom::tangent_norm2(phi.at(c), v.at(c), D))));
  return m;
}

// Hyperbolic distance of two nearby points from the Minkowski norm of their difference.
double close_distance(const double* p, const double* q, int D) {
  double dq = -(p[0] - q[0]) * (p[0] - q[0]);
  for (int i = 1; i < D; ++i) dq += (p[i] - q[i]) * (p[i] - q[i]);
  return 2.0 * std::asinh(0.5 * std::sqrt(std::max(0.0, dq)));
}

// Sup distance between phi and exp(base, U e) for the scalar wave solution U.
double geodesic_oracle_error(const DataSetup& s, const MapField& phi, double t) {
  const GridSpec& g = phi.grid();
  const Vec U = ScalarSpectrum::wave(g, s.u0, s.u1, t);
  const auto bc = phi.base().coords();
  const int D = phi.dim();
  Vec q(D);
  double err = 0.0;
  for (int c = 0; c < g.cells(); ++c) {
    for (int i = 0; i < D; ++i) q[i] = std::cosh(U[c]) * bc[i] + std::sinh(U[c]) * s.direction[i];
    err = std::max(err, close_distance(phi.at(c), q.data(), D));
  }
  return err;
}

void esd_csv(Output& out, RunSummary& sum, const std::string& name, const ESDProfile& p) {
  std::vector<std::vector<double>> rows;
  for (size_t k = 0; k < p.s.size(); ++k) rows.push_back({p.s[k], p.esd[k], p.psi_s2[k], p.dpsi_t2[k], p.wedge2[k], p.weight[k]});
  out.csv(sum, name, {"s", "esd", "psi_s2", "dpsi_t2", "wedge2", "weight"}, rows);
}

void profile_values(RunSummary& sum, const ESDProfile& p) {
  sum.value("energy", p.energy);
  sum.value("esd.integral", p.integral);
  sum.value("esd.tail", p.tail.value);
  sum.value("esd.tail_method", p.tail.method);
  sum.value("esd.tail_slope", p.tail.slope);
  sum.value("esd.remaining", p.remaining);
  sum.value("esd.points", static_cast<double>(p.s.size()));
}

DataSetup setup_of(const RunConfig& cfg, RunSummary& sum) {
  DataSetup s = make_data(cfg, grid_of(cfg));
  sum.value("data", s.kind);
  for (size_t i = 0; i < s.warnings.size(); ++i) sum.value("warning." + std::to_string(i), s.warnings[i]);
  return s;
}

std::vector<std::string> suite_of(const RunConfig& cfg) {
  std::vector<std::string> out;
  std::stringstream ss(cfg.get_string("verify.suite"));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    out.push_back(item);
  }
  return out;
}

}  // namespace

RunSummary cmd_simulate(const RunConfig& cfg, Output& out) {
  RunSummary sum;
  const DataSetup s = setup_of(cfg, sum);
  const double t_end = cfg.get_double("t_end"), E = total_energy(s.data);
  WaveOptions opt;
  opt.cfl = cfg.get_double("cfl");
  const int outputs = cfg.get_int("outputs");
  for (int i = 0; i <= outputs; ++i) opt.output_times.push_back(t_end * i / outputs);
  const auto tr = evolve_wave(s.data, 0.0, t_end, opt);
  sum.value("energy", E);
  sum.value("dt", tr.dt);
  sum.value("steps", static_cast<double>(tr.final_state.step));
  sum.value("max_constraint_drift", tr.max_constraint_drift);

  std::vector<std::vector<double>> rows;
  double drift = 0.0;
  const auto series = energy_series(tr);
  for (const auto& [t, e] : series) {
    const double rel = E > 0.0 ? (e - E) / E : e;
    drift = std::max(drift, std::abs(rel));
    rows.push_back({t, e, rel});
  }
  out.csv(sum, "energy.csv", {"t", "energy", "relative_drift"}, rows);
  sum.check_le("energy_drift", drift, cfg.get_double("simulate.drift_tol"));

  rows.clear();
  double leak = 0.0;
  for (const auto& [t, l] : lightcone_leak(tr, s.center, s.support_radius)) {
    rows.push_back({t, l, E > 0.0 ? l / E : l});
    leak = std::max(leak, E > 0.0 ? l / E : l);
  }
  out.csv(sum, "leak.csv", {"t", "energy_outside_cone", "relative"}, rows);
  sum.value("support_radius", s.support_radius);
  // the leak check only says something while the cone stays inside the interior
  const GridSpec& g = s.data.phi0.grid();
  const bool inside = s.support_radius + std::abs(t_end) + std::hypot(s.center[0], s.center[1]) <= g.half_width() - g.margin * g.h;
  sum.value("lightcone.inside", inside ? "true" : "false");
  sum.check_le("lightcone_leak", leak, cfg.get_double("simulate.leak_tol"));

  if (s.geodesic) {
    const int n = cfg.get_int("n"), levels = cfg.get_int("simulate.levels");
    std::vector<double> hs, errs;
    rows.clear();
    for (int k = levels; k >= 0; --k) {
      if ((n >> k) << k != n || (n >> k) < 16) throw ConfigError("key 'simulate.levels': n cannot be halved " + std::to_string(k) + " times");
      double err = 0.0, h = 0.0;
      if (k == 0) {
        err = geodesic_oracle_error(s, tr.slices.back().phi0, t_end);
        h = s.data.phi0.grid().h;
      } else {
        const RunConfig c = at_n(cfg, n >> k);
        const DataSetup sk = make_data(c, grid_of(c));
        WaveOptions o;
        o.cfl = opt.cfl;
        err = geodesic_oracle_error(sk, evolve_wave(sk.data, 0.0, t_end, o).slices.back().phi0, t_end);
        h = sk.data.phi0.grid().h;
      }
      hs.push_back(h);
      errs.push_back(err);
      rows.push_back({static_cast<double>(n >> k), h, err});
    }
    out.csv(sum, "oracle.csv", {"n", "h", "sup_error"}, rows);
    sum.value("oracle.sup_error", errs.back());
    if (levels > 0) sum.check_ge("oracle_order", loglog_slope(hs, errs), cfg.get_double("simulate.oracle_order"));
  }
  out.snapshot(sum, "final.cgwm", tr.slices.back());
  return sum;
}

RunSummary cmd_heatflow(const RunConfig& cfg, Output& out) {
  RunSummary sum;
  const DataSetup s = setup_of(cfg, sum);
  const auto f = flow_until_flat(s.data.phi0, cfg.get_double("flat_tol"), ladder_of(cfg));
  const HeatLadder& L = f.ladder;
  std::vector<std::vector<double>> rows;
  double rise = 0.0;
  for (size_t k = 0; k < L.size(); ++k) {
    rows.push_back({L.s[k], L.dirichlet[k], L.sup_distance_to_base(k), k < L.substeps.size() ? double(L.substeps[k]) : 0.0});
    if (k > 0 && L.dirichlet[0] > 0.0) rise = std::max(rise, (L.dirichlet[k] - L.dirichlet[k - 1]) / L.dirichlet[0]);
  }
  out.csv(sum, "ladder.csv", {"s", "dirichlet_energy", "sup_distance_to_base", "substeps"}, rows);
  sum.value("flat", f.flat ? "true" : "false");
  sum.value("s_star", f.s_star);
  sum.value("sup_distance", f.sup_distance);
  sum.check_le("dirichlet_increase", rise, cfg.get_double("energy_tol"));
  if (cfg.get_bool("heatflow.require_flat")) sum.check_ge("flat", f.flat ? 1.0 : 0.0, 1.0);
  out.snapshot(sum, "final.cgwm", L.slices.back());
  return sum;
}

RunSummary cmd_esd(const RunConfig& cfg, Output& out) {
  RunSummary sum;
  const DataSetup s = setup_of(cfg, sum);
  const LadderParams lp = ladder_of(cfg);
  const ESDProfile p = esd(s.data, lp);
  esd_csv(out, sum, "esd.csv", p);
  profile_values(sum, p);
  sum.value("esd.identity_residual", energy_identity_residual(p));
  if (cfg.get_bool("esd.identity"))
    sum.check_le("energy_identity", energy_identity_residual(p), cfg.get_double("esd.identity_tol"));

  const GridSpec& g = s.data.phi0.grid();
  if (s.geodesic && cfg.get_bool("esd.oracle")) {
    const ScalarSpectrum a(g, s.u0), b(g, s.u1);
    const double lo = 4.0 * g.h * g.h, hi = cfg.get_double("esd.oracle_s_max");
    std::vector<std::vector<double>> rows;
    double worst = 0.0;
    for (size_t k = 0; k < p.s.size(); ++k) {
      if (p.s[k] < lo || p.s[k] > hi) continue;
      const double o = scalar_esd(a, b, p.s[k]);
      const double rel = o > 0.0 ? std::abs(p.esd[k] - o) / o : std::abs(p.esd[k]);
      worst = std::max(worst, rel);
      rows.push_back({p.s[k], p.esd[k], o, rel});
    }
    out.csv(sum, "oracle.csv", {"s", "esd", "oracle", "relative_error"}, rows);
    sum.check_le("oracle", worst, cfg.get_double("esd.oracle_tol"));
  }

  if (cfg.get_bool("esd.symmetry")) {
    const double tol = cfg.get_double("esd.symmetry_tol");
    SymmetrySpec tr;
    tr.kind = SymmetryKind::translation;
    tr.shift = {0.0, cfg.get_int("esd.translation_cells") * g.h};
    tr.s_hi = cfg.get_double("esd.translation_s_hi");
    LadderParams short_lp = lp;
    short_lp.s_max = std::min(lp.s_max, tr.s_hi);
    DataPair moved;
    try {
      moved = apply_symmetry(s.data, tr);
    } catch (const SupportError& e) {
      throw ConfigError(std::string("esd.translation_cells: ") + e.what());
    }
    const auto rt = esd_symmetry_check(p, esd(moved, short_lp), tr);
    sum.value("symmetry.translation.compared", static_cast<double>(rt.compared));
    sum.check_le("symmetry.translation", rt.discrepancy, tol);

    SymmetrySpec rev;
    rev.kind = SymmetryKind::time_reversal;
    const auto rr = esd_symmetry_check(p, esd(apply_symmetry(s.data, rev), lp), rev);
    sum.check_le("symmetry.time_reversal", rr.discrepancy, tol);
  }

  if (cfg.get_bool("esd.dilation")) {
    SymmetrySpec dil;
    dil.kind = SymmetryKind::dilation;
    dil.lambda = cfg.get_double("esd.dilation_lambda");
    dil.s_lo = cfg.get_double("esd.dilation_s_lo");
    LadderParams wide = lp;
    wide.s_max = lp.s_max * dil.lambda * dil.lambda;
    DataPair dd;
    try {
      dd = apply_symmetry(s.data, dil);
    } catch (const SupportError& e) {
      throw ConfigError(std::string("esd.dilation_lambda: ") + e.what() + " (set half_width >= " +
                        format_number(e.required_half_width) + ")");
    }
    const ESDProfile q = esd(dd, wide);
    esd_csv(out, sum, "esd_dilated.csv", q);
    const auto r = esd_symmetry_check(p, q, dil);
    sum.value("symmetry.dilation.compared", static_cast<double>(r.compared));
    sum.check_le("symmetry.dilation", r.discrepancy, cfg.get_double("esd.dilation_tol"));
  }
  return sum;
}

RunSummary cmd_verify(const RunConfig& cfg, Output& out) {
  RunSummary sum;
  const DataSetup s0 = setup_of(cfg, sum);
  const std::vector<int> sizes = study_sizes(cfg);
  const double s_floor = cfg.get_double("verify.s_floor"), order_min = cfg.get_double("verify.order_min");
  LadderParams lp = ladder_of(cfg);
  lp.s_max = cfg.get_double("verify.s_max");

  for (const std::string& suite : suite_of(cfg)) {
    if (suite == "identities") {
      // rows: n, h, torsion, curvature, heatflow, A_s, sup |A_x|
      std::vector<std::vector<double>> rows;
      for (int n : sizes) {
        const RunConfig c = at_n(cfg, n);
        const DataSetup s = n == sizes.back() ? s0 : make_data(c, grid_of(c));
        CarryOptions carry;
        carry.frames = true;
        HeatLadder L;
        FrameField F;
        if (cfg.get_string("verify.gauge") == "caloric") {
          auto f = flow_until_flat(s.data.phi0, cfg.get_double("flat_tol"), lp, carry);
          if (!f.flat) throw NumericalAbort("verify/caloric-gauge", "not flat by verify.s_max");
          L = std::move(f.ladder);
          F = construct_caloric_gauge(L, standard_frame_at(L.base()), cfg.get_double("flat_tol"));
        } else {
          L = heat_flow(s.data.phi0, lp, carry);
          F = transported_gauge(L);
        }
        const auto D = derivative_fields(L, F);
        const auto t = check_torsion(D), cu = check_curvature(D), hf = check_heatflow_eq(D);
        std::vector<double> r(4, 0.0);
        double A = 0.0;
        for (size_t k = 0; k < L.size(); ++k) {
          r[3] = std::max(r[3], F.as_residual[k]);
          for (const Vec& a : D.slices[k].A_x)
            for (double x : a) A = std::max(A, std::abs(x));
          // the abelian check uses every slice, the refinement study the common window s >= s_floor
          if (!s.geodesic && L.s[k] < s_floor) continue;
          r[0] = std::max(r[0], t[k]);
          r[1] = std::max(r[1], cu[k]);
          r[2] = std::max(r[2], hf[k]);
        }
        rows.push_back({double(n), L.grid.h, r[0], r[1], r[2], r[3], A});
      }
      out.csv(sum, "identities.csv", {"n", "h", "torsion", "curvature", "heatflow", "A_s", "sup_A_x"}, rows);
      const char* names[] = {"torsion", "curvature", "heatflow", "A_s"};
      const auto& fin = rows.back();
      if (s0.geodesic) {
        const double tol = cfg.get_double("verify.abelian_tol");
        sum.check_le("abelian.torsion", fin[2], tol);
        sum.check_le("abelian.curvature", fin[3], tol);
        sum.check_le("abelian.A_s", fin[5], tol);
        sum.check_le("abelian.A_x", fin[6], tol);
        sum.value("abelian.heatflow", fin[4]);
      } else {
        for (int q = 0; q < 4; ++q) sum.value(std::string("identity.") + names[q], fin[2 + q]);
      }
      if (!s0.geodesic && rows.size() > 1) {
        for (int q = 0; q < 4; ++q) {
          double worst = std::numeric_limits<double>::infinity();
          for (size_t i = 1; i < rows.size(); ++i) {
            const double o = order(rows[i - 1][2 + q], rows[i][2 + q]);
            sum.value(std::string("order.") + names[q] + "." + std::to_string(i), o);
            worst = std::min(worst, o);
          }
          sum.check_ge(std::string("order.") + names[q], worst, order_min);
        }
      }
    } else if (suite == "tension") {
      std::vector<std::vector<double>> rows;
      const int levels = static_cast<int>(sizes.size()) - 1;
      for (size_t i = 0; i < sizes.size(); ++i) {
        const RunConfig c = at_n(cfg, sizes[i]);
        const DataSetup s = sizes[i] == sizes.back() ? s0 : make_data(c, grid_of(c));
        const long centre = static_cast<long>(cfg.get_int("verify.tension_step")) << (i);
        const auto ts = wave_time_stencil(s.data, centre, cfg.get_double("cfl"));
        const double E = total_energy(s.data);
        const double w = wave_tension(ts, radial_frames(ts.levels[2])).l2;
        rows.push_back({double(sizes[i]), s.data.phi0.grid().h, centre * ts.dt, E > 0.0 ? w / std::sqrt(E) : w});
      }
      (void)levels;
      out.csv(sum, "tension.csv", {"n", "h", "t", "tension_over_sqrt_energy"}, rows);
      sum.check_le("tension", rows.back()[3], cfg.get_double("verify.tension_tol"));
      if (rows.size() > 1) {
        double worst = std::numeric_limits<double>::infinity();
        for (size_t i = 1; i < rows.size(); ++i) worst = std::min(worst, rows[i - 1][3] / rows[i][3]);
        sum.check_ge("tension.reduction", worst, cfg.get_double("verify.tension_ratio"));
      }
    } else if (suite == "covariant") {
      LadderParams cp = ladder_of(cfg);
      cp.s_max = cfg.get_double("verify.covariant_s_max");
      std::vector<std::vector<double>> rows, mass_rows;
      std::vector<double> diffusion;
      for (int n : sizes) {
        const RunConfig c = at_n(cfg, n);
        const DataSetup s = n == sizes.back() ? s0 : make_data(c, grid_of(c));
        const CovariantField u = covariant_heat_solve(s.data.phi0, s.data.phi1, cp);
        const auto md = check_mass_diffusion(u);
        double m = 0.0;
        for (size_t k = 0; k < md.size(); ++k)
          if (u.ladder.s[k] >= s_floor) m = std::max(m, md[k]);
        diffusion.push_back(m);
        rows.push_back({double(n), u.ladder.grid.h, m});
        if (n != sizes.back()) continue;
        const double sup0 = sup_norm(s.data.phi1, s.data.phi0);
        sum.value("covariant.sup_u0", sup0);
        sum.check_le("covariant.dominance", check_pointwise_dominance(u), cfg.get_double("verify.dominance_tol") * sup0);
        const auto mass = covariant_mass(u);
        const auto ineq = check_energy_inequality(u);
        double rise = 0.0, worst_ineq = -std::numeric_limits<double>::infinity();
        for (size_t k = 0; k < mass.size(); ++k) {
          if (k > 0) rise = std::max(rise, mass[k] - mass[k - 1]);
          worst_ineq = std::max(worst_ineq, ineq[k].second);
          mass_rows.push_back({u.ladder.s[k], mass[k], ineq[k].second, k < md.size() ? md[k] : 0.0});
        }
        // rounding-level allowances relative to the initial mass
        const double scale = std::max(mass.front(), std::numeric_limits<double>::min());
        sum.check_le("covariant.mass_increase", rise / scale, 1e-12);
        sum.check_le("covariant.energy_inequality", worst_ineq / scale, 1e-10);
      }
      out.csv(sum, "covariant.csv", {"s", "mass", "energy_inequality", "mass_diffusion_residual"}, mass_rows);
      out.csv(sum, "mass_diffusion.csv", {"n", "h", "residual"}, rows);
      sum.value("covariant.mass_diffusion", diffusion.back());
      if (diffusion.size() > 1) {
        double worst = std::numeric_limits<double>::infinity();
        for (size_t i = 1; i < diffusion.size(); ++i) worst = std::min(worst, order(diffusion[i - 1], diffusion[i]));
        sum.check_ge("covariant.mass_diffusion_order", worst, cfg.get_double("verify.mass_order_min"));
      }
    } else if (suite == "metric") {
      LadderParams mp = ladder_of(cfg);
      mp.s_max = cfg.get_double("verify.metric_s_max");
      const double tol = cfg.get_double("verify.metric_flat_tol");
      CarryOptions carry;
      carry.frames = true;
      carry.sections = {s0.data.phi1};
      auto f = flow_until_flat(s0.data.phi0, tol, mp, carry);
      if (!f.flat) throw NumericalAbort("verify/metric", "not flat by verify.metric_s_max");
      const FrameField F = construct_caloric_gauge(f.ladder, standard_frame_at(f.ladder.base()), tol);
      const auto D = derivative_fields(f.ladder, F, 0);
      const int m = D.m;
      const double th = cfg.get_double("verify.metric_angle");
      std::vector<double> U(m * m, 0.0);
      for (int a = 0; a < m; ++a) U[a * m + a] = 1.0;
      U[0] = std::cos(th), U[1] = -std::sin(th), U[m] = std::sin(th), U[m + 1] = std::cos(th);
      const double self = energy_metric(D, D, false).distance;
      const auto R = rotate_fields(D, U);
      const double plain = energy_metric(D, R, false).distance;
      const double quotient = energy_metric(D, R, true).distance;
      const double d0 = energy_metric(D, zero_fields_like(D), false).distance;
      const double E = total_energy(s0.data);
      const double mtol = cfg.get_double("verify.metric_tol");
      sum.check_le("metric.self", self, mtol);
      sum.value("metric.rotated", plain);
      sum.check_le("metric.quotient", quotient, mtol);
      sum.value("metric.zero_distance2", d0 * d0);
      sum.check_le("metric.energy", E > 0.0 ? std::abs(d0 * d0 - E) / E : d0 * d0, cfg.get_double("verify.metric_energy_tol"));
    }
  }
  return sum;
}

RunSummary cmd_localize(const RunConfig& cfg, Output& out) {
  RunSummary sum;
  const DataSetup s = setup_of(cfg, sum);
  const GridSpec& g = s.data.phi0.grid();
  LocalizationParams lp;
  lp.ladder = ladder_of(cfg);
  lp.eps = cfg.get_double("localize.eps");
  lp.center_radius_factor = cfg.get_double("localize.radius_factor");
  lp.K_list = cfg.get_list("localize.K_list");
  lp.gap_floor = cfg.get_double("localize.gap_floor");
  lp.tightness_R = cfg.get_list("localize.tightness_R");
  if (total_energy(s.data) <= 0.0) throw ConfigError("localize: the data has zero energy, so no eps is below E");
  const LocalizationReport rep = localize(s.data, lp);
  const double rho = lp.ladder.rho;

  esd_csv(out, sum, "esd.csv", rep.profile);
  sum.value("energy", rep.energy);
  sum.value("s_scale", rep.s_scale);
  sum.value("center_x", rep.x_center[0]);
  sum.value("center_y", rep.x_center[1]);
  sum.value("captured", rep.captured);
  std::vector<std::vector<double>> rows;
  for (const auto& [e, C] : rep.radius_table) rows.push_back({e, C});
  out.csv(sum, "radius.csv", {"eps_relative", "radius_over_sqrt_scale"}, rows);

  rows.clear();
  std::vector<double> R, ext;
  int increases = 0;
  for (const auto& r : rep.tightness.rows) {
    if (!ext.empty() && r.psi_s_exterior > ext.back()) ++increases;
    R.push_back(r.R);
    ext.push_back(r.psi_s_exterior);
    rows.push_back({r.R, r.psi_s_exterior, r.psi_s_outside, r.psi_t_exterior});
  }
  out.csv(sum, "tightness.csv", {"R", "psi_s_exterior", "psi_s_outside", "psi_t_exterior"}, rows);
  sum.value("tightness.s_lo", rep.tightness.s_lo);
  sum.value("tightness.s_hi", rep.tightness.s_hi);
  const double slope = loglog_slope(R, ext);
  sum.value("tightness.exponent", slope);
  if (cfg.get_bool("localize.tightness_check")) {
    sum.check_le("tightness.increases", increases, 0.0);
    sum.check_le("tightness.exponent", std::isnan(slope) ? std::numeric_limits<double>::infinity() : slope,
                 cfg.get_double("localize.tightness_exponent"));
  }

  std::optional<GapResult> gap = rep.gap;
  if (const double hi = cfg.get_double("localize.gap_s_hi"); hi > 0.0)
    gap = pigeonhole_gap(rep.profile, rep.s_scale, std::min(hi, rep.profile.s.back()), lp.K_list, lp.gap_floor);
  if (gap) {
    sum.value("gap.s_prime", gap->s_prime);
    sum.value("gap.K", gap->K);
    sum.value("gap.mass", gap->mass);
    sum.value("gap.floor_met", gap->floor_met ? "true" : "false");
  } else {
    sum.value("gap", "none");
  }
  if (cfg.get_bool("localize.require_gap")) {
    sum.check_ge("gap.present", gap ? 1.0 : 0.0, 1.0);
    if (s.kind == "two-scale") {
      // heat time where each bump alone puts most mass per unit log s; either bump alone is geodesic data,
      // so its profile is the scalar one
      const double A = cfg.get_double("amplitude"), v = cfg.get_double("velocity"), r = cfg.get_double("sigma");
      std::vector<double> scales;
      for (double R : {r, r * cfg.get_double("scale_ratio")}) {
        const ScalarSpectrum u0(g, sample_profile(g, compact_bump_profile(A, R, s.center)));
        const ScalarSpectrum u1(g, sample_profile(g, compact_bump_profile(v, R, s.center)));
        double best = -1.0, at = 0.0;
        for (double x : rep.profile.s)
          if (const double w = x * scalar_esd(u0, u1, x); x > 0.0 && w > best) best = w, at = x;
        scales.push_back(at);
      }
      const double sp = gap ? gap->s_prime : 0.0;
      sum.value("gap.scale_narrow", scales[0]);
      sum.value("gap.scale_wide", scales[1]);
      sum.check_ge("gap.between_scales", (sp > scales[0] && sp < scales[1]) ? 1.0 : 0.0, 1.0);
    }
  }

  if (cfg.get_bool("localize.roundtrip")) {
    // normalization round trip
    DataPair nd;
    try {
      nd = normalize_data(s.data, rep.s_scale, rep.x_center);
    } catch (const SupportError& e) {
      throw ConfigError(std::string("localize: normalized data leaves the grid: ") + e.what() + " (set half_width >= " +
                        format_number(e.required_half_width) + ")");
    }
    out.snapshot(sum, "normalized.cgwm", nd);
    LocalizationParams np = lp;
    np.ladder.s_max = lp.ladder.s_max / rep.s_scale;
    const LocalizationReport back = localize(nd, np);
    sum.value("normalized.s_scale", back.s_scale);
    sum.value("normalized.center_x", back.x_center[0]);
    sum.value("normalized.center_y", back.x_center[1]);
    sum.value("normalized.energy", back.energy);
    sum.check_le("normalized.scale", std::abs(std::log(back.s_scale)), std::log(rho));
    sum.check_le("normalized.center", std::hypot(back.x_center[0], back.x_center[1]), g.h);
  }

  if (cfg.get_bool("localize.dilation_check")) {
    DataPair dd;
    try {
      dd = sym_dilate(s.data, 2.0);
    } catch (const SupportError& e) {
      throw ConfigError(std::string("localize: dilated data leaves the grid: ") + e.what() + " (set half_width >= " +
                        format_number(e.required_half_width) + ")");
    }
    LadderParams wide = lp.ladder;
    wide.s_max *= 4.0;
    const ESDProfile q = esd(dd, wide);
    const double s2 = find_frequency_scale(q, lp.eps * esd_total(q));
    sum.value("dilation.s_scale", s2);
    sum.check_le("dilation.scale_ratio", std::abs(std::log(s2 / (4.0 * rep.s_scale))), std::log(rho));
  }
  return sum;
}

int run_command(const std::string& command, const RunConfig& cfg, const std::string& out_dir, std::string* error,
                RunSummary* summary) {
  const auto start = std::chrono::steady_clock::now();
  auto fail = [&](const std::string& what) {
    if (error) *error = what;
  };
  try {
    cfg.validate();
    Output out(out_dir);
    RunSummary s;
    if (command == "simulate") {
      s = cmd_simulate(cfg, out);
    } else if (command == "heatflow") {
      s = cmd_heatflow(cfg, out);
    } else if (command == "esd") {
      s = cmd_esd(cfg, out);
    } else if (command == "verify") {
      s = cmd_verify(cfg, out);
    } else if (command == "localize") {
      s = cmd_localize(cfg, out);
    } else {
      throw ConfigError("unknown command '" + command + "'");
    }
    s.command = command;
    s.config_hash = cfg.hash();
    s.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.summary(s);
    if (summary) *summary = s;
    if (!s.passed()) {
      std::string failed;
      for (const Check& c : s.checks)
        if (!c.pass) failed += (failed.empty() ? "" : ", ") + c.name;
      fail("checks failed: " + failed);
      return 2;
    }
    return 0;
  } catch (const ConfigError& e) {
    fail(std::string("config error: ") + e.what());
    return 3;
  } catch (const NumericalAbort& e) {
    fail(std::string("numerical abort in ") + e.what());
    return 4;
  }
}

}  // namespace caloric::cli
