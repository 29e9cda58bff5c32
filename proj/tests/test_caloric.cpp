#include <cmath>
#include <vector>

#include "caloric/caloric_gauge.hpp"
#include "caloric/grid.hpp"
#include "caloric/heat_solver.hpp"
#include "caloric/wave_solver.hpp"
#include "doctest.h"

using namespace caloric;

namespace {

Vec e1_at(const HyperbolicPoint& base) {
  Vec s(base.m(), 0.0);
  s[0] = 1.0;
  return base_direction(base, s);
}

double sup_abs(const Vec& v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::abs(x));
  return s;
}

double max_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, x);
  return s;
}

// Two bumps pointing in different target directions, so the connection is nontrivial.
DataPair two_direction_data(const GridSpec& g, const HyperbolicPoint& base, double amp = 1.0) {
  Bump a;
  a.amplitude = amp;
  a.scale = 0.5;
  a.center = {-0.5, 0.0};
  a.direction = base_direction(base, {1, 0});
  a.velocity = 0.5 * amp;
  a.velocity_direction = base_direction(base, {0, 1});
  Bump b = a;
  b.center = {0.5, 0.3};
  b.direction = base_direction(base, {0, 1});
  b.velocity_direction = base_direction(base, {1, 1});
  return make_multibump_data(g, base, {a, b}).data;
}

struct Pipeline {
  HeatLadder ladder;
  FrameField frames;
  DifferentiatedFields fields;
};

Pipeline caloric_pipeline(const DataPair& d, double tol, const OrthonormalFrame& e_inf, double cap = 200.0) {
  LadderParams p;
  p.s_max = cap;
  CarryOptions carry;
  carry.frames = true;
  carry.sections = {d.phi1};
  auto f = flow_until_flat(d.phi0, tol, p, carry);
  REQUIRE(f.flat);
  Pipeline out;
  out.ladder = std::move(f.ladder);
  out.frames = construct_caloric_gauge(out.ladder, e_inf, tol);
  out.fields = derivative_fields(out.ladder, out.frames, 0);
  return out;
}

// Centred-gradient Dirichlet energy plus kinetic energy, from ambient vectors.
double centred_energy(const DataPair& d) {
  const GridSpec& g = d.phi0.grid();
  const int D = d.phi0.dim();
  double acc = 0.0;
  Vec l1(D), l2(D);
  for (int iy = 0; iy < g.n; ++iy)
    for (int ix = 0; ix < g.n; ++ix) {
      if (g.in_margin(ix, iy)) continue;
      const int c = g.index(ix, iy);
      for (int step : {1, g.n}) {
        geom::log_map(d.phi0.at(c), d.phi0.at(c + step), l1.data(), D);
        geom::log_map(d.phi0.at(c), d.phi0.at(c - step), l2.data(), D);
        for (int i = 0; i < D; ++i) l1[i] = (l1[i] - l2[i]) / (2 * g.h);
        acc += 0.5 * geom::inner(l1.data(), l1.data(), D);
      }
      acc += 0.5 * geom::inner(d.phi1.at(c), d.phi1.at(c), D);
    }
  return acc * g.h * g.h;
}

}  // namespace

TEST_CASE("constant map: caloric frames equal e_inf and all fields vanish") {
  const auto g = GridSpec::make(24, 4.5);
  const auto base = HyperbolicPoint::from_coords({std::cosh(0.4), 0.0, std::sinh(0.4)});
  const auto d = DataPair::constant(g, base);
  const auto e_inf = standard_frame_at(base);
  const auto P = caloric_pipeline(d, 1e-6, e_inf);
  CHECK(P.ladder.size() == 1);
  for (const Vec& f : P.frames.frames)
    for (int c = 0; c < g.cells(); ++c)
      for (int a = 0; a < 2; ++a)
        for (int i = 0; i < 3; ++i) CHECK(f[(c * 2 + a) * 3 + i] == doctest::Approx(e_inf.axis(a)[i]).epsilon(1e-14));
  for (const auto& sf : P.fields.slices) {
    CHECK(sup_abs(sf.psi_s) == 0.0);
    CHECK(sup_abs(sf.psi_t) == 0.0);
    CHECK(sup_abs(sf.psi_x[0]) == 0.0);
    CHECK(sup_abs(sf.A_x[1]) == 0.0);
  }
  CHECK(max_of(check_torsion(P.fields)) == 0.0);
  CHECK(max_of(check_curvature(P.fields)) == 0.0);
  CHECK(max_of(check_heatflow_eq(P.fields)) == 0.0);
}

TEST_CASE("a ladder that is not flat is rejected") {
  const auto g = GridSpec::make(24, 4.5);
  const auto base = HyperbolicPoint::basepoint(2);
  const auto d = make_geodesic_data(g, base, e1_at(base), gaussian_profile(1.0, 0.3), zero_profile());
  LadderParams p;
  p.s_max = 0.01;
  CarryOptions carry;
  carry.frames = true;
  const auto L = heat_flow(d.phi0, p, carry);
  CHECK_THROWS_AS(construct_caloric_gauge(L, standard_frame_at(base), 1e-3), std::invalid_argument);
  CHECK_THROWS(construct_caloric_gauge(heat_flow(d.phi0, p), standard_frame_at(base), 10.0));
}

TEST_CASE("geodesic data: abelian reduction") {
  const auto g = GridSpec::make(32, 4.5);
  const auto base = HyperbolicPoint::basepoint(2);
  const auto u0 = gaussian_profile(1.0, 0.4, {0.2, -0.1});
  const auto u1 = gaussian_profile(0.5, 0.35);
  const auto d = make_geodesic_data(g, base, e1_at(base), u0, u1);
  const auto P = caloric_pipeline(d, 1e-3, standard_frame_at(base));
  const auto& F = P.fields;
  // frames are the parallel family; A vanishes and psi lies along the first axis
  double A = 0.0, off = 0.0;
  for (const auto& sf : F.slices) {
    A = std::max({A, sup_abs(sf.A_x[0]), sup_abs(sf.A_x[1])});
    for (int c = 0; c < g.cells(); ++c) off = std::max({off, std::abs(sf.psi_s[c * 2 + 1]), std::abs(sf.psi_x[0][c * 2 + 1])});
  }
  CHECK(A < 1e-8);
  CHECK(off < 1e-8);
  CHECK(max_of(check_torsion(F)) < 1e-8);
  CHECK(max_of(check_curvature(F)) < 1e-8);
  CHECK(max_of(P.frames.as_residual) < 1e-8);
  // the scalar stencil oracle: psi_x is the centred difference of u, psi_s its 5-point Laplacian
  const Vec u = sample_profile(g, u0);
  const auto& s0 = F.slices[0];
  double ex = 0.0, es = 0.0, hf = 0.0;
  for (int iy = 0; iy < g.n; ++iy)
    for (int ix = 0; ix < g.n; ++ix) {
      if (g.in_margin(ix, iy)) continue;
      const int c = g.index(ix, iy);
      ex = std::max(ex, std::abs(s0.psi_x[0][c * 2] - (u[c + 1] - u[c - 1]) / (2 * g.h)));
      const double lap = (u[c + 1] + u[c - 1] + u[c + g.n] + u[c - g.n] - 4 * u[c]) / (g.h * g.h);
      es = std::max(es, std::abs(s0.psi_s[c * 2] - lap));
      if (ix > g.margin && iy > g.margin && ix < g.n - g.margin - 1 && iy < g.n - g.margin - 1) {
        const double wide = (u[c + 2] + u[c - 2] + u[c + 2 * g.n] + u[c - 2 * g.n] - 4 * u[c]) / (4 * g.h * g.h);
        hf += (lap - wide) * (lap - wide);
      }
    }
  CHECK(ex < 1e-10);
  CHECK(es < 1e-9);
  CHECK(check_heatflow_eq(F)[0] == doctest::Approx(std::sqrt(hf) * g.h).epsilon(1e-8));
  // both routes to the connection vanish
  const auto I = connection_fields_integral(F);
  CHECK(max_of(connection_difference(I.A_x, F)) < 1e-8);
  for (const Vec& a : I.A_t) CHECK(sup_abs(a) < 1e-8);
}

TEST_CASE("energy of the differentiated fields at s = 0") {
  const auto g = GridSpec::make(48, 4.5);
  const auto base = HyperbolicPoint::basepoint(2);
  const auto d = two_direction_data(g, base);
  const auto P = caloric_pipeline(d, 1e-2, standard_frame_at(base));
  const auto& s0 = P.fields.slices[0];
  double psi2 = 0.0;
  for (const Vec* v : {&s0.psi_x[0], &s0.psi_x[1], &s0.psi_t})
    for (double x : *v) psi2 += x * x;
  psi2 *= g.h * g.h;
  CHECK(psi2 == doctest::Approx(2 * centred_energy(d)).epsilon(1e-10));
  MESSAGE("centred vs edge energy " << centred_energy(d) << " " << total_energy(d));
  CHECK(psi2 == doctest::Approx(2 * total_energy(d)).epsilon(0.05));
}

TEST_CASE("gauge equivariance under rotation of e_inf") {
  const auto g = GridSpec::make(32, 4.5);
  const auto base = HyperbolicPoint::basepoint(2);
  const auto d = two_direction_data(g, base);
  const auto e_inf = standard_frame_at(base);
  const double th = 0.7;
  const std::vector<double> U{std::cos(th), -std::sin(th), std::sin(th), std::cos(th)};
  // e_inf o U^-1: axis b is sum_a e_a (U^-1)_ab = sum_a e_a U_ba
  std::vector<Vec> axes(2, Vec(3, 0.0));
  for (int b = 0; b < 2; ++b)
    for (int a = 0; a < 2; ++a)
      for (int i = 0; i < 3; ++i) axes[b][i] += e_inf.axis(a)[i] * U[b * 2 + a];
  const auto e_rot = OrthonormalFrame::make(base, axes);
  const auto P1 = caloric_pipeline(d, 1e-2, e_inf);
  const auto P2 = caloric_pipeline(d, 1e-2, e_rot);
  const auto R = rotate_fields(P1.fields, U);
  double worst = 0.0;
  for (size_t k = 0; k < R.size(); ++k) {
    const auto &a = R.slices[k], &b = P2.fields.slices[k];
    for (size_t i = 0; i < a.psi_s.size(); ++i)
      worst = std::max({worst, std::abs(a.psi_s[i] - b.psi_s[i]), std::abs(a.psi_t[i] - b.psi_t[i]),
                        std::abs(a.psi_x[0][i] - b.psi_x[0][i])});
    for (size_t i = 0; i < a.A_x[0].size(); ++i) worst = std::max(worst, std::abs(a.A_x[1][i] - b.A_x[1][i]));
  }
  CHECK(worst < 1e-10);
  const auto h1 = check_heatflow_eq(P1.fields), h2 = check_heatflow_eq(P2.fields);
  for (size_t k = 0; k < h1.size(); ++k) CHECK(h2[k] == doctest::Approx(h1[k]).epsilon(1e-10));
}

TEST_CASE("connection: frame differences against the integral of psi_s wedge psi_x") {
  const auto base = HyperbolicPoint::basepoint(2);
  auto gap = [&](int n) {
    const auto g = GridSpec::make(n, 5.0);
    const auto P = caloric_pipeline(two_direction_data(g, base), 1e-4, standard_frame_at(base));
    const auto I = connection_fields_integral(P.fields);
    const auto diff = connection_difference(I.A_x, P.fields);
    double size = 0.0;
    for (const auto& sf : P.fields.slices) size = std::max(size, sup_abs(sf.A_x[0]));
    return std::pair{diff[0], size};
  };
  const auto [d1, a1] = gap(24);
  const auto [d2, a2] = gap(48);
  MESSAGE("A gap " << d1 << " " << d2 << " sup|A| " << a1 << " " << a2);
  CHECK(a2 > 0.05);
  CHECK(d2 < d1);
}

TEST_CASE("identity residuals converge at second order") {
  const auto base = HyperbolicPoint::basepoint(2);
  std::vector<std::array<double, 4>> r;
  for (int n : {32, 64, 128}) {
    const auto g = GridSpec::make(n, 4.5);
    LadderParams p;
    p.s_max = 0.05;
    CarryOptions carry;
    carry.frames = true;
    const auto L = heat_flow(two_direction_data(g, base).phi0, p, carry);
    const auto F = derivative_fields(L, transported_gauge(L));
    const auto t = check_torsion(F), c = check_curvature(F), h = check_heatflow_eq(F);
    // compare at the common abscissae s >= 0.01
    std::array<double, 4> m{};
    for (size_t k = 0; k < L.size(); ++k) {
      // frames are exact chord transports, so the centred A_s stencil only sees rounding;
      // the one-sided stencil at s = 0 carries the O(ds) holonomy of two successive steps
      m[3] = std::max(m[3], L.as_residual[k]);
      if (L.s[k] < 0.01) continue;
      m[0] = std::max(m[0], t[k]);
      m[1] = std::max(m[1], c[k]);
      m[2] = std::max(m[2], h[k]);
    }
    r.push_back(m);
  }
  for (int q = 0; q < 4; ++q) {
    const double o1 = std::log2(r[0][q] / r[1][q]), o2 = std::log2(r[1][q] / r[2][q]);
    MESSAGE("residual " << q << ": " << r[0][q] << " " << r[1][q] << " " << r[2][q] << " orders " << o1 << " " << o2);
    CHECK(o2 >= 1.9);
  }
}

TEST_CASE("wave tension") {
  const auto base = HyperbolicPoint::basepoint(2);
  SUBCASE("constant trajectory") {
    const auto g = GridSpec::make(24, 4.5);
    const auto ts = wave_time_stencil(DataPair::constant(g, base), 2);
    CHECK(wave_tension(ts, radial_frames(ts.levels[2])).l2 == 0.0);
  }
  SUBCASE("evolved geodesic wave map, refinement") {
    std::vector<double> w;
    for (int n : {32, 64, 128}) {
      const auto g = GridSpec::make(n, 4.0);
      const auto d = make_geodesic_data(g, base, e1_at(base), gaussian_profile(1.0, 0.5), gaussian_profile(0.5, 0.5));
      const long centre = std::lround(0.5 / (0.25 * g.h));
      const auto ts = wave_time_stencil(d, centre);
      w.push_back(wave_tension(ts, radial_frames(ts.levels[2])).l2 / std::sqrt(total_energy(d)));
    }
    MESSAGE("wave tension " << w[0] << " " << w[1] << " " << w[2]);
    CHECK(w[1] / w[2] >= 3.5);
  }
  SUBCASE("a non-solution is detected") {
    const auto g = GridSpec::make(64, 4.0);
    const auto d = make_geodesic_data(g, base, e1_at(base), gaussian_profile(1.0, 0.5), zero_profile());
    TimeStencil ts;
    ts.dt = 0.25 * g.h;
    for (auto& l : ts.levels) l = d.phi0;  // frozen in time
    CHECK(wave_tension(ts, radial_frames(d.phi0)).l2 / std::sqrt(total_energy(d)) > 0.1);
  }
}

TEST_CASE("energy metric") {
  const auto g = GridSpec::make(64, 4.5);
  const auto base = HyperbolicPoint::basepoint(2);
  const auto d = two_direction_data(g, base);
  const auto P = caloric_pipeline(d, 1e-4, standard_frame_at(base));
  CHECK(energy_metric(P.fields, P.fields, false).distance == 0.0);
  const double th = 1.1;
  const auto R = rotate_fields(P.fields, {std::cos(th), -std::sin(th), std::sin(th), std::cos(th)});
  CHECK(energy_metric(P.fields, R, false).distance > 0.1);
  const auto q = energy_metric(P.fields, R, true);
  CHECK(q.distance <= 1e-8);
  CHECK(q.rotation[0] == doctest::Approx(std::cos(th)).epsilon(1e-10));
  const double d0 = energy_metric(P.fields, zero_fields_like(P.fields), false).distance;
  MESSAGE("d(Psi,0)^2 " << d0 * d0 << " E " << total_energy(d));
  CHECK(d0 * d0 == doctest::Approx(total_energy(d)).epsilon(1e-3));
}
