#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <random>

#include "caloric/hyperbolic.hpp"
#include "doctest.h"

using namespace caloric;

namespace {

struct Gen {
  std::mt19937_64 rng{12345};
  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }
  // Point at distance up to rmax from the basepoint in a random direction.
  HyperbolicPoint point(int m, double rmax) {
    Vec dir(m);
    double nrm = 0.0;
    for (double& x : dir) {
      x = uniform(-1, 1);
      nrm += x * x;
    }
    nrm = std::sqrt(nrm);
    const double r = uniform(0, rmax);
    Vec c(m + 1);
    c[0] = std::cosh(r);
    for (int i = 0; i < m; ++i) c[i + 1] = std::sinh(r) * dir[i] / nrm;
    return HyperbolicPoint::from_coords(c);
  }
  TangentVector tangent(const HyperbolicPoint& p, double scale) {
    Vec w(p.m() + 1);
    for (double& x : w) x = uniform(-scale, scale);
    return project_to_tangent(p, w);
  }
};

double inner(const TangentVector& a, const TangentVector& b) { return minkowski_inner(a.vec(), b.vec()); }

}  // namespace

TEST_CASE("minkowski inner product examples") {
  const Vec b{1, 0, 0}, e{0, 1, 0};
  CHECK(minkowski_inner(b, b) == -1.0);
  CHECK(minkowski_inner(b, e) == 0.0);
  const Vec a{std::cosh(1.0), std::sinh(1.0), 0};
  CHECK(minkowski_inner(a, a) == doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("exp and log on the basepoint geodesic") {
  const auto p = HyperbolicPoint::basepoint(2);
  const double r = 1.7;
  const auto q = exp_map(p, TangentVector::make(p, {0, r, 0}));
  CHECK(q[0] == doctest::Approx(std::cosh(r)).epsilon(1e-14));
  CHECK(q[1] == doctest::Approx(std::sinh(r)).epsilon(1e-14));
  CHECK(q[2] == 0.0);
  CHECK(exp_map(p, TangentVector::zero(p))[0] == 1.0);
  CHECK(log_map(p, p).norm() == 0.0);
  const auto q1 = HyperbolicPoint::from_coords({std::cosh(1.0), std::sinh(1.0), 0});
  CHECK(std::abs(log_map(p, q1).norm() - 1.0) < 1e-12);
}

TEST_CASE("exp rejects non-tangent vectors") {
  const auto p = HyperbolicPoint::basepoint(2);
  CHECK_THROWS(TangentVector::make(p, {0.5, 1, 0}));
}

TEST_CASE("random exp/log round trip and distance formula") {
  Gen g;
  double worst_rt = 0.0, worst_len = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const int m = 1 + k % 4;
    const auto p = g.point(m, 4.0);
    const auto q = g.point(m, 4.0);
    const auto v = log_map(p, q);
    const double d_formula = std::acosh(std::max(1.0, -minkowski_inner(p.coords(), q.coords())));
    worst_len = std::max(worst_len, std::abs(v.norm() - d_formula) / std::max(1.0, d_formula));
    const auto q2 = exp_map(p, v);
    worst_rt = std::max(worst_rt, distance(q, q2));
    CHECK(std::abs(minkowski_inner(q2.coords(), q2.coords()) + 1.0) < 1e-14 * q2[0] * q2[0]);
    CHECK(q2[0] >= 1.0);
  }
  CHECK(worst_rt < 1e-10);
  CHECK(worst_len < 1e-10);
}

TEST_CASE("exp/log round trip out to distance 20 at coordinate resolution") {
  // A point at distance r from the basepoint has coordinates of size cosh r, so its
  // position is only resolved to about eps * cosh r.
  Gen g;
  double worst = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const int m = 1 + k % 4;
    const auto p = g.point(m, 3.0);
    const auto dir = g.tangent(p, 1.0);
    const double r = g.uniform(0.0, 20.0);
    Vec w(dir.vec().begin(), dir.vec().end());
    for (double& x : w) x *= r / std::max(dir.norm(), 1e-300);
    const auto q = exp_map(p, TangentVector::make(p, w, 1e-8));
    CHECK(distance(p, q) == doctest::Approx(r).epsilon(1e-10).scale(1.0));
    const auto q2 = exp_map(p, log_map(p, q));
    const double resolution = 2.220446049250313e-16 * p[0] * std::cosh(r);
    worst = std::max(worst, distance(q, q2) / std::max(resolution, 1e-12));
  }
  CHECK(worst < 64.0);
}

TEST_CASE("log is accurate for nearby points") {
  const auto p = HyperbolicPoint::basepoint(2);
  for (double r : {1e-3, 1e-6, 1e-9, 1e-12}) {
    const auto q = exp_map(p, TangentVector::make(p, {0, r, 0}));
    CHECK(log_map(p, q).norm() == doctest::Approx(r).epsilon(1e-9));
  }
}

TEST_CASE("parallel transport is an isometry without single-geodesic holonomy") {
  Gen g;
  double worst_ip = 0.0, worst_rt = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const int m = 1 + k % 4;
    const auto p = g.point(m, 4.0);
    const auto q = g.point(m, 4.0);
    const auto a = g.tangent(p, 1.0);
    const auto b = g.tangent(p, 1.0);
    const auto ta = parallel_transport(p, q, a);
    const auto tb = parallel_transport(p, q, b);
    const double scale = std::max({1.0, a.norm() * b.norm()});
    worst_ip = std::max(worst_ip, std::abs(inner(ta, tb) - inner(a, b)) / scale);
    const auto back = parallel_transport(q, p, ta);
    double err = 0.0;
    for (int i = 0; i <= m; ++i) err = std::max(err, std::abs(back.vec()[i] - a.vec()[i]));
    worst_rt = std::max(worst_rt, err / std::max(1.0, a.norm()));
    CHECK(std::abs(minkowski_inner(q.coords(), ta.vec())) < 1e-8 * q[0] * std::max(1.0, a.norm()));
  }
  CHECK(worst_ip < 1e-9);
  CHECK(worst_rt < 1e-10);
  const auto p = HyperbolicPoint::basepoint(3);
  const auto v = TangentVector::make(p, {0, 1, 2, 3});
  const auto same = parallel_transport(p, p, v);
  for (int i = 0; i < 4; ++i) CHECK(same.vec()[i] == v.vec()[i]);
}

TEST_CASE("transport sends the geodesic direction to itself") {
  Gen g;
  for (int k = 0; k < 200; ++k) {
    const auto p = g.point(2, 3.0), q = g.point(2, 3.0);
    const auto v = log_map(p, q);
    const auto w = parallel_transport(p, q, v);
    const auto u = log_map(q, p);
    for (int i = 0; i < 3; ++i) CHECK(w.vec()[i] == doctest::Approx(-u.vec()[i]).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("projection to the tangent space") {
  Gen g;
  const auto p = g.point(3, 2.0);
  const auto t = g.tangent(p, 1.0);
  const auto t2 = project_to_tangent(p, t.vec());
  for (int i = 0; i < 4; ++i) CHECK(t2.vec()[i] == doctest::Approx(t.vec()[i]).epsilon(1e-12));
  const auto z = project_to_tangent(p, p.coords());
  CHECK(z.norm() < 1e-12);
  for (int k = 0; k < 10000; ++k) {
    const auto q = g.point(1 + k % 4, 4.0);
    Vec w(q.m() + 1);
    for (double& x : w) x = g.uniform(-3, 3);
    const auto r = project_to_tangent(q, w);
    CHECK(std::abs(minkowski_inner(r.vec(), q.coords())) < 1e-12 * q[0] * q[0] * 3.0);
  }
}

TEST_CASE("frame_at on the basepoint and in general") {
  const auto f = standard_frame(3);
  for (int a = 0; a < 3; ++a)
    for (int i = 0; i < 4; ++i) CHECK(f.axis(a)[i] == (i == a + 1 ? 1.0 : 0.0));
  Gen g;
  for (int k = 0; k < 2000; ++k) {
    const int m = 1 + k % 4;
    const auto p = g.point(m, 3.0);
    std::vector<Vec> seed(m, Vec(m + 1));
    for (auto& row : seed)
      for (double& x : row) x = g.uniform(-1, 1);
    const auto fr = frame_at(p, seed);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        CHECK(std::abs(minkowski_inner(fr.axis(a), fr.axis(b)) - (a == b ? 1.0 : 0.0)) < 1e-12);
    CHECK(orientation(p.coords(), fr.axes()) > 0.0);
  }
}

TEST_CASE("frame_at rejects dependent seeds naming the row") {
  const auto p = HyperbolicPoint::basepoint(2);
  try {
    frame_at(p, {{0, 1, 0}, {0, 2, 0}});
    FAIL("expected rank error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("row 1") != std::string::npos);
  }
}

TEST_CASE("frame_at commutes with Lorentz rotations") {
  Gen g;
  for (int k = 0; k < 200; ++k) {
    const auto U = LorentzRotation::boost(2, 1, g.uniform(-2, 2))
                       .compose(LorentzRotation::spatial_rotation(2, 1, 2, g.uniform(-3, 3)));
    const auto p = g.point(2, 2.0);
    std::vector<Vec> seed(2, Vec(3));
    for (auto& row : seed)
      for (double& x : row) x = g.uniform(-1, 1);
    std::vector<Vec> useed;
    for (const auto& row : seed) {
      Vec out(3);
      U.apply(row.data(), out.data());
      useed.push_back(out);
    }
    const auto a = apply_rotation(U, frame_at(p, seed));
    const auto b = frame_at(apply_rotation(U, p), useed);
    for (int ax = 0; ax < 2; ++ax)
      for (int i = 0; i < 3; ++i) CHECK(a.axis(ax)[i] == doctest::Approx(b.axis(ax)[i]).epsilon(1e-10).scale(1.0));
  }
}

TEST_CASE("Lorentz rotations") {
  const auto I = LorentzRotation::identity(2);
  const auto p = HyperbolicPoint::from_coords({std::cosh(0.5), std::sinh(0.5), 0});
  const auto Ip = apply_rotation(I, p);
  for (int i = 0; i < 3; ++i) CHECK(Ip[i] == p[i]);
  const auto R = LorentzRotation::spatial_rotation(2, 1, 2, 0.7);
  const auto b = apply_rotation(R, HyperbolicPoint::basepoint(2));
  CHECK(b[0] == 1.0);
  CHECK(b[1] == 0.0);
  CHECK(b[2] == 0.0);
  CHECK_THROWS(LorentzRotation::from_matrix(2, {1, 0, 0, 0, 2, 0, 0, 0, 1}));
  CHECK_THROWS(LorentzRotation::from_matrix(2, {-1, 0, 0, 0, -1, 0, 0, 0, 1}));  // flips the sheet
  CHECK_THROWS(LorentzRotation::from_matrix(2, {1, 0, 0, 0, -1, 0, 0, 0, 1}));   // det -1
  Gen g;
  for (int k = 0; k < 10000; ++k) {
    const auto U = LorentzRotation::boost(3, 1 + k % 3, g.uniform(-2, 2))
                       .compose(LorentzRotation::spatial_rotation(3, 1, 2, g.uniform(-3, 3)))
                       .compose(LorentzRotation::spatial_rotation(3, 2, 3, g.uniform(-3, 3)));
    const auto V = LorentzRotation::from_matrix(3, U.matrix(), 1e-9);
    const auto a = g.point(3, 3.0), c = g.point(3, 3.0);
    const auto Ua = apply_rotation(V, a), Uc = apply_rotation(V, c);
    const double before = minkowski_inner(a.coords(), c.coords());
    const double after = minkowski_inner(Ua.coords(), Uc.coords());
    // relative to the size of the products being cancelled
    CHECK(std::abs(after - before) < 1e-12 * Ua[0] * Uc[0]);
    const auto back = apply_rotation(V.inverse(), apply_rotation(V, a));
    CHECK(distance(back, a) < 1e-8);
  }
}
