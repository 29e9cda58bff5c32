#include <cmath>

#include "caloric/grid.hpp"
#include "caloric/scalar_reference.hpp"
#include "doctest.h"

using namespace caloric;

namespace {
const double kPi = 3.14159265358979323846;
}

TEST_CASE("spectral heat of a Gaussian matches the closed form") {
  // e^{s Delta} of A exp(-r^2/2 sigma^2) is A sigma^2/(sigma^2+2s) exp(-r^2/2(sigma^2+2s))
  const auto g = GridSpec::make(128, 12.0);
  const double A = 1.3, sigma = 1.0;
  // uncut Gaussian; at the domain edge it is below 1e-30
  const Vec u = sample_profile(g, [&](double x, double y) { return A * std::exp(-(x * x + y * y) / (2 * sigma * sigma)); });
  const ScalarSpectrum sp(g, u);
  for (double s : {0.0, 0.1, 0.5, 1.0}) {  // larger s feels the periodic images
    const Vec v = sp.heat(s);
    const double w = sigma * sigma + 2 * s;
    double err = 0.0;
    for (int iy = 0; iy < g.n; ++iy)
      for (int ix = 0; ix < g.n; ++ix) {
        const double r2 = g.coord(ix) * g.coord(ix) + g.coord(iy) * g.coord(iy);
        err = std::max(err, std::abs(v[g.index(ix, iy)] - A * sigma * sigma / w * std::exp(-r2 / (2 * w))));
      }
    CHECK(err < 1e-10);
    // ||grad e^{s Delta} u||^2 = pi A^2 sigma^4 / w^2
    CHECK(sp.gradient_heat_norm2(s) == doctest::Approx(kPi * A * A * std::pow(sigma, 4) / (w * w)).epsilon(1e-9));
  }
  // ||Delta e^{s Delta} u||^2 against finite differences of the closed-form gradient norm:
  // d/ds ||grad e^{sD}u||^2 = -2 ||Delta e^{sD} u||^2
  const double s = 0.5, ds = 1e-4;
  const double fd = -(sp.gradient_heat_norm2(s + ds) - sp.gradient_heat_norm2(s - ds)) / (4 * ds);
  CHECK(sp.laplacian_heat_norm2(s) == doctest::Approx(fd).epsilon(1e-6));
}

TEST_CASE("spectral wave solution: d'Alembert on a plane wave and energy conservation") {
  const auto g = GridSpec::make(64, 8.0);
  // a single Fourier mode evolves as cos(|k| t)
  Vec u(g.cells()), zero(g.cells(), 0.0);
  const double k = 2 * kPi * 3 / (g.n * g.h);
  for (int iy = 0; iy < g.n; ++iy)
    for (int ix = 0; ix < g.n; ++ix) u[g.index(ix, iy)] = std::cos(k * g.coord(ix));
  const double t = 0.37;
  const Vec w = ScalarSpectrum::wave(g, u, zero, t);
  double err = 0.0;
  for (int c = 0; c < g.cells(); ++c) err = std::max(err, std::abs(w[c] - std::cos(k * t) * u[c]));
  CHECK(err < 1e-12);
  // velocity only: sin(|k| t)/|k|
  const Vec w1 = ScalarSpectrum::wave(g, zero, u, t);
  err = 0.0;
  for (int c = 0; c < g.cells(); ++c) err = std::max(err, std::abs(w1[c] - std::sin(k * t) / k * u[c]));
  CHECK(err < 1e-12);
}
