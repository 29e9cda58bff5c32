#include "caloric/scalar_reference.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace caloric {

namespace {

std::mutex g_plan_mutex;  // FFTW planning is not thread safe

std::vector<std::complex<double>> dft(const GridSpec& g, std::vector<std::complex<double>> in, int sign) {
  const int n = g.n;
  std::vector<std::complex<double>> out(in.size());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(g_plan_mutex);
    plan = fftw_plan_dft_2d(n, n, reinterpret_cast<fftw_complex*>(in.data()),
                            reinterpret_cast<fftw_complex*>(out.data()), sign, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(g_plan_mutex);
    fftw_destroy_plan(plan);
  }
  return out;
}

Vec wavenumbers_squared(const GridSpec& g) {
  const int n = g.n;
  const double dk = 2.0 * std::numbers::pi / (n * g.h);
  Vec k2(g.cells());
  for (int iy = 0; iy < n; ++iy) {
    const double ky = dk * (iy <= n / 2 ? iy : iy - n);
    for (int ix = 0; ix < n; ++ix) {
      const double kx = dk * (ix <= n / 2 ? ix : ix - n);
      k2[g.index(ix, iy)] = kx * kx + ky * ky;
    }
  }
  return k2;
}

}  // namespace

ScalarSpectrum::ScalarSpectrum(const GridSpec& g, const Vec& u) : grid_(g), k2_(wavenumbers_squared(g)) {
  if (static_cast<int>(u.size()) != g.cells()) throw std::invalid_argument("ScalarSpectrum: size mismatch");
  std::vector<std::complex<double>> in(u.begin(), u.end());
  modes_ = dft(g, std::move(in), FFTW_FORWARD);
}

Vec ScalarSpectrum::from_modes(const std::vector<std::complex<double>>& modes) const {
  const auto out = dft(grid_, modes, FFTW_BACKWARD);
  Vec r(out.size());
  const double inv = 1.0 / grid_.cells();
  for (size_t i = 0; i < out.size(); ++i) r[i] = out[i].real() * inv;
  return r;
}

Vec ScalarSpectrum::heat(double s) const {
  std::vector<std::complex<double>> m(modes_);
  for (size_t i = 0; i < m.size(); ++i) m[i] *= std::exp(-s * k2_[i]);
  return from_modes(m);
}

double ScalarSpectrum::laplacian_heat_norm2(double s) const {
  double acc = 0.0;
  for (size_t i = 0; i < modes_.size(); ++i) acc += k2_[i] * k2_[i] * std::exp(-2.0 * s * k2_[i]) * std::norm(modes_[i]);
  const double n2 = static_cast<double>(grid_.cells());
  return grid_.h * grid_.h * acc / n2;
}

double ScalarSpectrum::gradient_heat_norm2(double s) const {
  double acc = 0.0;
  for (size_t i = 0; i < modes_.size(); ++i) acc += k2_[i] * std::exp(-2.0 * s * k2_[i]) * std::norm(modes_[i]);
  const double n2 = static_cast<double>(grid_.cells());
  return grid_.h * grid_.h * acc / n2;
}

Vec ScalarSpectrum::wave(const GridSpec& g, const Vec& u0, const Vec& u1, double t) {
  ScalarSpectrum a(g, u0), b(g, u1);
  std::vector<std::complex<double>> m(a.modes_.size());
  for (size_t i = 0; i < m.size(); ++i) {
    const double k = std::sqrt(a.k2_[i]);
    const double sinc_t = k * t < 1e-12 ? t : std::sin(k * t) / k;
    m[i] = std::cos(k * t) * a.modes_[i] + sinc_t * b.modes_[i];
  }
  return a.from_modes(m);
}

double scalar_esd(const ScalarSpectrum& u0, const ScalarSpectrum& u1, double s) {
  return u0.laplacian_heat_norm2(s) + u1.gradient_heat_norm2(s);
}

}  // namespace caloric
