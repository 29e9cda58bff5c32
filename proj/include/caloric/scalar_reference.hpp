#pragma once

#include <complex>
#include <vector>

#include "caloric/grid.hpp"

namespace caloric {

// Exact (spectral) solutions of the scalar heat and wave equations for a profile
// sampled on the grid, treated as one period of a periodic function.
class ScalarSpectrum {
 public:
  ScalarSpectrum(const GridSpec& g, const Vec& u);

  const GridSpec& grid() const { return grid_; }
  // e^{s Delta} u
  Vec heat(double s) const;
  // ||Delta e^{s Delta} u||^2
  double laplacian_heat_norm2(double s) const;
  // ||grad e^{s Delta} u||^2
  double gradient_heat_norm2(double s) const;

  // Solution at time t of u_tt = Delta u with u(0) = u0, u_t(0) = u1.
  static Vec wave(const GridSpec& g, const Vec& u0, const Vec& u1, double t);

 private:
  Vec from_modes(const std::vector<std::complex<double>>& modes) const;
  GridSpec grid_;
  std::vector<std::complex<double>> modes_;
  Vec k2_;
};

// ||Delta e^{s Delta} u0||^2 + ||grad e^{s Delta} u1||^2 for geodesic data with profiles (u0, u1).
double scalar_esd(const ScalarSpectrum& u0, const ScalarSpectrum& u1, double s);

}  // namespace caloric
