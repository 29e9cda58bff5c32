#pragma once

#include <optional>
#include <string>
#include <vector>

#include "caloric/caloric_gauge.hpp"
#include "caloric/spectral.hpp"

namespace caloric {

// Total ESD mass: ladder quadrature plus tail.
double esd_total(const ESDProfile& p);
// integral_0^x ESD ds by the ladder quadrature (trapezoid on [0, s_1], log trapezoid beyond),
// interpolating inside an interval; beyond s_K the tail is added in full.
double esd_cumulative(const ESDProfile& p, double x);

// Smallest ladder abscissa whose cumulative mass reaches eps / 2.
double find_frequency_scale(const ESDProfile& p, double eps);

struct GapResult {
  double s_prime = 0.0;
  double K = 0.0;
  double mass = 0.0;     // ESD mass in [s'/K, K s']
  bool floor_met = false;
};
// K descending, then s' ascending over ladder points in [s_lo, s_hi]: the first pair whose annulus mass is
// <= max(K^-100, floor). Without one, the pair of least mass (first in scan order) with floor_met false.
// floor < 0 selects 1e-12 times the total mass.
GapResult pigeonhole_gap(const ESDProfile& p, double s_lo, double s_hi, std::vector<double> K_list, double floor = -1.0);

struct CenterResult {
  Point2 x{0.0, 0.0};
  int cell = 0;
  double captured = 0.0;  // local_energy(e, x, r)
};
// Cell centre maximizing local_energy(e, x, r); ties go to the lowest cell index.
CenterResult find_spatial_center(const EnergyDensityField& e, double r);
// Plain exhaustive scan; the oracle for the accelerated version.
CenterResult find_spatial_center_bruteforce(const EnergyDensityField& e, double r);

// Smallest cell distance R from x such that the energy of cells farther than R is <= eps; 0 when eps >= total.
double concentration_radius(const EnergyDensityField& e, const Point2& x, double eps);

// Translate by -x then dilate by s0^-1/2, so that the scale becomes 1 and the centre 0.
DataPair normalize_data(const DataPair& d, double s0, const Point2& x);

struct TightnessRow {
  double R = 0.0;
  double psi_s_exterior = 0.0;  // integral over the s window of integral_{|x| > 2R} |psi_s|^2
  double psi_s_outside = 0.0;   // the same plus the ladder mass of |psi_s|^2 outside the window
  double psi_t_exterior = 0.0;  // integral_{|x| > 2R} |psi_t(s_fixed)|^2
};
struct TightnessReport {
  double s_lo = 0.0, s_hi = 0.0, s_fixed = 0.0;
  std::vector<TightnessRow> rows;
};
// s_fixed is the first ladder point in the window.
TightnessReport tightness_report(const DifferentiatedFields& f, double s_lo, double s_hi, const std::vector<double>& R_list);

struct LocalizationParams {
  LadderParams ladder;
  double eps = 0.5;                    // frequency-scale threshold, relative to the total ESD mass
  double center_radius_factor = 2.0;   // scan disk radius in units of sqrt(s0)
  std::vector<double> radius_eps{0.5, 0.2, 0.1, 0.05, 0.02, 0.01};  // relative to the total energy
  std::vector<double> K_list{100, 50, 20, 10, 5, 2};
  double gap_floor = -1.0;
  std::vector<double> tightness_R{0.5, 1, 2, 4};  // in units of sqrt(s0)
};

struct LocalizationReport {
  double s_scale = 0.0;
  Point2 x_center{0.0, 0.0};
  double captured = 0.0;
  double energy = 0.0;
  std::vector<std::pair<double, double>> radius_table;  // (eps, C(eps) = R / sqrt(s0))
  std::optional<GapResult> gap;
  TightnessReport tightness;
  ESDProfile profile;
};

LocalizationReport localize(const DataPair& d, const LocalizationParams& params);

}  // namespace caloric
