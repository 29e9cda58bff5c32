#pragma once

#include <string>
#include <utility>
#include <vector>

#include "caloric/grid.hpp"

namespace caloric {

// Exact two-level state of the constrained leapfrog; swapping prev and curr reverses time.
struct LeapfrogState {
  MapField prev;
  MapField curr;
  double dt = 0.0;
  long step = 0;
};

struct WaveOptions {
  double cfl = 0.25;
  std::vector<double> output_times;  // empty: t0 and t1 only
  bool keep_neighbors = false;       // store phi at t -/+ dt next to each slice
};

struct WaveTrajectory {
  std::vector<double> times;
  std::vector<DataPair> slices;
  std::vector<std::pair<MapField, MapField>> neighbors;  // (t - dt, t + dt) when kept
  double cfl = 0.0;
  double dt = 0.0;
  std::string scheme = "constrained-leapfrog";
  double max_constraint_drift = 0.0;  // before per-step renormalization
  std::vector<double> gradient_sup;   // per slice
  LeapfrogState final_state;
};

// Second-order start: phi^1 = phi0 + dt phi1 + (dt^2 Lap phi0 - mu phi0)/2 with mu putting phi^1 on the sheet.
LeapfrogState leapfrog_start(const DataPair& d, double dt);
// phi^{n+1} = w - mu phi^n, w = 2 phi^n - phi^{n-1} + dt^2 Lap phi^n, mu the small root keeping phi^{n+1} on the sheet.
// Returns the constraint defect before renormalization.
double leapfrog_step(LeapfrogState& s);
// Slice (phi^n, centred velocity) of a state whose next level is 'next'.
DataPair slice_of(const LeapfrogState& s, const MapField& next);

// Integrates from t0 to t1 (t1 < t0 runs backwards) with |dt| <= cfl h.
WaveTrajectory evolve_wave(const DataPair& d0, double t0, double t1, const WaveOptions& opt = {});
// Continues an exact state for a number of steps, returning slices at every step index in 'outputs'.
WaveTrajectory continue_wave(LeapfrogState s, long steps, const std::vector<long>& outputs, double t0 = 0.0);

std::vector<std::pair<double, double>> energy_series(const WaveTrajectory& tr);
// Tangential part of the discrete d'Alembertian at slice k (needs neighbours), per cell norm.
Vec wave_residual(const WaveTrajectory& tr, size_t k);
// Tangential part of the discrete d'Alembertian for three consecutive time levels.
Vec wave_residual(const MapField& prev, const MapField& curr, const MapField& next, double dt);
// Energy outside B(center, r0 + |t - t0|) per slice.
std::vector<std::pair<double, double>> lightcone_leak(const WaveTrajectory& tr, const Point2& center, double r0);

}  // namespace caloric
