#pragma once

#include <optional>
#include <vector>

#include "caloric/grid.hpp"

namespace caloric {

struct LadderParams {
  double rho = 1.1;
  double s_min = 0.0;       // 0 selects h^2 / 4
  double s_max = 1.0;
  double substep_c = 0.2;   // substeps satisfy ds <= substep_c * h^2
  double energy_tol = 1e-10;  // allowed Dirichlet energy increase between ladder points, relative
};

// Ladder abscissae: 0, then the powers rho^k in [s_min, s_max] plus the first power >= s_max.
// Anchoring at integer powers of rho makes ladders of different grids share their points.
std::vector<double> ladder_abscissae(const LadderParams& p, double h);

// Quantities carried along the flow besides the map.
struct CarryOptions {
  // Transport an orthonormal frame along s -> phi(s, x) for every cell, starting from
  // standard_frame_at(base) transported to phi(0, x).
  bool frames = false;
  // Solve the covariant heat equation for each section (tangent to phi(0, .), zero on the margin).
  std::vector<TangentField> sections;
};

struct HeatLadder {
  GridSpec grid;
  std::vector<double> s;
  std::vector<MapField> slices;
  std::vector<double> dirichlet;
  std::vector<int> substeps;  // per interval [s_k, s_{k+1}]
  LadderParams params;

  // Present when CarryOptions::frames was set: per slice, cells * m axes * (m+1) coordinates.
  std::vector<Vec> frames;
  // Per slice L2 norm of the skew part of <e_b, d_s e_a>, from a centred difference over substeps.
  std::vector<double> as_residual;
  // sections[j][k]: section j at slice k.
  std::vector<std::vector<TangentField>> sections;

  const HyperbolicPoint& base() const { return slices.front().base(); }
  int m() const { return slices.front().m(); }
  size_t size() const { return s.size(); }
  double sup_distance_to_base(size_t k) const;
};

HeatLadder heat_flow(const MapField& phi, const LadderParams& params, const CarryOptions& carry = {});

struct FlatResult {
  bool flat = false;     // false: not flat by the cap
  double s_star = 0.0;   // first ladder point with sup distance <= tol
  double sup_distance = 0.0;
  HeatLadder ladder;     // truncated at s_star when flat
};

// Flows until the sup distance to base is <= tol, or s exceeds params.s_max (the cap).
FlatResult flow_until_flat(const MapField& phi, double tol, const LadderParams& params,
                           const CarryOptions& carry = {});

// Default cap: 1e3 * (domain diameter)^2.
double default_s_cap(const GridSpec& g);

}  // namespace caloric
