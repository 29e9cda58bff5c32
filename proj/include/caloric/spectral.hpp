#pragma once

#include <string>
#include <utility>
#include <vector>

#include "caloric/heat_solver.hpp"
#include "caloric/quadrature.hpp"

namespace caloric {

// Solution u of the covariant heat equation d_s u = D_i D_i u - (u wedge psi_i) psi_i along the heat
// flow of phi0, held in ambient coordinates as section 0 of the ladder. Norms of u, D_x u and
// u wedge psi_x are frame independent, so the checks below need no frames.
struct CovariantField {
  HeatLadder ladder;
  const std::vector<TangentField>& u() const { return ladder.sections.front(); }
};

// Aborts with NumericalAbort when sup |u| grows past sup |u0| (1 + growth_tol).
CovariantField covariant_heat_solve(const MapField& phi0, const TangentField& u0, const LadderParams& params,
                                    double growth_tol = 1e-6);

// Scalar heat equation with the 5-point Laplacian, zero on the margin, integrated by the ladder's own
// Heun substeps. Returns the solution at every ladder point.
std::vector<Vec> scalar_heat_on_ladder(const HeatLadder& L, const Vec& f0);

// max over ladder and cells of |u(s)| - e^{s Delta_h} |u(0)|
double check_pointwise_dominance(const CovariantField& u);
// Per ladder point, L2 norm over cells whose neighbours are not in the margin of
// d_s |u|^2 - (Delta |u|^2 - 2 |D_x u|^2 - |u wedge psi_x|^2), with d_s |u|^2 = 2 <u, L u> from the
// discrete operator and the right-hand side from independent centred stencils.
std::vector<double> check_mass_diffusion(const CovariantField& u);
// (s, d/ds ||u||^2 + 2 ||D_x u||^2) with d/ds ||u||^2 = 2 <u, L u> and ||D_x u||^2 the edge sum.
std::vector<std::pair<double, double>> check_energy_inequality(const CovariantField& u);
// ||u(s_k)||^2 along the ladder.
std::vector<double> covariant_mass(const CovariantField& u);

struct ESDProfile {
  std::vector<double> s, esd, weight;
  std::vector<double> psi_s2, dpsi_t2, wedge2;  // the three terms
  double integral = 0.0;
  TailEstimate tail;
  double s_max = 0.0;
  double energy = 0.0;     // total_energy of the data
  // Dirichlet energy of phi(s_K) plus 1/2 ||psi_t(s_K)||^2: what the flow has not dissipated yet.
  // Reported next to the tail estimate as a diagnostic, never substituted for it.
  double remaining = 0.0;
  double psi_t_l2_final = 0.0;
  std::vector<double> psi_t_l2;  // ||psi_t(s_k)||
};

// heat flow of phi0 with phi1 carried by the covariant heat equation, then per ladder point
// ||psi_s||^2 + ||D_x psi_t||^2 + 1/2 ||psi_t wedge psi_x||^2. The terms are gauge invariant and are
// assembled from ambient representatives: psi_s from the tension, D_x psi_t from the edge differences
// of the transported section, the wedge as a Frobenius norm. Stage failures are relabelled.
ESDProfile esd(const DataPair& d, const LadderParams& params);
ESDProfile esd_from_ladder(const HeatLadder& L, int section, double energy);
// |E - integral - tail| / max(E, eps)
double energy_identity_residual(const ESDProfile& p);
double energy_identity_residual(const DataPair& d, const LadderParams& params);

enum class SymmetryKind { translation, time_reversal, rotation, dilation };

struct SymmetrySpec {
  SymmetryKind kind = SymmetryKind::translation;
  Point2 shift{0.0, 0.0};
  double lambda = 1.0;
  LorentzRotation rotation = LorentzRotation::identity(1);
  // comparison window in the heat time of the transformed profile
  double s_lo = 0.0;
  double s_hi = 1e300;
};

struct SymmetryResult {
  double discrepancy = 0.0;  // sup |ESD(sym d) - predicted| / sup |predicted| over the window
  size_t compared = 0;
};

// Translation, time reversal and rotation leave the profile unchanged; dilation by lambda maps it to
// lambda^-2 ESD(s / lambda^2), evaluated off the ladder by cubic interpolation in log s.
SymmetryResult esd_symmetry_check(const DataPair& d, const SymmetrySpec& sym, const LadderParams& params);
SymmetryResult esd_symmetry_check(const ESDProfile& base, const ESDProfile& transformed, const SymmetrySpec& sym);
DataPair apply_symmetry(const DataPair& d, const SymmetrySpec& sym);

}  // namespace caloric
