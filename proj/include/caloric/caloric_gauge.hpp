#pragma once

#include <array>
#include <string>
#include <vector>

#include "caloric/heat_solver.hpp"

namespace caloric {

// Orthonormal frames along a heat ladder: frames[k] holds cells * m axes * (m+1) coordinates.
struct FrameField {
  GridSpec grid;
  int m = 0;
  std::vector<double> s;
  std::vector<Vec> frames;
  OrthonormalFrame e_inf = standard_frame(1);
  std::string kind;  // "caloric" or "transported"
  std::vector<double> as_residual;
};

// Caloric gauge: the carried frames (A_s = 0) rotated per cell so that at the last ladder point
// they equal e_inf transported from its base to phi(s_K, x). Rejects ladders whose last slice is
// farther than flat_tol from e_inf's base point. The ladder must carry frames.
FrameField construct_caloric_gauge(const HeatLadder& L, const OrthonormalFrame& e_inf, double flat_tol);
// The carried frames as they are: also A_s = 0, seeded at s = 0 instead of s = infinity.
// The identity residuals transform covariantly, so it serves refinement studies on short ladders.
FrameField transported_gauge(const HeatLadder& L);
// standard_frame_at(base) transported to every cell of phi.
Vec radial_frames(const MapField& phi);

// Frame coordinates of one ladder point. Vectors are cells * m, matrices cells * m * m
// (row a, column b at [c*m*m + a*m + b]); everything is zero on the margin ring.
struct SliceFields {
  Vec psi_s;
  std::array<Vec, 2> psi_x;
  Vec psi_t;  // empty without time data
  std::array<Vec, 2> A_x;
};

struct DifferentiatedFields {
  GridSpec grid;
  int m = 0;
  std::vector<double> s;
  std::vector<SliceFields> slices;
  std::string psi_t_mode;  // "covariant-heat" or "none"
  std::string gauge;

  size_t size() const { return s.size(); }
};

// psi_j = e^T eta (centred intrinsic gradient), psi_s = e^T eta (tension), psi_t = e^T eta V with V the
// ladder's section 'psi_t_section' (the covariant heat extension of phi1), or none when negative.
// (A_j)_ab = <e_a, D_j e_b> from centred differences of neighbour frames transported back, so that
// D_j = d_j + A_j acts on frame coordinates.
DifferentiatedFields derivative_fields(const HeatLadder& L, const FrameField& F, int psi_t_section = -1);

// A_x, and A_t when psi_t is present, from integral_s^infinity psi_s wedge psi_{t,x} ds' over the ladder.
// The tail beyond s_K keeps the shape of the integrand at s_K and takes its size from tail_estimate
// applied to the L2 norm of the integrand.
struct IntegralConnection {
  std::vector<std::array<Vec, 2>> A_x;
  std::vector<Vec> A_t;
};
IntegralConnection connection_fields_integral(const DifferentiatedFields& f);

// L2 norms per ladder point over cells whose four neighbours are outside the margin ring.
std::vector<double> check_torsion(const DifferentiatedFields& f);
std::vector<double> check_curvature(const DifferentiatedFields& f);
std::vector<double> check_heatflow_eq(const DifferentiatedFields& f);
// L2 norm per ladder point of the difference of two connection fields (for example the two routes).
std::vector<double> connection_difference(const std::vector<std::array<Vec, 2>>& a, const DifferentiatedFields& f);

// Five consecutive time levels of a trajectory around the slice of interest.
struct TimeStencil {
  std::array<MapField, 5> levels;
  double dt = 0.0;
};
// Consecutive wave steps centred at step index 'centre' (>= 2) of the evolution from d.
TimeStencil wave_time_stencil(const DataPair& d, long centre, double cfl = 0.25);

struct WaveTensionField {
  GridSpec grid;
  int m = 0;
  Vec w;  // cells * m
  double l2 = 0.0;
};
// w = D^alpha psi_alpha = -D_t psi_t + D_1 psi_1 + D_2 psi_2 at s = 0 in the given frames of the middle level.
// The covariant second derivatives are evaluated as second derivatives of normal coordinates
// log_phi(x, t)(phi(x', t')) with fourth-order stencils, so the evaluation error is below the
// truncation error of the solver that produced the levels.
WaveTensionField wave_tension(const TimeStencil& ts, const Vec& frames);

// (integral ||d psi_s||^2 ds + 1/2 ||d psi_t(0)||^2)^(1/2) by ladder quadrature plus tail.
// With quotient the second field is first rotated by the U in SO(m) minimizing the same sum
// (orthogonal Procrustes with determinant correction). Fields must share grid and ladder.
struct MetricResult {
  double distance = 0.0;
  double tail = 0.0;
  std::vector<double> rotation;  // m * m, identity without quotient
};
MetricResult energy_metric(const DifferentiatedFields& a, const DifferentiatedFields& b, bool quotient);
// The zero field of the same shape.
DifferentiatedFields zero_fields_like(const DifferentiatedFields& f);
// Applies a constant rotation U (m * m, row-major): psi -> U psi, A -> U A U^T.
DifferentiatedFields rotate_fields(const DifferentiatedFields& f, const std::vector<double>& U);

}  // namespace caloric
