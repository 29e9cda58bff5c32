#pragma once

#include "caloric/grid.hpp"

// Intrinsic stencil kernels shared by the heat flow, the gauge construction and the covariant heat solver.
namespace caloric::stencil {

enum Dir { kRight = 0, kLeft = 1, kUp = 2, kDown = 3 };

inline int neighbor(const GridSpec& g, int c, int dir) {
  const int ix = c % g.n, iy = c / g.n;
  switch (dir) {
    case kRight: return ix + 1 < g.n ? c + 1 : -1;
    case kLeft: return ix > 0 ? c - 1 : -1;
    case kUp: return iy + 1 < g.n ? c + g.n : -1;
    default: return iy > 0 ? c - g.n : -1;
  }
}

// log_x(y) for the four neighbours y of every cell x; zero where y is off the grid.
class NeighborLogs {
 public:
  void compute(const MapField& phi);
  const double* at(int c, int dir) const { return v_.data() + (static_cast<size_t>(c) * 4 + dir) * D_; }
  int dim() const { return D_; }

 private:
  int D_ = 0;
  Vec v_;
};

// tau = sum of the four logs / h^2 on interior cells, zero on the margin.
void tension(const MapField& phi, const NeighborLogs& logs, double* tau);
// (log_x(x + e_axis) - log_x(x - e_axis)) / 2h
void centered_gradient(const GridSpec& g, const NeighborLogs& logs, int c, int axis, double* out);
// L(V) = sum_y (P_{y->x} V_y - V_x) / h^2 - sum_i (|g_i|^2 V - <V,g_i> g_i), zero on the margin.
void covariant_operator(const MapField& phi, const NeighborLogs& logs, const double* V, double* out);
// Transport every cell's vector from 'from' to 'to' in place (fields of cells*count vectors).
void transport_field(const MapField& from, const MapField& to, double* v, int count);
// Modified Gram-Schmidt of the m frame axes of each cell in the metric of T_phi H.
void reorthonormalize(const MapField& phi, double* frames);

}  // namespace caloric::stencil
