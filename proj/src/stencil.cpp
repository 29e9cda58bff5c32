#include "caloric/stencil.hpp"

#include <algorithm>
#include <cmath>

#include "caloric/parallel.hpp"

namespace caloric::stencil {

void NeighborLogs::compute(const MapField& phi) {
  const GridSpec& g = phi.grid();
  D_ = phi.dim();
  v_.assign(static_cast<size_t>(g.cells()) * 4 * D_, 0.0);
  const int n = g.n, D = D_;
  for_rows(n, [&](int r0, int r1) {
    for (int iy = r0; iy < r1; ++iy)
      for (int ix = 0; ix < n; ++ix) {
        const int c = g.index(ix, iy);
        const double* p = phi.at(c);
        if (ix + 1 < n)
          geom::log_pair(p, phi.at(c + 1), &v_[(static_cast<size_t>(c) * 4 + kRight) * D],
                         &v_[(static_cast<size_t>(c + 1) * 4 + kLeft) * D], D);
        if (iy + 1 < n)
          geom::log_pair(p, phi.at(c + n), &v_[(static_cast<size_t>(c) * 4 + kUp) * D],
                         &v_[(static_cast<size_t>(c + n) * 4 + kDown) * D], D);
      }
  });
}

void tension(const MapField& phi, const NeighborLogs& logs, double* tau) {
  const GridSpec& g = phi.grid();
  const int n = g.n, D = phi.dim();
  const double k = 1.0 / (g.h * g.h);
  for_rows(n, [&](int r0, int r1) {
    for (int iy = r0; iy < r1; ++iy)
      for (int ix = 0; ix < n; ++ix) {
        const int c = g.index(ix, iy);
        double* t = tau + static_cast<size_t>(c) * D;
        if (g.in_margin(ix, iy)) {
          std::fill(t, t + D, 0.0);
          continue;
        }
        const double *a = logs.at(c, kRight), *b = logs.at(c, kLeft), *u = logs.at(c, kUp), *d = logs.at(c, kDown);
        for (int i = 0; i < D; ++i) t[i] = k * ((a[i] + b[i]) + (u[i] + d[i]));
        geom::project(phi.at(c), t, D);
      }
  });
}

void centered_gradient(const GridSpec& g, const NeighborLogs& logs, int c, int axis, double* out) {
  const int D = logs.dim();
  const double* a = logs.at(c, axis == 0 ? kRight : kUp);
  const double* b = logs.at(c, axis == 0 ? kLeft : kDown);
  const double k = 0.5 / g.h;
  for (int i = 0; i < D; ++i) out[i] = k * (a[i] - b[i]);
}

void covariant_operator(const MapField& phi, const NeighborLogs& logs, const double* V, double* out) {
  const GridSpec& g = phi.grid();
  const int n = g.n, D = phi.dim();
  const double k = 1.0 / (g.h * g.h);
  for_rows(n, [&](int r0, int r1) {
    Vec w(D), gr(D);
    for (int iy = r0; iy < r1; ++iy)
      for (int ix = 0; ix < n; ++ix) {
        const int c = g.index(ix, iy);
        double* o = out + static_cast<size_t>(c) * D;
        if (g.in_margin(ix, iy)) {
          std::fill(o, o + D, 0.0);
          continue;
        }
        const double* p = phi.at(c);
        const double* v = V + static_cast<size_t>(c) * D;
        std::fill(o, o + D, 0.0);
        for (int dir = 0; dir < 4; ++dir) {
          const int y = neighbor(g, c, dir);
          const double* vy = V + static_cast<size_t>(y) * D;
          std::copy(vy, vy + D, w.begin());
          geom::transport(phi.at(y), p, w.data(), D);
          for (int i = 0; i < D; ++i) o[i] += k * (w[i] - v[i]);
        }
        for (int axis = 0; axis < 2; ++axis) {
          centered_gradient(g, logs, c, axis, gr.data());
          const double gg = geom::inner(gr.data(), gr.data(), D);
          const double vg = geom::inner(v, gr.data(), D);
          for (int i = 0; i < D; ++i) o[i] -= gg * v[i] - vg * gr[i];
        }
        geom::project(p, o, D);
      }
  });
}

void transport_field(const MapField& from, const MapField& to, double* v, int count) {
  const GridSpec& g = from.grid();
  const int D = from.dim();
  for_rows(g.n, [&](int r0, int r1) {
    for (int c = r0 * g.n; c < r1 * g.n; ++c) {
      const double* p = from.at(c);
      const double* q = to.at(c);
      for (int a = 0; a < count; ++a) {
        double* x = v + (static_cast<size_t>(c) * count + a) * D;
        geom::transport(p, q, x, D);
        geom::project(q, x, D);
      }
    }
  });
}

void reorthonormalize(const MapField& phi, double* frames) {
  const GridSpec& g = phi.grid();
  const int D = phi.dim(), m = phi.m();
  for_rows(g.n, [&](int r0, int r1) {
    for (int c = r0 * g.n; c < r1 * g.n; ++c) {
      const double* p = phi.at(c);
      double* f = frames + static_cast<size_t>(c) * m * D;
      for (int a = 0; a < m; ++a) {
        double* e = f + a * D;
        geom::project(p, e, D);
        for (int b = 0; b < a; ++b) {
          const double* eb = f + b * D;
          const double k = geom::inner(e, eb, D);
          for (int i = 0; i < D; ++i) e[i] -= k * eb[i];
        }
        const double nrm = std::sqrt(geom::inner(e, e, D));
        for (int i = 0; i < D; ++i) e[i] /= nrm;
      }
    }
  });
}

}  // namespace caloric::stencil
