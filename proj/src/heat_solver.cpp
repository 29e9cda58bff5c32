#include "caloric/heat_solver.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "caloric/errors.hpp"
#include "caloric/parallel.hpp"
#include "caloric/stencil.hpp"

namespace caloric {

std::vector<double> ladder_abscissae(const LadderParams& p, double h) {
  if (!(p.rho > 1.0)) throw std::invalid_argument("ladder: rho must exceed 1");
  if (!(p.s_max > 0.0)) throw std::invalid_argument("ladder: s_max must be positive");
  const double s_min = p.s_min > 0.0 ? p.s_min : 0.25 * h * h;
  const double lr = std::log(p.rho);
  long k = static_cast<long>(std::ceil(std::log(s_min) / lr - 1e-12));
  std::vector<double> s{0.0};
  for (;; ++k) {
    const double v = std::pow(p.rho, static_cast<double>(k));
    s.push_back(v);
    if (v >= p.s_max * (1.0 - 1e-12)) break;
  }
  return s;
}

double HeatLadder::sup_distance_to_base(size_t k) const {
  const MapField& phi = slices.at(k);
  const double* b = phi.base().coords().data();
  double d = 0.0;
  for (int c = 0; c < grid.cells(); ++c) d = std::max(d, geom::pair_info(b, phi.at(c), phi.dim()).dist);
  return d;
}

double default_s_cap(const GridSpec& g) {
  const double diam = 2.0 * std::sqrt(2.0) * g.half_width();
  return 1e3 * diam * diam;
}

namespace {

// Lagrange weights for the derivative at 0 from samples at offsets t[0..2].
std::array<double, 3> derivative_weights(const std::array<double, 3>& t) {
  std::array<double, 3> w{};
  for (int j = 0; j < 3; ++j) {
    double denom = 1.0, num = 0.0;
    for (int k = 0; k < 3; ++k)
      if (k != j) denom *= t[j] - t[k];
    // d/ds prod_{k != j} (s - t_k) at s = 0
    for (int k = 0; k < 3; ++k) {
      if (k == j) continue;
      double prod = 1.0;
      for (int l = 0; l < 3; ++l)
        if (l != j && l != k) prod *= -t[l];
      num += prod;
    }
    w[j] = num / denom;
  }
  return w;
}

class Flow {
 public:
  Flow(const MapField& phi0, const CarryOptions& carry) : phi_(phi0), stage_(phi0), next_(phi0) {
    const GridSpec& g = phi0.grid();
    D_ = phi0.dim();
    m_ = phi0.m();
    cells_ = g.cells();
    tau0_.assign(static_cast<size_t>(cells_) * D_, 0.0);
    tau1_ = tau0_;
    if (carry.frames) {
      frames_.assign(static_cast<size_t>(cells_) * m_ * D_, 0.0);
      const double* b = phi0.base().coords().data();
      const OrthonormalFrame einf = standard_frame_at(phi0.base());
      for (int c = 0; c < cells_; ++c)
        for (int a = 0; a < m_; ++a) {
          double* e = &frames_[(static_cast<size_t>(c) * m_ + a) * D_];
          std::copy_n(einf.axis(a).data(), D_, e);
          geom::transport(b, phi0.at(c), e, D_);
        }
      stencil::reorthonormalize(phi_, frames_.data());
    }
    for (const TangentField& v : carry.sections) {
      if (!(v.grid() == g) || v.m() != m_) throw std::invalid_argument("heat_flow: section shape mismatch");
      V_.push_back(v.raw());
    }
    k0_.assign(V_.size(), Vec(tau0_.size()));
    k1_ = k0_;
    vt_ = k0_;
  }

  const MapField& phi() const { return phi_; }
  const Vec& frames() const { return frames_; }
  const std::vector<Vec>& sections() const { return V_; }

  void step(double ds) {
    const GridSpec& g = phi_.grid();
    const int D = D_;
    logs_.compute(phi_);
    stencil::tension(phi_, logs_, tau0_.data());
    for (size_t j = 0; j < V_.size(); ++j) stencil::covariant_operator(phi_, logs_, V_[j].data(), k0_[j].data());
    for_rows(g.n, [&](int r0, int r1) {
      Vec v(D);
      for (int c = r0 * g.n; c < r1 * g.n; ++c) {
        const double* t = &tau0_[static_cast<size_t>(c) * D];
        for (int i = 0; i < D; ++i) v[i] = ds * t[i];
        geom::exp_map(phi_.at(c), v.data(), stage_.at(c), D);
      }
    });
    restore_margin(stage_);
    for (size_t j = 0; j < V_.size(); ++j) {
      for (size_t i = 0; i < vt_[j].size(); ++i) vt_[j][i] = V_[j][i] + ds * k0_[j][i];
      stencil::transport_field(phi_, stage_, vt_[j].data(), 1);
    }

    logs_.compute(stage_);
    stencil::tension(stage_, logs_, tau1_.data());
    stencil::transport_field(stage_, phi_, tau1_.data(), 1);
    for (size_t j = 0; j < V_.size(); ++j) {
      stencil::covariant_operator(stage_, logs_, vt_[j].data(), k1_[j].data());
      stencil::transport_field(stage_, phi_, k1_[j].data(), 1);
    }
    for_rows(g.n, [&](int r0, int r1) {
      Vec v(D);
      for (int c = r0 * g.n; c < r1 * g.n; ++c) {
        const size_t o = static_cast<size_t>(c) * D;
        for (int i = 0; i < D; ++i) v[i] = 0.5 * ds * (tau0_[o + i] + tau1_[o + i]);
        geom::project(phi_.at(c), v.data(), D);
        geom::exp_map(phi_.at(c), v.data(), next_.at(c), D);
      }
    });
    restore_margin(next_);
    for (size_t j = 0; j < V_.size(); ++j) {
      Vec& V = V_[j];
      for (size_t i = 0; i < V.size(); ++i) V[i] += 0.5 * ds * (k0_[j][i] + k1_[j][i]);
      stencil::transport_field(phi_, next_, V.data(), 1);
    }
    if (!frames_.empty()) {
      stencil::transport_field(phi_, next_, frames_.data(), m_);
      stencil::reorthonormalize(next_, frames_.data());
    }
    std::swap(phi_.raw(), next_.raw());
  }

 private:
  void restore_margin(MapField& f) const {
    const GridSpec& g = f.grid();
    for (int iy = 0; iy < g.n; ++iy)
      for (int ix = 0; ix < g.n; ++ix)
        if (g.in_margin(ix, iy)) std::copy(phi_.at(ix, iy), phi_.at(ix, iy) + D_, f.at(ix, iy));
  }

  int D_ = 0, m_ = 0, cells_ = 0;
  MapField phi_, stage_, next_;
  stencil::NeighborLogs logs_;
  Vec tau0_, tau1_;
  Vec frames_;
  std::vector<Vec> V_, k0_, k1_, vt_;
};

// Collects frames at offsets around a ladder point and reduces them to the A_s residual.
struct PendingResidual {
  size_t slice = 0;
  std::vector<double> offsets;
  std::vector<Vec> frames;
};

double as_residual_norm(const GridSpec& g, int m, const PendingResidual& p) {
  const int D = m + 1;
  const std::array<double, 3> t{p.offsets[0], p.offsets[1], p.offsets[2]};
  const auto w = derivative_weights(t);
  int centre = 0;
  for (int j = 0; j < 3; ++j)
    if (t[j] == 0.0) centre = j;
  const Vec& F0 = p.frames[centre];
  const double s = sum_rows(g.n, [&](int iy) {
    double acc = 0.0;
    Vec de(D);
    std::vector<double> M(m * m);
    for (int c = iy * g.n; c < (iy + 1) * g.n; ++c) {
      for (int a = 0; a < m; ++a) {
        const size_t o = (static_cast<size_t>(c) * m + a) * D;
        for (int i = 0; i < D; ++i) de[i] = w[0] * p.frames[0][o + i] + w[1] * p.frames[1][o + i] + w[2] * p.frames[2][o + i];
        for (int b = 0; b < m; ++b) M[b * m + a] = geom::inner(&F0[(static_cast<size_t>(c) * m + b) * D], de.data(), D);
      }
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
          const double sk = 0.5 * (M[b * m + a] - M[a * m + b]);
          acc += sk * sk;
        }
    }
    return acc;
  });
  return std::sqrt(g.h * g.h * s);
}

using StopPredicate = std::function<bool(const HeatLadder&)>;

HeatLadder run_ladder(const MapField& phi0, const LadderParams& params, const CarryOptions& carry,
                      const StopPredicate& stop) {
  phi0.validate();
  const GridSpec& g = phi0.grid();
  const std::vector<double> s = ladder_abscissae(params, g.h);
  Flow flow(phi0, carry);
  HeatLadder L;
  L.grid = g;
  L.params = params;
  L.sections.resize(carry.sections.size());

  const double e0 = dirichlet_energy(phi0);
  std::vector<PendingResidual> pending;
  auto record = [&](double sk, double prev_offset, const Vec& prev_frames) {
    L.s.push_back(sk);
    L.slices.push_back(flow.phi());
    const double e = dirichlet_energy(flow.phi());
    if (!std::isfinite(e)) {
      std::ostringstream os;
      os << "nonfinite map at s = " << sk;
      throw NumericalAbort("heat_flow", os.str());
    }
    if (!L.dirichlet.empty() && e > L.dirichlet.back() + params.energy_tol * std::max(e0, 1e-300)) {
      std::ostringstream os;
      os << "Dirichlet energy increased from " << L.dirichlet.back() << " to " << e << " at s = " << sk;
      throw NumericalAbort("heat_flow", os.str());
    }
    L.dirichlet.push_back(e);
    for (size_t j = 0; j < carry.sections.size(); ++j) {
      TangentField f(g, phi0.m());
      f.raw() = flow.sections()[j];
      L.sections[j].push_back(std::move(f));
    }
    if (carry.frames) {
      L.frames.push_back(flow.frames());
      L.as_residual.push_back(0.0);
      PendingResidual p{L.s.size() - 1, {}, {}};
      if (prev_offset < 0.0) {
        p.offsets.push_back(prev_offset);
        p.frames.push_back(prev_frames);
      }
      p.offsets.push_back(0.0);
      p.frames.push_back(flow.frames());
      pending.push_back(std::move(p));
    }
  };
  auto after_substep = [&](double ds) {
    if (!carry.frames) return;
    for (auto& p : pending) {
      p.offsets.push_back(p.offsets.back() > 0.0 ? p.offsets.back() + ds : ds);
      p.frames.push_back(flow.frames());
    }
    for (auto it = pending.begin(); it != pending.end();) {
      if (it->offsets.size() == 3) {
        L.as_residual[it->slice] = as_residual_norm(g, phi0.m(), *it);
        it = pending.erase(it);
      } else {
        ++it;
      }
    }
  };

  record(0.0, 0.0, {});
  if (stop && stop(L)) return L;
  double ds = 0.0;
  for (size_t k = 0; k + 1 < s.size(); ++k) {
    const double span = s[k + 1] - s[k];
    const int N = std::max(1, static_cast<int>(std::ceil(span / (params.substep_c * g.h * g.h) - 1e-9)));
    ds = span / N;
    Vec before;
    for (int i = 0; i < N; ++i) {
      if (i == N - 1 && carry.frames) before = flow.frames();
      flow.step(ds);
      after_substep(ds);
    }
    L.substeps.push_back(N);
    record(s[k + 1], -ds, before);
    if (stop && stop(L)) break;
  }
  // probe substeps beyond the last ladder point complete its centred difference
  for (int guard = 0; !pending.empty() && guard < 2; ++guard) {
    if (ds == 0.0) ds = params.substep_c * g.h * g.h;
    flow.step(ds);
    after_substep(ds);
  }
  return L;
}

}  // namespace

HeatLadder heat_flow(const MapField& phi, const LadderParams& params, const CarryOptions& carry) {
  return run_ladder(phi, params, carry, {});
}

FlatResult flow_until_flat(const MapField& phi, double tol, const LadderParams& params, const CarryOptions& carry) {
  if (!(tol > 0.0)) throw std::invalid_argument("flow_until_flat: tol must be positive");
  FlatResult r;
  r.ladder = run_ladder(phi, params, carry, [&](const HeatLadder& L) {
    return L.sup_distance_to_base(L.size() - 1) <= tol;
  });
  r.sup_distance = r.ladder.sup_distance_to_base(r.ladder.size() - 1);
  r.flat = r.sup_distance <= tol;
  r.s_star = r.ladder.s.back();
  return r;
}

}  // namespace caloric
