#include "caloric/hyperbolic.hpp"

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace caloric {

namespace {

void require_same_dim(std::size_t a, std::size_t b) {
  if (a != b) throw std::invalid_argument("dimension mismatch: " + std::to_string(a) + " vs " + std::to_string(b));
}

Eigen::MatrixXd columns_matrix(std::span<const double> p, const std::vector<Vec>& axes) {
  const int D = static_cast<int>(p.size());
  Eigen::MatrixXd M(D, D);
  for (int i = 0; i < D; ++i) M(i, 0) = p[i];
  for (int a = 0; a + 1 < D; ++a)
    for (int i = 0; i < D; ++i) M(i, a + 1) = axes[a][i];
  return M;
}

}  // namespace

double minkowski_inner(std::span<const double> a, std::span<const double> b) {
  require_same_dim(a.size(), b.size());
  return geom::inner(a.data(), b.data(), static_cast<int>(a.size()));
}

HyperbolicPoint HyperbolicPoint::from_coords(Vec coords) {
  if (coords.size() < 2) throw std::invalid_argument("point needs at least 2 coordinates");
  for (double c : coords)
    if (!std::isfinite(c)) throw std::invalid_argument("nonfinite point coordinate");
  const int D = static_cast<int>(coords.size());
  double scale = 0.0;
  for (double c : coords) scale += c * c;
  const double q = geom::inner(coords.data(), coords.data(), D);
  // on the sheet up to rounding: only the time coordinate is refreshed
  const bool on_sheet = std::abs(q + 1.0) <= 1e-9 * scale;
  if (coords[0] <= 0.0 || !(on_sheet || q < 0.0)) throw std::invalid_argument("point is not future timelike");
  if (!on_sheet) {
    const double s = std::sqrt(-q);
    for (double& c : coords) c /= s;
  }
  geom::normalize_point(coords.data(), D);
  return HyperbolicPoint(std::move(coords));
}

HyperbolicPoint HyperbolicPoint::basepoint(int m) {
  if (m < 1) throw std::invalid_argument("m must be >= 1");
  Vec c(m + 1, 0.0);
  c[0] = 1.0;
  return HyperbolicPoint(std::move(c));
}

TangentVector TangentVector::make(const HyperbolicPoint& base, Vec vec, double tol) {
  require_same_dim(vec.size(), base.coords().size());
  const int D = static_cast<int>(vec.size());
  double scale = 1.0;
  for (double v : vec) {
    if (!std::isfinite(v)) throw std::invalid_argument("nonfinite tangent component");
    scale = std::max(scale, std::abs(v));
  }
  for (double c : base.coords()) scale = std::max(scale, std::abs(c));
  const double normal = geom::inner(base.coords().data(), vec.data(), D);
  if (std::abs(normal) > tol * scale * scale) throw std::invalid_argument("vector is not tangent at base");
  return TangentVector(base, std::move(vec));
}

TangentVector TangentVector::zero(const HyperbolicPoint& base) {
  return TangentVector(base, Vec(base.coords().size(), 0.0));
}

double TangentVector::norm() const {
  return std::sqrt(geom::tangent_norm2(base_.coords().data(), vec_.data(), static_cast<int>(vec_.size())));
}

OrthonormalFrame OrthonormalFrame::make(const HyperbolicPoint& base, std::vector<Vec> axes, double tol) {
  const int m = base.m();
  const int D = m + 1;
  if (static_cast<int>(axes.size()) != m) throw std::invalid_argument("frame needs m axes");
  for (int a = 0; a < m; ++a) {
    require_same_dim(axes[a].size(), D);
    if (std::abs(geom::inner(base.coords().data(), axes[a].data(), D)) > tol)
      throw std::invalid_argument("frame axis " + std::to_string(a) + " not tangent");
    for (int b = 0; b < m; ++b) {
      const double g = geom::inner(axes[a].data(), axes[b].data(), D);
      if (std::abs(g - (a == b ? 1.0 : 0.0)) > tol) throw std::invalid_argument("frame not orthonormal");
    }
  }
  if (orientation(base.coords(), axes) <= 0.0) throw std::invalid_argument("frame negatively oriented");
  return OrthonormalFrame(base, std::move(axes));
}

double orientation(std::span<const double> p, const std::vector<Vec>& axes) {
  return columns_matrix(p, axes).determinant();
}

LorentzRotation LorentzRotation::identity(int m) {
  const int D = m + 1;
  Vec mat(D * D, 0.0);
  for (int i = 0; i < D; ++i) mat[i * D + i] = 1.0;
  return LorentzRotation(m, std::move(mat));
}

LorentzRotation LorentzRotation::spatial_rotation(int m, int i, int j, double angle) {
  if (i < 1 || j < 1 || i > m || j > m || i == j) throw std::invalid_argument("bad rotation plane");
  LorentzRotation U = identity(m);
  const int D = m + 1;
  const double c = std::cos(angle), s = std::sin(angle);
  U.mat_[i * D + i] = c;
  U.mat_[j * D + j] = c;
  U.mat_[i * D + j] = -s;
  U.mat_[j * D + i] = s;
  return U;
}

LorentzRotation LorentzRotation::boost(int m, int axis, double rapidity) {
  if (axis < 1 || axis > m) throw std::invalid_argument("bad boost axis");
  LorentzRotation U = identity(m);
  const int D = m + 1;
  const double c = std::cosh(rapidity), s = std::sinh(rapidity);
  U.mat_[0] = c;
  U.mat_[axis * D + axis] = c;
  U.mat_[axis] = s;
  U.mat_[axis * D] = s;
  return U;
}

LorentzRotation LorentzRotation::from_matrix(int m, Vec matrix, double tol) {
  const int D = m + 1;
  if (static_cast<int>(matrix.size()) != D * D) throw std::invalid_argument("matrix size mismatch");
  Eigen::MatrixXd U(D, D), eta = Eigen::MatrixXd::Identity(D, D);
  eta(0, 0) = -1.0;
  for (int r = 0; r < D; ++r)
    for (int c = 0; c < D; ++c) U(r, c) = matrix[r * D + c];
  const double dev = (U.transpose() * eta * U - eta).cwiseAbs().maxCoeff();
  if (!(dev <= tol)) throw std::invalid_argument("matrix does not preserve the Minkowski form");
  if (U(0, 0) < 1.0 - tol) throw std::invalid_argument("matrix does not preserve the upper sheet");
  if (U.determinant() <= 0.0) throw std::invalid_argument("matrix has negative determinant");
  return LorentzRotation(m, std::move(matrix));
}

LorentzRotation LorentzRotation::compose(const LorentzRotation& rhs) const {
  if (rhs.m_ != m_) throw std::invalid_argument("rotation dimension mismatch");
  const int D = m_ + 1;
  Vec out(D * D, 0.0);
  for (int r = 0; r < D; ++r)
    for (int k = 0; k < D; ++k)
      for (int c = 0; c < D; ++c) out[r * D + c] += mat_[r * D + k] * rhs.mat_[k * D + c];
  return LorentzRotation(m_, std::move(out));
}

LorentzRotation LorentzRotation::inverse() const {
  // U^{-1} = eta U^T eta
  const int D = m_ + 1;
  Vec out(D * D);
  for (int r = 0; r < D; ++r)
    for (int c = 0; c < D; ++c) {
      const double sr = r == 0 ? -1.0 : 1.0, sc = c == 0 ? -1.0 : 1.0;
      out[r * D + c] = sr * sc * mat_[c * D + r];
    }
  return LorentzRotation(m_, std::move(out));
}

void LorentzRotation::apply(const double* in, double* out) const {
  const int D = m_ + 1;
  for (int r = 0; r < D; ++r) {
    double s = 0.0;
    for (int c = 0; c < D; ++c) s += mat_[r * D + c] * in[c];
    out[r] = s;
  }
}

HyperbolicPoint exp_map(const HyperbolicPoint& p, const TangentVector& v) {
  const int D = p.m() + 1;
  require_same_dim(v.vec().size(), D);
  const double normal = geom::inner(p.coords().data(), v.vec().data(), D);
  if (std::abs(normal) > 1e-10 * std::max(1.0, v.norm()) * std::max(1.0, std::abs(p[0])))
    throw std::invalid_argument("exp_map: vector not tangent at p");
  if (v.norm() < 1e-14) return p;
  Vec out(D);
  geom::exp_map(p.coords().data(), v.vec().data(), out.data(), D);
  return HyperbolicPoint::from_coords(std::move(out));
}

TangentVector log_map(const HyperbolicPoint& p, const HyperbolicPoint& q) {
  const int D = p.m() + 1;
  require_same_dim(q.coords().size(), D);
  Vec out(D);
  geom::log_map(p.coords().data(), q.coords().data(), out.data(), D);
  geom::project(p.coords().data(), out.data(), D);
  return TangentVector::make(p, std::move(out), 1e-6);
}

double distance(const HyperbolicPoint& p, const HyperbolicPoint& q) {
  return geom::pair_info(p.coords().data(), q.coords().data(), p.m() + 1).dist;
}

TangentVector parallel_transport(const HyperbolicPoint& p, const HyperbolicPoint& q, const TangentVector& v) {
  const int D = p.m() + 1;
  Vec out(v.vec().begin(), v.vec().end());
  geom::transport(p.coords().data(), q.coords().data(), out.data(), D);
  geom::project(q.coords().data(), out.data(), D);
  return TangentVector::make(q, std::move(out), 1e-6);
}

TangentVector project_to_tangent(const HyperbolicPoint& p, std::span<const double> w) {
  const int D = p.m() + 1;
  require_same_dim(w.size(), D);
  Vec out(w.begin(), w.end());
  geom::project(p.coords().data(), out.data(), D);
  return TangentVector::make(p, std::move(out), 1e-6);
}

OrthonormalFrame frame_at(const HyperbolicPoint& p, const std::vector<Vec>& seed) {
  const int m = p.m();
  const int D = m + 1;
  if (static_cast<int>(seed.size()) != m) throw std::invalid_argument("seed needs m rows");
  std::vector<Vec> axes;
  for (int a = 0; a < m; ++a) {
    require_same_dim(seed[a].size(), D);
    Vec w = seed[a];
    geom::project(p.coords().data(), w.data(), D);
    const double scale = std::sqrt(std::max(geom::inner(w.data(), w.data(), D), 0.0));
    // two passes of classical Gram-Schmidt for stability
    for (int pass = 0; pass < 2; ++pass)
      for (const Vec& e : axes) {
        const double k = geom::inner(w.data(), e.data(), D);
        for (int i = 0; i < D; ++i) w[i] -= k * e[i];
      }
    const double nrm = std::sqrt(std::max(geom::inner(w.data(), w.data(), D), 0.0));
    if (!(nrm > 1e-10 * std::max(scale, 1e-300)) || nrm == 0.0)
      throw std::invalid_argument("frame_at: seed row " + std::to_string(a) + " is linearly dependent");
    for (double& x : w) x /= nrm;
    axes.push_back(std::move(w));
  }
  if (orientation(p.coords(), axes) < 0.0)
    for (double& x : axes.back()) x = -x;
  return OrthonormalFrame::make(p, std::move(axes), 1e-9);
}

OrthonormalFrame standard_frame(int m) {
  std::vector<Vec> seed(m, Vec(m + 1, 0.0));
  for (int a = 0; a < m; ++a) seed[a][a + 1] = 1.0;
  return frame_at(HyperbolicPoint::basepoint(m), seed);
}

OrthonormalFrame standard_frame_at(const HyperbolicPoint& p) {
  const int m = p.m(), D = m + 1;
  const HyperbolicPoint o = HyperbolicPoint::basepoint(m);
  std::vector<Vec> axes(m, Vec(D, 0.0));
  for (int a = 0; a < m; ++a) {
    axes[a][a + 1] = 1.0;
    geom::transport(o.coords().data(), p.coords().data(), axes[a].data(), D);
  }
  return OrthonormalFrame::make(p, std::move(axes));
}

HyperbolicPoint apply_rotation(const LorentzRotation& U, const HyperbolicPoint& p) {
  Vec out(p.m() + 1);
  U.apply(p.coords().data(), out.data());
  return HyperbolicPoint::from_coords(std::move(out));
}

TangentVector apply_rotation(const LorentzRotation& U, const TangentVector& v) {
  const HyperbolicPoint b = apply_rotation(U, v.base());
  Vec out(v.vec().size());
  U.apply(v.vec().data(), out.data());
  return TangentVector::make(b, std::move(out), 1e-8);
}

OrthonormalFrame apply_rotation(const LorentzRotation& U, const OrthonormalFrame& f) {
  const HyperbolicPoint b = apply_rotation(U, f.base());
  std::vector<Vec> axes;
  for (int a = 0; a < f.m(); ++a) {
    Vec out(f.m() + 1);
    U.apply(f.axis(a).data(), out.data());
    axes.push_back(std::move(out));
  }
  return OrthonormalFrame::make(b, std::move(axes), 1e-8);
}

}  // namespace caloric
