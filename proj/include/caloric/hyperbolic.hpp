#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace caloric {

using Vec = std::vector<double>;

// Minkowski form with signature (-,+,...,+).
double minkowski_inner(std::span<const double> a, std::span<const double> b);

class HyperbolicPoint {
 public:
  // Rescales onto the upper sheet; throws if coords are not future timelike.
  static HyperbolicPoint from_coords(Vec coords);
  static HyperbolicPoint basepoint(int m);

  int m() const { return static_cast<int>(coords_.size()) - 1; }
  std::span<const double> coords() const { return coords_; }
  double operator[](int i) const { return coords_[i]; }

 private:
  explicit HyperbolicPoint(Vec c) : coords_(std::move(c)) {}
  Vec coords_;
};

class TangentVector {
 public:
  // Rejects vectors whose normal component exceeds tol (relative to scale).
  static TangentVector make(const HyperbolicPoint& base, Vec vec, double tol = 1e-10);
  static TangentVector zero(const HyperbolicPoint& base);

  const HyperbolicPoint& base() const { return base_; }
  std::span<const double> vec() const { return vec_; }
  double norm() const;

 private:
  TangentVector(HyperbolicPoint b, Vec v) : base_(std::move(b)), vec_(std::move(v)) {}
  HyperbolicPoint base_;
  Vec vec_;
};

class OrthonormalFrame {
 public:
  // Validates orthonormality, tangency and positive orientation.
  static OrthonormalFrame make(const HyperbolicPoint& base, std::vector<Vec> axes, double tol = 1e-10);

  const HyperbolicPoint& base() const { return base_; }
  int m() const { return base_.m(); }
  std::span<const double> axis(int a) const { return axes_[a]; }
  const std::vector<Vec>& axes() const { return axes_; }

 private:
  OrthonormalFrame(HyperbolicPoint b, std::vector<Vec> a) : base_(std::move(b)), axes_(std::move(a)) {}
  HyperbolicPoint base_;
  std::vector<Vec> axes_;
};

class LorentzRotation {
 public:
  static LorentzRotation identity(int m);
  // Rotation by angle in the spatial plane (i, j), 1 <= i,j <= m.
  static LorentzRotation spatial_rotation(int m, int i, int j, double angle);
  static LorentzRotation boost(int m, int axis, double rapidity);
  // Row-major (m+1)x(m+1); throws unless U^T eta U = eta, det = +1, U00 >= 1.
  static LorentzRotation from_matrix(int m, Vec matrix, double tol = 1e-10);

  int m() const { return m_; }
  double operator()(int r, int c) const { return mat_[r * (m_ + 1) + c]; }
  const Vec& matrix() const { return mat_; }
  LorentzRotation compose(const LorentzRotation& rhs) const;  // this * rhs
  LorentzRotation inverse() const;
  void apply(const double* in, double* out) const;

 private:
  LorentzRotation(int m, Vec mat) : m_(m), mat_(std::move(mat)) {}
  int m_;
  Vec mat_;
};

HyperbolicPoint exp_map(const HyperbolicPoint& p, const TangentVector& v);
TangentVector log_map(const HyperbolicPoint& p, const HyperbolicPoint& q);
double distance(const HyperbolicPoint& p, const HyperbolicPoint& q);
TangentVector parallel_transport(const HyperbolicPoint& p, const HyperbolicPoint& q, const TangentVector& v);
TangentVector project_to_tangent(const HyperbolicPoint& p, std::span<const double> w);
// Seed rows are projected to T_pH and Gram-Schmidt orthonormalized in order.
// A negatively oriented result has its last axis negated.
OrthonormalFrame frame_at(const HyperbolicPoint& p, const std::vector<Vec>& seed);
OrthonormalFrame standard_frame(int m);
// The standard frame parallel transported from the basepoint to p.
OrthonormalFrame standard_frame_at(const HyperbolicPoint& p);

HyperbolicPoint apply_rotation(const LorentzRotation& U, const HyperbolicPoint& p);
TangentVector apply_rotation(const LorentzRotation& U, const TangentVector& v);
OrthonormalFrame apply_rotation(const LorentzRotation& U, const OrthonormalFrame& f);

// Determinant of the (m+1)x(m+1) matrix with columns [p, e_1, ..., e_m].
double orientation(std::span<const double> p, const std::vector<Vec>& axes);

// Raw kernels on contiguous (m+1)-arrays, used by the grid solvers.
namespace geom {

inline double inner(const double* a, const double* b, int D) {
  double s = -a[0] * b[0];
  for (int i = 1; i < D; ++i) s += a[i] * b[i];
  return s;
}

// asinh(x)/x, stable near 0.
inline double asinh_over(double x) {
  if (x < 1e-4) {
    const double x2 = x * x;
    return 1.0 - x2 / 6.0 + 3.0 * x2 * x2 / 40.0;
  }
  return std::asinh(x) / x;
}

// sinh(r)/r, stable near 0.
inline double sinh_over(double r) {
  if (r < 1e-4) {
    const double r2 = r * r;
    return 1.0 + r2 / 6.0 + r2 * r2 / 120.0;
  }
  return std::sinh(r) / r;
}

// Geometry of the pair (p, q): delta = c - 1 with c = -<p,q>, factor = d / sinh(d), and
// dt = q0 - p0. For nearby points everything is computed from the spatial difference,
// with dt = (y - x).(y + x) / (p0 + q0), so that both points count as exactly on the
// sheet and the result keeps full relative precision.
struct PairInfo {
  double delta;
  double factor;
  double dist;
  double dt;
};

inline PairInfo pair_info(const double* p, const double* q, int D) {
  double dd = 0.0, ds = 0.0;
  for (int i = 1; i < D; ++i) {
    const double u = q[i] - p[i];
    dd += u * u;
    ds += u * (q[i] + p[i]);
  }
  const double dt = ds / (p[0] + q[0]);
  double delta = 0.5 * (dd - dt * dt);
  double sn2;
  if (delta > 0.5) {
    delta = -inner(p, q, D) - 1.0;
    sn2 = delta * (2.0 + delta);
  } else {
    // sinh(d)^2 = |q - p - delta p|^2, a tangent vector at p
    double xx = 0.0, xv = 0.0, vv = 0.0;
    for (int i = 1; i < D; ++i) {
      const double v = (q[i] - p[i]) - delta * p[i];
      xx += p[i] * p[i];
      xv += p[i] * v;
      vv += v * v;
    }
    if (xx == 0.0) {
      sn2 = vv;
    } else {
      const double k = xv / xx;
      double perp = 0.0;
      for (int i = 1; i < D; ++i) {
        const double u = ((q[i] - p[i]) - delta * p[i]) - k * p[i];
        perp += u * u;
      }
      sn2 = perp + xv * xv / (xx * (1.0 + xx));
    }
  }
  delta = std::max(delta, 0.0);
  const double sn = std::sqrt(std::max(sn2, 0.0));
  const double f = asinh_over(sn);
  return {delta, f, f * sn, dt};
}

// out = log_p(q)
inline void log_map(const double* p, const double* q, double* out, int D) {
  const PairInfo pi = pair_info(p, q, D);
  out[0] = pi.factor * (pi.dt - pi.delta * p[0]);
  for (int i = 1; i < D; ++i) out[i] = pi.factor * ((q[i] - p[i]) - pi.delta * p[i]);
}

// Both logs of an edge at once: lpq = log_p(q), lqp = log_q(p). Returns distance.
inline double log_pair(const double* p, const double* q, double* lpq, double* lqp, int D) {
  const PairInfo pi = pair_info(p, q, D);
  lpq[0] = pi.factor * (pi.dt - pi.delta * p[0]);
  lqp[0] = pi.factor * (-pi.dt - pi.delta * q[0]);
  for (int i = 1; i < D; ++i) {
    const double d = q[i] - p[i];
    lpq[i] = pi.factor * (d - pi.delta * p[i]);
    lqp[i] = pi.factor * (-d - pi.delta * q[i]);
  }
  return pi.dist;
}

// Rounding bound for <p,p> + 1 at p: the form cancels terms of size |p|^2.
inline double sheet_tolerance(const double* p, int D) {
  double s = 0.0;
  for (int i = 0; i < D; ++i) s += p[i] * p[i];
  return 8.0 * 2.220446049250313e-16 * s;
}

// Puts p on the sheet by recomputing the time coordinate from the spatial part.
// Idempotent, so stored points round-trip bitwise. Radial rescaling is avoided because
// far points lie close to the light cone, where it amplifies coordinate rounding.
inline void normalize_point(double* p, int D) {
  double r2 = 1.0;
  for (int i = 1; i < D; ++i) r2 += p[i] * p[i];
  p[0] = std::sqrt(r2);
}

// <v,v> for v tangent at p, from the spatial parts: with x the spatial part of p,
// |v|^2 = |v_perp|^2 + (xhat . v)^2 / p0^2. The Minkowski form itself cancels like p0^2.
inline double tangent_norm2(const double* p, const double* v, int D) {
  double xx = 0.0, xv = 0.0, vv = 0.0;
  for (int i = 1; i < D; ++i) {
    xx += p[i] * p[i];
    xv += p[i] * v[i];
    vv += v[i] * v[i];
  }
  if (xx == 0.0) return vv;
  const double par = xv / std::sqrt(xx);
  const double k = xv / xx;
  double perp = 0.0;
  for (int i = 1; i < D; ++i) {
    const double u = v[i] - k * p[i];
    perp += u * u;
  }
  return perp + par * par / (1.0 + xx);
}

// out = exp_p(v); out may not alias p.
inline void exp_map(const double* p, const double* v, double* out, int D) {
  const double r = std::sqrt(tangent_norm2(p, v, D));
  const double ch = std::cosh(r);
  const double sh = sinh_over(r);
  for (int i = 0; i < D; ++i) out[i] = ch * p[i] + sh * v[i];
  normalize_point(out, D);
}

// Transport v from T_pH to T_qH along the geodesic; v updated in place.
inline void transport(const double* p, const double* q, double* v, int D) {
  const double c = -inner(p, q, D);
  const double k = inner(q, v, D) / (1.0 + c);
  for (int i = 0; i < D; ++i) v[i] += k * (p[i] + q[i]);
}

inline void project(const double* p, double* w, int D) {
  const double k = inner(w, p, D);
  for (int i = 0; i < D; ++i) w[i] += k * p[i];
}

}  // namespace geom

}  // namespace caloric
