#include "caloric/quadrature.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace caloric {

std::vector<double> ladder_weights(const std::vector<double>& s) {
  const size_t K = s.size();
  std::vector<double> w(K, 0.0);
  if (K < 2) return w;
  if (s[0] != 0.0) throw std::invalid_argument("ladder_weights: ladder must start at 0");
  w[0] += 0.5 * s[1];
  w[1] += 0.5 * s[1];
  for (size_t k = 1; k + 1 < K; ++k) {
    const double dx = std::log(s[k + 1] / s[k]);
    w[k] += 0.5 * dx * s[k];
    w[k + 1] += 0.5 * dx * s[k + 1];
  }
  return w;
}

TailEstimate tail_estimate(const std::vector<double>& s, const std::vector<double>& f) {
  TailEstimate t;
  const size_t K = s.size();
  if (K < 2 || f.back() <= 0.0) {
    t.method = "zero";
    return t;
  }
  const double S = s.back();
  std::vector<size_t> idx;
  for (size_t k = 1; k < K; ++k)
    if (s[k] >= 0.1 * S * (1.0 - 1e-12) && f[k] > 0.0) idx.push_back(k);
  if (idx.size() < 3) {
    t.method = "none";
    return t;
  }
  const double xS = std::log(S);
  Eigen::MatrixXd A(idx.size(), 3);
  Eigen::VectorXd b(idx.size());
  for (size_t r = 0; r < idx.size(); ++r) {
    const double x = std::log(s[idx[r]]) - xS;
    A(r, 0) = 1.0;
    A(r, 1) = x;
    A(r, 2) = x * x;
    b(r) = std::log(f[idx[r]]);
  }
  const Eigen::Vector3d c = A.colPivHouseholderQr().solve(b);
  // log f ~ c0 + c1 x + c2 x^2 with x = log(s / S): slope q and its log-derivative q'
  const double q = -c(1), dq = -2.0 * c(2);
  t.slope = q;
  if (!(q > 0.0)) {
    t.method = "none";
    return t;
  }
  const double fS = f.back();
  const double r = dq / q;  // a / (S + a) for f = C (s + a)^-p
  if (r < 0.5) {
    const double Sa = S / (1.0 - r);
    const double p = q / (1.0 - r);
    if (p > 1.0) {
      t.value = Sa * fS / (p - 1.0);
      t.method = "offset-power";
      return t;
    }
    if (q > 1.0) {
      t.value = S * fS / (q - 1.0);
      t.method = "power";
      return t;
    }
    t.method = "none";
    return t;
  }
  t.value = S * fS / q;
  t.method = "exponential";
  return t;
}

}  // namespace caloric
