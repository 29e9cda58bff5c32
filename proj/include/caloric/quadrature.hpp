#pragma once

#include <string>
#include <vector>

namespace caloric {

// Weights of the ladder quadrature for integral_0^{s_K} f ds: trapezoid in s on [0, s_1],
// trapezoid in log s beyond (the integrand there is s f(s) d(log s)).
std::vector<double> ladder_weights(const std::vector<double>& s);

struct TailEstimate {
  double value = 0.0;  // estimate of integral_{s_K}^infinity f ds
  std::string method;  // "zero", "offset-power", "power", "exponential" or "none"
  double slope = 0.0;  // -d log f / d log s at s_K
};

// Extrapolates a positive, decaying f beyond the last sample from a quadratic fit of log f
// against log s over the last decade. The fit fixes f ~ C (s + a)^-p, which integrates in
// closed form; when the curvature says the decay is faster than any power the exponential
// model f(s_K) s_K / slope is used. Non-decaying data gives method "none" and value 0.
TailEstimate tail_estimate(const std::vector<double>& s, const std::vector<double>& f);

}  // namespace caloric
