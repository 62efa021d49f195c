#pragma once

#include <array>
#include <functional>

namespace entroflow {

// Compensated (Neumaier) summation. Deterministic for a fixed input order;
// used everywhere a sum feeds a conservation or monotonicity check.
class KahanSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Adaptive Simpson quadrature with absolute tolerance. The integrand must be
// finite on [a, b]; integrable endpoint blow-ups should be handled by the
// caller (shrink the interval before calling).
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double abs_tol);

// Golden-section minimization of a continuous function on [lo, hi], assumed
// unimodal there. Returns the abscissa of the minimum once the bracket has
// shrunk below x_tol.
double golden_section_min(const std::function<double(double)>& f, double lo,
                          double hi, double x_tol);

// Gauss-Legendre nodes/weights on [-1, 1].
inline constexpr std::array<double, 3> kGauss3Nodes = {
    -0.7745966692414834, 0.0, 0.7745966692414834};
inline constexpr std::array<double, 3> kGauss3Weights = {
    0.5555555555555556, 0.8888888888888888, 0.5555555555555556};

inline constexpr std::array<double, 5> kGauss5Nodes = {
    -0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
    0.9061798459386640};
inline constexpr std::array<double, 5> kGauss5Weights = {
    0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
    0.4786286704993665, 0.2369268850561891};

// 5-point Gauss integral of f over [a, b].
template <typename F>
double gauss5(F&& f, double a, double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double acc = 0.0;
  for (int k = 0; k < 5; ++k) acc += kGauss5Weights[k] * f(mid + half * kGauss5Nodes[k]);
  return acc * half;
}

// 3-point Gauss integral of f over [a, b].
template <typename F>
double gauss3(F&& f, double a, double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double acc = 0.0;
  for (int k = 0; k < 3; ++k) acc += kGauss3Weights[k] * f(mid + half * kGauss3Nodes[k]);
  return acc * half;
}

}  // namespace entroflow
