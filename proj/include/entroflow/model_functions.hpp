#pragma once

#include <functional>

namespace entroflow {

using ScalarFn = std::function<double(double)>;

// Constitutive bundle for the degenerate-diffusion model
//
//   rho_t + (rho * h(-kappa(rho) rho_x))_x = 0.
//
// h is a strictly increasing odd-through-zero speed response with range
// inside (-1, b); kappa is the density-dependent viscosity, zero on [0, 1]
// (frozen/equilibrium band), positive on (1, R), blowing up at R. Derived
// quantities:
//
//   Qprime(rho) = integral_1^rho kappa(t) dt        (flux potential slope)
//   Q(rho)      = integral_1^rho (rho - t) kappa(t) dt   (entropy density)
//   beta        = inverse of h
//   H(w)        = integral_0^w h(s) ds              (entropy-flux kernel)
//
// A bundle is immutable after construction and safe to share across threads.
struct ModelFunctions {
  ScalarFn h;
  ScalarFn h_prime;
  ScalarFn kappa;
  ScalarFn Q;
  ScalarFn Qprime;
  ScalarFn beta;
  ScalarFn H;

  // Optional accelerated inverse: h_hinted(s, w_guess) must agree with h(s)
  // to the inversion tolerance for any guess. Steppers use it with the
  // previous step's value as warm start; null for closed-form h.
  std::function<double(double, double)> h_hinted;

  double c = 0.0;            // viscosity amplitude
  double R = 0.0;            // density blow-up
  double b = 0.0;            // upper speed-deviation bound, sup h < b when b > sup|h|
  double h_prime_sup = 0.0;  // sup of h'
  bool kappa_monotone = true;

  // max of kappa over [0, M]; kappa(M) when kappa is monotone, otherwise a
  // dense scan refined by golden section.
  double max_kappa(double M) const;
};

// Bundle with h = tanh and kappa(rho) = c (rho-1)^2 / (R - rho) on (1, R).
// Q and Qprime are closed forms. Rejects R <= 1, c <= 0, b <= 0.
ModelFunctions make_tanh_model(double c, double R, double b);

// Bundle for the vehicle-following speed response: beta is the closed-form
// strictly increasing map on (-1, b) with derivative
//   q(w) = (1+b)^2 (2b + (b-1) w) / (2 (b-w)^2 (1+w)^2),
// h = beta^{-1} evaluated by safeguarded root finding, and composite
// viscosity kappa(rho) = c (rho-1)^2 / (rho^2 (R - rho)) on (1, R) --
// the car-following curvature mu(rho) = c (rho-1)^2/(R - rho) divided by
// rho^2 from the frame change. h_prime_sup = 1 / min q, located by a coarse
// scan plus golden section. Rejects R <= 1, c <= 0, b <= 0.
ModelFunctions make_traffic_model(double c, double R, double b);

// Solve beta(w) = s for w in (-1, b). beta must be strictly increasing with
// range covering s. Brackets by geometric expansion from 0 toward the
// endpoints (clamped at -1 + 1e-14 and b - 1e-14), then bisection refined by
// safeguarded Newton (secant when beta_prime is null). Returns w with
// |beta(w) - s| <= 1e-12 * max(1, |s|); throws SolverError after 500
// iterations (malformed beta).
double invert_beta(const ScalarFn& beta, double s, double b,
                   const ScalarFn& beta_prime = nullptr);

// Reference evaluation of Q by adaptive quadrature of (rho - t) kappa(t)
// over [1, rho], absolute tolerance 1e-12. Serves as the independent check
// for the closed forms. Requires rho < R (the integrand must stay finite).
double quadrature_Q(const ScalarFn& kappa, double rho, double R);

}  // namespace entroflow
