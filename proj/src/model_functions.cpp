#include "entroflow/model_functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "entroflow/errors.hpp"
#include "entroflow/numerics.hpp"

namespace entroflow {

namespace {

constexpr double kEdgeGuard = 1e-12;   // hard-error band below the blow-up R
constexpr double kEndClamp = 1e-14;    // bracket clamp distance from -1 and b
constexpr double kInvertTol = 1e-12;   // residual tolerance of invert_beta

void check_bundle_params(double c, double R, double b, const char* who) {
  if (!(R > 1.0)) throw ConfigError(std::string(who) + ": R > 1 violated");
  if (!(c > 0.0)) throw ConfigError(std::string(who) + ": c > 0 violated");
  if (!(b > 0.0)) throw ConfigError(std::string(who) + ": b > 0 violated");
}

void check_below_blowup(double rho, double R, const char* who) {
  if (rho >= R - kEdgeGuard)
    throw SolverError(std::string(who) + ": rho = " + std::to_string(rho) +
                      " at or beyond the admissible band below R = " +
                      std::to_string(R));
}

// log((R-1)/(R-rho)) evaluated stably for rho near 1.
double log_ratio(double rho, double R) {
  return -std::log1p(-(rho - 1.0) / (R - 1.0));
}

// Stable log(cosh(w)).
double log_cosh(double w) {
  const double a = std::abs(w);
  return a - std::log(2.0) + std::log1p(std::exp(-2.0 * a));
}

}  // namespace

double ModelFunctions::max_kappa(double M) const {
  if (M <= 1.0) return 0.0;
  if (kappa_monotone) return kappa(M);
  // Dense scan with a golden-section polish around the best sample.
  const int kSamples = 2048;
  double best_x = 1.0, best = 0.0;
  for (int i = 1; i <= kSamples; ++i) {
    const double x = 1.0 + (M - 1.0) * static_cast<double>(i) / kSamples;
    const double v = kappa(x);
    if (v > best) {
      best = v;
      best_x = x;
    }
  }
  const double span = (M - 1.0) / kSamples;
  const double lo = std::max(1.0, best_x - span);
  const double hi = std::min(M, best_x + span);
  const double x_star =
      golden_section_min([&](double x) { return -kappa(x); }, lo, hi, 1e-12);
  return std::max(best, kappa(x_star));
}

double invert_beta(const ScalarFn& beta, double s, double b,
                   const ScalarFn& beta_prime) {
  if (!(b > 0.0)) throw ConfigError("invert_beta: b > 0 violated");
  const double tol = kInvertTol * std::max(1.0, std::abs(s));
  int budget = 500;
  auto eval = [&](double w) {
    if (--budget < 0)
      throw SolverError("invert_beta: iteration cap exceeded (malformed beta?)");
    return beta(w) - s;
  };

  double lo = 0.0, hi = 0.0, glo = eval(0.0), ghi = glo;
  if (glo == 0.0) return 0.0;

  if (glo < 0.0) {
    // Expand toward b, halving the remaining gap each time.
    double gap = b;
    for (;;) {
      gap *= 0.5;
      double w = b - gap;
      if (gap < kEndClamp) w = b - kEndClamp;
      const double g = eval(w);
      if (g >= 0.0) {
        hi = w;
        ghi = g;
        break;
      }
      lo = w;
      glo = g;
      if (gap <= kEndClamp)
        throw SolverError("invert_beta: target above the range of beta");
    }
  } else {
    // Expand toward -1.
    hi = 0.0;
    ghi = glo;
    double gap = 1.0;
    for (;;) {
      gap *= 0.5;
      double w = -1.0 + gap;
      if (gap < kEndClamp) w = -1.0 + kEndClamp;
      const double g = eval(w);
      if (g <= 0.0) {
        lo = w;
        glo = g;
        break;
      }
      hi = w;
      ghi = g;
      if (gap <= kEndClamp)
        throw SolverError("invert_beta: target below the range of beta");
    }
  }

  if (std::abs(glo) <= tol) return lo;
  if (std::abs(ghi) <= tol) return hi;

  // Bisection refined by safeguarded Newton (secant when no derivative).
  double x = 0.5 * (lo + hi);
  double gx = eval(x);
  double x_prev = lo, g_prev = glo;
  while (std::abs(gx) > tol) {
    if (gx > 0.0) {
      hi = x;
      ghi = gx;
    } else {
      lo = x;
      glo = gx;
    }
    double x_next;
    if (beta_prime) {
      const double d = beta_prime(x);
      x_next = (d > 0.0 && std::isfinite(d)) ? x - gx / d : 0.5 * (lo + hi);
    } else {
      const double dg = gx - g_prev;
      x_next = (dg != 0.0) ? x - gx * (x - x_prev) / dg : 0.5 * (lo + hi);
    }
    // Reject steps that leave the bracket.
    if (!(x_next > lo && x_next < hi)) x_next = 0.5 * (lo + hi);
    x_prev = x;
    g_prev = gx;
    x = x_next;
    if (x == x_prev || hi - lo == 0.0) {
      // Bracket exhausted at double resolution; return the best endpoint.
      return std::abs(glo) < std::abs(ghi) ? lo : hi;
    }
    gx = eval(x);
  }
  return x;
}

double quadrature_Q(const ScalarFn& kappa, double rho, double R) {
  if (rho >= R)
    throw SolverError("quadrature_Q: rho must lie below the blow-up R");
  if (rho <= 1.0) return 0.0;
  return adaptive_simpson([&](double t) { return (rho - t) * kappa(t); }, 1.0,
                          rho, 1e-12);
}

ModelFunctions make_tanh_model(double c, double R, double b) {
  check_bundle_params(c, R, b, "make_tanh_model");
  ModelFunctions mf;
  mf.c = c;
  mf.R = R;
  mf.b = b;
  mf.h_prime_sup = 1.0;  // sup of sech^2
  mf.kappa_monotone = true;

  mf.h = [](double s) { return std::tanh(s); };
  mf.h_prime = [](double s) {
    const double t = std::tanh(s);
    return 1.0 - t * t;
  };
  mf.H = [](double w) { return log_cosh(w); };
  mf.beta = [](double w) {
    if (!(w > -1.0 && w < 1.0))
      throw SolverError("beta(tanh bundle): argument outside (-1, 1)");
    return std::atanh(w);
  };

  mf.kappa = [c, R](double rho) {
    if (rho <= 1.0) return 0.0;
    check_below_blowup(rho, R, "kappa");
    const double u = rho - 1.0;
    return c * u * u / (R - rho);
  };

  mf.Qprime = [c, R](double rho) {
    if (rho <= 1.0) return 0.0;
    check_below_blowup(rho, R, "Qprime");
    const double u = rho - 1.0;
    return c * ((R - 1.0) * (R - 1.0) * log_ratio(rho, R) -
                2.0 * (R - 1.0) * u + 0.5 * u * (2.0 * R - rho - 1.0));
  };

  mf.Q = [c, R](double rho) {
    if (rho <= 1.0) return 0.0;
    check_below_blowup(rho, R, "Q");
    const double poly = (rho * rho + rho + 1.0) / 3.0 +
                        (R - rho) * (rho + 2.0 * R + 1.0) / 2.0 + rho - 2.0 * R;
    return c * ((rho - 1.0) * poly +
                (R - 1.0) * (R - 1.0) * (rho - R) * log_ratio(rho, R));
  };

  return mf;
}

namespace {

// Closed-form beta and its derivative q for the vehicle-following response.
struct TrafficBeta {
  double b;

  double beta(double w) const {
    if (!(w > -1.0 && w < b))
      throw SolverError("beta(traffic bundle): argument outside (-1, b)");
    return 0.5 * (b + 1.0) *
           (w * (b + 1.0) / ((w + 1.0) * (b - w)) +
            std::log(b * (w + 1.0) / (b - w)));
  }

  double q(double w) const {
    const double bw = b - w;
    const double w1 = 1.0 + w;
    const double b1 = 1.0 + b;
    return b1 * b1 * (2.0 * b + (b - 1.0) * w) / (2.0 * bw * bw * w1 * w1);
  }
};

}  // namespace

ModelFunctions make_traffic_model(double c, double R, double b) {
  check_bundle_params(c, R, b, "make_traffic_model");
  ModelFunctions mf;
  mf.c = c;
  mf.R = R;
  mf.b = b;
  mf.kappa_monotone = true;

  const TrafficBeta tb{b};
  ScalarFn beta = [tb](double w) { return tb.beta(w); };
  ScalarFn q = [tb](double w) { return tb.q(w); };
  mf.beta = beta;

  mf.h = [beta, q, b](double s) { return invert_beta(beta, s, b, q); };
  mf.h_prime = [h = mf.h, tb](double s) { return 1.0 / tb.q(h(s)); };
  // H(w) = int_0^w h(s) ds by parts through the inverse: with W = h(w),
  //   H(w) = W w - int_0^W beta(u) du
  // and the remaining integral reduces (partial fractions) to
  //   (b+1)/2 * W * [log1p(W) - log1p(-W/b)].
  mf.H = [h = mf.h, b](double w) {
    if (w == 0.0) return 0.0;
    const double W = h(w);
    return W * w -
           0.5 * (b + 1.0) * W * (std::log1p(W) - std::log1p(-W / b));
  };

  // Warm-started Newton on beta(w) = s; falls back to the bracketed solver
  // whenever the iteration misbehaves. Same residual tolerance either way.
  mf.h_hinted = [tb, beta, q, b](double s, double hint) {
    const double tol = kInvertTol * std::max(1.0, std::abs(s));
    double w = std::clamp(hint, -1.0 + 1e-12, b - 1e-12);
    double g = tb.beta(w) - s;
    double prev = std::abs(g);
    for (int it = 0; it < 8; ++it) {
      if (std::abs(g) <= tol) return w;
      const double d = tb.q(w);
      const double w_next = w - g / d;
      if (!(w_next > -1.0 && w_next < b)) break;
      const double g_next = tb.beta(w_next) - s;
      if (std::abs(g_next) > 0.5 * prev && std::abs(g_next) > tol) break;
      prev = std::abs(g_next);
      w = w_next;
      g = g_next;
    }
    if (std::abs(g) <= tol) return w;
    return invert_beta(beta, s, b, q);
  };

  // Locate min q on (-1, b): coarse scan, then golden section. q blows up at
  // both endpoints, so the minimum must be interior.
  {
    const int kScan = 4096;
    const double span = b + 1.0;
    int best_i = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 1; i < kScan; ++i) {
      const double w = -1.0 + span * static_cast<double>(i) / kScan;
      const double v = tb.q(w);
      if (v < best) {
        best = v;
        best_i = i;
      }
    }
    if (best_i <= 1 || best_i >= kScan - 1)
      throw SolverError(
          "make_traffic_model: failed to bracket the interior minimum of q");
    const double wl = -1.0 + span * static_cast<double>(best_i - 1) / kScan;
    const double wr = -1.0 + span * static_cast<double>(best_i + 1) / kScan;
    const double w_star =
        golden_section_min([&](double w) { return tb.q(w); }, wl, wr, 1e-10);
    mf.h_prime_sup = (1.0 + 1e-12) / tb.q(w_star);
  }

  mf.kappa = [c, R](double rho) {
    if (rho <= 1.0) return 0.0;
    check_below_blowup(rho, R, "kappa");
    const double u = rho - 1.0;
    return c * u * u / (rho * rho * (R - rho));
  };

  // Partial fractions of (t-1)^2 / (t^2 (R-t)):
  //   (1-2R)/R^2 * 1/t  +  1/R * 1/t^2  +  (R-1)^2/R^2 * 1/(R-t).
  const double a1 = (1.0 - 2.0 * R) / (R * R);
  const double a2 = 1.0 / R;
  const double a3 = (R - 1.0) * (R - 1.0) / (R * R);

  mf.Qprime = [c, R, a1, a2, a3](double rho) {
    if (rho <= 1.0) return 0.0;
    check_below_blowup(rho, R, "Qprime");
    return c * (a1 * std::log(rho) + a2 * (1.0 - 1.0 / rho) +
                a3 * log_ratio(rho, R));
  };

  // Antiderivative of Qprime; Q(rho) = F(rho) - F(1).
  auto F = [c, R, a1, a2, a3](double rho) {
    const double lr = std::log(rho);
    return c * (a1 * (rho * lr - rho) + a2 * (rho - lr) +
                a3 * (rho * std::log(R - 1.0) +
                      (R - rho) * std::log(R - rho) - (R - rho)));
  };
  const double F1 = F(1.0);
  mf.Q = [F, F1, R](double rho) {
    if (rho <= 1.0) return 0.0;
    check_below_blowup(rho, R, "Q");
    return F(rho) - F1;
  };

  return mf;
}

}  // namespace entroflow
