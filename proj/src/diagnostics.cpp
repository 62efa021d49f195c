#include "entroflow/diagnostics.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "entroflow/errors.hpp"
#include "entroflow/numerics.hpp"

namespace entroflow {

double mass(const DensityField& f) {
  KahanSum s;
  for (Eigen::Index i = 0; i < f.grid.n; ++i) s.add(f.rho[i]);
  return f.grid.dx * s.value();
}

// Discrete dissipation functional: dx * sum_i rho_i H(-kappa(rho_i) D+rho_i)
// where D+ is the forward difference and H is the antiderivative of h.
double energy_E1(const DensityField& f, const ModelFunctions& mf) {
  const Eigen::Index n = f.grid.n;
  const double inv_dx = 1.0 / f.grid.dx;
  KahanSum s;
  for (Eigen::Index i = 0; i < n - 1; ++i) {
    if (f.rho[i] <= 1.0) continue;  // kappa = 0 there, so the term is exactly 0
    const double slope = (f.rho[i + 1] - f.rho[i]) * inv_dx;
    s.add(f.rho[i] * mf.H(-mf.kappa(f.rho[i]) * slope));
  }
  return f.grid.dx * s.value();
}

// Discrete entropy: dx * sum_i Q(rho_i).  Q vanishes identically below the
// critical density, so subcritical cells are skipped exactly.
double energy_E2(const DensityField& f, const ModelFunctions& mf) {
  KahanSum s;
  for (Eigen::Index i = 0; i < f.grid.n; ++i)
    s.add(f.rho[i] <= 1.0 ? 0.0 : mf.Q(f.rho[i]));
  return f.grid.dx * s.value();
}

// Stationarity residual: sup_i rho_i |Q'(rho_i) - Q'(rho_{i+1})|.  Zero
// exactly on states whose supercritical plateaus are flat.
double prop7_residual(const DensityField& f, const ModelFunctions& mf) {
  const Eigen::Index n = f.grid.n;
  auto qp = [&](Eigen::Index i) {
    return f.rho[i] <= 1.0 ? 0.0 : mf.Qprime(f.rho[i]);
  };
  double worst = 0.0;
  double q_right = qp(0);
  for (Eigen::Index i = 0; i < n - 1; ++i) {
    const double q_left = q_right;
    q_right = qp(i + 1);
    const double r = f.rho[i] * std::abs(q_left - q_right);
    if (r > worst) worst = r;
  }
  return worst;
}

DiagnosticsRecord collect_diagnostics(double t, const DensityField& f,
                                      const ModelFunctions& mf) {
  DiagnosticsRecord rec;
  rec.t = t;
  rec.mass = mass(f);
  rec.E1 = energy_E1(f, mf);
  rec.E2 = energy_E2(f, mf);
  rec.sup_residual = prop7_residual(f, mf);
  rec.rho_min = f.rho.minCoeff();
  rec.rho_max = f.rho.maxCoeff();
  return rec;
}

double mean_flow(const DimensionalTrace& trace, double T,
                 double support_eps) {
  const size_t m = trace.tau.size();
  if (m < 2 || trace.rho.size() != m || trace.v.size() != m)
    throw ConfigError("mean_flow: trace needs at least two complete samples");
  if (!(T > 0.0)) throw ConfigError("mean_flow: T > 0 violated");
  if (!(trace.dxi > 0.0)) throw ConfigError("mean_flow: dxi > 0 violated");
  if (trace.tau.front() > 1e-12 || trace.tau.back() < T * (1.0 - 1e-12))
    throw ConfigError("mean_flow: trace does not cover [0, T]");

  // Per-sample flow averaged over the occupied interval.
  std::vector<double> s(m);
  for (size_t j = 0; j < m; ++j) {
    const Eigen::ArrayXd& rho = trace.rho[j];
    const Eigen::ArrayXd& v = trace.v[j];
    Eigen::Index lo = -1, hi = -1;
    KahanSum flow;
    for (Eigen::Index i = 0; i < rho.size(); ++i) {
      if (rho[i] > support_eps) {
        if (lo < 0) lo = i;
        hi = i;
      }
    }
    if (lo < 0)
      throw SolverError("mean_flow: empty support at sample tau = " +
                        std::to_string(trace.tau[j]));
    for (Eigen::Index i = lo; i <= hi; ++i) flow.add(rho[i] * v[i]);
    const double length = static_cast<double>(hi - lo + 1) * trace.dxi;
    s[j] = flow.value() * trace.dxi / length;
  }

  // Trapezoid in time over [0, T].
  KahanSum integral;
  for (size_t j = 0; j + 1 < m; ++j)
    integral.add(0.5 * (s[j] + s[j + 1]) * (trace.tau[j + 1] - trace.tau[j]));
  return integral.value() / T;
}

}  // namespace entroflow
