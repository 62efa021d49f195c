#include "entroflow/implicit_scheme.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "entroflow/errors.hpp"

namespace entroflow {

namespace {

constexpr double kIterateFloor = -1e-12;
constexpr double kBlowupGuard = 1e-9;

// Evaluates the explicit flux balance at iterate r against base state f.
void apply_map(const DensityField& f, const ModelFunctions& mf, double dt,
               const Eigen::ArrayXd& r, StepWorkspace& ws,
               Eigen::ArrayXd& out) {
  const Eigen::Index n = f.grid.n;
  const double lam = dt / f.grid.dx;

  DensityField iter;
  iter.grid = f.grid;
  iter.rho = r;
  compute_w(iter, mf, ws);

  out.resize(n);
  out[0] = f.rho[0];
  out[n - 1] = f.rho[n - 1];
  double g_prev = r[0] * ws.w[0];
  for (Eigen::Index i = 1; i < n - 1; ++i) {
    const double g_i = r[i] * ws.w[i];
    out[i] = f.rho[i] + lam * (g_prev - g_i);
    g_prev = g_i;
  }
}

}  // namespace

DensityField step_implicit(const DensityField& f, const ModelFunctions& mf,
                           double dt, const ImplicitSolverConfig& cfg,
                           ImplicitStepStats* stats) {
  if (!(dt > 0.0)) throw ConfigError("step_implicit: dt > 0 violated");
  if (!(cfg.tol > 0.0)) throw ConfigError("step_implicit: tol > 0 violated");
  if (!(cfg.damping > 0.0 && cfg.damping <= 1.0))
    throw ConfigError("step_implicit: damping in (0, 1] violated");
  if (cfg.max_iters < 1)
    throw ConfigError("step_implicit: max_iters >= 1 violated");
  f.grid.validate();

  const Eigen::Index n = f.grid.n;
  const double ceiling = mf.R - kBlowupGuard;

  StepWorkspace ws;
  Eigen::ArrayXd r = f.rho;
  Eigen::ArrayXd phi;

  double residual = std::numeric_limits<double>::infinity();
  for (int m = 0; m < cfg.max_iters; ++m) {
    apply_map(f, mf, dt, r, ws, phi);
    residual = (phi - r).abs().maxCoeff();
    if (stats) {
      stats->iterations = m + 1;
      stats->residual = residual;
    }
    if (residual <= cfg.tol) {
      DensityField out;
      out.grid = f.grid;
      out.rho = std::move(r);
      return out;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      const double v = (1.0 - cfg.damping) * r[i] + cfg.damping * phi[i];
      if (!std::isfinite(v) || v < kIterateFloor || v >= ceiling)
        throw SolverError(
            "step_implicit: iterate left the admissible density range at "
            "cell " + std::to_string(i) + " (value " + std::to_string(v) +
            "); reduce dt or use stronger damping");
      r[i] = v;
    }
  }
  throw SolverError(
      "step_implicit: no convergence after " + std::to_string(cfg.max_iters) +
      " iterations (residual " + std::to_string(residual) +
      "); reduce dt or use stronger damping");
}

CompareResult compare_runs(const DensityField& ic, const ModelFunctions& mf,
                           const CompareOptions& opt) {
  ic.grid.validate();
  if (!(opt.T > 0.0)) throw ConfigError("compare: T > 0 violated");
  if (!(opt.dt_implicit > 0.0))
    throw ConfigError("compare: dt_implicit > 0 violated");

  double dt_exp = opt.dt_explicit;
  if (dt_exp <= 0.0) {
    const double M = std::max(0.0, ic.rho.maxCoeff());
    const double bound = std::min(cfl_dt(M, mf, ic.grid.dx),
                                  entropy_dt(M, mf, ic.grid.dx));
    dt_exp = opt.safety * bound;
    // Snap to an exact divisor of the implicit step.
    const long k = static_cast<long>(std::ceil(opt.dt_implicit / dt_exp));
    dt_exp = opt.dt_implicit / static_cast<double>(k);
  }

  const double ratio = opt.dt_implicit / dt_exp;
  const long k = std::lround(ratio);
  if (k < 1 || std::abs(ratio - static_cast<double>(k)) > 1e-9 * k)
    throw ConfigError(
        "compare: dt_implicit must be an integer multiple of dt_explicit "
        "(ratio " + std::to_string(ratio) + ")");

  CompareResult res;
  res.dt_explicit_used = dt_exp;
  res.substeps = k;
  res.final_explicit = ic;
  res.final_implicit = ic;

  const long n_outer =
      std::lround(std::ceil(opt.T / opt.dt_implicit - 1e-12));

  StepWorkspace ws_exp;
  double t = 0.0;
  for (long step = 0; step < n_outer; ++step) {
    for (long s = 0; s < k; ++s)
      res.final_explicit = step_explicit(res.final_explicit, mf, dt_exp,
                                         nullptr, &ws_exp);
    res.final_implicit =
        step_implicit(res.final_implicit, mf, opt.dt_implicit, opt.solver);
    t = (step + 1) * opt.dt_implicit;

    ComparisonRecord rec;
    rec.t = t;
    rec.sup_drho =
        (res.final_explicit.rho - res.final_implicit.rho).abs().maxCoeff();
    const Eigen::ArrayXd w_e = compute_w(res.final_explicit, mf);
    const Eigen::ArrayXd w_i = compute_w(res.final_implicit, mf);
    rec.sup_dw = (w_e - w_i).abs().maxCoeff();
    res.series.push_back(rec);
  }
  return res;
}

}  // namespace entroflow
