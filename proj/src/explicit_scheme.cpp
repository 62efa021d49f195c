#include "entroflow/explicit_scheme.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "entroflow/errors.hpp"
#include "entroflow/numerics.hpp"

namespace entroflow {

namespace {

constexpr double kSupportEps = 1e-12;
constexpr double kNegativeTol = -1e-14;

// The truncation is exact only while the two outermost interior cells (plus
// the pinned end cells) are empty on both sides.
void check_support(const DensityField& f, const char* who) {
  const Eigen::Index n = f.grid.n;
  for (Eigen::Index i : {Eigen::Index(0), Eigen::Index(1), Eigen::Index(2),
                         n - 3, n - 2, n - 1}) {
    if (std::abs(f.rho[i]) > kSupportEps)
      throw InvariantViolation(
          std::string(who) + ": support reached the boundary band (cell " +
          std::to_string(i) + ", rho = " + std::to_string(f.rho[i]) +
          "); enlarge the domain");
  }
}

void fill_qprime(const DensityField& f, const ModelFunctions& mf,
                 Eigen::ArrayXd& qp) {
  const Eigen::Index n = f.grid.n;
  qp.resize(n);
  for (Eigen::Index i = 0; i < n; ++i)
    qp[i] = (f.rho[i] <= 1.0) ? 0.0 : mf.Qprime(f.rho[i]);
}

void fill_w(const DensityField& f, const ModelFunctions& mf,
            const Eigen::ArrayXd& qp, Eigen::ArrayXd& w, bool warm) {
  const Eigen::Index faces = f.grid.n - 1;
  const double inv_dx = 1.0 / f.grid.dx;
  if (!warm || w.size() != faces) {
    w.setZero(faces);
    warm = false;
  }
  for (Eigen::Index i = 0; i < faces; ++i) {
    const double q = (qp[i + 1] - qp[i]) * inv_dx;
    if (q == 0.0) {
      w[i] = 0.0;  // h(0) = 0: frozen faces carry exactly zero velocity
    } else if (mf.h_hinted) {
      w[i] = mf.h_hinted(-q, warm ? w[i] : 0.0);
    } else {
      w[i] = mf.h(-q);
    }
  }
}

}  // namespace

double compute_q(const DensityField& f, const ModelFunctions& mf,
                 Eigen::Index i) {
  if (i < 0 || i > f.grid.n - 2)
    throw ConfigError("compute_q: face index out of range");
  const auto qp = [&](Eigen::Index j) {
    return (f.rho[j] <= 1.0) ? 0.0 : mf.Qprime(f.rho[j]);
  };
  return (qp(i + 1) - qp(i)) / f.grid.dx;
}

void compute_w(const DensityField& f, const ModelFunctions& mf,
               StepWorkspace& ws) {
  fill_qprime(f, mf, ws.qprime);
  fill_w(f, mf, ws.qprime, ws.w, ws.warm);
  ws.warm = true;
}

Eigen::ArrayXd compute_w(const DensityField& f, const ModelFunctions& mf) {
  StepWorkspace ws;
  compute_w(f, mf, ws);
  return ws.w;
}

DensityField step_explicit(const DensityField& f, const ModelFunctions& mf,
                           double dt, StepReport* report, StepWorkspace* ws) {
  if (!(dt > 0.0)) throw ConfigError("step_explicit: dt > 0 violated");
  f.grid.validate();
  check_support(f, "step_explicit");

  StepWorkspace local;
  StepWorkspace& scratch = ws ? *ws : local;
  compute_w(f, mf, scratch);

  const Eigen::Index n = f.grid.n;
  const double lam = dt / f.grid.dx;

  DensityField out;
  out.grid = f.grid;
  out.rho.resize(n);
  out.rho[0] = f.rho[0];
  out.rho[n - 1] = f.rho[n - 1];

  // G_i = rho_i w_i on faces; interior update by flux differences.
  double max_new = -std::numeric_limits<double>::infinity();
  double mass_in = 0.0;  // filled only when a report is requested
  double g_prev = f.rho[0] * scratch.w[0];
  Eigen::ArrayXd* fluxes = nullptr;
  if (report) {
    report->fluxes.resize(n - 1);
    fluxes = &report->fluxes;
    (*fluxes)[0] = g_prev;
  }
  for (Eigen::Index i = 1; i < n - 1; ++i) {
    const double g_i = f.rho[i] * scratch.w[i];
    if (fluxes) (*fluxes)[i] = g_i;
    const double v = f.rho[i] + lam * (g_prev - g_i);
    if (!std::isfinite(v))
      throw SolverError("step_explicit: non-finite density at cell " +
                        std::to_string(i));
    if (v < kNegativeTol)
      throw InvariantViolation(
          "step_explicit: negative density " + std::to_string(v) +
          " at cell " + std::to_string(i) + " (time step too large)");
    out.rho[i] = v;
    if (v > max_new) max_new = v;
    g_prev = g_i;
  }

  if (report) {
    report->dt_used = dt;
    report->max_density = max_new;
    KahanSum m;
    for (Eigen::Index i = 0; i < n; ++i) m.add(out.rho[i]);
    report->mass = f.grid.dx * m.value();
    const double M_in = f.rho.maxCoeff();
    report->cfl_ok = dt <= cfl_dt(M_in, mf, f.grid.dx) * (1.0 + 1e-12);
    (void)mass_in;
  }
  return out;
}

double cfl_dt(double M, const ModelFunctions& mf, double dx) {
  if (!(dx > 0.0)) throw ConfigError("cfl_dt: dx > 0 violated");
  if (M < 0.0) throw ConfigError("cfl_dt: M >= 0 violated");
  const double denom = dx * mf.b + 2.0 * M * mf.h_prime_sup * mf.max_kappa(M);
  return dx * dx / denom;
}

double entropy_dt(double M, const ModelFunctions& mf, double dx) {
  if (!(dx > 0.0)) throw ConfigError("entropy_dt: dx > 0 violated");
  const double k = mf.max_kappa(M);
  if (k <= 0.0) return std::numeric_limits<double>::infinity();
  return dx * dx / (4.0 * M * mf.h_prime_sup * k);
}

RunResult run_explicit(const DensityField& ic, const ModelFunctions& mf,
                       const RunOptions& opt) {
  ic.grid.validate();
  if (!(opt.T >= 0.0)) throw ConfigError("run: T >= 0 violated");
  if (!(opt.safety > 0.0 && opt.safety <= 1.0))
    throw ConfigError("run: safety in (0, 1] violated");
  if (opt.records < 1) throw ConfigError("run: records >= 1 violated");

  RunResult res;
  res.final = ic;

  const double M0 = std::max(0.0, ic.rho.maxCoeff());
  const double M = opt.M > 0.0 ? opt.M : M0;
  if (M0 > M + 1e-12)
    throw ConfigError("run: initial density exceeds the configured bound M");

  res.cfl_bound = cfl_dt(M, mf, ic.grid.dx);
  res.entropy_bound = entropy_dt(M, mf, ic.grid.dx);

  auto derive_dt = [&](double Mcur) {
    return opt.safety * std::min(cfl_dt(Mcur, mf, ic.grid.dx),
                                 entropy_dt(Mcur, mf, ic.grid.dx));
  };

  double dt = opt.dt > 0.0 ? opt.dt : derive_dt(M);
  if (opt.dt > 0.0 && opt.dt > res.cfl_bound * (1.0 + 1e-12) &&
      !opt.allow_unstable_dt)
    throw ConfigError(
        "run: fixed dt = " + std::to_string(opt.dt) +
        " exceeds the stability bound " + std::to_string(res.cfl_bound) +
        " (set the unstable-dt override to force)");
  res.dt_initial = dt;
  res.dt_last = dt;
  res.entropy_bound_ok = dt <= res.entropy_bound * (1.0 + 1e-12);

  const double record_dt = opt.T / opt.records;
  double next_record = record_dt;

  auto e2 = [&](const DensityField& f) {
    KahanSum s;
    for (Eigen::Index i = 0; i < f.grid.n; ++i)
      s.add(f.rho[i] <= 1.0 ? 0.0 : mf.Q(f.rho[i]));
    return f.grid.dx * s.value();
  };

  res.series.push_back(collect_diagnostics(0.0, res.final, mf));
  if (opt.stop_when && opt.stop_when(res.series.back())) {
    res.stopped_early = true;
    return res;
  }

  double E2_prev = opt.entropy_check_each_step ? e2(res.final) : 0.0;
  const double slack = opt.entropy_check_each_step
                           ? opt.entropy_slack_rel * std::abs(E2_prev)
                           : 0.0;

  StepWorkspace ws;
  double t = 0.0;
  long k = 0;
  while (t < opt.T && opt.T > 0.0) {
    if (opt.adaptive_dt && opt.dt <= 0.0) {
      dt = derive_dt(std::max(0.0, res.final.rho.maxCoeff()));
    }
    double step_dt = std::min(dt, opt.T - t);
    if (step_dt <= 0.0) break;

    check_support(res.final, "run");
    compute_w(res.final, mf, ws);
    if (opt.observer) opt.observer(k, t, step_dt, res.final, ws);

    // Inline update (same as step_explicit) against the precomputed w.
    const Eigen::Index n = res.final.grid.n;
    const double lam = step_dt / res.final.grid.dx;
    double g_prev = res.final.rho[0] * ws.w[0];
    double carry = res.final.rho[1];
    double max_new = 0.0;
    for (Eigen::Index i = 1; i < n - 1; ++i) {
      const double g_i = carry * ws.w[i];
      const double v = carry + lam * (g_prev - g_i);
      if (!std::isfinite(v))
        throw SolverError("run: non-finite density at cell " +
                          std::to_string(i) + ", t = " + std::to_string(t));
      if (v < kNegativeTol)
        throw InvariantViolation(
            "run: negative density " + std::to_string(v) + " at cell " +
            std::to_string(i) + ", t = " + std::to_string(t) +
            " (time step too large)");
      carry = res.final.rho[i + 1];
      res.final.rho[i] = v;
      if (v > max_new) max_new = v;
      g_prev = g_i;
    }
    if (max_new > M * (1.0 + 1e-12) + 1e-14)
      throw InvariantViolation("run: density bound exceeded: max " +
                               std::to_string(max_new) + " > M = " +
                               std::to_string(M));

    t += step_dt;
    ++k;
    res.dt_last = step_dt;

    if (opt.entropy_check_each_step) {
      const double E2_now = e2(res.final);
      if (E2_now > E2_prev + slack) {
        ++res.entropy_violations;
        res.max_entropy_jump =
            std::max(res.max_entropy_jump, E2_now - E2_prev);
        if (res.entropy_bound_ok)
          throw InvariantViolation(
              "run: entropy increased by " + std::to_string(E2_now - E2_prev) +
              " at t = " + std::to_string(t) +
              " although the entropy time-step bound holds");
      }
      E2_prev = E2_now;
    }

    if (t >= next_record - 0.5 * step_dt || t >= opt.T) {
      while (next_record <= t + 0.5 * step_dt) next_record += record_dt;
      res.series.push_back(collect_diagnostics(t, res.final, mf));
      if (opt.stop_when && opt.stop_when(res.series.back())) {
        res.stopped_early = true;
        break;
      }
    }
  }

  res.t_end = t;
  res.steps = k;
  return res;
}

}  // namespace entroflow
