#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "entroflow/diagnostics.hpp"
#include "entroflow/grid.hpp"
#include "entroflow/model_functions.hpp"

namespace entroflow {

// Conservative update
//
//   rho_i^+ = rho_i + (dt/dx) (G_{i-1} - G_i),   G_i = rho_i h(-q_i),
//   q_i     = (Qprime(rho_{i+1}) - Qprime(rho_i)) / dx,
//
// on the interior cells; the two end cells stay pinned at zero. Fluxes
// telescope, so mass is conserved exactly as long as the support stays two
// cells away from each end (enforced).

// Per-step scratch. Reusing one across steps lets the face velocities warm
// start the next step's h inversion; a default-constructed workspace is valid.
struct StepWorkspace {
  Eigen::ArrayXd qprime;  // per cell
  Eigen::ArrayXd w;       // per face i = 0..n-2
  bool warm = false;
};

struct StepReport {
  double dt_used = 0.0;
  Eigen::ArrayXd fluxes;  // G_i, i = 0..n-2
  double max_density = 0.0;
  double mass = 0.0;
  bool cfl_ok = true;  // dt within the stability bound at this field's max
};

// q_i for one face; i in [0, n-2].
double compute_q(const DensityField& f, const ModelFunctions& mf,
                 Eigen::Index i);

// Face velocities w_i = h(-q_i) for all faces.
Eigen::ArrayXd compute_w(const DensityField& f, const ModelFunctions& mf);
void compute_w(const DensityField& f, const ModelFunctions& mf,
               StepWorkspace& ws);

// One explicit step. Caller is responsible for dt (a too-large dt is only
// flagged in the report); errors on support reaching the boundary band or on
// a negative updated density below -1e-14.
DensityField step_explicit(const DensityField& f, const ModelFunctions& mf,
                           double dt, StepReport* report = nullptr,
                           StepWorkspace* ws = nullptr);

// Largest dt with 1 >= (dt/dx) (b + 2 M h'_sup max_kappa(M) / dx); keeps
// densities in [0, M].
double cfl_dt(double M, const ModelFunctions& mf, double dx);

// Largest dt with dt * 4 M h'_sup max_kappa(M) / dx^2 <= 1; under it the
// discrete entropy sum(Q) is non-increasing. Infinite when M <= 1.
double entropy_dt(double M, const ModelFunctions& mf, double dx);

struct RunOptions {
  double T = 1.0;
  double dt = 0.0;      // 0 = derive from the stability bounds
  double safety = 0.9;  // multiplies the derived dt
  double M = 0.0;       // density bound; 0 = max of the initial field
  bool adaptive_dt = false;   // re-derive dt from the current max each step
  bool allow_unstable_dt = false;  // accept a fixed dt above the CFL bound
  int records = 600;               // diagnostics rows spread over [0, T]
  bool entropy_check_each_step = false;
  double entropy_slack_rel = 1e-12;  // slack = rel * E2(0)

  // Called once per step with the pre-step field, the step length about to be
  // taken, and the workspace holding the face velocities w and per-cell Q'.
  std::function<void(long k, double t, double dt, const DensityField& f,
                     const StepWorkspace& ws)>
      observer;
  // Evaluated at each diagnostics record; returning true ends the run.
  std::function<bool(const DiagnosticsRecord&)> stop_when;
};

struct RunResult {
  DensityField final;
  double t_end = 0.0;
  long steps = 0;
  double dt_initial = 0.0;
  double dt_last = 0.0;
  double cfl_bound = 0.0;       // at the initial M
  double entropy_bound = 0.0;   // at the initial M
  bool entropy_bound_ok = true;  // dt_initial within entropy_bound
  long entropy_violations = 0;   // counted only when the bound did not hold
  double max_entropy_jump = 0.0;
  bool stopped_early = false;
  std::vector<DiagnosticsRecord> series;
};

// March the explicit scheme to T (or until stop_when fires). Enforces the
// bound guarantees each step: no negative density below -1e-14, max density
// never above M, entropy non-increasing (when the entropy bound holds and the
// per-step check is enabled).
RunResult run_explicit(const DensityField& ic, const ModelFunctions& mf,
                       const RunOptions& opt);

}  // namespace entroflow
