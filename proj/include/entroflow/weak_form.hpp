#pragma once

#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "entroflow/grid.hpp"
#include "entroflow/model_functions.hpp"

namespace entroflow {

// A smooth compactly supported test function phi(t, x) with its partial
// derivatives supplied analytically.  When the function factors as
// phi = Bt(t) * Bx(x), the separable fields are set as well and the
// integration uses per-axis factors instead of tensor quadrature.
struct TestFunction {
  std::function<double(double, double)> phi;
  std::function<double(double, double)> phi_t;
  std::function<double(double, double)> phi_x;

  // Support box; phi must vanish identically outside it.
  double t_lo = 0.0, t_hi = 0.0;
  double x_lo = 0.0, x_hi = 0.0;

  // Optional separable factorization (all four set, or none).
  ScalarFn Bt, Bx, Bt_prime, Bx_prime;
  bool separable() const { return static_cast<bool>(Bt); }
};

// phi(t, x) = B((t-t0)/sigma_t) * B((x-x0)/sigma_x) with B the classic
// C-infinity bump exp(-1/(1-u^2)) on |u| < 1, zero elsewhere.
TestFunction make_bump_test_function(double t0, double sigma_t, double x0,
                                     double sigma_x);
TestFunction default_test_function();  // t0=0.25, sigma_t=0.2, x0=1, sigma_x=1.2

// Streaming evaluation of the two weak-form residuals over a run seen as a
// piecewise-constant space-time reconstruction (cell i on [x_i, x_{i+1})
// paired with face velocity w_i, step k on [t_k, t_k + dt_k)):
//
//   r1 = | sum int int rho (w phi_x + phi_t) + int phi(0, x) rho_0 |
//   r2 = | sum int int (phi beta(w) - phi_x Q'(rho)) |
//
// Each per-cell, per-step rectangle integral of phi uses 3-point Gauss per
// axis.  beta(w_i) equals the negated face difference of Q' by construction
// of w_i, so r2 consumes the Q' buffer directly when one is supplied.
class WeakFormAccumulator {
 public:
  WeakFormAccumulator(const Grid1D& grid, double T_run, TestFunction phi);

  // Contribution of the initial data: int phi(0, x) rho_0(x) dx.
  void initial(const DensityField& rho0);

  // One reconstruction slab [t0, t0 + dt).  w has one entry per face
  // (grid.n - 1); the last cell is paired with w = 0.  qprime, when given,
  // holds per-cell Q'(rho_i) and must be consistent with w.
  void add_step(double t0, double dt, const DensityField& f,
                const Eigen::ArrayXd& w, const Eigen::ArrayXd* qprime,
                const ModelFunctions& mf);

  double r1() const;
  double r2() const;

 private:
  Grid1D grid_;
  TestFunction phi_;
  // Per-cell spatial factors for the separable path.
  Eigen::ArrayXd cell_phi_, cell_phi_x_;
  Eigen::Index i_lo_ = 0, i_hi_ = 0;  // cells overlapping the support
  double acc1_ = 0.0, c1_ = 0.0;      // Neumaier-compensated sums
  double acc2_ = 0.0, c2_ = 0.0;
  double initial_term_ = 0.0;
  bool initial_seen_ = false;

  void add1(double v);
  void add2(double v);
};

// A run stored at full space-time resolution: state and face velocities at
// the start of every step, with the step lengths.  Convenience form for
// small runs; long runs should stream through WeakFormAccumulator instead.
struct StoredRun {
  Grid1D grid;
  std::vector<double> t;             // start time of each step
  std::vector<double> dt;            // length of each step
  std::vector<Eigen::ArrayXd> rho;   // per-cell density at t[k]
  std::vector<Eigen::ArrayXd> w;     // per-face velocity at t[k]
  DensityField initial() const;
};

std::pair<double, double> weak_residuals(const StoredRun& run,
                                         const TestFunction& phi,
                                         const ModelFunctions& mf);

}  // namespace entroflow
