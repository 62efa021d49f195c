#pragma once

#include <Eigen/Dense>

#include "entroflow/grid.hpp"
#include "entroflow/lwr_av.hpp"
#include "entroflow/model_functions.hpp"

namespace entroflow {

// One diagnostics row: time, invariants, and field bounds.
struct DiagnosticsRecord {
  double t = 0.0;
  double mass = 0.0;
  double E1 = 0.0;            // dx * sum rho_i H(-kappa(rho_i) drho/dx)
  double E2 = 0.0;            // dx * sum Q(rho_i)
  double sup_residual = 0.0;  // sup_i rho_i |Qprime(rho_i) - Qprime(rho_{i+1})|
  double rho_min = 0.0;
  double rho_max = 0.0;
};

// Total mass dx * sum rho_i, compensated summation in index order.
double mass(const DensityField& f);

// First entropy functional: dx * sum_i rho_i * H(-kappa(rho_i) * (rho_{i+1} -
// rho_i)/dx), i = 0..n-2. Cells at or below the degeneracy contribute zero.
double energy_E1(const DensityField& f, const ModelFunctions& mf);

// Second entropy functional: dx * sum_i Q(rho_i). Non-increasing along valid
// explicit steps.
double energy_E2(const DensityField& f, const ModelFunctions& mf);

// Stagnation residual sup_i rho_i |Qprime(rho_i) - Qprime(rho_{i+1})|; decays
// to zero as the field settles into the frozen band.
double prop7_residual(const DensityField& f, const ModelFunctions& mf);

// All of the above at a given time.
DiagnosticsRecord collect_diagnostics(double t, const DensityField& f,
                                      const ModelFunctions& mf);

// Time-averaged flow per unit occupied road, veh/h:
//
//   (1/T) * int_0^T [ int rho v dxi / (support length at tau) ] dtau
//
// Per sample the support is the smallest cell interval containing every cell
// with rho > support_eps; the space integral is a cell-width rectangle sum
// and the time average is trapezoidal over the sample times.  Errors when a
// sample has no support or the trace does not cover [0, T].
double mean_flow(const DimensionalTrace& trace, double T,
                 double support_eps);

}  // namespace entroflow
