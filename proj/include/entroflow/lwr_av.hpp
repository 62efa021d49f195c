#pragma once

#include <vector>

#include <Eigen/Dense>

#include "entroflow/grid.hpp"
#include "entroflow/model_functions.hpp"

namespace entroflow {

// Physical parameters of the dimensional traffic layer.  Lengths in km,
// speeds in km/h, densities in veh/km, times in h.
struct DimensionalParams {
  double v_star = 70.0;     // speed set-point of the controlled vehicles
  double v_max = 110.0;     // hard speed cap
  double v_f = 102.0;       // free-flow speed of the baseline model
  double rho_c = 33.3;      // critical density of the baseline model
  double rho_max = 180.0;   // jam density
  double rho_bar = 31.0;    // interaction density (response threshold)
  double a = 2.34;          // baseline speed-law exponent
  double r = 1.0;           // length scale of the frame change
  double c = 40.0;          // viscosity constant of the response model

  double R() const { return rho_max / rho_bar; }
  double b() const { return (v_max - v_star) / v_star; }
  void validate() const;
};

// Density trace in road coordinates (grid over xi in km, veh/km per cell).
struct DimensionalField {
  Grid1D grid;
  Eigen::ArrayXd rho_tilde;
};

// Baseline speed law v_f exp(-(1/a) (rho/rho_c)^a) and its flux rho v(rho).
double lwr_speed(double rho_tilde, const DimensionalParams& p);
double lwr_flux(double rho_tilde, const DimensionalParams& p);

// Godunov numerical flux for the unimodal flux law: min of the flux over
// [rho_L, rho_R] when rho_L <= rho_R, max over [rho_R, rho_L] otherwise.
// The single interior maximizer at rho_c makes both cases closed-form.
double godunov_flux(double rho_L, double rho_R, const DimensionalParams& p);

// Largest |d(rho v)/d rho| over densities in [0, M].
double lwr_max_wave_speed(double M, const DimensionalParams& p);
double lwr_cfl_dt(double M, const DimensionalParams& p, double dx,
                  double safety);

// One conservative Godunov step with zero-density ghost cells.  Errors when
// the support reaches the outflow boundary band or when the updated densities
// leave the invariant range (the post-hoc CFL check).  `guard_support` = false
// skips the boundary-band check for window studies (e.g. Riemann problems
// whose constant states occupy the boundaries); mass is then free to leave
// through the right end.
DimensionalField step_lwr(const DimensionalField& f,
                          const DimensionalParams& p, double dt,
                          bool guard_support = true);

// The response model in the co-moving frame.  Road coordinates map as
// xi = r x + v* tau and the dimensionless clock runs as t = (v*/r) tau, so
// the dimensional model becomes the dimensionless equation the explicit
// scheme integrates, with rho = rho_tilde / rho_bar.
struct AvFrame {
  DensityField field;  // dimensionless initial state on the co-moving grid
  ModelFunctions mf;   // response-model bundle with (c, R, b) from params
  DimensionalParams params;

  double t_of_tau(double tau) const { return params.v_star / params.r * tau; }
  double tau_of_t(double t) const { return params.r / params.v_star * t; }
  double xi_of_x(double x, double tau) const {
    return params.r * x + params.v_star * tau;
  }
  // Dimensional view of a co-moving state at dimensionless time t.
  DimensionalField to_dimensional(const DensityField& f, double t) const;
};

AvFrame av_to_dimensionless(const DimensionalField& f,
                            const DimensionalParams& p);

// Per-cell speeds v*(1 + w_i) with w_i the face velocity the scheme uses
// (cell i paired with its right face).  Cells with no density report v* by
// convention; the last cell has no right face and reports v* as well.
Eigen::ArrayXd av_speed_field(const DimensionalField& f,
                              const DimensionalParams& p,
                              const ModelFunctions& mf);

// Sampled dimensional run: densities and speeds per cell at sample times.
struct DimensionalTrace {
  std::vector<double> tau;          // sample times, h
  std::vector<Eigen::ArrayXd> rho;  // veh/km
  std::vector<Eigen::ArrayXd> v;    // km/h
  double dxi = 0.0;                 // cell width, km
};

}  // namespace entroflow
