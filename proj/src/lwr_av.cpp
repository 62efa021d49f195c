#include "entroflow/lwr_av.hpp"

#include <cmath>
#include <string>

#include "entroflow/errors.hpp"
#include "entroflow/explicit_scheme.hpp"

namespace entroflow {

namespace {

constexpr double kSupportEpsDim = 1e-9;  // veh/km; boundary-band threshold

void check_dim_support(const DimensionalField& f) {
  // Only the outflow side needs guarding: the speed law is positive, so the
  // left boundary flux into an empty ghost is identically zero and occupied
  // cells at the left edge can only drain rightward.  Mass in the right band
  // would leave the domain and break conservation.
  const Eigen::Index n = f.grid.n;
  for (Eigen::Index i : {n - 2, n - 1}) {
    if (std::abs(f.rho_tilde[i]) > kSupportEpsDim)
      throw InvariantViolation(
          "step_lwr: support reached the outflow boundary band (cell " +
          std::to_string(i) + "); enlarge the domain");
  }
}

}  // namespace

void DimensionalParams::validate() const {
  if (!(v_star > 0.0)) throw ConfigError("params: v_star > 0 violated");
  if (!(v_star < v_max)) throw ConfigError("params: v_star < v_max violated");
  if (!(v_f > 0.0)) throw ConfigError("params: v_f > 0 violated");
  if (!(rho_c > 0.0)) throw ConfigError("params: rho_c > 0 violated");
  if (!(rho_bar > 0.0)) throw ConfigError("params: rho_bar > 0 violated");
  if (!(rho_bar < rho_max))
    throw ConfigError("params: rho_bar < rho_max violated");
  if (!(a > 0.0)) throw ConfigError("params: a > 0 violated");
  if (!(r > 0.0)) throw ConfigError("params: r > 0 violated");
  if (!(c > 0.0)) throw ConfigError("params: c > 0 violated");
}

double lwr_speed(double rho_tilde, const DimensionalParams& p) {
  if (rho_tilde < 0.0) throw ConfigError("lwr_speed: rho >= 0 violated");
  if (rho_tilde == 0.0) return p.v_f;
  return p.v_f * std::exp(-std::pow(rho_tilde / p.rho_c, p.a) / p.a);
}

double lwr_flux(double rho_tilde, const DimensionalParams& p) {
  return rho_tilde * lwr_speed(rho_tilde, p);
}

double godunov_flux(double rho_L, double rho_R, const DimensionalParams& p) {
  if (rho_L < 0.0 || rho_R < 0.0)
    throw ConfigError("godunov_flux: rho >= 0 violated");
  if (rho_L <= rho_R) {
    // Minimum of a unimodal flux over [rho_L, rho_R] sits at an endpoint.
    return std::min(lwr_flux(rho_L, p), lwr_flux(rho_R, p));
  }
  // Maximum over [rho_R, rho_L]: at the interior peak when straddled.
  if (rho_R <= p.rho_c && p.rho_c <= rho_L) return lwr_flux(p.rho_c, p);
  return rho_L < p.rho_c ? lwr_flux(rho_L, p) : lwr_flux(rho_R, p);
}

double lwr_max_wave_speed(double M, const DimensionalParams& p) {
  if (M < 0.0) throw ConfigError("lwr_max_wave_speed: M >= 0 violated");
  // |q'(rho)| = v(rho) |1 - (rho/rho_c)^a|; q'(0) = v_f is the global max on
  // [0, rho_c]. Scan the congested branch, where a second local max can live.
  double worst = p.v_f;
  const int kSamples = 2048;
  for (int i = 1; i <= kSamples; ++i) {
    const double rho = M * static_cast<double>(i) / kSamples;
    const double s = lwr_speed(rho, p) *
                     std::abs(1.0 - std::pow(rho / p.rho_c, p.a));
    if (s > worst) worst = s;
  }
  return worst;
}

double lwr_cfl_dt(double M, const DimensionalParams& p, double dx,
                  double safety) {
  if (!(dx > 0.0)) throw ConfigError("lwr_cfl_dt: dx > 0 violated");
  if (!(safety > 0.0 && safety <= 1.0))
    throw ConfigError("lwr_cfl_dt: safety in (0, 1] violated");
  return safety * dx / lwr_max_wave_speed(M, p);
}

DimensionalField step_lwr(const DimensionalField& f,
                          const DimensionalParams& p, double dt,
                          bool guard_support) {
  if (!(dt > 0.0)) throw ConfigError("step_lwr: dt > 0 violated");
  f.grid.validate();
  if (guard_support) check_dim_support(f);

  const Eigen::Index n = f.grid.n;
  const double lam = dt / f.grid.dx;
  const double old_max = f.rho_tilde.maxCoeff();

  DimensionalField out;
  out.grid = f.grid;
  out.rho_tilde.resize(n);

  double flux_left = godunov_flux(0.0, f.rho_tilde[0], p);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double rho_right = i + 1 < n ? f.rho_tilde[i + 1] : 0.0;
    const double flux_right = godunov_flux(f.rho_tilde[i], rho_right, p);
    const double v = f.rho_tilde[i] + lam * (flux_left - flux_right);
    if (!std::isfinite(v) || v < -1e-9 ||
        v > old_max * (1.0 + 1e-12) + 1e-9)
      throw SolverError(
          "step_lwr: updated density " + std::to_string(v) + " at cell " +
          std::to_string(i) +
          " left the invariant range (time step too large for the wave "
          "speeds)");
    out.rho_tilde[i] = v;
    flux_left = flux_right;
  }
  return out;
}

AvFrame av_to_dimensionless(const DimensionalField& f,
                            const DimensionalParams& p) {
  p.validate();
  f.grid.validate();
  for (Eigen::Index i = 0; i < f.grid.n; ++i) {
    if (!(f.rho_tilde[i] >= 0.0))
      throw ConfigError("av frame: rho >= 0 violated at cell " +
                        std::to_string(i));
    if (f.rho_tilde[i] >= p.rho_max)
      throw ConfigError("av frame: rho < rho_max violated at cell " +
                        std::to_string(i));
  }

  AvFrame frame;
  frame.params = p;
  frame.mf = make_traffic_model(p.c, p.R(), p.b());
  frame.field.grid = Grid1D{f.grid.x0 / p.r, f.grid.dx / p.r, f.grid.n};
  frame.field.rho = f.rho_tilde / p.rho_bar;
  return frame;
}

DimensionalField AvFrame::to_dimensional(const DensityField& f,
                                         double t) const {
  const double tau = tau_of_t(t);
  DimensionalField out;
  out.grid = Grid1D{xi_of_x(f.grid.x0, tau), params.r * f.grid.dx, f.grid.n};
  out.rho_tilde = f.rho * params.rho_bar;
  return out;
}

Eigen::ArrayXd av_speed_field(const DimensionalField& f,
                              const DimensionalParams& p,
                              const ModelFunctions& mf) {
  DensityField dimless;
  dimless.grid = Grid1D{f.grid.x0 / p.r, f.grid.dx / p.r, f.grid.n};
  dimless.rho = f.rho_tilde / p.rho_bar;
  const Eigen::ArrayXd w = compute_w(dimless, mf);

  const Eigen::Index n = f.grid.n;
  Eigen::ArrayXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (f.rho_tilde[i] <= 0.0 || i == n - 1) {
      v[i] = p.v_star;  // empty cells and the faceless last cell by convention
    } else {
      v[i] = p.v_star * (1.0 + w[i]);
    }
  }
  return v;
}

}  // namespace entroflow
