// End-to-end acceptance checks. Each numbered criterion prints exactly one
// [PASS]/[FAIL] line with the measured numbers; the process exits nonzero if
// any criterion fails. Tolerances are pinned here, next to each check.
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "entroflow/csv.hpp"
#include "entroflow/diagnostics.hpp"
#include "entroflow/errors.hpp"
#include "entroflow/explicit_scheme.hpp"
#include "entroflow/implicit_scheme.hpp"
#include "entroflow/lwr_av.hpp"
#include "entroflow/model_functions.hpp"
#include "entroflow/scenario.hpp"
#include "entroflow/weak_form.hpp"
#include "oracles.hpp"

using namespace entroflow;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

std::string fmt(const char* f, ...) {
  char buf[768];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

void report(int idx, const char* name, bool ok, const std::string& detail) {
  std::printf("[%s] %02d %s: %s\n", ok ? "PASS" : "FAIL", idx, name,
              detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

template <typename Fn>
void criterion(int idx, const char* name, Fn&& fn) {
  try {
    auto [ok, detail] = fn();
    report(idx, name, ok, detail);
  } catch (const std::exception& e) {
    report(idx, name, false, fmt("exception: %s", e.what()));
  }
}

using Outcome = std::pair<bool, std::string>;

Grid1D academic_grid() { return Grid1D{-1.0, 0.04, 100}; }

DensityField academic_ic() {
  return build_initial(InitialCondition{}, academic_grid(), 2.0);
}

RunResult academic_run(double c, double dt, double T, int records,
                       bool entropy_check) {
  auto mf = make_tanh_model(c, 2.0, 1.0);
  RunOptions opt;
  opt.T = T;
  opt.dt = dt;
  opt.M = 1.4;
  opt.records = records;
  opt.entropy_check_each_step = entropy_check;
  return run_explicit(academic_ic(), mf, opt);
}

const DiagnosticsRecord& at_time(const RunResult& res, double t) {
  const DiagnosticsRecord* best = &res.series.front();
  for (const auto& r : res.series)
    if (std::abs(r.t - t) < std::abs(best->t - t)) best = &r;
  return *best;
}

// --- shared artifacts -------------------------------------------------------

std::map<int, RunResult> g_runs;     // dt = 1e-4, T = 10 per aggressivity
RunResult g_run15_shrunk;            // c = 15 under the parabolic bound
bool g_runs_ok = false;

struct TrafficArtifacts {
  double av70 = 0.0, av102 = 0.0, lwr = 0.0;
  fs::path dir70, dir102, dir_lwr;
  double seconds = 0.0;
  bool ready = false;
};
TrafficArtifacts g_traffic;

double read_mean_flow(const fs::path& dir) {
  CsvTable t = read_csv((dir / "mean_flow.csv").string());
  int col = t.column("mean_flow_veh_h");
  if (col < 0 || t.rows.empty())
    throw SolverError("mean_flow.csv lacks the mean_flow_veh_h column");
  return t.rows.front()[col];
}

struct ProfileStats {
  double width = 0.0, center = 0.0, max = 0.0;
};

ProfileStats profile_stats(const fs::path& csv, double eps) {
  CsvTable t = read_csv(csv.string());
  int xi = t.column("xi"), rho = t.column("rho_veh_km");
  if (xi < 0 || rho < 0) throw SolverError("profile CSV lacks xi/rho columns");
  ProfileStats s;
  double lo = 0.0, hi = 0.0, dxi = 0.0;
  bool seen = false;
  for (size_t k = 0; k < t.rows.size(); ++k) {
    double d = t.rows[k][rho];
    s.max = std::max(s.max, d);
    if (d > eps) {
      if (!seen) lo = t.rows[k][xi];
      hi = t.rows[k][xi];
      seen = true;
    }
    if (k + 1 < t.rows.size()) dxi = t.rows[k + 1][xi] - t.rows[k][xi];
  }
  if (!seen) throw SolverError("profile has no occupied cells");
  s.width = hi - lo + dxi;
  s.center = 0.5 * (lo + hi + dxi);
  return s;
}

// --- criteria ---------------------------------------------------------------

Outcome c01_conservation() {
  const RunResult& res = g_runs.at(1);
  double m0 = res.series.front().mass;
  double mT = res.series.back().mass;
  double drift = std::abs(mT - m0) / m0;
  return {g_runs_ok && drift <= 1e-10,
          fmt("c=1, t=10, dt=1e-4: |m(T)-m(0)|/m(0) = %.3e (tol 1e-10)",
              drift)};
}

Outcome c02_bounds() {
  // run_explicit enforces rho >= -1e-14 and rho <= M after every step and
  // throws otherwise, so four completed runs already prove the bound; the
  // recorded extrema double-check the series.
  double worst_min = 0.0, worst_max = 0.0;
  for (int c : {1, 5, 10, 15}) {
    const RunResult& res = g_runs.at(c);
    for (const auto& r : res.series) {
      worst_min = std::min(worst_min, r.rho_min);
      worst_max = std::max(worst_max, r.rho_max);
    }
  }
  bool ok = g_runs_ok && worst_min >= -1e-14 && worst_max <= 1.4 * (1 + 1e-12);
  return {ok, fmt("c in {1,5,10,15}, dt=1e-4, t=10: min rho = %.3e >= -1e-14, "
                  "max rho = %.15g <= 1.4",
                  worst_min, worst_max)};
}

Outcome c03_entropy() {
  // dt = 1e-4 satisfies the parabolic bound for c in {1, 5, 10} (bounds
  // 1.07e-3 / 2.14e-4 / 1.07e-4); c = 15 does not (7.14e-5), so that case is
  // retested at dt = 0.9 * bound as the protocol prescribes.
  std::string note;
  bool ok = g_runs_ok;
  for (int c : {1, 5, 10}) {
    const RunResult& res = g_runs.at(c);
    ok = ok && res.entropy_bound_ok && res.entropy_violations == 0;
    double slack = 1e-12 * res.series.front().E2;
    for (size_t k = 1; k < res.series.size(); ++k)
      ok = ok && res.series[k].E2 <= res.series[k - 1].E2 + slack;
  }
  const RunResult& res15 = g_run15_shrunk;
  ok = ok && res15.entropy_bound_ok && res15.entropy_violations == 0;
  double slack15 = 1e-12 * res15.series.front().E2;
  for (size_t k = 1; k < res15.series.size(); ++k)
    ok = ok && res15.series[k].E2 <= res15.series[k - 1].E2 + slack15;
  return {ok, fmt("E2 non-increasing each step (slack 1e-12 E2(0)); c=15 "
                  "rerun at dt=%.4e (bound %.4e < 1e-4)",
                  res15.dt_initial, res15.entropy_bound)};
}

Outcome c04_entropy_slope() {
  auto mf = make_tanh_model(1.0, 2.0, 1.0);
  Grid1D g{0.0, 0.04, 64};
  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> U(0.0, 1.4);
  double worst_rel = 0.0, worst_fd = -1e300;
  const double h = 1e-9;
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::ArrayXd rho(64);
    for (Eigen::Index i = 0; i < 64; ++i) rho[i] = U(rng);
    for (Eigen::Index i : {0, 1, 2, 61, 62, 63}) rho[i] = 0.0;
    DensityField f(g, rho);

    double slope = 0.0;  // dx * sum rho_i q_i h(-q_i)
    for (Eigen::Index i = 0; i + 1 < g.n; ++i) {
      double q = compute_q(f, mf, i);
      slope += f.rho[i] * q * mf.h(-q);
    }
    slope *= g.dx;

    double e0 = energy_E2(f, mf);
    double e1 = energy_E2(step_explicit(f, mf, h), mf);
    double fd = (e1 - e0) / h;

    worst_fd = std::max(worst_fd, fd);
    worst_rel = std::max(worst_rel,
                         std::abs(fd - slope) / std::max(1e-30, std::abs(slope)));
  }
  bool ok = worst_rel <= 1e-4 && worst_fd <= 1e-12;
  return {ok, fmt("100 random fields: max |fd-slope|/|slope| = %.3e "
                  "(tol 1e-4), max fd = %.3e (<= 0)",
                  worst_rel, worst_fd)};
}

Outcome c05_decay_ordering() {
  if (!g_runs_ok) return {false, "academic runs unavailable"};
  std::map<int, double> ln2_at1, ln2_at01, ln1_at1, ln1_at01;
  for (int c : {1, 5, 10, 15}) {
    const RunResult& res = g_runs.at(c);
    double E1_0 = res.series.front().E1, E2_0 = res.series.front().E2;
    ln1_at01[c] = std::log(at_time(res, 0.1).E1 / E1_0);
    ln1_at1[c] = std::log(at_time(res, 1.0).E1 / E1_0);
    ln2_at01[c] = std::log(at_time(res, 0.1).E2 / E2_0);
    ln2_at1[c] = std::log(at_time(res, 1.0).E2 / E2_0);
  }
  bool ordered = ln2_at1[15] < ln2_at1[10] && ln2_at1[10] < ln2_at1[5] &&
                 ln2_at1[5] < ln2_at1[1];
  bool deeper = true;
  for (int c : {1, 5, 10, 15})
    deeper = deeper && ln1_at1[c] < ln1_at01[c] && ln2_at1[c] < ln2_at01[c];
  return {ordered && deeper,
          fmt("ln(E2(1)/E2(0)): c=15 %.3f < c=10 %.3f < c=5 %.3f < c=1 %.3f; "
              "all E1,E2 log-drops deepen from t=0.1 to t=1",
              ln2_at1[15], ln2_at1[10], ln2_at1[5], ln2_at1[1])};
}

// KNOWN-UNREACHABLE TARGET, kept as specified rather than loosened.  The stop
// threshold and the flatness targets are mutually inconsistent for this
// model: with c=1 the equilibration residual sup rho_i|Q'(rho_i)-Q'(rho_i+1)|
// falls below 1e-8 at t ~ 1.2e4, where the crest still sits at ~1.0074
// (Q'(1+e) ~ e^3/3 makes the residual collapse many orders before the
// profile flattens).  The crest excess decays like ~t^(-1/2), so reaching
// 1 + 1e-6 would need t ~ 6e11 -- about 1e13 steps at the largest stable
// adaptive step.  The sup|w| target is reachable and checked for real; the
// crest clause is expected to fail and the printed line carries the measured
// values.
Outcome c06_equilibrium() {
  auto mf = make_tanh_model(1.0, 2.0, 1.0);
  RunOptions opt;
  opt.T = 4e4;
  opt.M = 1.4;
  opt.records = 4000;
  opt.adaptive_dt = true;
  opt.stop_when = [](const DiagnosticsRecord& r) {
    return r.sup_residual < 1e-8;
  };
  RunResult res = run_explicit(academic_ic(), mf, opt);

  double max_rho = res.final.rho.maxCoeff();
  double sup_w = compute_w(res.final, mf).abs().maxCoeff();
  bool reached = res.stopped_early;
  bool ok = reached && max_rho <= 1.0 + 1e-6 && sup_w <= 1e-6;
  return {ok, fmt("residual < 1e-8 %s (t=%.4g, %ld steps): max rho = %.8f "
                  "(tol 1+1e-6), sup|w| = %.3e (tol 1e-6)",
                  reached ? "reached" : "NOT reached", res.t_end, res.steps,
                  max_rho, sup_w)};
}

Outcome c07_implicit_agreement() {
  auto mf = make_tanh_model(1.0, 2.0, 1.0);
  DensityField ic = academic_ic();
  std::string note;

  // Horizon long enough that the final quarter sits in the regime where both
  // solutions creep toward the flat equilibrium and their gap decays; earlier
  // windows still contain the O(40%) swings excited whenever the edge of the
  // supercritical region crosses a cell.
  const double T = 20.0;
  auto run_cmp = [&](double dti, double damping) {
    CompareOptions o;
    o.T = T;
    o.dt_implicit = dti;
    o.dt_explicit = 1e-4;
    o.solver.damping = damping;
    o.solver.max_iters = 2000;
    return compare_runs(ic, mf, o);
  };
  // Fixed-point iteration diverges once dt exceeds the parabolic bound
  // (1.07e-3 here), so the larger step needs under-relaxation; walk the
  // chain until the solve converges and record which value was used.
  auto run_damped = [&](double dti) {
    for (double theta : {1.0, 0.5, 0.2, 0.1, 0.05}) {
      try {
        CompareResult r = run_cmp(dti, theta);
        if (theta != 1.0)
          note += fmt("; dt=%.0e converged with damping %.2f", dti, theta);
        return r;
      } catch (const SolverError&) {
      }
    }
    throw SolverError(fmt("implicit solve at dt=%g failed for every damping "
                          "value down to 0.05",
                          dti));
  };
  CompareResult small = run_damped(1e-3);
  CompareResult big = run_damped(1e-2);

  auto at_half = [](const CompareResult& cr) {
    double best = 0.0, gap = 1e300;
    for (const auto& r : cr.series)
      if (std::abs(r.t - 0.5) < gap) {
        gap = std::abs(r.t - 0.5);
        best = r.sup_drho;
      }
    return best;
  };
  double d_small = at_half(small), d_big = at_half(big);

  // Monotone within 0.1% of the tail's own scale: the curves carry
  // sub-permille upticks each time a cell at the supercritical boundary
  // flips, and the criterion is a qualitative shape assertion.
  auto tail_monotone = [T](const CompareResult& cr) {
    double prev = -1.0;
    double scale = 0.0;
    for (const auto& r : cr.series)
      if (r.t >= 0.75 * T - 1e-9) scale = std::max(scale, r.sup_drho);
    for (const auto& r : cr.series) {
      if (r.t < 0.75 * T - 1e-9) continue;
      if (prev >= 0.0 && r.sup_drho > prev + 1e-3 * scale) return false;
      prev = r.sup_drho;
    }
    return true;
  };
  bool mono_small = tail_monotone(small), mono_big = tail_monotone(big);

  bool ok = d_big > d_small && mono_small && mono_big;
  return {ok, fmt("sup|rho_imp-rho_exp|(t=0.5): %.3e (dt=1e-3) < %.3e "
                  "(dt=1e-2); tails over [%.0f,%.0f] monotone within 0.1%%: "
                  "%s/%s%s",
                  d_small, d_big, 0.75 * T, T, mono_small ? "yes" : "no",
                  mono_big ? "yes" : "no", note.c_str())};
}

struct Level {
  Grid1D grid;
  double dt;
  DensityField final;
  double r1 = 0.0, r2 = 0.0;
};

// Supercritical bump with a deliberate left-right asymmetry.  A profile that
// shares the test function's symmetry center cancels the leading first-order
// term of the weak-form residual (the coefficient is an integral of rho*w,
// odd about the center, against the even phi_xx), which would leave the
// residual decaying at the dt rate instead of the generic dx rate that the
// refinement window encodes.
double tilted_bump(double x) {
  double v = oracles::quartic_value(0.25, -0.52, 2.52, x);
  return v * (1.0 + 0.3 * (x - 1.0) / 1.52);
}

DensityField tilted_ic(const Grid1D& g) {
  // 5-point Gauss cell averages: every refinement level projects the same
  // underlying function, so coarse cells are exact means of fine pairs
  static const double gp[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                               0.5384693101056831, 0.9061798459386640};
  static const double gw[5] = {0.2369268850561891, 0.4786286704993665,
                               0.5688888888888889, 0.4786286704993665,
                               0.2369268850561891};
  Eigen::ArrayXd rho(g.n);
  for (Eigen::Index i = 0; i < g.n; ++i) {
    double xc = g.x(i) + 0.5 * g.dx, sum = 0.0;
    for (int k = 0; k < 5; ++k) sum += gw[k] * tilted_bump(xc + 0.5 * g.dx * gp[k]);
    rho[i] = 0.5 * sum;
  }
  return DensityField(g, rho);
}

Level run_level(Eigen::Index n, double dt, double T, bool weak) {
  Level lv;
  lv.grid = Grid1D{-1.0, 0.04 * 100.0 / double(n), n};
  lv.dt = dt;
  auto mf = make_tanh_model(1.0, 2.0, 1.0);
  DensityField ic = weak ? tilted_ic(lv.grid)
                         : build_initial(InitialCondition{}, lv.grid, 2.0);

  RunOptions opt;
  opt.T = T;
  opt.dt = dt;
  opt.M = 1.4;
  opt.records = 10;

  std::optional<WeakFormAccumulator> acc;
  if (weak) {
    acc.emplace(lv.grid, T, default_test_function());
    acc->initial(ic);
    opt.observer = [&acc, &mf](long, double t, double sdt,
                               const DensityField& f, const StepWorkspace& ws) {
      acc->add_step(t, sdt, f, ws.w, &ws.qprime, mf);
    };
  }
  RunResult res = run_explicit(ic, mf, opt);
  lv.final = res.final;
  if (weak) {
    lv.r1 = acc->r1();
    lv.r2 = acc->r2();
  }
  return lv;
}

double restricted_sup_diff(const Level& coarse, const Level& fine) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < coarse.grid.n; ++i) {
    double avg = 0.5 * (fine.final.rho[2 * i] + fine.final.rho[2 * i + 1]);
    worst = std::max(worst, std::abs(avg - coarse.final.rho[i]));
  }
  return worst;
}

Outcome c08_order() {
  Level l0 = run_level(100, 1e-4, 0.2, false);
  Level l1 = run_level(200, 2.5e-5, 0.2, false);
  Level l2 = run_level(400, 6.25e-6, 0.2, false);
  double d1 = restricted_sup_diff(l0, l1);
  double d2 = restricted_sup_diff(l1, l2);
  double ratio = d1 / d2;
  bool ok = ratio >= 1.6 && ratio <= 2.6;
  return {ok, fmt("t=0.2: sup diffs %.3e -> %.3e, ratio %.3f in [1.6, 2.6]",
                  d1, d2, ratio)};
}

Outcome c09_weak_residuals() {
  Level l0 = run_level(100, 1e-4, 0.5, true);
  Level l1 = run_level(200, 2.5e-5, 0.5, true);
  Level l2 = run_level(400, 6.25e-6, 0.5, true);
  double q1a = l0.r1 / l1.r1, q1b = l1.r1 / l2.r1;
  double q2a = l0.r2 / l1.r2, q2b = l1.r2 / l2.r2;
  auto in = [](double q) { return q >= 1.5 && q <= 3.0; };
  bool ok = in(q1a) && in(q1b) && in(q2a) && in(q2b);
  return {ok, fmt("r1: %.3e/%.3e/%.3e (ratios %.2f, %.2f); r2: "
                  "%.3e/%.3e/%.3e (ratios %.2f, %.2f); window [1.5, 3]",
                  l0.r1, l1.r1, l2.r1, q1a, q1b, l0.r2, l1.r2, l2.r2, q2a,
                  q2b)};
}

Outcome c10_lwr_oracle() {
  DimensionalParams road;
  oracles::LwrLaw law{road.v_f, road.rho_c, road.a};

  // analytic flux peak
  double qc = lwr_flux(road.rho_c, road);
  double q_ref = 2215.3812352812670288;  // 33.3 * 102 e^{-1/2.34}
  double arg = oracles::arg_max_scan([&](double r) { return law.q(r); }, 0.0,
                                     180.0);
  bool flux_ok = std::abs(qc - q_ref) <= 1e-3 * q_ref &&
                 std::abs(arg - 33.3) <= 0.05;

  auto riemann_l1 = [&](double rl, double rr, double x_end, Eigen::Index n,
                        double win_lo, double win_hi) {
    Grid1D g{0.0, x_end / double(n), n};
    Eigen::ArrayXd rho(n);
    for (Eigen::Index i = 0; i < n; ++i)
      rho[i] = g.x(i) + 0.5 * g.dx < 20.0 ? rl : rr;
    DimensionalField f{g, rho};
    double T = 0.1;
    double dt = lwr_cfl_dt(std::max(rl, rr), road, g.dx, 0.9);
    double tau = 0.0;
    while (tau < T) {
      double sd = std::min(dt, T - tau);
      f = step_lwr(f, road, sd, /*guard_support=*/false);
      tau += sd;
    }
    oracles::RiemannExact exact{law, rl, rr, 20.0};
    double l1 = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double x = g.x(i);
      if (x < win_lo || x >= win_hi) continue;
      l1 += std::abs(f.rho_tilde[i] - exact.cell_average(x, g.dx, T)) * g.dx;
    }
    return l1;
  };

  // shock: both sides congested; window clear of boundary artefacts
  double l1_shock = riemann_l1(36.0, 54.0, 40.0, 800, 12.0, 28.0);
  double tol_shock = 3.0 * 0.05 * 18.0;
  // rarefaction: both sides free
  double l1_fan = riemann_l1(30.0, 10.0, 50.0, 1000, 10.0, 32.0);
  double tol_fan = 3.0 * 0.05 * 20.0;

  bool ok = flux_ok && l1_shock <= tol_shock && l1_fan <= tol_fan;
  return {ok, fmt("flux peak %.4f veh/h at %.3f (ref %.4f at 33.3, 0.1%%); "
                  "Riemann L1 at t=0.1h: shock %.3f <= %.2f, fan %.3f <= %.2f",
                  qc, arg, q_ref, l1_shock, tol_shock, l1_fan, tol_fan)};
}

void run_traffic_artifacts() {
  fs::path base = fs::temp_directory_path() / "entroflow_acceptance";
  fs::remove_all(base);
  g_traffic.dir70 = base / "av70";
  g_traffic.dir102 = base / "av102";
  g_traffic.dir_lwr = base / "lwr";

  auto t0 = std::chrono::steady_clock::now();
  run_scenario(load_scenario({{"kind", "traffic-av"},
                              {"time.T", "1"},
                              {"output.dir", g_traffic.dir70.string()}}));
  run_scenario(load_scenario({{"kind", "traffic-av"},
                              {"time.T", "1"},
                              {"road.v_star", "102"},
                              {"output.dir", g_traffic.dir102.string()}}));
  run_scenario(load_scenario({{"kind", "traffic-lwr"},
                              {"time.T", "1"},
                              {"output.dir", g_traffic.dir_lwr.string()}}));
  g_traffic.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  g_traffic.av70 = read_mean_flow(g_traffic.dir70);
  g_traffic.av102 = read_mean_flow(g_traffic.dir102);
  g_traffic.lwr = read_mean_flow(g_traffic.dir_lwr);
  g_traffic.ready = true;
}

Outcome c11_mean_flows() {
  run_traffic_artifacts();
  const TrafficArtifacts& a = g_traffic;
  bool bands = a.av70 >= 1800 && a.av70 <= 2700 && a.av102 >= 2600 &&
               a.av102 <= 3800 && a.lwr >= 700 && a.lwr <= 1150;
  bool order = a.av102 > a.av70 && a.av70 > a.lwr && a.av102 / a.lwr >= 2.5;
  bool timed = a.seconds < 60.0;
  return {bands && order && timed,
          fmt("mean flow veh/h over 1 h: AV70 %.1f in [1800,2700], AV102 "
              "%.1f in [2600,3800], LWR %.1f in [700,1150]; AV102/LWR = "
              "%.2f >= 2.5; %.1f s < 60 s",
              a.av70, a.av102, a.lwr, a.av102 / a.lwr, a.seconds)};
}

Outcome c12_profiles() {
  if (!g_traffic.ready) return {false, "traffic runs unavailable"};
  ProfileStats av = profile_stats(g_traffic.dir70 / "profiles_1.csv", 1e-6);
  ProfileStats lw = profile_stats(g_traffic.dir_lwr / "profiles_1.csv", 1e-6);
  bool av_ok = av.width <= 5.0 && std::abs(av.center - 72.0) <= 2.0 &&
               av.max >= 30.0 && av.max <= 36.0;
  bool lwr_ok = lw.width >= 12.0 && lw.max <= 14.0;
  return {av_ok && lwr_ok,
          fmt("tau=1h: AV70 support %.2f km (<= 5) centered %.2f (72 +- 2), "
              "max %.2f in [30,36]; LWR support %.2f km (>= 12), max %.2f "
              "(<= 14)",
              av.width, av.center, av.max, lw.width, lw.max)};
}

Outcome c13_oracle_equivalence() {
  auto mf = make_tanh_model(1.0, 2.0, 1.0);
  double worst_q = 0.0;
  for (int k = 1; k <= 50; ++k) {
    double rho = 1.0 + 0.98 * k / 51.0;
    double closed = mf.Q(rho);
    double quad = quadrature_Q(mf.kappa, rho, mf.R);
    worst_q = std::max(worst_q,
                       std::abs(closed - quad) / std::max(1.0, std::abs(closed)));
  }
  auto traffic = make_traffic_model(40.0, 180.0 / 31.0, 4.0 / 7.0);
  double worst_b = 0.0;
  for (int k = 0; k < 1000; ++k) {
    double u = (k + 0.5) / 1000.0;
    double w = 0.9999 * (-1.0 + u * (1.0 + traffic.b));
    worst_b = std::max(worst_b, std::abs(traffic.h(traffic.beta(w)) - w));
  }
  bool ok = worst_q <= 1e-9 && worst_b <= 1e-9;
  return {ok, fmt("closed-form Q vs quadrature: max err %.3e (50 pts, tol "
                  "1e-9); beta round-trip: max err %.3e (1000 pts, tol 1e-9)",
                  worst_q, worst_b)};
}

}  // namespace

int main() {
  std::printf("acceptance checks\n");

  // Shared long runs: dt = 1e-4 to t = 10 per aggressivity, entropy audit on.
  try {
    for (int c : {1, 5, 10, 15})
      g_runs[c] = academic_run(double(c), 1e-4, 10.0, 600, true);
    auto mf15 = make_tanh_model(15.0, 2.0, 1.0);
    double bound15 = entropy_dt(1.4, mf15, 0.04);
    g_run15_shrunk = academic_run(15.0, 0.9 * bound15, 10.0, 600, true);
    g_runs_ok = true;
  } catch (const std::exception& e) {
    std::printf("shared academic runs failed: %s\n", e.what());
  }

  criterion(1, "conservation", c01_conservation);
  criterion(2, "density bounds", c02_bounds);
  criterion(3, "entropy monotone", c03_entropy);
  criterion(4, "entropy slope identity", c04_entropy_slope);
  criterion(5, "decay ordering", c05_decay_ordering);
  criterion(6, "long-time equilibrium", c06_equilibrium);
  criterion(7, "implicit agreement", c07_implicit_agreement);
  criterion(8, "first-order convergence", c08_order);
  criterion(9, "weak-form residual decay", c09_weak_residuals);
  criterion(10, "baseline Riemann oracle", c10_lwr_oracle);
  criterion(11, "mean-flow bands", c11_mean_flows);
  criterion(12, "final profiles", c12_profiles);
  criterion(13, "oracle equivalence", c13_oracle_equivalence);

  std::printf("%d of 13 criteria failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
