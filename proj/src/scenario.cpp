#include "entroflow/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "entroflow/config.hpp"
#include "entroflow/csv.hpp"
#include "entroflow/diagnostics.hpp"
#include "entroflow/errors.hpp"
#include "entroflow/explicit_scheme.hpp"
#include "entroflow/numerics.hpp"
#include "entroflow/svg.hpp"

namespace entroflow {

namespace fs = std::filesystem;

std::string to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::academic: return "academic";
    case ScenarioKind::traffic_av: return "traffic-av";
    case ScenarioKind::traffic_lwr: return "traffic-lwr";
    case ScenarioKind::compare_implicit: return "compare-implicit";
    case ScenarioKind::sweep: return "sweep";
  }
  return "?";
}

namespace {

constexpr double kPi = 3.14159265358979323846;

ScenarioKind kind_from_string(const std::string& s) {
  if (s == "academic") return ScenarioKind::academic;
  if (s == "traffic-av") return ScenarioKind::traffic_av;
  if (s == "traffic-lwr") return ScenarioKind::traffic_lwr;
  if (s == "compare-implicit") return ScenarioKind::compare_implicit;
  if (s == "sweep") return ScenarioKind::sweep;
  throw ConfigError(
      "config: kind must be one of academic, traffic-av, traffic-lwr, "
      "compare-implicit, sweep; got '" + s + "'");
}

std::string time_label(double t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", t);
  return buf;
}

void write_manifest(const ScenarioConfig& cfg,
                    const std::vector<std::string>& computed,
                    const std::string& failed) {
  const fs::path path = fs::path(cfg.out_dir) / "manifest.txt";
  std::ofstream out(path);
  if (!out) throw SolverError("cannot open for writing: " + path.string());
  out << "# effective configuration; this file re-parses as a run config\n";
  for (const auto& [k, v] : cfg.effective) out << k << " = " << v << "\n";
  for (const auto& line : computed) out << "# computed: " << line << "\n";
  if (!failed.empty()) out << "# FAILED: " << failed << "\n";
}

CsvTable diagnostics_table(const std::vector<DiagnosticsRecord>& series) {
  CsvTable t;
  t.header = {"t", "mass", "E1", "E2", "sup_residual", "rho_min", "rho_max"};
  for (const auto& r : series)
    t.rows.push_back(
        {r.t, r.mass, r.E1, r.E2, r.sup_residual, r.rho_min, r.rho_max});
  return t;
}

// Per-step sampling: named snapshots at fixed times plus evenly spaced trace
// ticks.  Feed it every pre-step state, then finish() with the final state so
// snapshots at the horizon and the closing trace sample are taken.
class RunSampler {
 public:
  using SnapshotFn = std::function<void(const std::string& label, double t,
                                        const DensityField& f,
                                        const Eigen::ArrayXd& w)>;
  using TickFn = std::function<void(double t, const DensityField& f,
                                    const Eigen::ArrayXd& w)>;

  RunSampler(std::vector<double> snap_times, std::vector<std::string> labels,
             double T, long ticks, SnapshotFn snap, TickFn tick)
      : snap_t_(std::move(snap_times)),
        labels_(std::move(labels)),
        tick_dt_(ticks > 0 ? T / static_cast<double>(ticks) : 0.0),
        snap_(std::move(snap)),
        tick_(std::move(tick)) {}

  void observe(double t, double dt, const DensityField& f,
               const Eigen::ArrayXd& w) {
    while (next_snap_ < snap_t_.size() &&
           snap_t_[next_snap_] <= t + 0.5 * dt) {
      snap_(labels_[next_snap_], t, f, w);
      ++next_snap_;
    }
    if (tick_ && tick_dt_ > 0.0) {
      while (next_tick_ <= t + 0.5 * dt) {
        tick_(t, f, w);
        last_tick_ = t;
        next_tick_ += tick_dt_;
      }
    }
  }

  void finish(double t_end, const DensityField& f, const Eigen::ArrayXd& w) {
    for (; next_snap_ < snap_t_.size(); ++next_snap_)
      snap_(labels_[next_snap_], t_end, f, w);
    if (tick_ && last_tick_ < t_end) tick_(t_end, f, w);
  }

 private:
  std::vector<double> snap_t_;
  std::vector<std::string> labels_;
  double tick_dt_;
  SnapshotFn snap_;
  TickFn tick_;
  size_t next_snap_ = 0;
  double next_tick_ = 0.0;
  double last_tick_ = -1.0;
};

struct NamedTable {
  std::string label;
  CsvTable table;
};

void write_profiles(const std::string& out_dir,
                    const std::vector<NamedTable>& profiles) {
  for (const auto& p : profiles)
    write_csv((fs::path(out_dir) / ("profiles_" + p.label + ".csv")).string(),
              p.table);
}

void plot_profiles(const std::string& out_dir, const std::string& title,
                   const std::string& x_label, const std::string& y_label,
                   const std::vector<NamedTable>& profiles, int x_col,
                   int y_col) {
  std::vector<PlotSeries> series;
  for (const auto& p : profiles) {
    PlotSeries s;
    s.name = "t=" + p.label;
    for (const auto& row : p.table.rows) {
      s.x.push_back(row[x_col]);
      s.y.push_back(row[y_col]);
    }
    series.push_back(std::move(s));
  }
  write_svg_plot((fs::path(out_dir) / "plot_profiles.svg").string(), title,
                 x_label, y_label, series);
}

// ---------------------------------------------------------------------------
// initial conditions

double quartic_value(const InitialCondition& ic, double x) {
  if (x <= ic.eps1 || x >= ic.eps2) return 0.0;
  const double u = x - ic.eps1, v = x - ic.eps2;
  return ic.amplitude * u * u * v * v;
}

double cosine_ramp(double u) { return 0.5 * (1.0 - std::cos(kPi * u)); }

double belt_value(const InitialCondition& ic, double x) {
  if (x <= ic.support_lo || x >= ic.support_hi) return 0.0;
  const double s = ic.shoulder, p = ic.peak, r = ic.ramp;
  if (x < ic.support_lo + r) return s * cosine_ramp((x - ic.support_lo) / r);
  if (x < ic.belt_lo - r) return s;
  if (x < ic.belt_lo) return s + (p - s) * cosine_ramp((x - ic.belt_lo + r) / r);
  if (x <= ic.belt_hi) return p;
  if (x < ic.belt_hi + r) return p + (s - p) * cosine_ramp((x - ic.belt_hi) / r);
  if (x < ic.support_hi - r) return s;
  return s * cosine_ramp((ic.support_hi - x) / r);
}

void check_belt_breakpoints(const InitialCondition& ic) {
  if (!(ic.ramp > 0.0)) throw ConfigError("ic.ramp > 0 violated");
  if (!(ic.shoulder >= 0.0)) throw ConfigError("ic.shoulder >= 0 violated");
  if (!(ic.peak >= ic.shoulder))
    throw ConfigError("ic.peak >= ic.shoulder violated");
  const bool ordered = ic.support_lo + ic.ramp <= ic.belt_lo - ic.ramp &&
                       ic.belt_lo <= ic.belt_hi &&
                       ic.belt_hi + ic.ramp <= ic.support_hi - ic.ramp;
  if (!ordered)
    throw ConfigError(
        "ic belt breakpoints out of order (need support_lo + ramp <= belt_lo "
        "- ramp <= belt_hi + ramp <= support_hi - ramp)");
}

}  // namespace

DensityField build_initial(const InitialCondition& ic, const Grid1D& grid,
                           double cap, bool left_band) {
  grid.validate();
  if (!(cap > 0.0)) throw ConfigError("build_initial: cap > 0 violated");

  DensityField f;
  f.grid = grid;
  f.rho.resize(grid.n);

  switch (ic.kind) {
    case InitialCondition::Kind::table:
      if (static_cast<Eigen::Index>(ic.values.size()) != grid.n)
        throw ConfigError(
            "ic.values holds " + std::to_string(ic.values.size()) +
            " entries for a grid of " + std::to_string(grid.n) + " cells");
      for (Eigen::Index i = 0; i < grid.n; ++i) f.rho[i] = ic.values[i];
      break;
    case InitialCondition::Kind::quartic: {
      if (!(ic.eps1 < ic.eps2))
        throw ConfigError("ic.eps1 < ic.eps2 violated");
      if (!(ic.amplitude >= 0.0))
        throw ConfigError("ic.amplitude >= 0 violated");
      for (Eigen::Index i = 0; i < grid.n; ++i) {
        const double a = grid.x(i);
        f.rho[i] = gauss5([&](double x) { return quartic_value(ic, x); }, a,
                          a + grid.dx) /
                   grid.dx;
      }
      break;
    }
    case InitialCondition::Kind::belt: {
      check_belt_breakpoints(ic);
      for (Eigen::Index i = 0; i < grid.n; ++i) {
        const double a = grid.x(i);
        f.rho[i] = gauss5([&](double x) { return belt_value(ic, x); }, a,
                          a + grid.dx) /
                   grid.dx;
      }
      break;
    }
  }

  const double band_tol = 1e-12 * std::max(1.0, cap);
  for (Eigen::Index i = 0; i < grid.n; ++i) {
    const double v = f.rho[i];
    if (!std::isfinite(v) || v < 0.0)
      throw ConfigError("initial condition negative or non-finite at cell " +
                        std::to_string(i));
    if (v >= cap)
      throw ConfigError("initial condition reaches the density bound " +
                        std::to_string(cap) + " at cell " + std::to_string(i));
  }
  std::vector<Eigen::Index> band = {grid.n - 3, grid.n - 2, grid.n - 1};
  if (left_band) {
    band.push_back(0);
    band.push_back(1);
    band.push_back(2);
  }
  for (Eigen::Index i : band) {
    if (std::abs(f.rho[i]) > band_tol)
      throw ConfigError(
          "initial condition must vanish in the three boundary cells on each "
          "side (cell " + std::to_string(i) + " holds " +
          std::to_string(f.rho[i]) + "); enlarge the grid");
  }
  return f;
}

// ---------------------------------------------------------------------------
// config loading

ScenarioConfig load_scenario(const std::map<std::string, std::string>& kv) {
  ConfigReader r(kv);
  ScenarioConfig cfg;
  cfg.raw = kv;

  const std::string kind_s = r.require_string("kind");
  if (kind_s.empty() && !r.has("time.T")) r.require_double("time.T");
  r.check_required();
  cfg.kind = kind_from_string(kind_s);

  const bool dimensionless = cfg.kind == ScenarioKind::academic ||
                             cfg.kind == ScenarioKind::compare_implicit;
  const bool traffic = cfg.kind == ScenarioKind::traffic_av ||
                       cfg.kind == ScenarioKind::traffic_lwr;

  if (cfg.kind == ScenarioKind::sweep) {
    cfg.sweep_key = r.require_string("sweep.key");
    cfg.sweep_values = r.get_string_list("sweep.values");
    cfg.sweep_kind = r.get_string("sweep.kind",
                                  cfg.sweep_key == "kind" ? "" : "academic");
    cfg.out_dir = r.get_string("output.dir", "out");
    r.check_required();
    if (cfg.sweep_values.empty())
      throw ConfigError("config: sweep.values must list at least one value");
    if (cfg.sweep_key == "kind" && !cfg.sweep_kind.empty())
      throw ConfigError(
          "config: sweep.kind conflicts with sweeping the key 'kind'");
    // Remaining keys form the member template; members validate them.
    for (const auto& [key, value] : kv) r.pass_through(key);
    cfg.effective = r.effective();
    return cfg;
  }

  if (dimensionless) {
    cfg.bundle = r.get_string("model.bundle", "tanh");
    if (cfg.bundle != "tanh" && cfg.bundle != "traffic")
      throw ConfigError("config: model.bundle must be tanh or traffic");
    cfg.c = r.get_double("model.c", 1.0);
    cfg.R = r.get_double("model.R", 2.0);
    cfg.b = r.get_double("model.b", 1.0);
    cfg.M = r.get_double("model.M", 1.4);
    cfg.grid.x0 = r.get_double("grid.x0", -1.0);
    cfg.grid.dx = r.get_double("grid.dx", 0.04);
    cfg.grid.n = r.get_long("grid.n", 100);
  } else if (traffic) {
    cfg.road.v_star = r.get_double("road.v_star", 70.0);
    cfg.road.v_max = r.get_double("road.v_max", 110.0);
    cfg.road.v_f = r.get_double("road.v_f", 102.0);
    cfg.road.rho_c = r.get_double("road.rho_c", 33.3);
    cfg.road.rho_max = r.get_double("road.rho_max", 180.0);
    cfg.road.rho_bar = r.get_double("road.rho_bar", 31.0);
    cfg.road.a = r.get_double("road.a", 2.34);
    cfg.road.r = r.get_double("road.r", 1.0);
    cfg.road.c = r.get_double("road.c", 40.0);
    const bool av = cfg.kind == ScenarioKind::traffic_av;
    cfg.grid.x0 = r.get_double("grid.x0", av ? -3.0 : 0.0);
    cfg.grid.dx = r.get_double("grid.dx", 0.05);
    cfg.grid.n = r.get_long("grid.n", av ? 240 : 2400);
    cfg.support_eps = r.get_double("support_eps", 1e-6);
  }

  cfg.T = r.require_double("time.T");
  cfg.dt = r.get_double("time.dt", 0.0);
  cfg.safety = r.get_double("time.safety", 0.9);
  cfg.adaptive_dt =
      r.get_bool("time.adaptive", cfg.kind == ScenarioKind::traffic_av);
  cfg.allow_unstable_dt = r.get_bool("time.allow_unstable_dt", false);
  cfg.entropy_each_step =
      r.get_bool("checks.entropy_each_step", dimensionless);

  const std::string ic_kind =
      r.get_string("ic.kind", dimensionless ? "quartic" : "belt");
  if (ic_kind == "quartic") {
    cfg.ic.kind = InitialCondition::Kind::quartic;
    cfg.ic.eps1 = r.get_double("ic.eps1", -0.52);
    cfg.ic.eps2 = r.get_double("ic.eps2", 2.52);
    cfg.ic.amplitude = r.get_double("ic.amplitude", 0.25);
  } else if (ic_kind == "belt") {
    cfg.ic.kind = InitialCondition::Kind::belt;
    cfg.ic.support_lo = r.get_double("ic.support_lo", 0.0);
    cfg.ic.support_hi = r.get_double("ic.support_hi", 4.0);
    cfg.ic.belt_lo = r.get_double("ic.belt_lo", 1.5);
    cfg.ic.belt_hi = r.get_double("ic.belt_hi", 2.75);
    cfg.ic.peak = r.get_double("ic.peak", 70.0);
    cfg.ic.shoulder = r.get_double("ic.shoulder", 10.0);
    cfg.ic.ramp = r.get_double("ic.ramp", 0.25);
  } else if (ic_kind == "table") {
    cfg.ic.kind = InitialCondition::Kind::table;
    cfg.ic.values = r.get_double_list("ic.values", {});
    if (cfg.ic.values.empty())
      throw ConfigError("config: ic.kind = table requires ic.values");
    if (static_cast<Eigen::Index>(cfg.ic.values.size()) != cfg.grid.n)
      throw ConfigError("config: ic.values holds " +
                        std::to_string(cfg.ic.values.size()) +
                        " entries but the grid has " +
                        std::to_string(cfg.grid.n) + " cells");
  } else {
    throw ConfigError("config: ic.kind must be quartic, belt, or table");
  }

  cfg.records = r.get_long("output.records", 600);
  r.check_required();
  if (!(cfg.T > 0.0)) throw ConfigError("config: time.T > 0 violated");
  if (cfg.dt < 0.0) throw ConfigError("config: time.dt >= 0 violated");
  if (!(cfg.safety > 0.0 && cfg.safety <= 1.0))
    throw ConfigError("config: time.safety in (0, 1] violated");
  if (cfg.records < 1)
    throw ConfigError("config: output.records >= 1 violated");

  if (cfg.kind != ScenarioKind::compare_implicit) {
    std::vector<double> dflt;
    for (int i = 0; i <= 5; ++i) dflt.push_back(cfg.T * i / 5.0);
    cfg.snapshots = r.get_double_list("output.snapshots", dflt);
    for (double s : cfg.snapshots)
      if (!(s >= 0.0 && s <= cfg.T))
        throw ConfigError("config: output.snapshots must lie in [0, T]");
    std::sort(cfg.snapshots.begin(), cfg.snapshots.end());
  } else {
    cfg.implicit_dt = r.get_double("implicit.dt", 1e-3);
    cfg.implicit_cfg.tol = r.get_double("implicit.tol", 1e-10);
    cfg.implicit_cfg.max_iters =
        static_cast<int>(r.get_long("implicit.max_iters", 500));
    cfg.implicit_cfg.damping = r.get_double("implicit.damping", 1.0);
    if (!(cfg.implicit_dt > 0.0))
      throw ConfigError("config: implicit.dt > 0 violated");
  }

  cfg.svg = r.get_bool("output.svg", true);
  cfg.out_dir = r.get_string("output.dir", "out");

  try {
    cfg.grid.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  r.reject_unknown();
  cfg.effective = r.effective();
  return cfg;
}

// ---------------------------------------------------------------------------
// per-kind runners

namespace {

void append_bound_lines(const RunResult& res,
                        std::vector<std::string>& computed) {
  computed.push_back("dt_initial = " + format_double(res.dt_initial));
  computed.push_back("dt_last = " + format_double(res.dt_last));
  computed.push_back("cfl_bound = " + format_double(res.cfl_bound));
  computed.push_back("entropy_bound = " + format_double(res.entropy_bound));
  computed.push_back("cfl_margin = " +
                     format_double(res.dt_initial / res.cfl_bound));
  computed.push_back(
      "entropy_margin = " +
      format_double(res.dt_initial / res.entropy_bound));
  computed.push_back("steps = " + std::to_string(res.steps));
  computed.push_back("t_end = " + format_double(res.t_end));
  computed.push_back("entropy_bound_ok = " +
                     std::string(res.entropy_bound_ok ? "true" : "false"));
  computed.push_back("entropy_violations = " +
                     std::to_string(res.entropy_violations));
}

RunOptions base_run_options(const ScenarioConfig& cfg) {
  RunOptions opt;
  opt.dt = cfg.dt;
  opt.safety = cfg.safety;
  opt.adaptive_dt = cfg.adaptive_dt;
  opt.allow_unstable_dt = cfg.allow_unstable_dt;
  opt.records = static_cast<int>(cfg.records);
  opt.entropy_check_each_step = cfg.entropy_each_step;
  return opt;
}

void run_academic(const ScenarioConfig& cfg,
                  std::vector<std::string>& computed) {
  const ModelFunctions mf = cfg.bundle == "tanh"
                                ? make_tanh_model(cfg.c, cfg.R, cfg.b)
                                : make_traffic_model(cfg.c, cfg.R, cfg.b);
  const DensityField ic = build_initial(cfg.ic, cfg.grid, cfg.R);

  RunOptions opt = base_run_options(cfg);
  opt.T = cfg.T;
  opt.M = cfg.M;

  std::vector<NamedTable> profiles;
  const auto snapshot = [&](const std::string& label, double,
                            const DensityField& f, const Eigen::ArrayXd& w) {
    CsvTable t;
    t.header = {"x", "rho", "w"};
    for (Eigen::Index i = 0; i < f.grid.n; ++i)
      t.rows.push_back(
          {f.grid.x(i), f.rho[i], i < f.grid.n - 1 ? w[i] : 0.0});
    profiles.push_back({label, std::move(t)});
  };

  std::vector<std::string> labels;
  for (double s : cfg.snapshots) labels.push_back(time_label(s));
  RunSampler sampler(cfg.snapshots, labels, cfg.T, 0, snapshot, nullptr);
  opt.observer = [&](long, double t, double dt, const DensityField& f,
                     const StepWorkspace& ws) {
    sampler.observe(t, dt, f, ws.w);
  };

  const RunResult res = run_explicit(ic, mf, opt);
  sampler.finish(res.t_end, res.final, compute_w(res.final, mf));

  write_csv((fs::path(cfg.out_dir) / "diagnostics.csv").string(),
            diagnostics_table(res.series));
  write_profiles(cfg.out_dir, profiles);
  if (cfg.svg) {
    plot_profiles(cfg.out_dir, "density profiles", "x", "rho", profiles, 0,
                  1);
    PlotSeries e1{"E1", {}, {}}, e2{"E2", {}, {}};
    for (const auto& rec : res.series) {
      e1.x.push_back(rec.t);
      e1.y.push_back(rec.E1);
      e2.x.push_back(rec.t);
      e2.y.push_back(rec.E2);
    }
    write_svg_plot((fs::path(cfg.out_dir) / "plot_energy.svg").string(),
                   "energy functionals", "t", "value", {e1, e2});
  }
  append_bound_lines(res, computed);
  computed.push_back(
      "mass_drift_rel = " +
      format_double(std::abs(res.series.back().mass - res.series.front().mass) /
                    std::max(1e-300, std::abs(res.series.front().mass))));
}

void run_traffic_av(const ScenarioConfig& cfg,
                    std::vector<std::string>& computed) {
  const DimensionalParams& p = cfg.road;
  p.validate();

  const Grid1D xi_grid{cfg.grid.x0 * p.r, cfg.grid.dx * p.r, cfg.grid.n};
  const DensityField belt = build_initial(cfg.ic, xi_grid, p.rho_max);
  const AvFrame frame = av_to_dimensionless({xi_grid, belt.rho}, p);
  const double T_dim = frame.t_of_tau(cfg.T);

  RunOptions opt = base_run_options(cfg);
  opt.T = T_dim;

  DimensionalTrace trace;
  trace.dxi = xi_grid.dx;
  const auto cell_speeds = [&](const DensityField& f,
                               const Eigen::ArrayXd& w) {
    Eigen::ArrayXd v(f.grid.n);
    for (Eigen::Index i = 0; i < f.grid.n; ++i)
      v[i] = (f.rho[i] <= 0.0 || i == f.grid.n - 1)
                 ? p.v_star
                 : p.v_star * (1.0 + w[i]);
    return v;
  };
  const auto tick = [&](double t, const DensityField& f,
                        const Eigen::ArrayXd& w) {
    trace.tau.push_back(frame.tau_of_t(t));
    trace.rho.push_back(f.rho * p.rho_bar);
    trace.v.push_back(cell_speeds(f, w));
  };

  std::vector<NamedTable> profiles;
  const auto snapshot = [&](const std::string& label, double t,
                            const DensityField& f, const Eigen::ArrayXd& w) {
    const double tau = frame.tau_of_t(t);
    const Eigen::ArrayXd v = cell_speeds(f, w);
    CsvTable tab;
    tab.header = {"xi", "rho_veh_km", "v_km_h"};
    for (Eigen::Index i = 0; i < f.grid.n; ++i)
      tab.rows.push_back(
          {frame.xi_of_x(f.grid.x(i), tau), f.rho[i] * p.rho_bar, v[i]});
    profiles.push_back({label, std::move(tab)});
  };

  std::vector<double> snap_t;
  std::vector<std::string> labels;
  for (double tau : cfg.snapshots) {
    snap_t.push_back(frame.t_of_tau(tau));
    labels.push_back(time_label(tau));
  }
  RunSampler sampler(snap_t, labels, T_dim, cfg.records, snapshot, tick);
  opt.observer = [&](long, double t, double dt, const DensityField& f,
                     const StepWorkspace& ws) {
    sampler.observe(t, dt, f, ws.w);
  };

  const RunResult res = run_explicit(frame.field, frame.mf, opt);
  sampler.finish(res.t_end, res.final, compute_w(res.final, frame.mf));

  const double mean = mean_flow(trace, cfg.T, cfg.support_eps);

  write_csv((fs::path(cfg.out_dir) / "diagnostics.csv").string(),
            diagnostics_table(res.series));
  write_profiles(cfg.out_dir, profiles);
  CsvTable mf_table;
  mf_table.header = {"T_hours", "mean_flow_veh_h"};
  mf_table.rows.push_back({cfg.T, mean});
  write_csv((fs::path(cfg.out_dir) / "mean_flow.csv").string(), mf_table);
  if (cfg.svg)
    plot_profiles(cfg.out_dir, "density profiles", "xi [km]", "rho [veh/km]",
                  profiles, 0, 1);

  computed.push_back("T_dimensionless = " + format_double(T_dim));
  computed.push_back("R = " + format_double(p.R()));
  computed.push_back("b = " + format_double(p.b()));
  append_bound_lines(res, computed);
  computed.push_back("mean_flow_veh_h = " + format_double(mean));
}

void run_traffic_lwr(const ScenarioConfig& cfg,
                     std::vector<std::string>& computed) {
  const DimensionalParams& p = cfg.road;
  p.validate();

  const DensityField belt =
      build_initial(cfg.ic, cfg.grid, p.rho_max, /*left_band=*/false);
  DimensionalField f{cfg.grid, belt.rho};

  const double M0 = f.rho_tilde.maxCoeff();
  const double wave = lwr_max_wave_speed(M0, p);
  const double dt =
      cfg.dt > 0.0 ? cfg.dt : lwr_cfl_dt(M0, p, cfg.grid.dx, cfg.safety);
  if (dt > cfg.grid.dx / wave && !cfg.allow_unstable_dt)
    throw ConfigError("config: time.dt exceeds the baseline stability bound " +
                      format_double(cfg.grid.dx / wave));

  DimensionalTrace trace;
  trace.dxi = cfg.grid.dx;
  std::vector<DiagnosticsRecord> series;
  const auto speeds = [&](const Eigen::ArrayXd& rho) {
    Eigen::ArrayXd v(rho.size());
    for (Eigen::Index i = 0; i < rho.size(); ++i)
      v[i] = lwr_speed(rho[i], p);
    return v;
  };
  const auto tick = [&](double tau, const DensityField& g,
                        const Eigen::ArrayXd&) {
    trace.tau.push_back(tau);
    trace.rho.push_back(g.rho);
    trace.v.push_back(speeds(g.rho));
    DiagnosticsRecord rec;
    rec.t = tau;
    KahanSum m;
    for (Eigen::Index i = 0; i < g.grid.n; ++i) m.add(g.rho[i]);
    rec.mass = g.grid.dx * m.value();
    rec.rho_min = g.rho.minCoeff();
    rec.rho_max = g.rho.maxCoeff();
    series.push_back(rec);
  };
  std::vector<NamedTable> profiles;
  const auto snapshot = [&](const std::string& label, double,
                            const DensityField& g, const Eigen::ArrayXd&) {
    CsvTable tab;
    tab.header = {"xi", "rho_veh_km", "v_km_h"};
    const Eigen::ArrayXd v = speeds(g.rho);
    for (Eigen::Index i = 0; i < g.grid.n; ++i)
      tab.rows.push_back({g.grid.x(i), g.rho[i], v[i]});
    profiles.push_back({label, std::move(tab)});
  };

  std::vector<std::string> labels;
  for (double s : cfg.snapshots) labels.push_back(time_label(s));
  RunSampler sampler(cfg.snapshots, labels, cfg.T, cfg.records, snapshot,
                     tick);

  double tau = 0.0;
  long steps = 0;
  while (tau < cfg.T) {
    const double sd = std::min(dt, cfg.T - tau);
    sampler.observe(tau, sd, {f.grid, f.rho_tilde}, Eigen::ArrayXd());
    f = step_lwr(f, p, sd);
    tau += sd;
    ++steps;
  }
  sampler.finish(tau, {f.grid, f.rho_tilde}, Eigen::ArrayXd());

  const double mean = mean_flow(trace, cfg.T, cfg.support_eps);

  write_csv((fs::path(cfg.out_dir) / "diagnostics.csv").string(),
            diagnostics_table(series));
  write_profiles(cfg.out_dir, profiles);
  CsvTable mf_table;
  mf_table.header = {"T_hours", "mean_flow_veh_h"};
  mf_table.rows.push_back({cfg.T, mean});
  write_csv((fs::path(cfg.out_dir) / "mean_flow.csv").string(), mf_table);
  if (cfg.svg)
    plot_profiles(cfg.out_dir, "density profiles", "xi [km]", "rho [veh/km]",
                  profiles, 0, 1);

  computed.push_back("dt_hours = " + format_double(dt));
  computed.push_back("max_wave_speed_km_h = " + format_double(wave));
  computed.push_back("steps = " + std::to_string(steps));
  computed.push_back("mean_flow_veh_h = " + format_double(mean));
}

void run_compare_implicit(const ScenarioConfig& cfg,
                          std::vector<std::string>& computed) {
  const ModelFunctions mf = cfg.bundle == "tanh"
                                ? make_tanh_model(cfg.c, cfg.R, cfg.b)
                                : make_traffic_model(cfg.c, cfg.R, cfg.b);
  const DensityField ic = build_initial(cfg.ic, cfg.grid, cfg.R);

  CompareOptions co;
  co.T = cfg.T;
  co.dt_implicit = cfg.implicit_dt;
  co.dt_explicit = cfg.dt;
  co.safety = cfg.safety;
  co.solver = cfg.implicit_cfg;
  const CompareResult cr = compare_runs(ic, mf, co);

  CsvTable diff;
  diff.header = {"t", "sup_drho", "sup_dw"};
  for (const auto& rec : cr.series)
    diff.rows.push_back({rec.t, rec.sup_drho, rec.sup_dw});
  write_csv((fs::path(cfg.out_dir) / "difference.csv").string(), diff);

  // Reference diagnostics from the explicit trajectory.
  RunOptions opt = base_run_options(cfg);
  opt.T = cfg.T;
  opt.M = cfg.M;
  opt.dt = cr.dt_explicit_used;
  const RunResult res = run_explicit(ic, mf, opt);
  write_csv((fs::path(cfg.out_dir) / "diagnostics.csv").string(),
            diagnostics_table(res.series));

  if (cfg.svg) {
    PlotSeries r{"sup|drho|", {}, {}}, w{"sup|dw|", {}, {}};
    for (const auto& rec : cr.series) {
      r.x.push_back(rec.t);
      r.y.push_back(rec.sup_drho);
      w.x.push_back(rec.t);
      w.y.push_back(rec.sup_dw);
    }
    write_svg_plot((fs::path(cfg.out_dir) / "plot_difference.svg").string(),
                   "scheme difference", "t", "sup-norm difference", {r, w});
  }

  computed.push_back("dt_explicit_used = " +
                     format_double(cr.dt_explicit_used));
  computed.push_back("substeps_per_implicit = " +
                     std::to_string(cr.substeps));
  append_bound_lines(res, computed);
}

void run_sweep(const ScenarioConfig& cfg, std::vector<std::string>& computed) {
  const size_t n = cfg.sweep_values.size();
  std::vector<std::map<std::string, std::string>> member_kv(n);
  std::vector<std::string> member_dir(n);
  for (size_t i = 0; i < n; ++i) {
    auto kv = cfg.raw;
    kv.erase("sweep.key");
    kv.erase("sweep.values");
    kv.erase("sweep.kind");
    kv.erase("output.dir");
    if (cfg.sweep_key == "kind") {
      kv["kind"] = cfg.sweep_values[i];
    } else {
      kv["kind"] = cfg.sweep_kind;
      kv[cfg.sweep_key] = cfg.sweep_values[i];
    }
    member_dir[i] =
        (fs::path(cfg.out_dir) / (cfg.sweep_key + "=" + cfg.sweep_values[i]))
            .string();
    kv["output.dir"] = member_dir[i];
    member_kv[i] = std::move(kv);
  }

  unsigned threads = std::thread::hardware_concurrency();
  if (threads == 0) threads = 1;
  if (const char* env = std::getenv("ENTROFLOW_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1)
      throw ConfigError("ENTROFLOW_THREADS must be a positive integer");
    threads = static_cast<unsigned>(v);
  }
  threads = std::min<unsigned>(threads, static_cast<unsigned>(n));

  std::vector<std::string> status(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<size_t> next{0};
  const auto worker = [&]() {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        run_scenario(load_scenario(member_kv[i]));
        status[i] = "ok";
      } catch (const std::exception& e) {
        status[i] = std::string("FAILED: ") + e.what();
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned i = 0; i + 1 < threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  for (size_t i = 0; i < n; ++i)
    computed.push_back("member " + std::to_string(i) + " (" + cfg.sweep_key +
                       "=" + cfg.sweep_values[i] + "): " + status[i]);

  // Aggregate mean flows when every member produced one.
  bool all_mean = true;
  std::vector<double> means(n);
  for (size_t i = 0; i < n && all_mean; ++i) {
    const fs::path mp = fs::path(member_dir[i]) / "mean_flow.csv";
    if (!fs::exists(mp)) {
      all_mean = false;
      break;
    }
    const CsvTable t = read_csv(mp.string());
    const int col = t.column("mean_flow_veh_h");
    if (col < 0 || t.rows.empty()) {
      all_mean = false;
      break;
    }
    means[i] = t.rows[0][col];
  }
  if (all_mean && n > 0) {
    CsvTable agg;
    agg.header = {"member", "mean_flow_veh_h"};
    for (size_t i = 0; i < n; ++i)
      agg.rows.push_back({static_cast<double>(i), means[i]});
    write_csv((fs::path(cfg.out_dir) / "mean_flow.csv").string(), agg);
  }

  for (size_t i = 0; i < n; ++i)
    if (errors[i]) std::rethrow_exception(errors[i]);
}

}  // namespace

void run_scenario(const ScenarioConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  std::vector<std::string> computed;
  write_manifest(cfg, computed, "");
  try {
    switch (cfg.kind) {
      case ScenarioKind::academic: run_academic(cfg, computed); break;
      case ScenarioKind::traffic_av: run_traffic_av(cfg, computed); break;
      case ScenarioKind::traffic_lwr: run_traffic_lwr(cfg, computed); break;
      case ScenarioKind::compare_implicit:
        run_compare_implicit(cfg, computed);
        break;
      case ScenarioKind::sweep: run_sweep(cfg, computed); break;
    }
  } catch (const std::exception& e) {
    write_manifest(cfg, computed, e.what());
    throw;
  }
  write_manifest(cfg, computed, "");
}

}  // namespace entroflow
