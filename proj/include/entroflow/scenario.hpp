#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "entroflow/grid.hpp"
#include "entroflow/implicit_scheme.hpp"
#include "entroflow/lwr_av.hpp"

namespace entroflow {

enum class ScenarioKind {
  academic,          // dimensionless model, explicit scheme
  traffic_av,        // dimensional response model via the co-moving frame
  traffic_lwr,       // dimensional baseline via Godunov
  compare_implicit,  // explicit vs implicit difference study
  sweep,             // run a family of configs varying one key
};

std::string to_string(ScenarioKind kind);

// Initial density profile, realized as per-cell averages (5-point Gauss).
struct InitialCondition {
  enum class Kind { quartic, belt, table };
  Kind kind = Kind::quartic;

  // quartic: amplitude (x - eps1)^2 (x - eps2)^2 between the roots, 0 outside
  double eps1 = -0.52, eps2 = 2.52, amplitude = 0.25;

  // belt (dimensional, veh/km over xi in km): zero outside
  // [support_lo, support_hi], cosine ramps of width `ramp` from 0 up to
  // `shoulder`, then from `shoulder` to `peak` at the belt edges, flat at
  // `peak` on [belt_lo, belt_hi]
  double support_lo = 0.0, support_hi = 4.0;
  double belt_lo = 1.5, belt_hi = 2.75;
  double peak = 70.0, shoulder = 10.0, ramp = 0.25;

  // table: explicit per-cell values
  std::vector<double> values;
};

// One fully validated run description.  Times are in the run's native units:
// dimensionless for academic/compare runs, hours for traffic runs (except
// `dt`, which is always in integration units — dimensionless for traffic-av
// since that model is advanced in the co-moving dimensionless frame).
struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::academic;

  // dimensionless model bundle (academic, compare-implicit)
  std::string bundle = "tanh";  // "tanh" | "traffic"
  double c = 1.0, R = 2.0, b = 1.0;
  double M = 0.0;  // density bound for the stability budget; 0 = from IC

  DimensionalParams road;  // traffic kinds

  Grid1D grid{-1.0, 0.04, 100};
  double T = 0.0;
  double dt = 0.0;  // 0 = derive from the stability bounds
  double safety = 0.9;
  bool adaptive_dt = false;
  bool allow_unstable_dt = false;
  bool entropy_each_step = true;

  InitialCondition ic;

  long records = 600;
  std::vector<double> snapshots;  // resolved; native time units
  bool svg = true;
  double support_eps = 1e-6;  // veh/km
  std::string out_dir = "out";

  ImplicitSolverConfig implicit_cfg;
  double implicit_dt = 1e-3;

  std::string sweep_key;
  std::string sweep_kind;
  std::vector<std::string> sweep_values;

  // Manifest body: every key with its effective value, consumption order.
  std::vector<std::pair<std::string, std::string>> effective;
  // Raw input for sweep member expansion.
  std::map<std::string, std::string> raw;
};

// Parse + validate.  Unknown keys, missing required keys, and constraint
// violations all throw ConfigError naming the offender.
ScenarioConfig load_scenario(const std::map<std::string, std::string>& kv);

// Cell averages of the configured profile on the grid; `cap` is the
// exclusive upper density bound (R for dimensionless runs, rho_max for
// dimensional ones).  Errors when the profile leaves [0, cap) or does not
// vanish in the boundary band.  `left_band` relaxes the left-side zero
// requirement for schemes whose left boundary flux vanishes identically
// (the one-directional baseline model).
DensityField build_initial(const InitialCondition& ic, const Grid1D& grid,
                           double cap, bool left_band = true);

// Execute a scenario: create the output directory, write manifest.txt plus
// the CSV/SVG outputs of the kind, and rethrow any module error after
// appending a FAILED marker to the manifest.
void run_scenario(const ScenarioConfig& cfg);

}  // namespace entroflow
