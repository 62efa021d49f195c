#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "entroflow/diagnostics.hpp"
#include "entroflow/errors.hpp"
#include "entroflow/model_functions.hpp"
#include "oracles.hpp"

using namespace entroflow;

namespace {

DensityField field_from(std::initializer_list<double> values, double dx) {
  Eigen::ArrayXd rho(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double v : values) rho[i++] = v;
  return DensityField(Grid1D{0.0, dx, rho.size()}, rho);
}

}  // namespace

TEST_CASE("mass is the cell sum times the width") {
  DensityField f = field_from({0, 0, 0, 1.5, 2.5, 0, 0, 0}, 0.5);
  CHECK(mass(f) == 2.0);
}

TEST_CASE("second entropy matches independent quadrature cell by cell") {
  auto mf = make_tanh_model(1.0, 2.0, 1.0);
  DensityField f = field_from({0, 0, 0, 0.4, 1.1, 1.35, 1.2, 0.9, 0, 0, 0}, 0.04);
  auto kap = [](double r) { return oracles::tanh_kappa(r, 1.0, 2.0); };
  double expect = 0.0;
  for (Eigen::Index i = 0; i < f.grid.n; ++i)
    expect += oracles::quadrature_Q(kap, f.rho[i], 20000);
  expect *= f.grid.dx;
  CHECK(energy_E2(f, mf) == doctest::Approx(expect).epsilon(1e-10));
}

TEST_CASE("first entropy matches a hand-assembled sum") {
  auto mf = make_tanh_model(1.0, 2.0, 1.0);
  DensityField f = field_from({0, 0, 0, 0.4, 1.1, 1.35, 1.2, 0.9, 0, 0, 0}, 0.04);
  auto kap = [](double r) { return oracles::tanh_kappa(r, 1.0, 2.0); };
  auto H = [](double w) {
    return oracles::simpson([](double s) { return std::tanh(s); }, 0.0, w);
  };
  double expect = 0.0;
  for (Eigen::Index i = 0; i + 1 < f.grid.n; ++i) {
    if (f.rho[i] <= 1.0) continue;  // degenerate band contributes nothing
    double slope = (f.rho[i + 1] - f.rho[i]) / f.grid.dx;
    expect += f.rho[i] * H(-kap(f.rho[i]) * slope);
  }
  expect *= f.grid.dx;
  CHECK(energy_E1(f, mf) == doctest::Approx(expect).epsilon(1e-10));
}

TEST_CASE("first entropy is exactly zero on a subcritical field") {
  auto mf = make_tanh_model(1.0, 2.0, 1.0);
  DensityField f = field_from({0, 0, 0, 0.2, 1.0, 0.7, 0, 0, 0}, 0.04);
  CHECK(energy_E1(f, mf) == 0.0);
  CHECK(energy_E2(f, mf) == 0.0);
  CHECK(prop7_residual(f, mf) == 0.0);
}

TEST_CASE("stagnation residual takes the worst face") {
  auto mf = make_tanh_model(1.0, 2.0, 1.0);
  DensityField f = field_from({0, 1.2, 1.4, 0.9, 0}, 0.1);
  double q12 = mf.Qprime(1.2), q14 = mf.Qprime(1.4);
  double expect = std::max({1.2 * std::abs(q12 - q14), 1.4 * q14, 0.0});
  CHECK(prop7_residual(f, mf) == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("collected record mirrors the individual functions") {
  auto mf = make_tanh_model(1.0, 2.0, 1.0);
  DensityField f = field_from({0, 0, 0, 0.4, 1.1, 1.35, 1.2, 0.9, 0, 0, 0}, 0.04);
  DiagnosticsRecord r = collect_diagnostics(2.5, f, mf);
  CHECK(r.t == 2.5);
  CHECK(r.mass == mass(f));
  CHECK(r.E1 == energy_E1(f, mf));
  CHECK(r.E2 == energy_E2(f, mf));
  CHECK(r.sup_residual == prop7_residual(f, mf));
  CHECK(r.rho_min == 0.0);
  CHECK(r.rho_max == 1.35);
}

namespace {

DimensionalTrace uniform_trace(std::initializer_list<double> taus,
                               double rho_value, double v_value) {
  DimensionalTrace tr;
  tr.dxi = 0.25;
  for (double tau : taus) {
    Eigen::ArrayXd rho = Eigen::ArrayXd::Zero(20);
    Eigen::ArrayXd v = Eigen::ArrayXd::Constant(20, v_value);
    for (Eigen::Index i = 5; i <= 10; ++i) rho[i] = rho_value;
    tr.tau.push_back(tau);
    tr.rho.push_back(rho);
    tr.v.push_back(v);
  }
  return tr;
}

}  // namespace

TEST_CASE("mean flow of a uniform block is the pointwise flow") {
  DimensionalTrace tr = uniform_trace({0.0, 0.5, 1.0}, 10.0, 50.0);
  CHECK(mean_flow(tr, 1.0, 1e-6) == doctest::Approx(500.0).epsilon(1e-12));
}

TEST_CASE("mean flow time-averages with the trapezoid rule") {
  // single occupied cell, speed growing linearly in time: s(tau) = 30 tau
  DimensionalTrace tr;
  tr.dxi = 0.5;
  for (double tau : {0.0, 0.5, 1.0}) {
    Eigen::ArrayXd rho = Eigen::ArrayXd::Zero(12);
    rho[6] = 1.0;
    Eigen::ArrayXd v = Eigen::ArrayXd::Constant(12, 30.0 * tau);
    tr.tau.push_back(tau);
    tr.rho.push_back(rho);
    tr.v.push_back(v);
  }
  CHECK(mean_flow(tr, 1.0, 1e-6) == doctest::Approx(15.0).epsilon(1e-12));
}

TEST_CASE("support is the smallest covering interval, gaps included") {
  // cells 4 and 9 occupied: support spans 6 cells even though 4 are empty
  DimensionalTrace tr;
  tr.dxi = 1.0;
  Eigen::ArrayXd rho = Eigen::ArrayXd::Zero(14);
  rho[4] = 8.0;
  rho[9] = 4.0;
  Eigen::ArrayXd v = Eigen::ArrayXd::Constant(14, 10.0);
  tr.tau = {0.0, 1.0};
  tr.rho = {rho, rho};
  tr.v = {v, v};
  // integral = (8 + 4) * 10 * 1.0 = 120 over 6 cells of unit width
  CHECK(mean_flow(tr, 1.0, 1e-6) == doctest::Approx(20.0).epsilon(1e-12));
}

TEST_CASE("mean flow validates coverage and support") {
  DimensionalTrace late = uniform_trace({0.2, 1.0}, 10.0, 50.0);
  CHECK_THROWS_AS(mean_flow(late, 1.0, 1e-6), ConfigError);

  DimensionalTrace short_run = uniform_trace({0.0, 0.8}, 10.0, 50.0);
  CHECK_THROWS_AS(mean_flow(short_run, 1.0, 1e-6), ConfigError);

  DimensionalTrace empty_field = uniform_trace({0.0, 1.0}, 0.0, 50.0);
  CHECK_THROWS_AS(mean_flow(empty_field, 1.0, 1e-6), SolverError);

  DimensionalTrace none;
  CHECK_THROWS_AS(mean_flow(none, 1.0, 1e-6), ConfigError);
}
