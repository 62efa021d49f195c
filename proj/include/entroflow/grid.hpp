#pragma once

#include <Eigen/Dense>

#include "entroflow/errors.hpp"

namespace entroflow {

// Uniform 1-D grid. Cell i spans [x0 + i*dx, x0 + (i+1)*dx); the stored
// value rho[i] is the cell value located at x_i = x0 + i*dx.
struct Grid1D {
  double x0 = 0.0;
  double dx = 0.0;
  Eigen::Index n = 0;

  double x(Eigen::Index i) const { return x0 + static_cast<double>(i) * dx; }
  double x_end() const { return x0 + static_cast<double>(n) * dx; }

  void validate() const {
    if (!(dx > 0.0)) throw ConfigError("grid: dx > 0 violated");
    if (n < 5) throw ConfigError("grid: n >= 5 violated (need two boundary cells plus interior)");
  }

  bool operator==(const Grid1D& o) const {
    return x0 == o.x0 && dx == o.dx && n == o.n;
  }
};

// Density field on a truncated domain. The two outermost cells act as the
// zero boundary of the infinite lattice; steppers error out if support gets
// within two cells of either end, so the truncation stays exact.
struct DensityField {
  Grid1D grid;
  Eigen::ArrayXd rho;

  DensityField() = default;
  DensityField(const Grid1D& g, Eigen::ArrayXd values)
      : grid(g), rho(std::move(values)) {
    if (rho.size() != grid.n)
      throw ConfigError("DensityField: value count does not match grid.n");
  }

  static DensityField zeros(const Grid1D& g) {
    return DensityField(g, Eigen::ArrayXd::Zero(g.n));
  }
};

}  // namespace entroflow
