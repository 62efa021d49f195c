#include "entroflow/weak_form.hpp"

#include <cmath>
#include <string>

#include "entroflow/errors.hpp"
#include "entroflow/numerics.hpp"

namespace entroflow {

namespace {

double bump(double u) {
  const double d = 1.0 - u * u;
  return d > 0.0 ? std::exp(-1.0 / d) : 0.0;
}

double bump_prime(double u) {
  const double d = 1.0 - u * u;
  if (d <= 0.0) return 0.0;
  return bump(u) * (-2.0 * u / (d * d));
}

}  // namespace

TestFunction make_bump_test_function(double t0, double sigma_t, double x0,
                                     double sigma_x) {
  if (!(sigma_t > 0.0 && sigma_x > 0.0))
    throw ConfigError("test function: sigma_t, sigma_x > 0 violated");
  TestFunction tf;
  tf.t_lo = t0 - sigma_t;
  tf.t_hi = t0 + sigma_t;
  tf.x_lo = x0 - sigma_x;
  tf.x_hi = x0 + sigma_x;
  tf.Bt = [t0, sigma_t](double t) { return bump((t - t0) / sigma_t); };
  tf.Bx = [x0, sigma_x](double x) { return bump((x - x0) / sigma_x); };
  tf.Bt_prime = [t0, sigma_t](double t) {
    return bump_prime((t - t0) / sigma_t) / sigma_t;
  };
  tf.Bx_prime = [x0, sigma_x](double x) {
    return bump_prime((x - x0) / sigma_x) / sigma_x;
  };
  tf.phi = [Bt = tf.Bt, Bx = tf.Bx](double t, double x) {
    return Bt(t) * Bx(x);
  };
  tf.phi_t = [Btp = tf.Bt_prime, Bx = tf.Bx](double t, double x) {
    return Btp(t) * Bx(x);
  };
  tf.phi_x = [Bt = tf.Bt, Bxp = tf.Bx_prime](double t, double x) {
    return Bt(t) * Bxp(x);
  };
  return tf;
}

TestFunction default_test_function() {
  return make_bump_test_function(0.25, 0.2, 1.0, 1.2);
}

void WeakFormAccumulator::add1(double v) {
  const double s = acc1_ + v;
  c1_ += std::abs(acc1_) >= std::abs(v) ? (acc1_ - s) + v : (v - s) + acc1_;
  acc1_ = s;
}

void WeakFormAccumulator::add2(double v) {
  const double s = acc2_ + v;
  c2_ += std::abs(acc2_) >= std::abs(v) ? (acc2_ - s) + v : (v - s) + acc2_;
  acc2_ = s;
}

WeakFormAccumulator::WeakFormAccumulator(const Grid1D& grid, double T_run,
                                         TestFunction phi)
    : grid_(grid), phi_(std::move(phi)) {
  grid_.validate();
  if (!phi_.phi || !phi_.phi_t || !phi_.phi_x)
    throw ConfigError("weak form: test function lacks phi or a derivative");
  if (phi_.t_lo < 0.0 || phi_.t_hi > T_run || phi_.x_lo < grid_.x0 ||
      phi_.x_hi > grid_.x_end())
    throw ConfigError(
        "weak form: test-function support [" + std::to_string(phi_.t_lo) +
        ", " + std::to_string(phi_.t_hi) + "] x [" +
        std::to_string(phi_.x_lo) + ", " + std::to_string(phi_.x_hi) +
        "] exceeds the stored run window");

  // Cells overlapping the spatial support.
  const auto clamp_cell = [&](double x) {
    const double r = std::floor((x - grid_.x0) / grid_.dx);
    return std::max<Eigen::Index>(
        0, std::min<Eigen::Index>(grid_.n - 1, static_cast<Eigen::Index>(r)));
  };
  i_lo_ = clamp_cell(phi_.x_lo);
  i_hi_ = clamp_cell(phi_.x_hi);

  if (phi_.separable()) {
    cell_phi_.setZero(grid_.n);
    cell_phi_x_.setZero(grid_.n);
    for (Eigen::Index i = i_lo_; i <= i_hi_; ++i) {
      const double a = grid_.x(i);
      cell_phi_[i] = gauss3(phi_.Bx, a, a + grid_.dx);
      cell_phi_x_[i] = gauss3(phi_.Bx_prime, a, a + grid_.dx);
    }
  }
}

void WeakFormAccumulator::initial(const DensityField& rho0) {
  if (!(rho0.grid == grid_))
    throw ConfigError("weak form: initial field grid mismatch");
  KahanSum s;
  if (phi_.separable()) {
    const double bt0 = phi_.Bt(0.0);
    if (bt0 != 0.0)
      for (Eigen::Index i = i_lo_; i <= i_hi_; ++i)
        s.add(rho0.rho[i] * bt0 * cell_phi_[i]);
  } else {
    for (Eigen::Index i = i_lo_; i <= i_hi_; ++i) {
      const double a = grid_.x(i);
      s.add(rho0.rho[i] *
            gauss3([&](double x) { return phi_.phi(0.0, x); }, a,
                   a + grid_.dx));
    }
  }
  initial_term_ = s.value();
  initial_seen_ = true;
}

void WeakFormAccumulator::add_step(double t0, double dt, const DensityField& f,
                                   const Eigen::ArrayXd& w,
                                   const Eigen::ArrayXd* qprime,
                                   const ModelFunctions& mf) {
  if (!(f.grid == grid_))
    throw ConfigError("weak form: step field grid mismatch");
  if (w.size() != grid_.n - 1)
    throw ConfigError("weak form: face velocity array has wrong length");
  if (t0 + dt <= phi_.t_lo || t0 >= phi_.t_hi) return;

  const auto face_w = [&](Eigen::Index i) {
    return i < grid_.n - 1 ? w[i] : 0.0;
  };
  const auto cell_qp = [&](Eigen::Index i) {
    return qprime ? (*qprime)[i]
                  : (f.rho[i] <= 1.0 ? 0.0 : mf.Qprime(f.rho[i]));
  };
  // beta(w_i) is the negated face difference of Q' by construction of w_i.
  const auto face_beta = [&](Eigen::Index i) {
    if (i >= grid_.n - 1) return 0.0;
    if (qprime) return (cell_qp(i) - cell_qp(i + 1)) / grid_.dx;
    return w[i] == 0.0 ? 0.0 : mf.beta(w[i]);
  };

  if (phi_.separable()) {
    const double It = gauss3(phi_.Bt, t0, t0 + dt);
    const double Itp = gauss3(phi_.Bt_prime, t0, t0 + dt);
    KahanSum s_wx, s0, s_beta, s_qp;
    for (Eigen::Index i = i_lo_; i <= i_hi_; ++i) {
      s_wx.add(f.rho[i] * face_w(i) * cell_phi_x_[i]);
      s0.add(f.rho[i] * cell_phi_[i]);
      s_beta.add(face_beta(i) * cell_phi_[i]);
      s_qp.add(cell_qp(i) * cell_phi_x_[i]);
    }
    add1(It * s_wx.value() + Itp * s0.value());
    add2(It * (s_beta.value() - s_qp.value()));
    return;
  }

  // Generic path: 3x3 tensor Gauss per space-time rectangle.
  const double ht = 0.5 * dt, mt = t0 + ht;
  for (Eigen::Index i = i_lo_; i <= i_hi_; ++i) {
    const double a = grid_.x(i);
    const double hx = 0.5 * grid_.dx, mx = a + hx;
    double Iphi = 0.0, Iphix = 0.0, Iphit = 0.0;
    for (int jt = 0; jt < 3; ++jt) {
      const double tg = mt + ht * kGauss3Nodes[jt];
      for (int jx = 0; jx < 3; ++jx) {
        const double xg = mx + hx * kGauss3Nodes[jx];
        const double ww = kGauss3Weights[jt] * kGauss3Weights[jx];
        Iphi += ww * phi_.phi(tg, xg);
        Iphix += ww * phi_.phi_x(tg, xg);
        Iphit += ww * phi_.phi_t(tg, xg);
      }
    }
    const double scale = ht * hx;
    Iphi *= scale;
    Iphix *= scale;
    Iphit *= scale;
    add1(f.rho[i] * (face_w(i) * Iphix + Iphit));
    add2(face_beta(i) * Iphi - cell_qp(i) * Iphix);
  }
}

double WeakFormAccumulator::r1() const {
  if (!initial_seen_ && phi_.t_lo <= 0.0)
    throw ConfigError(
        "weak form: test function is active at t = 0 but the initial field "
        "was never supplied");
  return std::abs((acc1_ + c1_) + initial_term_);
}

double WeakFormAccumulator::r2() const { return std::abs(acc2_ + c2_); }

DensityField StoredRun::initial() const {
  if (rho.empty()) throw ConfigError("stored run: empty");
  DensityField f;
  f.grid = grid;
  f.rho = rho.front();
  return f;
}

std::pair<double, double> weak_residuals(const StoredRun& run,
                                         const TestFunction& phi,
                                         const ModelFunctions& mf) {
  const size_t k = run.t.size();
  if (k == 0 || run.dt.size() != k || run.rho.size() != k ||
      run.w.size() != k)
    throw ConfigError("stored run: inconsistent lengths");
  WeakFormAccumulator acc(run.grid, run.t.back() + run.dt.back(), phi);
  acc.initial(run.initial());
  DensityField f;
  f.grid = run.grid;
  for (size_t j = 0; j < k; ++j) {
    f.rho = run.rho[j];
    acc.add_step(run.t[j], run.dt[j], f, run.w[j], nullptr, mf);
  }
  return {acc.r1(), acc.r2()};
}

}  // namespace entroflow
