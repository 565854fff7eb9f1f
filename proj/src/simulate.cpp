#include "pdediscover/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pdediscover {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

SnapshotGrid make_grid(MatrixXd values, const SimDomain& dom) {
  return SnapshotGrid(std::move(values), dom.dx(), dom.dt(), dom.x_min, dom.t_min, "u");
}

void require(bool ok, const std::string& message) {
  if (!ok) throw SimulationError(message);
}

void check_profile(const VectorXd& profile, const SimDomain& dom) {
  require(profile.size() == dom.n_x, "initial profile length must equal n_x");
  require(profile.allFinite(), "initial profile must be finite");
}

Index wrap(Index j, Index n) { return ((j % n) + n) % n; }

double sech(double z) { return 1.0 / std::cosh(z); }

}  // namespace

void SimDomain::validate() const {
  require(std::isfinite(x_min) && std::isfinite(x_max) && x_max > x_min, "domain needs x_max > x_min");
  require(std::isfinite(t_min) && std::isfinite(t_max) && t_max > t_min, "domain needs t_max > t_min");
  require(n_x >= 3 && n_t >= 3, "domain needs n_x >= 3 and n_t >= 3");
}

SimDomain sine_gordon_default_domain() { return {-12.4, 12.4, 512, 0.0, 20.0, 256}; }

SnapshotGrid sine_gordon_breather(const SimDomain& dom) {
  dom.validate();
  const double r = std::sqrt(2.0);
  MatrixXd u(dom.n_x, dom.n_t);
  for (Index i = 0; i < dom.n_t; ++i) {
    const double s = std::sin(dom.t(i) / r);
    for (Index j = 0; j < dom.n_x; ++j) u(j, i) = 4.0 * std::atan(s / std::cosh(dom.x(j) / r));
  }
  return make_grid(std::move(u), dom);
}

SimDomain fisher_default_domain() { return {-6.0, 6.0, 201, 0.0, 9.99, 1000}; }

VectorXd fisher_initial_profile(const SimDomain& dom) {
  dom.validate();
  VectorXd u0(dom.n_x);
  for (Index j = 0; j < dom.n_x; ++j) {
    const double x = dom.x(j);
    if (x < -1.0) {
      u0(j) = std::exp(10.0 * (x + 1.0));
    } else if (x > 1.0) {
      u0(j) = std::exp(-10.0 * (x - 1.0));
    } else {
      u0(j) = 1.0;
    }
  }
  return u0;
}

SnapshotGrid fisher_solve(const FisherParams& p, const SimDomain& dom, const VectorXd* initial) {
  dom.validate();
  require(std::isfinite(p.alpha) && std::isfinite(p.beta), "alpha and beta must be finite");
  require(p.d >= 0.0 && std::isfinite(p.d), "diffusion coefficient must be nonnegative");
  require(p.substeps >= 1, "substeps must be at least 1");
  const double dx = dom.dx();
  const double h = dom.dt() / p.substeps;
  const double mu = p.d * h / (dx * dx);
  require(mu <= 0.5, "explicit Fisher scheme unstable: d*dt/dx^2 = " + std::to_string(mu) + " > 0.5");

  VectorXd u = initial ? *initial : fisher_initial_profile(dom);
  check_profile(u, dom);
  const Index n = dom.n_x;
  MatrixXd out(n, dom.n_t);
  out.col(0) = u;
  VectorXd next(n);
  for (Index i = 1; i < dom.n_t; ++i) {
    for (int s = 0; s < p.substeps; ++s) {
      for (Index j = 0; j < n; ++j) {
        // Mirror ghost points: u_{-1} = u_1 and u_{n} = u_{n-2}.
        const double left = j == 0 ? u(1) : u(j - 1);
        const double right = j == n - 1 ? u(n - 2) : u(j + 1);
        const double lap = left - 2.0 * u(j) + right;
        next(j) = u(j) + h * (p.alpha * u(j) - p.beta * u(j) * u(j)) + mu * lap;
      }
      u.swap(next);
    }
    require(u.allFinite(), "Fisher integration produced non-finite values");
    out.col(i) = u;
  }
  return make_grid(std::move(out), dom);
}

SimDomain burgers_default_domain() {
  const double dx = 16.0 / 256.0;
  return {-8.0, 8.0 - dx, 256, 0.0, 10.0, 201};
}

VectorXd gaussian_bump(const SimDomain& dom, double center) {
  dom.validate();
  VectorXd u0(dom.n_x);
  for (Index j = 0; j < dom.n_x; ++j) {
    const double z = dom.x(j) - center;
    u0(j) = std::exp(-z * z);
  }
  return u0;
}

SnapshotGrid burgers_solve(double nu, const VectorXd& initial, const SimDomain& dom, int substeps) {
  dom.validate();
  require(nu >= 0.0 && std::isfinite(nu), "viscosity must be nonnegative");
  require(substeps >= 0, "substeps must be nonnegative");
  check_profile(initial, dom);
  const double dx = dom.dx();
  const double dt = dom.dt();
  const double umax = std::max(initial.cwiseAbs().maxCoeff(), 1e-300);
  if (substeps == 0) {
    // The maximum principle keeps max|u| from growing, so the initial bound holds throughout.
    double limit = 0.8 * dx / umax;
    if (nu > 0.0) limit = std::min(limit, 0.4 * dx * dx / nu);
    substeps = static_cast<int>(std::ceil(dt / limit));
  }
  const double h = dt / substeps;
  require(nu * h / (dx * dx) <= 0.5,
          "explicit Burgers scheme unstable: nu*dt/dx^2 = " + std::to_string(nu * h / (dx * dx)));
  require(umax * h / dx <= 1.0, "explicit Burgers scheme unstable: max|u|*dt/dx = " + std::to_string(umax * h / dx));

  const Index n = dom.n_x;
  VectorXd u = initial;
  VectorXd next(n);
  MatrixXd out(n, dom.n_t);
  out.col(0) = u;
  for (Index i = 1; i < dom.n_t; ++i) {
    for (int s = 0; s < substeps; ++s) {
      for (Index j = 0; j < n; ++j) {
        const double left = u(wrap(j - 1, n));
        const double right = u(wrap(j + 1, n));
        const double ux = (right - left) / (2.0 * dx);
        const double uxx = (left - 2.0 * u(j) + right) / (dx * dx);
        next(j) = u(j) + h * (-u(j) * ux + nu * uxx);
      }
      u.swap(next);
    }
    require(u.allFinite(), "Burgers integration produced non-finite values");
    out.col(i) = u;
  }
  return make_grid(std::move(out), dom);
}

SimDomain kdv_default_domain() { return {0.0, 2.0, 512, 0.0, 2.0, 1001}; }

SnapshotGrid kdv_soliton(double c, double eps, double x_offset, const SimDomain& dom) {
  dom.validate();
  require(c > 0.0 && std::isfinite(c), "soliton speed c must be positive");
  require(eps > 0.0 && std::isfinite(eps), "dispersion eps must be positive");
  const double kappa = 0.5 * std::sqrt(c / eps);
  MatrixXd u(dom.n_x, dom.n_t);
  for (Index i = 0; i < dom.n_t; ++i) {
    for (Index j = 0; j < dom.n_x; ++j) {
      const double s = sech(kappa * (dom.x(j) - c * dom.t(i) - x_offset));
      u(j, i) = 3.0 * c * s * s;
    }
  }
  return make_grid(std::move(u), dom);
}

double kdv_soliton_residual(double c, double eps, double x_offset, double x, double t) {
  const double kappa = 0.5 * std::sqrt(c / eps);
  const double z = kappa * (x - c * t - x_offset);
  const double sc = sech(z);
  const double s = sc * sc;  // sech^2
  const double th = std::tanh(z);
  // d/dz sech^2 = -2 s tanh, d^3/dz^3 sech^2 = -2 s tanh (4 - 12 s)
  const double u = 3.0 * c * s;
  const double ux = 3.0 * c * kappa * (-2.0 * s * th);
  const double uxxx = 3.0 * c * kappa * kappa * kappa * (-2.0 * s * th) * (4.0 - 12.0 * s);
  const double ut = -c * ux;
  return ut + u * ux + eps * uxxx;
}

double kdv_analytic_residual(double c, double eps, double x_offset, const SimDomain& dom) {
  dom.validate();
  double worst = 0.0;
  for (Index i = 0; i < dom.n_t; ++i) {
    for (Index j = 0; j < dom.n_x; ++j) {
      worst = std::max(worst, std::abs(kdv_soliton_residual(c, eps, x_offset, dom.x(j), dom.t(i))));
    }
  }
  return worst;
}

double sine_gordon_fd_residual(const SnapshotGrid& g) {
  const MatrixXd& u = g.values();
  const double dx2 = g.dx() * g.dx();
  const double dt2 = g.dt() * g.dt();
  double worst = 0.0;
  for (Index i = 1; i + 1 < g.nt(); ++i) {
    for (Index j = 1; j + 1 < g.nx(); ++j) {
      const double utt = (u(j, i + 1) - 2.0 * u(j, i) + u(j, i - 1)) / dt2;
      const double uxx = (u(j + 1, i) - 2.0 * u(j, i) + u(j - 1, i)) / dx2;
      worst = std::max(worst, std::abs(utt - uxx + std::sin(u(j, i))));
    }
  }
  return worst;
}

double fisher_fd_residual(const SnapshotGrid& g, const FisherParams& p, double t_from) {
  const MatrixXd& u = g.values();
  const double dx2 = g.dx() * g.dx();
  double worst = 0.0;
  for (Index i = 1; i + 1 < g.nt(); ++i) {
    if (g.t(i) < t_from) continue;
    for (Index j = 1; j + 1 < g.nx(); ++j) {
      const double ut = (u(j, i + 1) - u(j, i - 1)) / (2.0 * g.dt());
      const double uxx = (u(j + 1, i) - 2.0 * u(j, i) + u(j - 1, i)) / dx2;
      const double v = u(j, i);
      worst = std::max(worst, std::abs(ut - p.alpha * v + p.beta * v * v - p.d * uxx));
    }
  }
  return worst;
}

double burgers_fd_residual(const SnapshotGrid& g, double nu) {
  const MatrixXd& u = g.values();
  const double dx = g.dx();
  double worst = 0.0;
  for (Index i = 1; i + 1 < g.nt(); ++i) {
    for (Index j = 1; j + 1 < g.nx(); ++j) {
      const double ut = (u(j, i + 1) - u(j, i - 1)) / (2.0 * g.dt());
      const double ux = (u(j + 1, i) - u(j - 1, i)) / (2.0 * dx);
      const double uxx = (u(j + 1, i) - 2.0 * u(j, i) + u(j - 1, i)) / (dx * dx);
      worst = std::max(worst, std::abs(ut + u(j, i) * ux - nu * uxx));
    }
  }
  return worst;
}

}  // namespace pdediscover
