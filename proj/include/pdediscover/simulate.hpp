#pragma once

#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

#include "pdediscover/grid.hpp"

namespace pdediscover {

/// Invalid domain, parameters, or an explicit scheme outside its stability region.
class SimulationError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Uniform grid with both endpoints included: dx = (x_max - x_min) / (n_x - 1).
struct SimDomain {
  double x_min = 0.0;
  double x_max = 1.0;
  Eigen::Index n_x = 3;
  double t_min = 0.0;
  double t_max = 1.0;
  Eigen::Index n_t = 3;

  void validate() const;
  double dx() const { return (x_max - x_min) / static_cast<double>(n_x - 1); }
  double dt() const { return (t_max - t_min) / static_cast<double>(n_t - 1); }
  double x(Eigen::Index j) const { return x_min + static_cast<double>(j) * dx(); }
  double t(Eigen::Index i) const { return t_min + static_cast<double>(i) * dt(); }
};

/// u = 4 arctan(sin(t / sqrt 2) / cosh(x / sqrt 2)), a solution of u_tt = u_xx - sin u.
SnapshotGrid sine_gordon_breather(const SimDomain& dom);
SimDomain sine_gordon_default_domain();  // 512 x 256 over [-12.4, 12.4] x [0, 20]

struct FisherParams {
  double alpha = 1.0;
  double beta = 1.0;
  double d = 0.1;
  int substeps = 10;  // explicit steps per stored time step
};

/// Flat top at 1 on [-1, 1] with exp(+-10 (x -+ 1)) flanks.
Eigen::VectorXd fisher_initial_profile(const SimDomain& dom);

/**
 * u_t = alpha u - beta u^2 + d u_xx by forward Euler and 3-point diffusion with
 * mirrored ghost points (zero flux). Starts from fisher_initial_profile unless
 * `initial` is supplied.
 */
SnapshotGrid fisher_solve(const FisherParams& params, const SimDomain& dom,
                          const Eigen::VectorXd* initial = nullptr);
SimDomain fisher_default_domain();  // x in [-6, 6] with dx = 0.06, 1000 steps of 0.01

/// exp(-(x - center)^2)
Eigen::VectorXd gaussian_bump(const SimDomain& dom, double center = 0.0);

/**
 * u_t = -u u_x + nu u_xx with periodic boundaries (period n_x * dx), forward Euler
 * and central differences. substeps = 0 picks the smallest count that keeps
 * nu dt/dx^2 <= 0.4 and max|u| dt/dx <= 0.8 at the internal step.
 */
SnapshotGrid burgers_solve(double nu, const Eigen::VectorXd& initial, const SimDomain& dom, int substeps = 0);
SimDomain burgers_default_domain();  // 256 points on [-8, 8 - dx], t in [0, 10] with 201 snapshots

/// u = 3c sech^2(0.5 sqrt(c/eps) (x - c t - x_offset)), a soliton of u_t = -u u_x - eps u_xxx.
SnapshotGrid kdv_soliton(double c, double eps, double x_offset, const SimDomain& dom);
SimDomain kdv_default_domain();  // 512 x 1001 over [0, 2] x [0, 2]

/// Closed-form u_t + u u_x + eps u_xxx of the soliton at one point.
double kdv_soliton_residual(double c, double eps, double x_offset, double x, double t);

/// Largest |kdv_soliton_residual| over the grid nodes of dom.
double kdv_analytic_residual(double c, double eps, double x_offset, const SimDomain& dom);

// Largest interior residual of the governing equation using 2nd-order central differences.
double sine_gordon_fd_residual(const SnapshotGrid& grid);
// Fisher's initial profile has kinks, so early snapshots carry a short transient;
// `t_from` limits the check to later times.
double fisher_fd_residual(const SnapshotGrid& grid, const FisherParams& params,
                          double t_from = -std::numeric_limits<double>::infinity());
double burgers_fd_residual(const SnapshotGrid& grid, double nu);

}  // namespace pdediscover
