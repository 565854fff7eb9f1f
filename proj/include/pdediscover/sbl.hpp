#pragma once

#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pdediscover/dictionary.hpp"

namespace pdediscover {

/// Numerical failure inside the solver (non-SPD system, divergence, cost increase).
class SolverError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Which factorization compute_weights uses.
enum class WeightRoute {
  automatic,  // dense for n <= kDenseRouteMaxRows, otherwise woodbury
  dense,      // Cholesky of the n x n matrix sigma^2 I + Phi Gamma Phi^T (woodbury if that
              // factorization breaks down numerically)
  woodbury,   // QR of the (n + m) x m matrix [Phi Gamma^(1/2); sigma I]
};

inline constexpr Eigen::Index kDenseRouteMaxRows = 2000;

struct SBLConfig {
  std::optional<double> sigma2;  // nullopt: residual variance of the OLS fit
  double lambda = 1.0;
  double tau = 1e-6;             // stop when cost decrease <= tau * (1 + |cost_0|)
  int max_outer = 100;
  double inner_tol = 1e-10;
  int max_inner = 10000;
  double prune_threshold = 1e-3;  // relative to max |theta| of the normalized solution
  bool normalize_columns = true;
  bool refit_ols = true;
  std::uint64_t seed = 0;
  WeightRoute route = WeightRoute::automatic;
  bool record_iterates = false;
};

/// One outer iteration, kept when SBLConfig::record_iterates is set.
struct SBLIterate {
  Eigen::VectorXd weights_c;  // c used for this step's lasso
  Eigen::VectorXd theta;      // lasso solution
  Eigen::VectorXd gamma;      // |theta| / sqrt(c)
  double cost = 0.0;
};

struct SBLResult {
  Eigen::VectorXd theta;      // original column scaling, after pruning and optional refit
  Eigen::VectorXd raw_theta;  // original scaling, solver output before pruning/refit
  Eigen::VectorXd gamma;      // hyperparameters in the solver's (normalized) coordinates
  Eigen::VectorXd theta_solver;  // solver output in the solver's coordinates
  Eigen::VectorXd column_scales;
  std::vector<Eigen::Index> support;
  std::vector<double> cost_trace;
  bool converged = false;
  int outer_iterations = 0;
  double kkt_residual = 0.0;
  double kkt_tolerance = 0.0;  // 1e-6 * (1 + ||Phi^T y||_inf) in solver coordinates
  double sigma2 = 0.0;
  double lambda = 1.0;
  std::vector<SBLIterate> iterates;
};

struct LassoResult {
  Eigen::VectorXd theta;
  bool converged = false;
  int sweeps = 0;
  double max_violation = 0.0;  // worst subgradient-condition violation at exit
};

/// c_i = Phi_i^T (sigma^2 I + Phi Gamma Phi^T)^{-1} Phi_i.
Eigen::VectorXd compute_weights(const Eigen::MatrixXd& phi, const Eigen::VectorXd& gamma,
                                double sigma2, WeightRoute route = WeightRoute::automatic);

/**
 * Minimizes ||y - Phi theta||^2 + 2 lambda sigma2 sum_i w_i |theta_i| by cyclic
 * coordinate descent with soft-thresholding. Once the active set settles, the
 * sign-constrained stationarity system is solved exactly and accepted when it
 * satisfies the optimality conditions.
 */
LassoResult weighted_lasso(const Eigen::MatrixXd& phi, const Eigen::VectorXd& y,
                           const Eigen::VectorXd& weights, double sigma2, double lambda,
                           const Eigen::VectorXd& warm_start, double tol, int max_inner);

/// Gram form: gram = Phi^T Phi, corr = Phi^T y.
LassoResult weighted_lasso_gram(const Eigen::MatrixXd& gram, const Eigen::VectorXd& corr,
                                const Eigen::VectorXd& weights, double penalty_scale,
                                const Eigen::VectorXd& warm_start, double tol, int max_inner);

/// gamma_i = |theta_i| / sqrt(c_i).
Eigen::VectorXd update_gamma(const Eigen::VectorXd& theta, const Eigen::VectorXd& c);

/// Cost value used for (theta_i != 0, gamma_i = 0) pairs.
inline constexpr double kCostInfinity = std::numeric_limits<double>::infinity();

/**
 * (lambda sigma^2)^-1 ||y - Phi theta||^2 + sum_{gamma_i > 0} theta_i^2 / gamma_i
 * + log det(sigma^2 I + Phi Gamma Phi^T).
 *
 * With lambda = 1 this is the marginal-likelihood cost. For other lambda it is the
 * function that the penalized outer iteration decreases monotonically, and it still
 * satisfies cost >= n log sigma^2. Pairs (theta_i != 0, gamma_i = 0) give kCostInfinity.
 */
double cost(const Eigen::VectorXd& theta, const Eigen::VectorXd& gamma, const Eigen::MatrixXd& phi,
            const Eigen::VectorXd& y, double sigma2, double lambda = 1.0);

/// log det(sigma^2 I_n + Phi Gamma Phi^T) = n log sigma^2 + log det(I_m + sigma^-2 Gamma^(1/2) Phi^T Phi Gamma^(1/2)).
double log_det_marginal(const Eigen::MatrixXd& phi, const Eigen::VectorXd& gamma, double sigma2);

/// Residual variance of the least-squares fit, ||y - Phi theta_ols||^2 / max(1, n - m).
double ols_noise_variance(const Eigen::MatrixXd& phi, const Eigen::VectorXd& y);

/// ols_noise_variance floored at 1e-14 * mean(y^2) (1 when y = 0) so it stays positive.
double auto_noise_variance(const Eigen::MatrixXd& phi, const Eigen::VectorXd& y);

/// Least-squares solution by column-pivoted QR.
Eigen::VectorXd ols(const Eigen::MatrixXd& phi, const Eigen::VectorXd& y);

SBLResult run_sbl(const Eigen::MatrixXd& phi, const Eigen::VectorXd& y, const SBLConfig& config);
SBLResult run_sbl(const Dictionary& dict, const SBLConfig& config);

/**
 * Largest violation of the stationarity conditions
 *   Phi_i^T (Phi theta - y) + lambda sigma2 sqrt(c_i) z_i = 0,  z in d|theta|_1,
 * with c recomputed at gamma. Mismatch in gamma_i = |theta_i| / sqrt(c_i) beyond
 * 1e-8 (relative to 1 + gamma_i) is folded in as well.
 */
double kkt_residual(const Eigen::VectorXd& theta, const Eigen::VectorXd& gamma,
                    const Eigen::MatrixXd& phi, const Eigen::VectorXd& y, double sigma2,
                    double lambda = 1.0);

/// max_i |sigma2 c_i + |theta_i| sqrt(c_i) - 1|; zero at a fixed point of an orthonormal design.
double orthonormal_fixed_point_check(const Eigen::VectorXd& theta_star, const Eigen::VectorXd& c_star,
                                     double sigma2);

struct TermCoefficient {
  std::string name;
  std::complex<double> value;
};

struct CoefficientError {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
  int missing = 0;
  int spurious = 0;
};

/// Relative errors over the true terms (missing term -> 1); names must already be canonical.
CoefficientError coeff_error(const std::vector<TermCoefficient>& estimated,
                             const std::vector<TermCoefficient>& truth);

}  // namespace pdediscover
