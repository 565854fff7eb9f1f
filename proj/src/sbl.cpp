#include "pdediscover/sbl.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace pdediscover {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

double soft_threshold(double value, double threshold) {
  if (value > threshold) return value - threshold;
  if (value < -threshold) return value + threshold;
  return 0.0;
}

double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

bool all_finite(const MatrixXd& m) { return m.allFinite(); }

/// Worst violation of 0 in grad_j-subdifferential, where grad = corr - gram * theta.
double subgradient_violation(const VectorXd& theta, const VectorXd& grad, const VectorXd& thresholds) {
  double worst = 0.0;
  for (Index j = 0; j < theta.size(); ++j) {
    double v;
    if (theta(j) != 0.0) {
      v = std::abs(grad(j) - thresholds(j) * sign_of(theta(j)));
    } else {
      v = std::max(0.0, std::abs(grad(j)) - thresholds(j));
    }
    worst = std::max(worst, v);
  }
  return worst;
}

/// theta^T G theta - 2 corr^T theta + 2 sum thresholds |theta| (the objective without ||y||^2).
double lasso_objective(const MatrixXd& gram, const VectorXd& corr, const VectorXd& thresholds,
                       const VectorXd& theta) {
  return theta.dot(gram * theta) - 2.0 * corr.dot(theta) + 2.0 * thresholds.dot(theta.cwiseAbs());
}

/**
 * Solves the stationarity system restricted to the current active set with the
 * current signs held fixed. Returns true and overwrites theta when the solution
 * keeps its signs and the inactive coordinates stay inside their thresholds.
 */
bool polish_active_set(const MatrixXd& gram, const VectorXd& corr, const VectorXd& thresholds,
                       double tol, VectorXd& theta) {
  std::vector<Index> active;
  for (Index j = 0; j < theta.size(); ++j) {
    if (theta(j) != 0.0) active.push_back(j);
  }
  const Index k = static_cast<Index>(active.size());
  VectorXd candidate = VectorXd::Zero(theta.size());
  if (k > 0) {
    MatrixXd g_aa(k, k);
    VectorXd rhs(k);
    for (Index a = 0; a < k; ++a) {
      rhs(a) = corr(active[a]) - thresholds(active[a]) * sign_of(theta(active[a]));
      for (Index b = 0; b < k; ++b) g_aa(a, b) = gram(active[a], active[b]);
    }
    Eigen::LDLT<MatrixXd> ldlt(g_aa);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return false;
    const VectorXd x = ldlt.solve(rhs);
    if (!x.allFinite()) return false;
    if ((g_aa * x - rhs).lpNorm<Eigen::Infinity>() > tol) return false;
    for (Index a = 0; a < k; ++a) {
      if (sign_of(x(a)) != sign_of(theta(active[a]))) return false;
      candidate(active[a]) = x(a);
    }
  }
  const VectorXd grad = corr - gram * candidate;
  if (subgradient_violation(candidate, grad, thresholds) > tol) return false;
  theta = candidate;
  return true;
}

void check_weight_inputs(const VectorXd& gamma, double sigma2, Index m) {
  if (gamma.size() != m) throw std::invalid_argument("gamma length does not match dictionary columns");
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw std::invalid_argument("sigma2 must be positive");
  if (!gamma.allFinite() || (gamma.array() < 0.0).any()) {
    throw std::invalid_argument("gamma must be finite and nonnegative");
  }
}

std::vector<std::string> generic_names(Index m) {
  std::vector<std::string> names;
  for (Index j = 0; j < m; ++j) names.push_back("column " + std::to_string(j));
  return names;
}

void validate_config(const SBLConfig& c) {
  auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
  if (c.sigma2 && !positive(*c.sigma2)) throw std::invalid_argument("sigma2 must be positive");
  if (!positive(c.lambda)) throw std::invalid_argument("lambda must be positive");
  if (!positive(c.tau)) throw std::invalid_argument("tau must be positive");
  if (!positive(c.inner_tol)) throw std::invalid_argument("inner_tol must be positive");
  if (c.max_outer < 1) throw std::invalid_argument("max_outer must be at least 1");
  if (c.max_inner < 1) throw std::invalid_argument("max_inner must be at least 1");
  if (!(c.prune_threshold >= 0.0) || !std::isfinite(c.prune_threshold)) {
    throw std::invalid_argument("prune_threshold must be nonnegative");
  }
}

}  // namespace

namespace {

/**
 * Woodbury route. With A = Phi_S Gamma_S^(1/2) over the active set S and the QR
 * factorization [A; sigma I] = Q R (so R^T R = sigma^2 I + A^T A),
 *   c_i = sigma^-2 ||(I - Q Q^T) [Phi_i; 0]||^2.
 * The projection residual is read off the trailing rows of Q^T [Phi_i; 0], which
 * stays accurate when sigma^2 is tiny next to gamma and avoids the cancellation of
 * the textbook ||Phi_i||^2 - Phi_i^T A (sigma^2 I + A^T A)^{-1} A^T Phi_i.
 */
VectorXd weights_woodbury(const MatrixXd& phi, const VectorXd& gamma, double sigma2) {
  const Index n = phi.rows();
  const Index m = phi.cols();
  std::vector<Index> active;
  for (Index i = 0; i < m; ++i) {
    if (gamma(i) > 0.0) active.push_back(i);
  }
  const Index k = static_cast<Index>(active.size());
  if (k == 0) return phi.colwise().squaredNorm().transpose() / sigma2;
  const double sigma = std::sqrt(sigma2);
  MatrixXd stacked = MatrixXd::Zero(n + k, k);
  for (Index a = 0; a < k; ++a) {
    stacked.col(a).head(n) = phi.col(active[a]) * std::sqrt(gamma(active[a]));
    stacked(n + a, a) = sigma;
  }
  Eigen::HouseholderQR<MatrixXd> qr(stacked);
  MatrixXd rhs = MatrixXd::Zero(n + k, m);
  rhs.topRows(n) = phi;
  rhs.applyOnTheLeft(qr.householderQ().transpose());
  VectorXd c = rhs.bottomRows(n).colwise().squaredNorm().transpose() / sigma2;
  if (!c.allFinite()) throw SolverError("weight computation produced non-finite values");
  return c;
}

}  // namespace

Eigen::VectorXd compute_weights(const MatrixXd& phi, const VectorXd& gamma, double sigma2,
                                WeightRoute route) {
  const Index n = phi.rows();
  const Index m = phi.cols();
  check_weight_inputs(gamma, sigma2, m);
  if (route == WeightRoute::automatic) {
    route = n <= kDenseRouteMaxRows ? WeightRoute::dense : WeightRoute::woodbury;
  }
  if (route == WeightRoute::woodbury) return weights_woodbury(phi, gamma, sigma2);

  const MatrixXd scaled = phi * gamma.cwiseSqrt().asDiagonal();
  MatrixXd sigma = MatrixXd::Identity(n, n) * sigma2;
  sigma.selfadjointView<Eigen::Lower>().rankUpdate(scaled);
  Eigen::LLT<MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) {
    // Exactly SPD, but sigma^2 may be negligible next to Phi Gamma Phi^T in floating point.
    return weights_woodbury(phi, gamma, sigma2);
  }
  const MatrixXd whitened = llt.matrixL().solve(phi);
  VectorXd c = whitened.colwise().squaredNorm().transpose();
  if (!c.allFinite()) throw SolverError("weight computation produced non-finite values");
  return c;
}

LassoResult weighted_lasso_gram(const MatrixXd& gram, const VectorXd& corr, const VectorXd& weights,
                                double penalty_scale, const VectorXd& warm_start, double tol,
                                int max_inner) {
  const Index m = gram.rows();
  if (gram.cols() != m || corr.size() != m || weights.size() != m || warm_start.size() != m) {
    throw std::invalid_argument("weighted_lasso: dimension mismatch");
  }
  if (!weights.allFinite() || (weights.array() < 0.0).any()) {
    throw std::invalid_argument("weighted_lasso: weights must be finite and nonnegative");
  }
  if (!(penalty_scale >= 0.0) || !(tol > 0.0) || max_inner < 1) {
    throw std::invalid_argument("weighted_lasso: invalid penalty, tolerance or iteration limit");
  }

  const VectorXd thresholds = penalty_scale * weights;
  const double kkt_tol = tol * (1.0 + corr.lpNorm<Eigen::Infinity>());

  VectorXd theta = warm_start;
  for (Index j = 0; j < m; ++j) {
    if (gram(j, j) <= 0.0) theta(j) = 0.0;
  }
  VectorXd grad = corr - gram * theta;

  LassoResult result;
  result.theta = theta;
  double best_objective = lasso_objective(gram, corr, thresholds, theta);

  std::vector<bool> previous_active(static_cast<std::size_t>(m), false);
  for (int sweep = 1; sweep <= max_inner; ++sweep) {
    double max_change = 0.0;
    for (Index j = 0; j < m; ++j) {
      const double gjj = gram(j, j);
      if (gjj <= 0.0) continue;
      const double rho = grad(j) + gjj * theta(j);
      const double updated = soft_threshold(rho, thresholds(j)) / gjj;
      const double delta = updated - theta(j);
      if (delta != 0.0) {
        grad.noalias() -= gram.col(j) * delta;
        theta(j) = updated;
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    if (!theta.allFinite()) throw SolverError("coordinate descent diverged");
    grad = corr - gram * theta;  // refresh against accumulated rounding

    const double objective = lasso_objective(gram, corr, thresholds, theta);
    if (objective <= best_objective) {
      best_objective = objective;
      result.theta = theta;
    }
    result.sweeps = sweep;

    double violation = subgradient_violation(theta, grad, thresholds);
    if (max_change <= tol && violation <= kkt_tol) {
      result.theta = theta;
      result.converged = true;
      result.max_violation = violation;
      return result;
    }

    // Stable active set: try the exact solve on it.
    bool same_active = true;
    for (Index j = 0; j < m; ++j) {
      const bool active = theta(j) != 0.0;
      if (active != previous_active[static_cast<std::size_t>(j)]) same_active = false;
      previous_active[static_cast<std::size_t>(j)] = active;
    }
    if (same_active) {
      VectorXd polished = theta;
      if (polish_active_set(gram, corr, thresholds, kkt_tol, polished)) {
        result.theta = polished;
        result.converged = true;
        result.max_violation = subgradient_violation(polished, corr - gram * polished, thresholds);
        return result;
      }
    }
  }
  result.max_violation = subgradient_violation(result.theta, corr - gram * result.theta, thresholds);
  result.converged = false;
  return result;
}

LassoResult weighted_lasso(const MatrixXd& phi, const VectorXd& y, const VectorXd& weights, double sigma2,
                           double lambda, const VectorXd& warm_start, double tol, int max_inner) {
  if (phi.rows() != y.size()) throw std::invalid_argument("weighted_lasso: phi rows must match y");
  if (!(sigma2 > 0.0) || !(lambda > 0.0)) {
    throw std::invalid_argument("weighted_lasso: sigma2 and lambda must be positive");
  }
  return weighted_lasso_gram(phi.transpose() * phi, phi.transpose() * y, weights, lambda * sigma2,
                             warm_start, tol, max_inner);
}

Eigen::VectorXd update_gamma(const VectorXd& theta, const VectorXd& c) {
  if (theta.size() != c.size()) throw std::invalid_argument("update_gamma: length mismatch");
  if ((c.array() <= 0.0).any()) throw std::invalid_argument("update_gamma: c must be positive");
  return (theta.cwiseAbs().array() / c.cwiseSqrt().array()).matrix();
}

double log_det_marginal(const MatrixXd& phi, const VectorXd& gamma, double sigma2) {
  const Index n = phi.rows();
  std::vector<Index> active;
  for (Index i = 0; i < gamma.size(); ++i) {
    if (gamma(i) > 0.0) active.push_back(i);
  }
  const Index k = static_cast<Index>(active.size());
  double logdet = static_cast<double>(n) * std::log(sigma2);
  if (k == 0) return logdet;
  // det(I + A^T A) = det(R)^2 for the QR factor of [A; I], A = Phi Gamma^(1/2) / sigma.
  // Factoring the stacked matrix avoids forming A^T A, which loses definiteness
  // when gamma / sigma^2 is huge.
  MatrixXd stacked = MatrixXd::Zero(n + k, k);
  const double inv_sigma = 1.0 / std::sqrt(sigma2);
  for (Index a = 0; a < k; ++a) {
    stacked.col(a).head(n) = phi.col(active[a]) * (std::sqrt(gamma(active[a])) * inv_sigma);
    stacked(n + a, a) = 1.0;
  }
  Eigen::HouseholderQR<MatrixXd> qr(stacked);
  const auto r = qr.matrixQR().topLeftCorner(k, k).diagonal();
  for (Index a = 0; a < k; ++a) logdet += 2.0 * std::log(std::abs(r(a)));
  if (!std::isfinite(logdet)) throw SolverError("log-determinant is not finite");
  return logdet;
}

double cost(const VectorXd& theta, const VectorXd& gamma, const MatrixXd& phi, const VectorXd& y,
            double sigma2, double lambda) {
  if (theta.size() != phi.cols() || gamma.size() != phi.cols() || y.size() != phi.rows()) {
    throw std::invalid_argument("cost: dimension mismatch");
  }
  if (!(sigma2 > 0.0) || !(lambda > 0.0)) throw std::invalid_argument("cost: sigma2 and lambda must be positive");
  double middle = 0.0;
  for (Index i = 0; i < theta.size(); ++i) {
    if (gamma(i) > 0.0) {
      middle += theta(i) * theta(i) / gamma(i);
    } else if (theta(i) != 0.0) {
      return kCostInfinity;
    }
  }
  const double data = (y - phi * theta).squaredNorm() / (lambda * sigma2);
  return data + middle + log_det_marginal(phi, gamma, sigma2);
}

Eigen::VectorXd ols(const MatrixXd& phi, const VectorXd& y) {
  Eigen::ColPivHouseholderQR<MatrixXd> qr(phi);
  if (qr.rank() == phi.cols()) return qr.solve(y);
  MatrixXd normal = phi.transpose() * phi;
  normal.diagonal().array() += 1e-10;
  return normal.ldlt().solve(phi.transpose() * y);
}

double ols_noise_variance(const MatrixXd& phi, const VectorXd& y) {
  const VectorXd theta = ols(phi, y);
  const double dof = std::max<double>(1.0, static_cast<double>(phi.rows() - phi.cols()));
  return (y - phi * theta).squaredNorm() / dof;
}

double auto_noise_variance(const MatrixXd& phi, const VectorXd& y) {
  double sigma2 = ols_noise_variance(phi, y);
  // Exactly consistent data would give zero; keep the likelihood well defined.
  const double mean_square = y.squaredNorm() / static_cast<double>(std::max<Index>(1, y.size()));
  const double floor = mean_square > 0.0 ? 1e-14 * mean_square : 1.0;
  return sigma2 > floor ? sigma2 : floor;
}

SBLResult run_sbl(const MatrixXd& phi, const VectorXd& y, const SBLConfig& config) {
  validate_config(config);
  const Index n = phi.rows();
  const Index m = phi.cols();
  if (n < 1 || m < 1) throw std::invalid_argument("run_sbl: empty regression system");
  if (y.size() != n) throw std::invalid_argument("run_sbl: phi rows must match y");
  if (!all_finite(phi) || !y.allFinite()) throw std::invalid_argument("run_sbl: non-finite input");
  check_nonzero_columns(phi, generic_names(m));

  SBLResult result;
  result.lambda = config.lambda;
  result.column_scales = VectorXd::Ones(m);
  if (config.normalize_columns) result.column_scales = phi.colwise().norm().transpose();
  const MatrixXd phi_n = phi * result.column_scales.cwiseInverse().asDiagonal();
  const MatrixXd gram = phi_n.transpose() * phi_n;
  const VectorXd corr = phi_n.transpose() * y;

  double sigma2;
  if (config.sigma2) {
    sigma2 = *config.sigma2;
  } else {
    sigma2 = auto_noise_variance(phi_n, y);
  }
  result.sigma2 = sigma2;
  const double penalty_scale = config.lambda * sigma2;

  auto weights_at = [&](const VectorXd& gamma) {
    const WeightRoute route =
        config.route == WeightRoute::automatic
            ? (n <= kDenseRouteMaxRows ? WeightRoute::dense : WeightRoute::woodbury)
            : config.route;
    return compute_weights(phi_n, gamma, sigma2, route);
  };
  auto cost_at = [&](const VectorXd& theta, const VectorXd& gamma) {
    double middle = 0.0;
    for (Index i = 0; i < m; ++i) {
      if (gamma(i) > 0.0) {
        middle += theta(i) * theta(i) / gamma(i);
      } else if (theta(i) != 0.0) {
        return kCostInfinity;
      }
    }
    const double data = (y - phi_n * theta).squaredNorm() / penalty_scale;
    return data + middle + log_det_marginal(phi_n, gamma, sigma2);
  };

  // Start from Gamma = I with theta at the corresponding posterior mean.
  VectorXd gamma = VectorXd::Ones(m);
  MatrixXd regularized = gram;
  regularized.diagonal().array() += sigma2;
  VectorXd theta = regularized.ldlt().solve(corr);
  if (!theta.allFinite()) throw SolverError("initial posterior mean is not finite");
  double current = cost_at(theta, gamma);
  result.cost_trace.push_back(current);
  const double stop_threshold = config.tau * (1.0 + std::abs(current));

  for (int k = 0; k < config.max_outer; ++k) {
    const VectorXd c = weights_at(gamma);
    const LassoResult step = weighted_lasso_gram(gram, corr, c.cwiseSqrt(), penalty_scale, theta,
                                                 config.inner_tol, config.max_inner);
    if (!step.theta.allFinite()) throw SolverError("inner solver diverged");
    const VectorXd next_gamma = update_gamma(step.theta, c);
    const double next = cost_at(step.theta, next_gamma);
    if (!std::isfinite(next)) throw SolverError("cost became non-finite");
    if (config.record_iterates) result.iterates.push_back({c, step.theta, next_gamma, next});

    const double slack = 1e-9 + 1e-13 * std::abs(current);
    if (next > current + slack) {
      throw SolverError("cost increased between outer iterations");
    }
    result.outer_iterations = k + 1;
    if (next > current) {
      // Increase within rounding: the previous iterate is already stationary to working precision.
      result.converged = true;
      break;
    }
    theta = step.theta;
    gamma = next_gamma;
    const double decrease = current - next;
    current = next;
    result.cost_trace.push_back(current);
    if (decrease <= stop_threshold) {
      result.converged = true;
      break;
    }
  }

  result.theta_solver = theta;
  result.gamma = gamma;
  result.kkt_residual = kkt_residual(theta, gamma, phi_n, y, sigma2, config.lambda);
  result.kkt_tolerance = 1e-6 * (1.0 + corr.lpNorm<Eigen::Infinity>());
  result.raw_theta = theta.cwiseQuotient(result.column_scales);

  const double largest = theta.cwiseAbs().maxCoeff();
  for (Index i = 0; i < m; ++i) {
    if (largest > 0.0 && std::abs(theta(i)) > config.prune_threshold * largest) result.support.push_back(i);
  }
  result.theta = VectorXd::Zero(m);
  if (!result.support.empty()) {
    if (config.refit_ols) {
      MatrixXd sub(n, static_cast<Index>(result.support.size()));
      for (std::size_t s = 0; s < result.support.size(); ++s) {
        sub.col(static_cast<Index>(s)) = phi.col(result.support[s]);
      }
      const VectorXd refit = ols(sub, y);
      for (std::size_t s = 0; s < result.support.size(); ++s) {
        result.theta(result.support[s]) = refit(static_cast<Index>(s));
      }
    } else {
      for (Index i : result.support) result.theta(i) = result.raw_theta(i);
    }
  }
  return result;
}

SBLResult run_sbl(const Dictionary& dict, const SBLConfig& config) {
  check_nonzero_columns(dict.phi, dict.column_names);
  return run_sbl(dict.phi, dict.y, config);
}

double kkt_residual(const VectorXd& theta, const VectorXd& gamma, const MatrixXd& phi, const VectorXd& y,
                    double sigma2, double lambda) {
  const Index m = phi.cols();
  if (theta.size() != m || gamma.size() != m || y.size() != phi.rows()) {
    throw std::invalid_argument("kkt_residual: dimension mismatch");
  }
  const VectorXd c = compute_weights(phi, gamma, sigma2);
  const VectorXd root_c = c.cwiseSqrt();
  const VectorXd grad = phi.transpose() * (phi * theta - y);
  double worst = 0.0;
  for (Index i = 0; i < m; ++i) {
    const double threshold = lambda * sigma2 * root_c(i);
    double v;
    if (theta(i) != 0.0) {
      v = std::abs(grad(i) + threshold * sign_of(theta(i)));
    } else {
      v = std::max(0.0, std::abs(grad(i)) - threshold);
    }
    worst = std::max(worst, v);
    const double mismatch = std::abs(gamma(i) - std::abs(theta(i)) / root_c(i)) / (1.0 + gamma(i));
    if (mismatch > 1e-8) worst = std::max(worst, mismatch);
  }
  return worst;
}

double orthonormal_fixed_point_check(const VectorXd& theta_star, const VectorXd& c_star, double sigma2) {
  if (theta_star.size() != c_star.size()) throw std::invalid_argument("fixed point check: length mismatch");
  double worst = 0.0;
  for (Index i = 0; i < theta_star.size(); ++i) {
    const double root = std::sqrt(c_star(i));
    worst = std::max(worst, std::abs(sigma2 * c_star(i) + std::abs(theta_star(i)) * root - 1.0));
  }
  return worst;
}

CoefficientError coeff_error(const std::vector<TermCoefficient>& estimated,
                             const std::vector<TermCoefficient>& truth) {
  std::map<std::string, std::complex<double>> found;
  for (const auto& e : estimated) {
    if (e.value != 0.0) found[e.name] = e.value;
  }
  CoefficientError out;
  if (truth.empty()) {
    out.spurious = static_cast<int>(found.size());
    return out;
  }
  std::vector<double> errors;
  for (const auto& t : truth) {
    if (t.value == 0.0) throw std::invalid_argument("true coefficient of '" + t.name + "' is zero");
    auto it = found.find(t.name);
    if (it == found.end()) {
      errors.push_back(1.0);
      ++out.missing;
    } else {
      errors.push_back(std::abs(it->second - t.value) / std::abs(t.value));
      found.erase(it);
    }
  }
  out.spurious = static_cast<int>(found.size());
  double sum = 0.0;
  for (double e : errors) sum += e;
  out.mean = sum / static_cast<double>(errors.size());
  double var = 0.0;
  for (double e : errors) var += (e - out.mean) * (e - out.mean);
  out.std = std::sqrt(var / static_cast<double>(errors.size()));
  return out;
}

}  // namespace pdediscover
