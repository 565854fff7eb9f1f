#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace oracle {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd gaussian_matrix(Rng& rng, Index rows, Index cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  MatrixXd m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  }
  return m;
}

VectorXd gaussian_vector(Rng& rng, Index size) { return gaussian_matrix(rng, size, 1).col(0); }

MatrixXd random_orthonormal(Rng& rng, Index n) {
  Eigen::HouseholderQR<MatrixXd> qr(gaussian_matrix(rng, n, n));
  return qr.householderQ() * MatrixXd::Identity(n, n);
}

VectorXd dense_inverse_weights(const MatrixXd& phi, const VectorXd& gamma, double sigma2) {
  const Index n = phi.rows();
  MatrixXd m = sigma2 * MatrixXd::Identity(n, n) + phi * gamma.asDiagonal() * phi.transpose();
  const MatrixXd inv = m.fullPivLu().inverse();
  VectorXd c(phi.cols());
  for (Index i = 0; i < phi.cols(); ++i) c(i) = phi.col(i).dot(inv * phi.col(i));
  return c;
}

double lasso_objective(const MatrixXd& phi, const VectorXd& y, const VectorXd& w, double penalty_scale,
                       const VectorXd& theta) {
  return (y - phi * theta).squaredNorm() + 2.0 * penalty_scale * w.dot(theta.cwiseAbs());
}

double lasso_subgradient_violation(const MatrixXd& phi, const VectorXd& y, const VectorXd& w,
                                   double penalty_scale, const VectorXd& theta) {
  const VectorXd grad = phi.transpose() * (y - phi * theta);
  double worst = 0.0;
  for (Index i = 0; i < theta.size(); ++i) {
    const double t = penalty_scale * w(i);
    double v;
    if (theta(i) > 0.0) {
      v = std::abs(grad(i) - t);
    } else if (theta(i) < 0.0) {
      v = std::abs(grad(i) + t);
    } else {
      v = std::max(0.0, std::abs(grad(i)) - t);
    }
    worst = std::max(worst, v);
  }
  return worst;
}

LassoOptimum exhaustive_lasso(const MatrixXd& phi, const VectorXd& y, const VectorXd& w, double penalty_scale) {
  const Index m = phi.cols();
  const MatrixXd gram = phi.transpose() * phi;
  const VectorXd corr = phi.transpose() * y;

  LassoOptimum best{VectorXd::Zero(m), lasso_objective(phi, y, w, penalty_scale, VectorXd::Zero(m))};
  Index patterns = 1;
  for (Index i = 0; i < m; ++i) patterns *= 3;

  for (Index code = 0; code < patterns; ++code) {
    std::vector<int> sign(static_cast<std::size_t>(m));
    std::vector<Index> support;
    Index rest = code;
    for (Index i = 0; i < m; ++i) {
      sign[static_cast<std::size_t>(i)] = static_cast<int>(rest % 3) - 1;
      rest /= 3;
      if (sign[static_cast<std::size_t>(i)] != 0) support.push_back(i);
    }
    if (support.empty()) continue;
    const Index k = static_cast<Index>(support.size());
    MatrixXd g(k, k);
    VectorXd rhs(k);
    for (Index a = 0; a < k; ++a) {
      rhs(a) = corr(support[a]) - penalty_scale * w(support[a]) * sign[static_cast<std::size_t>(support[a])];
      for (Index b = 0; b < k; ++b) g(a, b) = gram(support[a], support[b]);
    }
    Eigen::FullPivLU<MatrixXd> lu(g);
    if (!lu.isInvertible()) continue;
    const VectorXd sub = lu.solve(rhs);
    bool consistent = true;
    for (Index a = 0; a < k; ++a) {
      if (sub(a) * sign[static_cast<std::size_t>(support[a])] <= 0.0) consistent = false;
    }
    if (!consistent) continue;
    VectorXd theta = VectorXd::Zero(m);
    for (Index a = 0; a < k; ++a) theta(support[a]) = sub(a);
    const double obj = lasso_objective(phi, y, w, penalty_scale, theta);
    if (obj < best.objective) best = {theta, obj};
  }
  return best;
}

Eigen::VectorXcd complex_least_squares(const Eigen::MatrixXcd& a, const Eigen::VectorXcd& b) {
  const Eigen::MatrixXcd normal = a.adjoint() * a;
  return normal.ldlt().solve(a.adjoint() * b);
}

VectorXd best_small_support_fit(const MatrixXd& phi, const VectorXd& y, int max_size) {
  const Index m = phi.cols();
  VectorXd best = VectorXd::Zero(m);
  double best_res = y.squaredNorm();
  for (int size = 1; size <= max_size && size <= m; ++size) {
    std::vector<bool> pick(static_cast<std::size_t>(m), false);
    std::fill(pick.begin(), pick.begin() + size, true);
    do {
      std::vector<Index> support;
      for (Index i = 0; i < m; ++i) {
        if (pick[static_cast<std::size_t>(i)]) support.push_back(i);
      }
      MatrixXd sub(phi.rows(), size);
      for (int s = 0; s < size; ++s) sub.col(s) = phi.col(support[static_cast<std::size_t>(s)]);
      const VectorXd coef = (sub.transpose() * sub).fullPivLu().solve(sub.transpose() * y);
      const double res = (y - sub * coef).squaredNorm();
      if (res < best_res) {
        best_res = res;
        best.setZero();
        for (int s = 0; s < size; ++s) best(support[static_cast<std::size_t>(s)]) = coef(s);
      }
    } while (std::prev_permutation(pick.begin(), pick.end()));
  }
  return best;
}

SparseProblem sparse_problem(Rng& rng, Index n, Index m, Index nonzeros, double noise_sd) {
  SparseProblem p;
  p.phi = gaussian_matrix(rng, n, m);
  p.theta = VectorXd::Zero(m);
  std::vector<Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Index{0});
  std::shuffle(order.begin(), order.end(), rng);
  std::uniform_real_distribution<double> magnitude(1.0, 3.0);
  std::bernoulli_distribution positive(0.5);
  for (Index k = 0; k < std::min(nonzeros, m); ++k) {
    p.theta(order[static_cast<std::size_t>(k)]) = (positive(rng) ? 1.0 : -1.0) * magnitude(rng);
  }
  p.y = p.phi * p.theta;
  if (noise_sd > 0.0) p.y += noise_sd * gaussian_vector(rng, n);
  p.noise_variance = noise_sd * noise_sd;
  return p;
}

}  // namespace oracle
