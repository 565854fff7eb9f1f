#pragma once

#include <optional>
#include <stdexcept>
#include <utility>

#include <Eigen/Dense>

#include "pdediscover/dictionary.hpp"
#include "pdediscover/grid.hpp"

namespace pdediscover {

/// Truncated snapshot decomposition U ~ modes * coefficients.
struct PODResult {
  Eigen::MatrixXd modes;            // n_x x r, orthonormal columns
  Eigen::VectorXd singular_values;  // r values, non-increasing
  Eigen::MatrixXd coefficients;     // r x n_t, modes^T U
  double energy_ratio = 0.0;
  Eigen::Index rank = 0;
};

inline constexpr double kDefaultPodThreshold = 0.9999;

/**
 * Keeps the smallest number of left singular vectors whose squared singular values
 * reach `threshold` of the total, and projects the snapshots onto them.
 */
std::pair<SnapshotGrid, PODResult> pod_denoise(const SnapshotGrid& grid, double threshold = kDefaultPodThreshold);

/// Numerical rank: singular values above 1e-12 * sigma_max.
Eigen::Index numerical_rank(const Eigen::MatrixXd& phi);

/// Projects the system onto the leading `rank` left singular vectors of phi (nullopt = numerical rank).
Dictionary svd_reduce(const Dictionary& dict, std::optional<Eigen::Index> rank = std::nullopt);

/// [[Re, -Im], [Im, Re]] block form; columns named Re(name) then Im(name).
Dictionary complex_to_real(const ComplexSystem& sys);

/// theta_j + i * theta_{j+m}. Throws std::invalid_argument on odd length.
Eigen::VectorXcd real_to_complex(const Eigen::VectorXd& theta);

}  // namespace pdediscover
