#include "pdediscover/preprocess.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace pdediscover {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

std::pair<SnapshotGrid, PODResult> pod_denoise(const SnapshotGrid& grid, double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw std::invalid_argument("POD threshold must lie in (0, 1]");
  }
  const MatrixXd& u = grid.values();
  Eigen::BDCSVD<MatrixXd> svd(u, Eigen::ComputeThinU);
  if (svd.info() != Eigen::Success) throw std::runtime_error("SVD of the snapshot matrix failed");
  const VectorXd& s = svd.singularValues();
  const double total = s.squaredNorm();

  PODResult pod;
  if (total == 0.0) {
    // All-zero snapshots: a single (zero-energy) mode reproduces them.
    pod.rank = 1;
    pod.energy_ratio = 1.0;
  } else {
    double accumulated = 0.0;
    for (Index r = 0; r < s.size(); ++r) {
      accumulated += s(r) * s(r);
      pod.rank = r + 1;
      // Compare with a relative allowance so threshold = 1 is reachable despite rounding.
      if (accumulated >= threshold * total * (1.0 - 1e-15 * static_cast<double>(s.size()))) break;
    }
    pod.energy_ratio = std::min(1.0, accumulated / total);
  }
  pod.modes = svd.matrixU().leftCols(pod.rank);
  pod.singular_values = s.head(pod.rank);
  pod.coefficients = pod.modes.transpose() * u;
  MatrixXd denoised = pod.modes * pod.coefficients;
  return {grid.with_values(std::move(denoised)), std::move(pod)};
}

Index numerical_rank(const MatrixXd& phi) {
  Eigen::BDCSVD<MatrixXd> svd(phi);
  const VectorXd& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  Index r = 0;
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) > 1e-12 * s(0)) ++r;
  }
  return r;
}

Dictionary svd_reduce(const Dictionary& dict, std::optional<Index> rank) {
  const MatrixXd& phi = dict.phi;
  const Index limit = std::min(phi.rows(), phi.cols());
  Eigen::BDCSVD<MatrixXd> svd(phi, Eigen::ComputeThinU);
  if (svd.info() != Eigen::Success) throw std::runtime_error("SVD of the dictionary failed");
  Index r;
  if (rank) {
    r = *rank;
    if (r < 1 || r > limit) {
      throw std::invalid_argument("svd_reduce rank " + std::to_string(r) + " outside [1, " +
                                  std::to_string(limit) + "]");
    }
  } else {
    const VectorXd& s = svd.singularValues();
    r = 0;
    for (Index i = 0; i < s.size(); ++i) {
      if (s(0) > 0.0 && s(i) > 1e-12 * s(0)) ++r;
    }
    if (r == 0) throw std::invalid_argument("svd_reduce: dictionary has zero numerical rank");
  }
  const MatrixXd basis = svd.matrixU().leftCols(r);
  Dictionary out;
  out.phi = basis.transpose() * phi;
  out.y = basis.transpose() * dict.y;
  out.column_names = dict.column_names;
  out.output_name = dict.output_name;
  // Reduced rows are mixtures of samples, so no per-row coordinates survive.
  return out;
}

Dictionary complex_to_real(const ComplexSystem& sys) {
  const Index n = sys.phi_c.rows();
  const Index m = sys.phi_c.cols();
  if (sys.y_c.size() != n) throw std::invalid_argument("complex system: phi and y row counts differ");
  const MatrixXd re = sys.phi_c.real();
  const MatrixXd im = sys.phi_c.imag();
  Dictionary out;
  out.phi.resize(2 * n, 2 * m);
  out.phi << re, -im, im, re;
  out.y.resize(2 * n);
  out.y << sys.y_c.real(), sys.y_c.imag();
  for (const auto& name : sys.column_names) out.column_names.push_back("Re(" + name + ")");
  for (const auto& name : sys.column_names) out.column_names.push_back("Im(" + name + ")");
  out.output_name = sys.output_name;
  out.sample_coords = sys.sample_coords;
  out.sample_coords.insert(out.sample_coords.end(), sys.sample_coords.begin(), sys.sample_coords.end());
  return out;
}

Eigen::VectorXcd real_to_complex(const VectorXd& theta) {
  if (theta.size() % 2 != 0) throw std::invalid_argument("real_to_complex needs an even-length vector");
  const Index m = theta.size() / 2;
  Eigen::VectorXcd out(m);
  for (Index j = 0; j < m; ++j) out(j) = {theta(j), theta(j + m)};
  return out;
}

}  // namespace pdediscover
