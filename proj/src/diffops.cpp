#include "pdediscover/diffops.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace pdediscover {

namespace {

// Weights applied to samples [start, start + weights.size()) along the axis.
struct Stencil {
  Eigen::Index start = 0;
  Eigen::VectorXd weights;
};

Eigen::Index axis_length(const SnapshotGrid& grid, Axis axis) {
  return axis == Axis::space ? grid.nx() : grid.nt();
}

double axis_step(const SnapshotGrid& grid, Axis axis) {
  return axis == Axis::space ? grid.dx() : grid.dt();
}

int max_order(Axis axis) { return axis == Axis::space ? 4 : 2; }

void check_order(const DerivativeSpec& spec) {
  if (spec.order < 1 || spec.order > max_order(spec.axis)) {
    throw DerivativeError("derivative order " + std::to_string(spec.order) + " outside 1.." +
                          std::to_string(max_order(spec.axis)) + " for the " +
                          (spec.axis == Axis::space ? "space" : "time") + " axis");
  }
}

DerivativeResult apply(const SnapshotGrid& grid, const DerivativeSpec& spec,
                       const std::vector<Stencil>& stencils, Eigen::Index trim) {
  const Eigen::MatrixXd& u = grid.values();
  const double scale = 1.0 / std::pow(axis_step(grid, spec.axis), spec.order);
  Eigen::MatrixXd out(u.rows(), u.cols());
  const auto n = static_cast<Eigen::Index>(stencils.size());
  if (spec.axis == Axis::space) {
    for (Eigen::Index k = 0; k < n; ++k) {
      const auto& s = stencils[static_cast<std::size_t>(k)];
      out.row(k) = s.weights.transpose() * u.middleRows(s.start, s.weights.size());
      out.row(k) *= scale;
    }
  } else {
    for (Eigen::Index k = 0; k < n; ++k) {
      const auto& s = stencils[static_cast<std::size_t>(k)];
      out.col(k) = u.middleCols(s.start, s.weights.size()) * s.weights;
      out.col(k) *= scale;
    }
  }
  return {grid.with_values(std::move(out)), trim};
}

}  // namespace

Eigen::VectorXd fd_weights(const Eigen::VectorXd& x, int order) {
  const Eigen::Index n = x.size();
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, order + 1);
  double c1 = 1.0;
  double c4 = x(0);
  c(0, 0) = 1.0;
  for (Eigen::Index i = 1; i < n; ++i) {
    const int mn = static_cast<int>(std::min<Eigen::Index>(i, order));
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x(i);
    for (Eigen::Index j = 0; j < i; ++j) {
      const double c3 = x(i) - x(j);
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) {
          c(i, k) = c1 * (k * c(i - 1, k - 1) - c5 * c(i - 1, k)) / c2;
        }
        c(i, 0) = -c1 * c5 * c(i - 1, 0) / c2;
      }
      for (int k = mn; k >= 1; --k) {
        c(j, k) = (c4 * c(j, k) - k * c(j, k - 1)) / c3;
      }
      c(j, 0) = c4 * c(j, 0) / c3;
    }
    c1 = c2;
  }
  return c.col(order);
}

Eigen::Index boundary_trim(const DerivativeSpec& spec) {
  if (spec.method == DiffMethod::polynomial) return spec.window / 2;
  return std::max(1, (spec.order + 1) / 2);
}

DerivativeResult central_fd(const SnapshotGrid& grid, const DerivativeSpec& spec) {
  if (spec.method != DiffMethod::central_fd) {
    throw DerivativeError("central_fd called with a non-central_fd spec");
  }
  check_order(spec);
  const int q = spec.order;
  const Eigen::Index n = axis_length(grid, spec.axis);
  if (n < q + 2) {
    throw DerivativeError("axis has " + std::to_string(n) + " points; order " + std::to_string(q) +
                          " needs at least " + std::to_string(q + 2));
  }

  const Eigen::Index half = (q + 1) / 2;
  Eigen::VectorXd central_offsets(2 * half + 1);
  for (Eigen::Index l = 0; l < central_offsets.size(); ++l) {
    central_offsets(l) = static_cast<double>(l - half);
  }
  const Eigen::VectorXd central = fd_weights(central_offsets, q);

  const Eigen::Index one_sided_len = q + 2;
  std::vector<Stencil> stencils(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) {
    auto& s = stencils[static_cast<std::size_t>(k)];
    if (k >= half && k + half < n) {
      s.start = k - half;
      s.weights = central;
      continue;
    }
    s.start = k < half ? 0 : n - one_sided_len;
    Eigen::VectorXd offsets(one_sided_len);
    for (Eigen::Index l = 0; l < one_sided_len; ++l) {
      offsets(l) = static_cast<double>(s.start + l - k);
    }
    s.weights = fd_weights(offsets, q);
  }
  return apply(grid, spec, stencils, boundary_trim(spec));
}

DerivativeResult poly_derivative(const SnapshotGrid& grid, const DerivativeSpec& spec) {
  if (spec.method != DiffMethod::polynomial) {
    throw DerivativeError("poly_derivative called with a non-polynomial spec");
  }
  check_order(spec);
  const int q = spec.order;
  const int p = spec.poly_degree;
  const int w = spec.window;
  if (q >= p) {
    throw DerivativeError("polynomial degree " + std::to_string(p) +
                          " must exceed derivative order " + std::to_string(q));
  }
  if (w < p + 1 || w % 2 == 0) {
    throw DerivativeError("window must be odd and at least degree + 1, got " + std::to_string(w));
  }
  const Eigen::Index n = axis_length(grid, spec.axis);
  if (w > n) {
    throw DerivativeError("window " + std::to_string(w) + " exceeds axis length " +
                          std::to_string(n));
  }

  // Vandermonde in centred integer coordinates
  const double centre = 0.5 * (w - 1);
  Eigen::MatrixXd vander(w, p + 1);
  for (int l = 0; l < w; ++l) {
    const double s = l - centre;
    double power = 1.0;
    for (int k = 0; k <= p; ++k) {
      vander(l, k) = power;
      power *= s;
    }
  }
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(vander);
  // row k of `fit` maps window samples to polynomial coefficient a_k
  const Eigen::MatrixXd fit = qr.solve(Eigen::MatrixXd::Identity(w, w));

  auto weights_at = [&](int position) {
    const double s = position - centre;
    Eigen::VectorXd d = Eigen::VectorXd::Zero(p + 1);
    for (int k = q; k <= p; ++k) {
      double falling = 1.0;
      for (int r = 0; r < q; ++r) falling *= (k - r);
      d(k) = falling * std::pow(s, k - q);
    }
    return Eigen::VectorXd(fit.transpose() * d);
  };

  const int half = w / 2;
  const Eigen::VectorXd interior = weights_at(half);
  std::vector<Stencil> stencils(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) {
    auto& s = stencils[static_cast<std::size_t>(k)];
    if (k >= half && k + half < n) {
      s.start = k - half;
      s.weights = interior;
    } else {
      s.start = k < half ? 0 : n - w;
      s.weights = weights_at(static_cast<int>(k - s.start));
    }
  }
  return apply(grid, spec, stencils, boundary_trim(spec));
}

DerivativeResult differentiate(const SnapshotGrid& grid, const DerivativeSpec& spec) {
  return spec.method == DiffMethod::central_fd ? central_fd(grid, spec) : poly_derivative(grid, spec);
}

}  // namespace pdediscover
