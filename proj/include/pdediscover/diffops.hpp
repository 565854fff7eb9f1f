#pragma once

#include <stdexcept>

#include <Eigen/Dense>

#include "pdediscover/grid.hpp"

namespace pdediscover {

class DerivativeError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

enum class Axis { space, time };
enum class DiffMethod { central_fd, polynomial };

/// How to take the q-th derivative along one axis.
struct DerivativeSpec {
  Axis axis = Axis::space;
  int order = 1;
  DiffMethod method = DiffMethod::central_fd;
  int poly_degree = 4;  // polynomial only; must exceed order
  int window = 9;       // polynomial only; odd, >= poly_degree + 1

  static DerivativeSpec fd(Axis axis, int order) { return {axis, order, DiffMethod::central_fd, 4, 9}; }
  static DerivativeSpec poly(Axis axis, int order, int degree = 4, int window = 9) {
    return {axis, order, DiffMethod::polynomial, degree, window};
  }
};

/// A derivative grid plus the number of low-accuracy cells at each end of the axis.
struct DerivativeResult {
  SnapshotGrid grid;
  Eigen::Index trim = 0;
};

/// Cells to drop at each end of the axis for a given spec.
Eigen::Index boundary_trim(const DerivativeSpec& spec);

/**
 * Second-order finite differences.
 *
 * Interior cells use the symmetric stencil (3 points for q = 1, 2 and 5 points for
 * q = 3, 4); cells too close to the boundary for it use a one-sided stencil of
 * q + 2 points, which is also second-order accurate.
 */
DerivativeResult central_fd(const SnapshotGrid& grid, const DerivativeSpec& spec);

/**
 * Local least-squares polynomial differentiation.
 *
 * For each cell, a degree-p polynomial is fitted (Householder QR on a Vandermonde
 * matrix in centred integer coordinates) to the `window` nearest samples along the
 * axis, and its q-th derivative is evaluated at the cell. Near the boundary the
 * window is clamped, keeping its length.
 */
DerivativeResult poly_derivative(const SnapshotGrid& grid, const DerivativeSpec& spec);

/// Dispatches on spec.method.
DerivativeResult differentiate(const SnapshotGrid& grid, const DerivativeSpec& spec);

/// Finite-difference weights for the `order`-th derivative at 0 from samples at
/// `offsets` (unit spacing), Fornberg's recursion.
Eigen::VectorXd fd_weights(const Eigen::VectorXd& offsets, int order);

}  // namespace pdediscover
