#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace pdediscover {

/// Raised for malformed grids, shape mismatches and empty crops.
class GridError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Closed interval [lo, hi] in grid coordinates.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/**
 * A scalar field sampled on a uniform space x time grid.
 *
 * Row j holds position x0 + j*dx, column i holds time t0 + i*dt. Instances are
 * immutable; every operation returns a new grid.
 */
class SnapshotGrid {
public:
  SnapshotGrid(Eigen::MatrixXd values, double dx, double dt, double x0 = 0.0,
               double t0 = 0.0, std::string field_name = "u");

  const Eigen::MatrixXd& values() const { return values_; }
  double operator()(Eigen::Index j, Eigen::Index i) const { return values_(j, i); }

  Eigen::Index nx() const { return values_.rows(); }
  Eigen::Index nt() const { return values_.cols(); }
  double dx() const { return dx_; }
  double dt() const { return dt_; }
  double x0() const { return x0_; }
  double t0() const { return t0_; }
  const std::string& field_name() const { return field_name_; }

  double x(Eigen::Index j) const { return x0_ + static_cast<double>(j) * dx_; }
  double t(Eigen::Index i) const { return t0_ + static_cast<double>(i) * dt_; }

  /// Same metadata, new values (shape must match).
  SnapshotGrid with_values(Eigen::MatrixXd values) const;
  SnapshotGrid renamed(std::string field_name) const;

  bool same_layout(const SnapshotGrid& other) const;

private:
  Eigen::MatrixXd values_;
  double dx_;
  double dt_;
  double x0_;
  double t0_;
  std::string field_name_;
};

/// Grids sharing one layout, addressed by field name.
class FieldSet {
public:
  FieldSet() = default;
  explicit FieldSet(std::vector<SnapshotGrid> fields);

  void add(SnapshotGrid grid);

  const std::vector<SnapshotGrid>& fields() const { return fields_; }
  bool empty() const { return fields_.empty(); }
  std::size_t size() const { return fields_.size(); }
  bool contains(const std::string& name) const;
  const SnapshotGrid& at(const std::string& name) const;
  std::vector<std::string> names() const;

private:
  std::vector<SnapshotGrid> fields_;
};

/// Adds i.i.d. Gaussian noise with sd = level * (population sd of all values).
SnapshotGrid add_noise(const SnapshotGrid& grid, double level, std::uint64_t seed);

/// Population standard deviation of every stored value.
double population_std(const Eigen::MatrixXd& values);

double rmse(const SnapshotGrid& a, const SnapshotGrid& b);

/// Sub-grid of the cells whose coordinates lie inside both ranges.
SnapshotGrid crop(const SnapshotGrid& grid, Interval x_range, Interval t_range);

/// Index range [first, last) of grid coordinates inside an interval.
std::pair<Eigen::Index, Eigen::Index> index_span(double origin, double step, Eigen::Index count,
                                                 Interval range);

}  // namespace pdediscover
