#include "pdediscover/grid.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace pdediscover {

namespace {

void check_layout(const Eigen::MatrixXd& values, double dx, double dt) {
  if (values.rows() < 3 || values.cols() < 3) {
    throw GridError("grid must be at least 3x3, got " + std::to_string(values.rows()) + "x" +
                    std::to_string(values.cols()));
  }
  if (!(dx > 0.0) || !(dt > 0.0) || !std::isfinite(dx) || !std::isfinite(dt)) {
    throw GridError("grid spacing must be positive and finite");
  }
  if (!values.allFinite()) {
    throw GridError("grid contains non-finite values");
  }
}

}  // namespace

SnapshotGrid::SnapshotGrid(Eigen::MatrixXd values, double dx, double dt, double x0, double t0,
                           std::string field_name)
    : values_(std::move(values)), dx_(dx), dt_(dt), x0_(x0), t0_(t0),
      field_name_(std::move(field_name)) {
  check_layout(values_, dx_, dt_);
  if (!std::isfinite(x0_) || !std::isfinite(t0_)) {
    throw GridError("grid origin must be finite");
  }
  if (field_name_.empty()) {
    throw GridError("field name must not be empty");
  }
}

SnapshotGrid SnapshotGrid::with_values(Eigen::MatrixXd values) const {
  if (values.rows() != nx() || values.cols() != nt()) {
    throw GridError("with_values: shape mismatch");
  }
  return SnapshotGrid(std::move(values), dx_, dt_, x0_, t0_, field_name_);
}

SnapshotGrid SnapshotGrid::renamed(std::string field_name) const {
  return SnapshotGrid(values_, dx_, dt_, x0_, t0_, std::move(field_name));
}

bool SnapshotGrid::same_layout(const SnapshotGrid& other) const {
  return nx() == other.nx() && nt() == other.nt() && dx_ == other.dx_ && dt_ == other.dt_ &&
         x0_ == other.x0_ && t0_ == other.t0_;
}

FieldSet::FieldSet(std::vector<SnapshotGrid> fields) {
  for (auto& f : fields) add(std::move(f));
}

void FieldSet::add(SnapshotGrid grid) {
  if (!fields_.empty() && !fields_.front().same_layout(grid)) {
    throw GridError("field '" + grid.field_name() + "' does not share the layout of '" +
                    fields_.front().field_name() + "'");
  }
  if (contains(grid.field_name())) {
    throw GridError("duplicate field name '" + grid.field_name() + "'");
  }
  fields_.push_back(std::move(grid));
}

bool FieldSet::contains(const std::string& name) const {
  return std::any_of(fields_.begin(), fields_.end(),
                     [&](const SnapshotGrid& g) { return g.field_name() == name; });
}

const SnapshotGrid& FieldSet::at(const std::string& name) const {
  for (const auto& g : fields_) {
    if (g.field_name() == name) return g;
  }
  throw GridError("unknown field '" + name + "'");
}

std::vector<std::string> FieldSet::names() const {
  std::vector<std::string> out;
  out.reserve(fields_.size());
  for (const auto& g : fields_) out.push_back(g.field_name());
  return out;
}

double population_std(const Eigen::MatrixXd& values) {
  const double mean = values.mean();
  return std::sqrt((values.array() - mean).square().mean());
}

SnapshotGrid add_noise(const SnapshotGrid& grid, double level, std::uint64_t seed) {
  if (!(level >= 0.0) || !std::isfinite(level)) {
    throw GridError("noise level must be a finite value >= 0");
  }
  if (level == 0.0) return grid;

  const double sd = level * population_std(grid.values());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd noisy = grid.values();
  // column-major traversal fixes the draw order
  for (Eigen::Index i = 0; i < noisy.cols(); ++i) {
    for (Eigen::Index j = 0; j < noisy.rows(); ++j) {
      noisy(j, i) += sd * normal(rng);
    }
  }
  return grid.with_values(std::move(noisy));
}

double rmse(const SnapshotGrid& a, const SnapshotGrid& b) {
  if (a.nx() != b.nx() || a.nt() != b.nt()) {
    throw GridError("rmse: shape mismatch");
  }
  return std::sqrt((a.values() - b.values()).array().square().mean());
}

std::pair<Eigen::Index, Eigen::Index> index_span(double origin, double step, Eigen::Index count,
                                                 Interval range) {
  // small slack so that interval ends landing on grid nodes are inclusive
  const double slack = 1e-9;
  const double lo = (range.lo - origin) / step;
  const double hi = (range.hi - origin) / step;
  auto first = static_cast<Eigen::Index>(std::ceil(lo - slack));
  auto last = static_cast<Eigen::Index>(std::floor(hi + slack)) + 1;
  first = std::max<Eigen::Index>(first, 0);
  last = std::min<Eigen::Index>(last, count);
  if (last < first) last = first;
  return {first, last};
}

SnapshotGrid crop(const SnapshotGrid& grid, Interval x_range, Interval t_range) {
  auto [j0, j1] = index_span(grid.x0(), grid.dx(), grid.nx(), x_range);
  auto [i0, i1] = index_span(grid.t0(), grid.dt(), grid.nt(), t_range);
  if (j1 <= j0 || i1 <= i0) {
    throw GridError("crop: ranges do not intersect the grid extent");
  }
  Eigen::MatrixXd sub = grid.values().block(j0, i0, j1 - j0, i1 - i0);
  // the constructor enforces the 3x3 minimum on the result
  return SnapshotGrid(std::move(sub), grid.dx(), grid.dt(), grid.x(j0), grid.t(i0),
                      grid.field_name());
}

}  // namespace pdediscover
