#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pdediscover/diffops.hpp"
#include "pdediscover/grid.hpp"
#include "pdediscover/term.hpp"

namespace pdediscover {

/// Zero columns, empty sample sets and other unusable regression systems.
class DictionaryError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

struct DictionarySpec {
  int max_derivative_order = 3;  // q
  int max_power = 3;             // p
  bool include_constant = true;
  std::vector<std::string> extra_terms;
  std::string output = "u_t";
  // Method, degree and window for each axis; the order field is ignored.
  DerivativeSpec space_method = DerivativeSpec::fd(Axis::space, 1);
  DerivativeSpec time_method = DerivativeSpec::fd(Axis::time, 1);
};

struct SampleCoord {
  Eigen::Index x_index = 0;
  Eigen::Index t_index = 0;
  bool operator==(const SampleCoord&) const = default;
};

/// The regression system y = phi * theta with provenance of every row and column.
struct Dictionary {
  Eigen::MatrixXd phi;
  Eigen::VectorXd y;
  std::vector<std::string> column_names;
  std::string output_name;
  std::vector<SampleCoord> sample_coords;

  Eigen::Index rows() const { return phi.rows(); }
  Eigen::Index cols() const { return phi.cols(); }
};

/// Complex counterpart of Dictionary, produced from complex-valued fields.
struct ComplexSystem {
  Eigen::MatrixXcd phi_c;
  Eigen::VectorXcd y_c;
  std::vector<std::string> column_names;
  std::string output_name;
  std::vector<SampleCoord> sample_coords;
};

/// Per-cell selector on the grid layout (true = eligible for sampling).
using SampleMask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Mask of the cells inside both coordinate ranges.
SampleMask region_mask(const SnapshotGrid& layout, Interval x_range, Interval t_range);

struct BuildOptions {
  bool memoize_derivatives = true;
};

/**
 * Generated library for the output's field: {1} (optional), u^a for 1 <= a <= p,
 * then u^a * d^b u/dx^b for 0 <= a <= p, 1 <= b <= q (a outer), then the parsed
 * extra terms. Duplicates are dropped by canonical name.
 */
std::vector<CandidateTerm> enumerate_terms(const DictionarySpec& spec,
                                           const std::vector<std::string>& known_fields = {});

/**
 * Evaluates every term at the retained cells: inside the boundary trim of every
 * derivative used, and inside `mask` when given. Each derivative grid is computed
 * once per build. Throws DictionaryError on an all-zero column or an empty sample.
 */
Dictionary build(const FieldSet& fields, const DictionarySpec& spec,
                 const std::optional<SampleMask>& mask = std::nullopt, BuildOptions options = {});

/// Same as build() for a complex field u = re + i*im (both sets share names and layout).
ComplexSystem build_complex(const FieldSet& real_parts, const FieldSet& imag_parts,
                            const DictionarySpec& spec,
                            const std::optional<SampleMask>& mask = std::nullopt);

/// Uniform random row subset of size `count` without replacement.
Dictionary subsample(const Dictionary& dict, Eigen::Index count, std::uint64_t seed);
ComplexSystem subsample(const ComplexSystem& sys, Eigen::Index count, std::uint64_t seed);

/// Throws DictionaryError naming the first all-zero column.
void check_nonzero_columns(const Eigen::MatrixXd& phi, const std::vector<std::string>& names);

/// Row order used by subsample(): a seeded partial Fisher-Yates shuffle of 0..n-1.
std::vector<Eigen::Index> sample_rows(Eigen::Index n, Eigen::Index count, std::uint64_t seed);

}  // namespace pdediscover
