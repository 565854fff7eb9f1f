#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

namespace pdediscover {

/// Syntax or semantic error in a term expression; `position` is a 0-based offset.
class ParseError : public std::invalid_argument {
public:
  ParseError(const std::string& message, std::size_t position)
      : std::invalid_argument(message + " (at position " + std::to_string(position) + ")"),
        position_(position) {}
  std::size_t position() const { return position_; }

private:
  std::size_t position_;
};

// Declaration order is the canonical sort order of factors sharing a field.
enum class Wrapper { modulus, none, sin, cos };

struct Factor {
  std::string field;
  Wrapper wrapper = Wrapper::none;
  int derivative = 0;  // spatial order, only with Wrapper::none
  int exponent = 1;

  auto key() const { return std::tie(field, wrapper, derivative); }
  bool operator==(const Factor&) const = default;
};

/**
 * A product of powers of field values, spatial derivatives, sin/cos of a field,
 * and moduli. An empty factor list is the constant term "1". Factors are kept in
 * canonical order with equal bases merged, so equal terms compare equal and have
 * the same name().
 */
class CandidateTerm {
public:
  CandidateTerm() = default;  // the constant term
  explicit CandidateTerm(std::vector<Factor> factors);

  const std::vector<Factor>& factors() const { return factors_; }
  bool is_constant() const { return factors_.empty(); }
  std::string name() const;
  int max_derivative() const;

  bool operator==(const CandidateTerm& other) const { return factors_ == other.factors_; }

private:
  std::vector<Factor> factors_;
};

/// Left-hand side of the regression: a pure time derivative of one field.
struct OutputTerm {
  std::string field;
  int time_order = 1;  // 1 -> u_t, 2 -> u_tt
  std::string name() const { return field + (time_order == 1 ? "_t" : "_tt"); }
};

/// Parses one term. When `known_fields` is non-empty, other field names are rejected.
CandidateTerm parse_term(std::string_view expr, const std::vector<std::string>& known_fields = {});

/// Parses "u_t" or "u_tt".
OutputTerm parse_output(std::string_view expr, const std::vector<std::string>& known_fields = {});

/// Sampled values of `field`'s `derivative`-th spatial derivative at the selected cells.
template <typename Scalar>
using FactorLookup =
    std::function<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>&(const std::string& field, int derivative)>;

/// Evaluates the term elementwise over `rows` sampled cells.
Eigen::VectorXd evaluate_term(const CandidateTerm& term, Eigen::Index rows,
                              const FactorLookup<double>& lookup);
Eigen::VectorXcd evaluate_term(const CandidateTerm& term, Eigen::Index rows,
                               const FactorLookup<std::complex<double>>& lookup);

}  // namespace pdediscover
