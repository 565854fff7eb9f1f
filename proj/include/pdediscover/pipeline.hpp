#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "pdediscover/dictionary.hpp"
#include "pdediscover/grid.hpp"
#include "pdediscover/sbl.hpp"

namespace pdediscover {

/// A config document that does not validate. The message starts with the offending key path.
class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr int kFormatVersion = 1;

/// One input field: a real grid file, or a real/imaginary pair for complex data.
struct FieldInput {
  std::filesystem::path path;                     // real part
  std::optional<std::filesystem::path> imag_path;  // complex inputs only
  std::optional<std::string> name;                // overrides the grid's field name
};

struct PreprocessConfig {
  std::optional<double> noise_level;
  std::uint64_t seed = 0;
  std::optional<double> pod_threshold;
  std::optional<Eigen::Index> subsample_count;
  bool svd_reduce = false;
  std::optional<Eigen::Index> svd_rank;  // nullopt with svd_reduce = numerical rank ("full")
  bool complex = false;
};

struct DiscoveryConfig {
  std::vector<FieldInput> input;
  DictionarySpec dictionary;
  std::optional<Interval> sample_x;  // restrict sampling to a window of the grid
  std::optional<Interval> sample_t;
  PreprocessConfig preprocess;
  SBLConfig solver;
  std::filesystem::path output_path;
  std::filesystem::path base_dir;  // relative input/output paths resolve against this
};

/// Validates and converts a config document.
DiscoveryConfig config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
nlohmann::json config_to_json(const DiscoveryConfig& config);
DiscoveryConfig load_config(const std::filesystem::path& path);

/// Loaded fields; imag is set for complex inputs and shares names with real.
struct FieldData {
  FieldSet real;
  std::optional<FieldSet> imag;
};

FieldData load_fields(const DiscoveryConfig& config);

/// Regression system after every preprocessing step, ready for the solver.
struct PreparedSystem {
  Dictionary solve;  // what the solver sees (possibly reduced, possibly complex-mapped)
  Dictionary fit;    // sampled system before reduction, used for fit_error
  std::vector<std::string> term_names;  // dictionary terms (complex terms count once)
  std::string output_name;
  bool complex = false;
};

/**
 * noise -> POD -> dictionary -> subsample -> complex mapping -> SVD reduction.
 * Noise for field k is seeded from (seed, k), subsampling from (seed, stream 1000).
 */
PreparedSystem prepare_system(const DiscoveryConfig& config, const FieldData& fields);

struct ReportTerm {
  std::string name;
  std::complex<double> coefficient;
};

struct SolverDiagnostics {
  int iterations = 0;
  bool converged = false;
  double kkt_residual = 0.0;
  double kkt_tolerance = 0.0;
  double sigma2 = 0.0;
  double lambda = 1.0;
  std::vector<double> cost_trace;
};

struct DiscoveredPDE {
  std::string output_name;
  std::vector<ReportTerm> terms;  // nonzero coefficients, descending magnitude
  bool complex = false;
  double fit_error = 0.0;         // ||y - Phi theta||^2 / ||y||^2
  int support_size = 0;
  SolverDiagnostics solver;

  std::string equation() const;  // e.g. "u_t = 0.99 u - 1.01 u^2"
};

DiscoveredPDE solve_prepared(const PreparedSystem& system, const SBLConfig& solver);
DiscoveredPDE discover(const DiscoveryConfig& config, const FieldData& fields);
DiscoveredPDE discover(const DiscoveryConfig& config);

/// Report document; `config` (when given) is embedded for provenance.
nlohmann::json report_to_json(const DiscoveredPDE& pde, const DiscoveryConfig* config = nullptr);
DiscoveredPDE report_from_json(const nlohmann::json& doc);

/// Truth documents: {"format_version": 1, "terms": [{"name", "re", "im"?}]}.
std::vector<TermCoefficient> truth_from_json(const nlohmann::json& doc);

struct Evaluation {
  CoefficientError error;
  double fit_error = 0.0;
  bool exact_support() const { return error.missing == 0 && error.spurious == 0; }
};

/// Compares term names after canonicalization, so "u_xx*u" matches "u*u_xx".
Evaluation evaluate(const DiscoveredPDE& report, const std::vector<TermCoefficient>& truth);
std::string format_evaluation(const Evaluation& evaluation);

struct SweepRow {
  double lambda = 0.0;
  int support_size = 0;
  double fit_error = 0.0;
  std::vector<std::string> terms;
  bool converged = false;
};

/// One solve per lambda on a single prepared system; rows sorted by lambda.
std::vector<SweepRow> sweep(const DiscoveryConfig& config, const FieldData& fields, std::vector<double> lambdas);
std::string format_sweep_table(const std::vector<SweepRow>& rows);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace pdediscover
