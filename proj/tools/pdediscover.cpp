// pdediscover: simulate datasets, discover PDEs from them, evaluate and sweep.

#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "pdediscover/diffops.hpp"
#include "pdediscover/grid_io.hpp"
#include "pdediscover/pipeline.hpp"
#include "pdediscover/sbl.hpp"
#include "pdediscover/simulate.hpp"
#include "pdediscover/term.hpp"

namespace pd = pdediscover;

namespace {

enum ExitCode { kOk = 0, kConfig = 1, kSolver = 2, kIo = 3 };

struct SimulateOptions {
  std::string system;
  std::string out;
  std::optional<double> x_min, x_max, t_min, t_max;
  std::optional<long> n_x, n_t;
  double c = 0.3;
  double eps = 4.84e-4;
  double x_offset = 0.5;
  double nu = 0.1;
  double center = 0.0;
  double alpha = 1.0;
  double beta = 1.0;
  double d = 0.1;
  int substeps = -1;  // -1: generator default
};

pd::SimDomain apply_overrides(pd::SimDomain dom, const SimulateOptions& o) {
  if (o.x_min) dom.x_min = *o.x_min;
  if (o.x_max) dom.x_max = *o.x_max;
  if (o.t_min) dom.t_min = *o.t_min;
  if (o.t_max) dom.t_max = *o.t_max;
  if (o.n_x) dom.n_x = *o.n_x;
  if (o.n_t) dom.n_t = *o.n_t;
  return dom;
}

int run_simulate(const SimulateOptions& o) {
  std::optional<pd::SnapshotGrid> grid;
  double residual = 0.0;
  std::string residual_kind = "finite-difference";
  if (o.system == "sine_gordon") {
    grid = pd::sine_gordon_breather(apply_overrides(pd::sine_gordon_default_domain(), o));
    residual = pd::sine_gordon_fd_residual(*grid);
  } else if (o.system == "fisher") {
    pd::FisherParams p{o.alpha, o.beta, o.d, o.substeps < 0 ? 10 : o.substeps};
    grid = pd::fisher_solve(p, apply_overrides(pd::fisher_default_domain(), o));
    residual = pd::fisher_fd_residual(*grid, p, grid->t0() + 1.0);
    residual_kind = "finite-difference (t >= t_min + 1)";
  } else if (o.system == "burgers") {
    const pd::SimDomain dom = apply_overrides(pd::burgers_default_domain(), o);
    grid = pd::burgers_solve(o.nu, pd::gaussian_bump(dom, o.center), dom, o.substeps < 0 ? 0 : o.substeps);
    residual = pd::burgers_fd_residual(*grid, o.nu);
  } else if (o.system == "kdv_soliton") {
    const pd::SimDomain dom = apply_overrides(pd::kdv_default_domain(), o);
    grid = pd::kdv_soliton(o.c, o.eps, o.x_offset, dom);
    residual = pd::kdv_analytic_residual(o.c, o.eps, o.x_offset, dom);
    residual_kind = "analytic";
  } else {
    std::cerr << "error: unknown system '" << o.system
              << "' (expected sine_gordon, fisher, burgers or kdv_soliton)\n";
    return kConfig;
  }
  pd::write_grid(*grid, o.out);
  std::printf("wrote %s (%ld x %ld)\n", o.out.c_str(), static_cast<long>(grid->nx()), static_cast<long>(grid->nt()));
  std::printf("%s PDE residual: %.6e\n", residual_kind.c_str(), residual);
  return kOk;
}

int run_discover(const std::string& config_path, const std::string& out, std::optional<std::uint64_t> seed) {
  pd::DiscoveryConfig cfg = pd::load_config(config_path);
  if (seed) {
    cfg.preprocess.seed = *seed;
    cfg.solver.seed = *seed;
  }
  std::filesystem::path target = out.empty() ? cfg.output_path : std::filesystem::path(out);
  if (out.empty() && !target.empty() && target.is_relative()) target = cfg.base_dir / target;
  if (target.empty()) throw pd::ConfigError("output_path: missing (or pass --out)");

  const pd::DiscoveredPDE pde = pd::discover(cfg);
  pd::write_text_file(target, pd::report_to_json(pde, &cfg).dump(2) + "\n");
  std::cout << pde.equation() << "\n";
  std::printf("fit_error: %.6e; support_size: %d; iterations: %d; kkt_residual: %.3e\n", pde.fit_error,
              pde.support_size, pde.solver.iterations, pde.solver.kkt_residual);
  if (!pde.solver.converged) {
    std::cerr << "warning: solver did not converge within max_outer iterations\n";
    return kSolver;
  }
  return kOk;
}

int run_evaluate(const std::string& report_path, const std::string& truth_path) {
  const pd::DiscoveredPDE report = pd::report_from_json(pd::read_json_file(report_path));
  const auto truth = pd::truth_from_json(pd::read_json_file(truth_path));
  std::cout << pd::format_evaluation(pd::evaluate(report, truth));
  return kOk;
}

int run_sweep(const std::string& config_path, const std::vector<double>& lambdas, const std::string& out,
              std::optional<std::uint64_t> seed) {
  pd::DiscoveryConfig cfg = pd::load_config(config_path);
  if (seed) {
    cfg.preprocess.seed = *seed;
    cfg.solver.seed = *seed;
  }
  const auto rows = pd::sweep(cfg, pd::load_fields(cfg), lambdas);
  const std::string table = pd::format_sweep_table(rows);
  if (out.empty()) {
    std::cout << table;
  } else {
    pd::write_text_file(out, table);
    std::cout << "wrote " << out << " (" << rows.size() << " rows)\n";
  }
  for (const auto& r : rows) {
    if (!r.converged) {
      std::cerr << "warning: solver did not converge for lambda = " << r.lambda << "\n";
      return kSolver;
    }
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discover governing PDEs from spatiotemporal data with sparse Bayesian learning"};
  app.require_subcommand(1);

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Generate a dataset and write it as a grid file");
  simulate->add_option("system", sim.system, "sine_gordon | fisher | burgers | kdv_soliton")->required();
  simulate->add_option("--out", sim.out, "Grid metadata path (values go to <out>.csv)")->required();
  simulate->add_option("--x-min", sim.x_min, "Domain left edge");
  simulate->add_option("--x-max", sim.x_max, "Domain right edge");
  simulate->add_option("--n-x", sim.n_x, "Number of spatial points");
  simulate->add_option("--t-min", sim.t_min, "First snapshot time");
  simulate->add_option("--t-max", sim.t_max, "Last snapshot time");
  simulate->add_option("--n-t", sim.n_t, "Number of snapshots");
  simulate->add_option("--c", sim.c, "KdV soliton speed")->capture_default_str();
  simulate->add_option("--eps", sim.eps, "KdV dispersion coefficient")->capture_default_str();
  simulate->add_option("--x-offset", sim.x_offset, "KdV soliton position at t = 0")->capture_default_str();
  simulate->add_option("--nu", sim.nu, "Burgers viscosity")->capture_default_str();
  simulate->add_option("--center", sim.center, "Burgers Gaussian bump center")->capture_default_str();
  simulate->add_option("--alpha", sim.alpha, "Fisher growth rate")->capture_default_str();
  simulate->add_option("--beta", sim.beta, "Fisher saturation rate")->capture_default_str();
  simulate->add_option("--d", sim.d, "Fisher diffusion coefficient")->capture_default_str();
  simulate->add_option("--substeps", sim.substeps, "Explicit steps per snapshot (Fisher, Burgers)");

  std::string config_path, out_path;
  std::optional<std::uint64_t> seed;
  auto* discover = app.add_subcommand("discover", "Run the discovery pipeline described by a config file");
  discover->add_option("--config", config_path, "Config document (JSON)")->required()->check(CLI::ExistingFile);
  discover->add_option("--out", out_path, "Report path (overrides output_path)");
  discover->add_option("--seed", seed, "Overrides preprocess.seed and solver.seed");

  std::string report_path, truth_path;
  auto* evaluate = app.add_subcommand("evaluate", "Compare a report with known true coefficients");
  evaluate->add_option("report", report_path, "Report written by discover")->required();
  evaluate->add_option("truth", truth_path, "Truth document")->required();

  std::vector<double> lambdas;
  std::string sweep_config, sweep_out;
  std::optional<std::uint64_t> sweep_seed;
  auto* sweep = app.add_subcommand("sweep", "Solve once per lambda and tabulate support size and fit error");
  sweep->add_option("--config", sweep_config, "Config document (JSON)")->required()->check(CLI::ExistingFile);
  sweep->add_option("--lambda", lambdas, "Comma-separated lambda values")->required()->delimiter(',');
  sweep->add_option("--out", sweep_out, "Table path (default: stdout)");
  sweep->add_option("--seed", sweep_seed, "Overrides preprocess.seed and solver.seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    if (*simulate) return run_simulate(sim);
    if (*discover) return run_discover(config_path, out_path, seed);
    if (*evaluate) return run_evaluate(report_path, truth_path);
    if (*sweep) return run_sweep(sweep_config, lambdas, sweep_out, sweep_seed);
  } catch (const pd::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const pd::GridError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const pd::SolverError& e) {
    std::cerr << "error: solver failed: " << e.what() << "\n";
    return kSolver;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  }
  return kConfig;
}
