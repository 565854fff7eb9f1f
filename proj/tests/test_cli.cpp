#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

fs::path scratch() {
  const fs::path dir = fs::path(TEST_SCRATCH_DIR) / "cli";
  fs::create_directories(dir);
  return dir;
}

// Runs the CLI inside the scratch directory and captures stdout.
Run run(const std::string& args) {
  const std::string cmd = "cd '" + scratch().string() + "' && '" + PDEDISCOVER_CLI + "' " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), pipe)) r.out += buf.data();
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

void write(const std::string& name, const std::string& text) { std::ofstream(scratch() / name) << text; }

std::string slurp(const std::string& name) {
  std::ifstream in(scratch() / name, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double residual_from(const std::string& out) {
  const auto pos = out.find("residual: ");
  REQUIRE(pos != std::string::npos);
  return std::stod(out.substr(pos + 10));
}

const char* kFisherConfig = R"({
  "format_version": 1,
  "input": ["fisher.json"],
  "preprocess": {"subsample_count": 3000, "seed": 1},
  "solver": {"lambda": 10000, "tau": 1e-12, "max_outer": 500},
  "output_path": "report.json"
})";

void ensure_fisher() {
  if (!fs::exists(scratch() / "fisher.json")) REQUIRE(run("simulate fisher --out fisher.json").code == 0);
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("help exits cleanly") {
    const auto r = run("--help");
    CHECK(r.code == 0);
    CHECK(r.out.find("simulate") != std::string::npos);
    CHECK(r.out.find("discover") != std::string::npos);
  }

  TEST_CASE("simulate writes grids and reports residuals") {
    const auto fisher = run("simulate fisher --out fisher.json");
    CHECK(fisher.code == 0);
    CHECK(fs::exists(scratch() / "fisher.json"));
    CHECK(residual_from(fisher.out) < 1e-2);

    const auto kdv = run("simulate kdv_soliton --out kdv.json --n-t 101");
    CHECK(kdv.code == 0);
    CHECK(kdv.out.find("analytic") != std::string::npos);
    CHECK(residual_from(kdv.out) < 1e-8);

    const auto sg = run("simulate sine_gordon --out sg.json --n-x 64 --n-t 64");
    CHECK(sg.code == 0);
    CHECK(sg.out.find("(64 x 64)") != std::string::npos);
  }

  TEST_CASE("simulate rejects bad input") {
    CHECK(run("simulate heat --out heat.json").code == 1);
    CHECK(run("simulate fisher").code == 1);
    CHECK(run("simulate fisher --out f.json --d 50 --substeps 1").code == 1);
  }

  TEST_CASE("discover writes a reproducible report") {
    ensure_fisher();
    write("fisher_cfg.json", kFisherConfig);
    const auto first = run("discover --config fisher_cfg.json");
    CHECK(first.code == 0);
    CHECK(first.out.rfind("u_t = ", 0) == 0);
    const std::string a = slurp("report.json");
    CHECK(run("discover --config fisher_cfg.json").code == 0);
    CHECK(slurp("report.json") == a);
    CHECK(run("discover --config fisher_cfg.json --out other.json").code == 0);
    CHECK(fs::exists(scratch() / "other.json"));
  }

  TEST_CASE("evaluate compares with a truth file") {
    ensure_fisher();
    write("fisher_cfg.json", kFisherConfig);
    REQUIRE(run("discover --config fisher_cfg.json").code == 0);
    write("truth.json", R"({"format_version": 1, "terms": [{"name": "u", "re": 1}, {"name": "u^2", "re": -1},
                            {"name": "u_xx", "re": 0.1}]})");
    const auto r = run("evaluate report.json truth.json");
    CHECK(r.code == 0);
    CHECK(r.out.rfind("support: exact", 0) == 0);
    CHECK(r.out.find("missing: 0") != std::string::npos);
  }

  TEST_CASE("sweep prints a table") {
    ensure_fisher();
    write("sweep_cfg.json", R"({"format_version": 1, "input": ["fisher.json"],
      "preprocess": {"subsample_count": 2000, "seed": 1}, "solver": {"sigma2": 0.1, "tau": 1e-12}})");
    const auto r = run("sweep --config sweep_cfg.json --lambda 0.01,1,100");
    CHECK(r.code == 0);
    CHECK(r.out.rfind("lambda,support_size", 0) == 0);
    CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 4);
    CHECK(run("sweep --config sweep_cfg.json --lambda 1").code == 1);
  }

  TEST_CASE("error exit codes") {
    ensure_fisher();
    write("bad_key.json", R"({"format_version": 1, "input": ["fisher.json"], "solver": {"lamda": 1}})");
    CHECK(run("discover --config bad_key.json").code == 1);
    write("empty_dict.json", R"({"format_version": 1, "input": ["fisher.json"],
      "dictionary": {"max_derivative_order": 0, "max_power": 0, "include_constant": false}})");
    CHECK(run("discover --config empty_dict.json").code == 1);
    write("missing_input.json", R"({"format_version": 1, "input": ["nowhere.json"], "output_path": "r.json"})");
    CHECK(run("discover --config missing_input.json").code == 3);
    CHECK(run("discover --config no_such_config.json").code == 1);
    CHECK(run("evaluate no_report.json truth.json").code == 3);
  }
}
