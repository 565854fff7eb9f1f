#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "oracles.hpp"

#include "pdediscover/grid.hpp"
#include "pdediscover/grid_io.hpp"
#include "pdediscover/simulate.hpp"

namespace pd = pdediscover;
using Eigen::MatrixXd;

namespace {

pd::SnapshotGrid ramp_grid(Eigen::Index nx, Eigen::Index nt) {
  MatrixXd v(nx, nt);
  for (Eigen::Index j = 0; j < nx; ++j) {
    for (Eigen::Index i = 0; i < nt; ++i) v(j, i) = 0.5 * static_cast<double>(j) - 0.25 * static_cast<double>(i);
  }
  return pd::SnapshotGrid(v, 0.1, 0.2, -1.0, 3.0);
}

std::filesystem::path scratch(const std::string& name) {
  const std::filesystem::path dir = std::filesystem::path(TEST_SCRATCH_DIR) / "grid";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_SUITE("grid") {
  TEST_CASE("constructor enforces shape, spacing and finiteness") {
    CHECK_THROWS_AS(pd::SnapshotGrid(MatrixXd::Zero(2, 5), 0.1, 0.1), pd::GridError);
    CHECK_THROWS_AS(pd::SnapshotGrid(MatrixXd::Zero(5, 2), 0.1, 0.1), pd::GridError);
    CHECK_THROWS_AS(pd::SnapshotGrid(MatrixXd::Zero(3, 3), 0.0, 0.1), pd::GridError);
    CHECK_THROWS_AS(pd::SnapshotGrid(MatrixXd::Zero(3, 3), 0.1, -1.0), pd::GridError);
    MatrixXd bad = MatrixXd::Zero(3, 3);
    bad(1, 1) = std::nan("");
    CHECK_THROWS_AS(pd::SnapshotGrid(bad, 0.1, 0.1), pd::GridError);
    CHECK_NOTHROW(pd::SnapshotGrid(MatrixXd::Zero(3, 3), 0.1, 0.1));
  }

  TEST_CASE("coordinates follow origin and spacing") {
    const auto g = ramp_grid(6, 4);
    CHECK(g.x(0) == doctest::Approx(-1.0));
    CHECK(g.x(5) == doctest::Approx(-0.5));
    CHECK(g.t(3) == doctest::Approx(3.6));
  }

  TEST_CASE("field sets require a shared layout and unique names") {
    pd::FieldSet set;
    set.add(ramp_grid(5, 5));
    CHECK_THROWS_AS(set.add(ramp_grid(5, 5)), pd::GridError);
    CHECK_THROWS_AS(set.add(ramp_grid(6, 5).renamed("v")), pd::GridError);
    set.add(ramp_grid(5, 5).renamed("v"));
    CHECK(set.size() == 2);
    CHECK(set.contains("v"));
    CHECK_THROWS_AS(set.at("w"), pd::GridError);
  }

  TEST_CASE("add_noise at level zero returns the input") {
    const auto g = ramp_grid(7, 9);
    CHECK(pd::add_noise(g, 0.0, 5).values() == g.values());
  }

  TEST_CASE("add_noise is deterministic per seed") {
    const auto g = ramp_grid(7, 9);
    const auto a = pd::add_noise(g, 0.1, 42);
    const auto b = pd::add_noise(g, 0.1, 42);
    const auto c = pd::add_noise(g, 0.1, 43);
    CHECK(a.values() == b.values());
    CHECK(a.values() != c.values());
    CHECK_THROWS_AS(pd::add_noise(g, -0.1, 1), pd::GridError);
  }

  TEST_CASE("add_noise scale matches level times the data standard deviation on the Fisher solution") {
    const auto clean = pd::fisher_solve(pd::FisherParams{}, pd::fisher_default_domain());
    const double target = 0.01 * pd::population_std(clean.values());
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const double r = pd::rmse(pd::add_noise(clean, 0.01, seed), clean);
      CHECK(std::abs(r - target) <= 0.2 * target);
    }
  }

  TEST_CASE("population_std matches a direct two-pass computation") {
    oracle::Rng rng(3);
    const MatrixXd v = oracle::gaussian_matrix(rng, 11, 13);
    const double mean = v.mean();
    const double direct = std::sqrt((v.array() - mean).square().sum() / static_cast<double>(v.size()));
    CHECK(pd::population_std(v) == doctest::Approx(direct).epsilon(1e-12));
  }

  TEST_CASE("rmse examples") {
    const auto g = ramp_grid(4, 4);
    CHECK(pd::rmse(g, g) == 0.0);
    const auto shifted = g.with_values((g.values().array() + 0.75).matrix());
    CHECK(pd::rmse(g, shifted) == doctest::Approx(0.75));
    const auto zeros = pd::SnapshotGrid(MatrixXd::Zero(3, 3), 1.0, 1.0);
    const auto ones = pd::SnapshotGrid(MatrixXd::Ones(3, 3), 1.0, 1.0);
    CHECK(pd::rmse(zeros, ones) == doctest::Approx(1.0));
    CHECK_THROWS_AS(pd::rmse(g, ramp_grid(5, 4)), pd::GridError);
  }

  TEST_CASE("rmse is symmetric and nonnegative") {
    oracle::Rng rng(9);
    for (int trial = 0; trial < 20; ++trial) {
      const pd::SnapshotGrid a(oracle::gaussian_matrix(rng, 5, 6), 1.0, 1.0);
      const pd::SnapshotGrid b(oracle::gaussian_matrix(rng, 5, 6), 1.0, 1.0);
      CHECK(pd::rmse(a, b) == pd::rmse(b, a));
      CHECK(pd::rmse(a, b) >= 0.0);
      CHECK(pd::rmse(a, a) == 0.0);
    }
  }

  TEST_CASE("crop to the full extent is the identity") {
    const auto g = ramp_grid(10, 8);
    const auto c = pd::crop(g, {-100.0, 100.0}, {-100.0, 100.0});
    CHECK(c.values() == g.values());
    CHECK(c.x0() == g.x0());
    CHECK(c.t0() == g.t0());
  }

  TEST_CASE("crop keeps spacing and shifts the origin") {
    const auto g = ramp_grid(10, 8);
    // rows 2..5 sit at -0.8 .. -0.5
    const auto c = pd::crop(g, {-0.85, -0.45}, {-100.0, 100.0});
    CHECK(c.nx() == 4);
    CHECK(c.nt() == 8);
    CHECK(c.x0() == doctest::Approx(g.x0() + 2 * g.dx()));
    CHECK(c.dx() == g.dx());
    CHECK(c.dt() == g.dt());
    CHECK(c.values() == g.values().middleRows(2, 4));
  }

  TEST_CASE("crop to one cell or to nothing raises") {
    const auto g = ramp_grid(10, 8);
    CHECK_THROWS_AS(pd::crop(g, {g.x(3), g.x(3)}, {g.t(2), g.t(2)}), pd::GridError);
    CHECK_THROWS_AS(pd::crop(g, {50.0, 60.0}, {-100.0, 100.0}), pd::GridError);
  }

  TEST_CASE("grid files round-trip exactly") {
    oracle::Rng rng(11);
    const pd::SnapshotGrid g(oracle::gaussian_matrix(rng, 6, 5) * 1e3, 0.013, 0.07, -2.5, 1.25, "w");
    const auto meta = scratch("roundtrip.json");
    pd::write_grid(g, meta);
    const auto back = pd::read_grid(meta);
    CHECK(back.values() == g.values());
    CHECK(back.dx() == g.dx());
    CHECK(back.dt() == g.dt());
    CHECK(back.x0() == g.x0());
    CHECK(back.t0() == g.t0());
    CHECK(back.field_name() == "w");
  }

  TEST_CASE("reading missing or malformed grid files raises the documented errors") {
    CHECK_THROWS_AS(pd::read_grid(scratch("does_not_exist.json")), pd::IoError);
    const auto meta = scratch("broken.json");
    std::ofstream(meta) << "{ not json";
    CHECK_THROWS_AS(pd::read_grid(meta), pd::IoError);

    const pd::SnapshotGrid g(MatrixXd::Ones(3, 3), 1.0, 1.0);
    const auto good = scratch("short.json");
    const auto values = pd::write_grid(g, good);
    std::ofstream(values) << "1,1,1\n1,1,1\n";
    CHECK_THROWS_AS(pd::read_grid(good), pd::GridError);
  }
}
