#include <cmath>

#include "doctest.h"
#include "oracles.hpp"

#include "pdediscover/preprocess.hpp"
#include "pdediscover/simulate.hpp"

namespace pd = pdediscover;
using Eigen::Index;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

namespace {

pd::Dictionary random_dictionary(oracle::Rng& rng, Index n, Index m) {
  pd::Dictionary d;
  d.phi = oracle::gaussian_matrix(rng, n, m);
  d.y = oracle::gaussian_vector(rng, n);
  for (Index j = 0; j < m; ++j) d.column_names.push_back("c" + std::to_string(j));
  d.output_name = "u_t";
  for (Index r = 0; r < n; ++r) d.sample_coords.push_back({r, 0});
  return d;
}

pd::ComplexSystem random_complex(oracle::Rng& rng, Index n, Index m) {
  pd::ComplexSystem s;
  s.phi_c = MatrixXcd(n, m);
  s.phi_c.real() = oracle::gaussian_matrix(rng, n, m);
  s.phi_c.imag() = oracle::gaussian_matrix(rng, n, m);
  s.y_c = VectorXcd(n);
  s.y_c.real() = oracle::gaussian_vector(rng, n);
  s.y_c.imag() = oracle::gaussian_vector(rng, n);
  for (Index j = 0; j < m; ++j) s.column_names.push_back("t" + std::to_string(j));
  s.output_name = "u_t";
  for (Index r = 0; r < n; ++r) s.sample_coords.push_back({r, 0});
  return s;
}

}  // namespace

TEST_SUITE("preprocess") {
  TEST_CASE("rank-one data is reproduced by a single mode") {
    oracle::Rng rng(1);
    const MatrixXd u = oracle::gaussian_vector(rng, 20) * oracle::gaussian_vector(rng, 15).transpose();
    for (double threshold : {0.5, 0.9999, 1.0}) {
      const auto [denoised, pod] = pd::pod_denoise(pd::SnapshotGrid(u, 0.1, 0.1), threshold);
      CHECK(pod.rank == 1);
      CHECK((denoised.values() - u).cwiseAbs().maxCoeff() < 1e-12 * u.cwiseAbs().maxCoeff());
    }
  }

  TEST_CASE("threshold 1 keeps the data to round-off") {
    oracle::Rng rng(2);
    const MatrixXd u = oracle::gaussian_matrix(rng, 12, 9);
    const auto [denoised, pod] = pd::pod_denoise(pd::SnapshotGrid(u, 0.1, 0.1), 1.0);
    CHECK(pod.rank <= 9);
    CHECK((denoised.values() - u).cwiseAbs().maxCoeff() < 1e-12);
  }

  TEST_CASE("mode structure and energy accounting") {
    oracle::Rng rng(3);
    const MatrixXd u = oracle::gaussian_matrix(rng, 30, 5) * oracle::gaussian_matrix(rng, 5, 40) +
                       1e-3 * oracle::gaussian_matrix(rng, 30, 40);
    const pd::SnapshotGrid g(u, 0.1, 0.1);
    const auto [denoised, pod] = pd::pod_denoise(g, 0.9999);
    CHECK(pod.modes.cols() == pod.rank);
    CHECK((pod.modes.transpose() * pod.modes - MatrixXd::Identity(pod.rank, pod.rank)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(pod.energy_ratio >= 0.9999);
    for (Index k = 1; k < pod.rank; ++k) CHECK(pod.singular_values(k) <= pod.singular_values(k - 1));
    CHECK((pod.coefficients - pod.modes.transpose() * u).cwiseAbs().maxCoeff() < 1e-10);
    // minimal rank: one fewer mode misses the threshold
    const Eigen::JacobiSVD<MatrixXd> svd(u);
    const VectorXd s2 = svd.singularValues().array().square();
    CHECK(s2.head(pod.rank - 1).sum() / s2.sum() < 0.9999);
    const double total = u.squaredNorm();
    const double kept = denoised.values().squaredNorm();
    const double removed = (u - denoised.values()).squaredNorm();
    CHECK(std::abs(total - kept - removed) <= 1e-8 * total);
  }

  TEST_CASE("denoising is idempotent") {
    oracle::Rng rng(4);
    const MatrixXd u = oracle::gaussian_matrix(rng, 25, 4) * oracle::gaussian_matrix(rng, 4, 30) +
                       0.01 * oracle::gaussian_matrix(rng, 25, 30);
    const auto once = pd::pod_denoise(pd::SnapshotGrid(u, 0.1, 0.1), 0.9999).first;
    const auto twice = pd::pod_denoise(once, 0.9999).first;
    CHECK((once.values() - twice.values()).cwiseAbs().maxCoeff() < 1e-12 * (1.0 + u.cwiseAbs().maxCoeff()));
  }

  TEST_CASE("a second pass keeps no more modes, and the same rank means the same grid") {
    // The minimal-rank energy rule can drop a further mode once the tail is gone,
    // so idempotence holds only when the rank is unchanged.
    oracle::Rng rng(14);
    for (int trial = 0; trial < 20; ++trial) {
      const MatrixXd u = oracle::gaussian_matrix(rng, 30, 6) * oracle::gaussian_matrix(rng, 6, 25) +
                         0.05 * oracle::gaussian_matrix(rng, 30, 25);
      const auto [once, first] = pd::pod_denoise(pd::SnapshotGrid(u, 0.1, 0.1), 0.999);
      const auto [twice, second] = pd::pod_denoise(once, 0.999);
      CHECK(second.rank <= first.rank);
      if (second.rank == first.rank) {
        CHECK((once.values() - twice.values()).cwiseAbs().maxCoeff() < 1e-12 * (1.0 + u.cwiseAbs().maxCoeff()));
      }
    }
  }

  TEST_CASE("denoising brings noisy Fisher data closer to the clean solution") {
    const auto clean = pd::fisher_solve(pd::FisherParams{}, pd::fisher_default_domain());
    const auto noisy = pd::add_noise(clean, 0.01, 7);
    const auto denoised = pd::pod_denoise(noisy, 0.9999).first;
    CHECK(pd::rmse(denoised, clean) < pd::rmse(noisy, clean));
  }

  TEST_CASE("invalid thresholds") {
    const pd::SnapshotGrid g(MatrixXd::Ones(4, 4), 0.1, 0.1);
    CHECK_THROWS_AS(pd::pod_denoise(g, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(pd::pod_denoise(g, 1.5), std::invalid_argument);
  }

  TEST_CASE("numerical rank") {
    oracle::Rng rng(5);
    const MatrixXd low = oracle::gaussian_matrix(rng, 40, 3) * oracle::gaussian_matrix(rng, 3, 8);
    CHECK(pd::numerical_rank(low) == 3);
    CHECK(pd::numerical_rank(oracle::gaussian_matrix(rng, 40, 8)) == 8);
  }

  TEST_CASE("reduction at full rank preserves least-squares solutions") {
    oracle::Rng rng(6);
    const auto d = random_dictionary(rng, 500, 12);
    const auto r = pd::svd_reduce(d);
    CHECK(r.rows() == 12);
    CHECK(r.column_names == d.column_names);
    const VectorXd full = d.phi.colPivHouseholderQr().solve(d.y);
    const VectorXd reduced = r.phi.colPivHouseholderQr().solve(r.y);
    CHECK((full - reduced).cwiseAbs().maxCoeff() < 1e-8);
  }

  TEST_CASE("reduction keeps residuals up to a constant") {
    oracle::Rng rng(7);
    auto d = random_dictionary(rng, 60, 4);
    Eigen::HouseholderQR<MatrixXd> qr(d.phi);
    d.phi = qr.householderQ() * MatrixXd::Identity(60, 4);
    const auto r = pd::svd_reduce(d, 4);
    double constant = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
      const VectorXd theta = oracle::gaussian_vector(rng, 4);
      const double gap = (d.y - d.phi * theta).squaredNorm() - (r.y - r.phi * theta).squaredNorm();
      if (trial == 0) constant = gap;
      CHECK(gap == doctest::Approx(constant).epsilon(1e-10));
    }
  }

  TEST_CASE("reduction below the rank changes solutions but still succeeds") {
    oracle::Rng rng(8);
    auto d = random_dictionary(rng, 50, 3);
    const auto r = pd::svd_reduce(d, 1);
    CHECK(r.rows() == 1);
    CHECK_THROWS_AS(pd::svd_reduce(d, 4), std::invalid_argument);
  }

  TEST_CASE("complex to real mapping: scalar example") {
    pd::ComplexSystem s;
    s.phi_c = MatrixXcd::Ones(1, 1);
    s.y_c = VectorXcd::Constant(1, std::complex<double>(1.0, 2.0));
    s.column_names = {"u"};
    s.output_name = "u_t";
    s.sample_coords = {{0, 0}};
    const auto d = pd::complex_to_real(s);
    CHECK(d.y == (VectorXd(2) << 1.0, 2.0).finished());
    CHECK(d.phi == MatrixXd::Identity(2, 2));
    CHECK(d.column_names == std::vector<std::string>{"Re(u)", "Im(u)"});
  }

  TEST_CASE("complex to real mapping: real-only input is block diagonal") {
    oracle::Rng rng(9);
    auto s = random_complex(rng, 5, 3);
    s.phi_c.imag().setZero();
    s.y_c.imag().setZero();
    const auto d = pd::complex_to_real(s);
    CHECK(d.phi.topRightCorner(5, 3).isZero());
    CHECK(d.phi.bottomLeftCorner(5, 3).isZero());
    CHECK(d.y.tail(5).isZero());
  }

  TEST_CASE("complex round trip agrees with the complex normal equations") {
    oracle::Rng rng(10);
    for (int trial = 0; trial < 10; ++trial) {
      const auto s = random_complex(rng, 6, 3);
      const auto d = pd::complex_to_real(s);
      const VectorXd real_solution = d.phi.colPivHouseholderQr().solve(d.y);
      const VectorXcd mapped = pd::real_to_complex(real_solution);
      const VectorXcd expected = oracle::complex_least_squares(s.phi_c, s.y_c);
      CHECK((mapped - expected).cwiseAbs().maxCoeff() < 1e-10);
    }
  }

  TEST_CASE("exactly determined complex systems round-trip to the exact solution") {
    oracle::Rng rng(11);
    const auto s = random_complex(rng, 3, 3);
    const VectorXcd exact = s.phi_c.fullPivLu().solve(s.y_c);
    const auto d = pd::complex_to_real(s);
    const VectorXcd back = pd::real_to_complex(d.phi.fullPivLu().solve(d.y));
    CHECK((back - exact).cwiseAbs().maxCoeff() < 1e-10);
  }

  TEST_CASE("complex to real preserves residual norms") {
    oracle::Rng rng(12);
    const auto s = random_complex(rng, 8, 3);
    const auto d = pd::complex_to_real(s);
    for (int trial = 0; trial < 10; ++trial) {
      VectorXcd theta(3);
      theta.real() = oracle::gaussian_vector(rng, 3);
      theta.imag() = oracle::gaussian_vector(rng, 3);
      VectorXd stacked(6);
      stacked << theta.real(), theta.imag();
      CHECK((s.y_c - s.phi_c * theta).norm() == doctest::Approx((d.y - d.phi * stacked).norm()).epsilon(1e-12));
    }
  }

  TEST_CASE("real to complex") {
    const VectorXcd z = pd::real_to_complex((VectorXd(4) << 1, 2, 3, 4).finished());
    CHECK(z(0) == std::complex<double>(1, 3));
    CHECK(z(1) == std::complex<double>(2, 4));
    CHECK(pd::real_to_complex(VectorXd::Zero(4)) == VectorXcd::Zero(2));
    CHECK_THROWS_AS(pd::real_to_complex(VectorXd::Zero(3)), std::invalid_argument);
  }
}
