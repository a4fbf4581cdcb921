#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "pace/numerics.hpp"

using namespace pace;

TEST_CASE("bessel_j0 matches the series oracle and frozen references") {
  CHECK(bessel_j0(0.0) == 1.0);
  CHECK(bessel_j0(std::numbers::pi) == doctest::Approx(-0.304242177644093864).epsilon(1e-12));
  CHECK(bessel_j0(std::numbers::pi / 20) == doctest::Approx(0.993841003338540684).epsilon(1e-12));

  for (const auto& ref : oracle::j0_reference()) {
    CAPTURE(ref.x);
    CHECK(std::abs(bessel_j0(ref.x) - ref.value) <= 1e-12);
  }
  // Series oracle sweep across the regime split (the plain-summation oracle
  // itself drifts past ~20; frozen references cover larger arguments).
  for (double x = 0.0; x <= 20.0; x += 0.37) {
    CAPTURE(x);
    CHECK(std::abs(bessel_j0(x) - oracle::j0_series(x)) <= 1e-12);
  }
}

TEST_CASE("bessel_j0 is even and bounded by one") {
  RngStream rng(7, 0);
  for (int i = 0; i < 2000; ++i) {
    double x = (rng.uniform01() - 0.5) * 2e4;
    CAPTURE(x);
    CHECK(bessel_j0(x) == bessel_j0(-x));
    CHECK(std::abs(bessel_j0(x)) <= 1.0);
  }
  CHECK_THROWS_AS(bessel_j0(std::nan("")), std::domain_error);
  CHECK_THROWS_AS(bessel_j0(INFINITY), std::domain_error);
}

TEST_CASE("cholesky_psd factors PD matrices without jitter") {
  Eigen::MatrixXd I = Eigen::MatrixXd::Identity(4, 4);
  auto res = cholesky_psd(I, 0.0);
  CHECK(res.jitter_used == 0.0);
  CHECK((res.L - I).norm() == doctest::Approx(0.0).epsilon(1e-14));

  Eigen::MatrixXd A(2, 2);
  A << 1.0, 0.5, 0.5, 1.0;
  auto r2 = cholesky_psd(A, 0.0);
  CHECK(r2.L(0, 0) == doctest::Approx(1.0));
  CHECK(r2.L(1, 0) == doctest::Approx(0.5));
  CHECK(r2.L(1, 1) == doctest::Approx(std::sqrt(0.75)).epsilon(1e-12));
}

TEST_CASE("cholesky_psd escalates jitter on rank deficiency") {
  Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(3, 3);
  auto res = cholesky_psd(ones, 1e-8);
  CHECK(res.jitter_used >= 1e-8);
  for (int i = 0; i < 3; ++i) CHECK(res.L(i, i) >= std::sqrt(1e-8) * 0.99);
  Eigen::MatrixXd recon = res.L * res.L.transpose();
  Eigen::MatrixXd target = ones + res.jitter_used * Eigen::MatrixXd::Identity(3, 3);
  CHECK((recon - target).norm() / ones.norm() <= 1e-10);
}

TEST_CASE("cholesky_psd reports the jitter cap failure") {
  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 0.0, 0.0, -1.0;  // indefinite, beyond any allowed jitter
  CHECK_THROWS_AS(cholesky_psd(bad, 0.0), NumericalRankError);
  try {
    cholesky_psd(bad, 0.0);
  } catch (const NumericalRankError& e) {
    CHECK(e.min_eigenvalue == doctest::Approx(-1.0).epsilon(1e-9));
  }
}

TEST_CASE("cholesky_psd round trip on random PSD matrices") {
  RngStream rng(11, 0);
  for (int it = 0; it < 20; ++it) {
    int n = 2 + static_cast<int>(rng.uniform01() * 6);
    Eigen::MatrixXcd B(n, n);
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) B(i, j) = rng.complex_gaussian();
    }
    HermitianMatrix A = HermitianMatrix::symmetrized(B * B.adjoint());
    REQUIRE(A.check());
    auto res = cholesky_psd(A, 0.0);
    Eigen::MatrixXcd recon = res.L * res.L.adjoint();
    Eigen::MatrixXcd target = A.entries;
    target.diagonal().array() += res.jitter_used;
    CHECK((recon - target).norm() / A.entries.norm() <= 1e-10);
  }
}

TEST_CASE("logdet_capacity agrees with the eigenvalue oracle") {
  RngStream rng(3, 5);
  for (int it = 0; it < 25; ++it) {
    Eigen::MatrixXcd H(4, 4);
    for (int j = 0; j < 4; ++j) {
      for (int i = 0; i < 4; ++i) H(i, j) = rng.complex_gaussian();
    }
    double rho = rng.uniform01() * 100.0;
    CHECK(logdet_capacity(H, rho) ==
          doctest::Approx(oracle::logdet_eigen(H, rho)).epsilon(1e-10));
  }
}

TEST_CASE("logdet_capacity basics") {
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Identity(3, 3);
  CHECK(logdet_capacity(H, 0.0) == 0.0);
  CHECK(logdet_capacity(H, 3.0) == doctest::Approx(3.0).epsilon(1e-12));  // I + I = 2I
  Eigen::MatrixXcd bad = H;
  bad(0, 0) = std::nan("");
  CHECK_THROWS_AS(logdet_capacity(bad, 1.0), std::domain_error);
  CHECK_THROWS_AS(logdet_capacity(H, -1.0), std::domain_error);
}

TEST_CASE("logdet_capacity is nondecreasing in rho") {
  RngStream rng(9, 2);
  Eigen::MatrixXcd H(3, 5);
  for (int j = 0; j < 5; ++j) {
    for (int i = 0; i < 3; ++i) H(i, j) = rng.complex_gaussian();
  }
  double prev = 0.0;
  for (double rho = 0.0; rho < 50.0; rho += 2.7) {
    double v = logdet_capacity(H, rho);
    CHECK(v >= prev - 1e-12);
    prev = v;
  }
}

TEST_CASE("complex gaussian sampling moments and determinism") {
  const int n = 100000;
  RngStream rng(42, 17);
  Eigen::VectorXcd v = sample_standard_complex_gaussian(n, rng);

  // CLT bands: mean magnitude <= 3 sigma, |h|^2 mean within [0.98, 1.02].
  std::complex<double> mean = v.mean();
  CHECK(std::abs(mean) <= 3.0 / std::sqrt(static_cast<double>(n)));
  double power = v.squaredNorm() / n;
  CHECK(power > 0.98);
  CHECK(power < 1.02);
  double re_var = 0.0, im_var = 0.0;
  for (int i = 0; i < n; ++i) {
    re_var += v(i).real() * v(i).real();
    im_var += v(i).imag() * v(i).imag();
  }
  CHECK(re_var / n == doctest::Approx(0.5).epsilon(0.03));
  CHECK(im_var / n == doctest::Approx(0.5).epsilon(0.03));

  RngStream rng2(42, 17);
  Eigen::VectorXcd v2 = sample_standard_complex_gaussian(n, rng2);
  CHECK((v - v2).norm() == 0.0);

  RngStream other(42, 18);
  Eigen::VectorXcd v3 = sample_standard_complex_gaussian(n, other);
  CHECK((v - v3).norm() != 0.0);
  // Streams with distinct indices should be uncorrelated.
  std::complex<double> corr = (v.conjugate().array() * v3.array()).mean();
  CHECK(std::abs(corr) <= 3.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("pairwise_sum is order independent and exactish") {
  RngStream rng(5, 1);
  std::vector<double> vals(1000);
  for (auto& x : vals) x = rng.gaussian();
  double s1 = pairwise_sum(vals);
  double acc = 0.0;
  for (double x : vals) acc += x;
  CHECK(s1 == doctest::Approx(acc).epsilon(1e-12));
}
