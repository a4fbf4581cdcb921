#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>

#include "oracles.hpp"
#include "pace/correlation.hpp"
#include "pace/numerics.hpp"

using namespace pace;

namespace {
SystemParams reference_params() {
  SystemParams p;
  p.lambda0 = 0.15;
  p.B0 = 1e7;
  p.v0 = 100.0;
  p.xi0 = 20.0;
  p.t0 = 5e-3;
  p.M = 16;
  p.N = 16;
  return p;
}
}  // namespace

TEST_CASE("kernel evaluates J0 of the scaled displacement") {
  CHECK(kernel(1.25, 1.25, 0.15) == 1.0);
  // Half-wavelength spacing: J0(pi).
  CHECK(kernel(0.0, 0.075, 0.15) == doctest::Approx(-0.304242177644093864).epsilon(1e-12));
  // One block advance at xi0 = 20: J0(pi/20).
  CHECK(kernel(0.0, 0.15 / 40, 0.15) == doctest::Approx(0.993841003338540684).epsilon(1e-12));
  // Symmetry and translation invariance.
  RngStream rng(23, 0);
  for (int i = 0; i < 200; ++i) {
    double z1 = rng.uniform01() * 10.0;
    double z2 = rng.uniform01() * 10.0;
    double shift = rng.uniform01() * 5.0;
    CHECK(kernel(z1, z2, 0.15) == kernel(z2, z1, 0.15));
    CHECK(kernel(z1 + shift, z2 + shift, 0.15) ==
          doctest::Approx(kernel(z1, z2, 0.15)).epsilon(1e-12));
  }
}

TEST_CASE("isotropic_correlation collapses by the law of cosines") {
  CHECK(isotropic_correlation(0.7, 0.3, 0.0) == doctest::Approx(bessel_j0(0.4)).epsilon(1e-13));
  CHECK(isotropic_correlation(0.0, 0.8, 1.1) == doctest::Approx(bessel_j0(0.8)).epsilon(1e-13));
  double a = 0.6;
  CHECK(isotropic_correlation(a, a, std::numbers::pi / 2) ==
        doctest::Approx(bessel_j0(a * std::sqrt(2.0))).epsilon(1e-13));
  // a = b with zero angle: zero displacement.
  CHECK(isotropic_correlation(0.5, 0.5, 0.0) == 1.0);
}

TEST_CASE("kappa != 0 is rejected") {
  CHECK_NOTHROW(KernelParams(0.15));
  CHECK_THROWS_AS(KernelParams(0.15, 0.3), std::invalid_argument);
}

TEST_CASE("block_lag_eta matches the kernel on anchor positions") {
  SystemParams p = reference_params();
  CHECK(block_lag_eta(4, 4, p) == 1.0);
  CHECK(block_lag_eta(1, 2, p, true) ==
        doctest::Approx(0.993841003338540684).epsilon(1e-12));  // J0(pi/20)
  CHECK(block_lag_eta(1, 3, p, true) ==
        doctest::Approx(0.975477774075249501).epsilon(1e-12));  // J0(pi/10)
  // Cross-module consistency: lag eta equals the kernel at anchor positions.
  for (int m = 1; m <= 6; ++m) {
    for (int n = 1; n <= 6; ++n) {
      double zm = column_position(p, m, 1);
      double zn = column_position(p, n, 1);
      CHECK(block_lag_eta(m, n, p) ==
            doctest::Approx(kernel(zm, zn, p.lambda0)).epsilon(1e-12));
    }
  }
}

TEST_CASE("interpolation_etas picks the bracketing window") {
  // Anchors one block-advance apart at xi0 = 20.
  double lambda0 = 0.15;
  double gap = lambda0 / 40.0;
  std::vector<double> anchors;
  for (int i = 0; i < 8; ++i) anchors.push_back(i * gap);

  SUBCASE("target on an anchor") {
    auto etas = interpolation_etas(anchors[3], anchors, lambda0, 1);
    REQUIRE(etas.has_value());
    CHECK(etas->k0 == 3);
    CHECK(etas->eta_dprime(0) == 1.0);  // zero displacement behind
    CHECK(etas->eta_prime(0) == doctest::Approx(0.993841003338540684).epsilon(1e-12));
  }
  SUBCASE("target at the midpoint") {
    double mid = anchors[3] + gap / 2;
    auto etas = interpolation_etas(mid, anchors, lambda0, 1);
    REQUIRE(etas.has_value());
    CHECK(etas->eta_prime(0) == doctest::Approx(0.998458468748376284).epsilon(1e-12));
    CHECK(etas->eta_dprime(0) == doctest::Approx(etas->eta_prime(0)).epsilon(1e-12));
  }
  SUBCASE("bounded magnitude") {
    auto etas = interpolation_etas(anchors[4] + 0.3 * gap, anchors, lambda0, 3);
    REQUIRE(etas.has_value());
    for (int l = 0; l < 3; ++l) {
      CHECK(std::abs(etas->eta_prime(l)) <= 1.0);
      CHECK(std::abs(etas->eta_dprime(l)) <= 1.0);
    }
  }
  SUBCASE("history underflow") {
    CHECK_FALSE(interpolation_etas(anchors[0] + gap / 2, anchors, lambda0, 2).has_value());
    CHECK_FALSE(interpolation_etas(anchors[6] + gap / 2, anchors, lambda0, 2).has_value());
  }
}

TEST_CASE("anchor covariance blocks follow the displayed matrices") {
  SUBCASE("L0 = 1 reduces to the scalar pair") {
    std::vector<double> etas = {1.0, 0.993841003338540684};
    AnchorCovariance cov = build_anchor_covariance(1, 0.5, etas);
    CHECK(cov.R1(0, 0) == 0.5);
    CHECK(cov.R2(0, 0) == doctest::Approx(0.993841003338540684 * 0.25).epsilon(1e-12));
  }
  SUBCASE("off-diagonal entries scale with sigma0^4") {
    std::vector<double> etas = {1.0, 0.993841003338540684, 0.975477774075249501,
                                0.951  /* arbitrary lag-3 value */};
    AnchorCovariance cov = build_anchor_covariance(2, 0.5, etas);
    CHECK(cov.R1(0, 1) == doctest::Approx(0.993841003338540684 * 0.25).epsilon(1e-12));
    CHECK(cov.R1(1, 0) == cov.R1(0, 1));
    CHECK(cov.R1(0, 0) == 0.5);
    // R2 lags: [i][j] has lag L0 + j - i.
    CHECK(cov.R2(0, 0) == doctest::Approx(0.975477774075249501 * 0.25).epsilon(1e-12));
    CHECK(cov.R2(1, 0) == doctest::Approx(0.993841003338540684 * 0.25).epsilon(1e-12));
    CHECK(cov.R2(0, 1) == doctest::Approx(0.951 * 0.25).epsilon(1e-12));

    Eigen::MatrixXd blk = cov.block();
    CHECK(blk.rows() == 4);
    CHECK((blk - blk.transpose()).norm() == 0.0);
  }
  SUBCASE("magnitude invariants") {
    std::vector<double> etas = {1.0, 0.9, 0.7, 0.4};
    AnchorCovariance cov = build_anchor_covariance(2, 0.8, etas);
    double s2 = 0.8, s4 = 0.64;
    for (int i = 0; i < 2; ++i) {
      CHECK(cov.R1(i, i) == s2);
      for (int j = 0; j < 2; ++j) {
        if (i != j) CHECK(std::abs(cov.R1(i, j)) <= s4);
        CHECK(std::abs(cov.R2(i, j)) <= s4);
      }
    }
  }
}

TEST_CASE("kernel covariance on distinct positions is PSD after small jitter") {
  RngStream rng(31, 0);
  for (int rep = 0; rep < 5; ++rep) {
    int n = 8 + static_cast<int>(rng.uniform01() * 24);
    std::vector<double> pos(n);
    double z = 0.0;
    for (int i = 0; i < n; ++i) {
      z += 0.002 + rng.uniform01() * 0.05;
      pos[i] = z;
    }
    Eigen::MatrixXd cov(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) cov(i, j) = kernel(pos[i], pos[j], 0.15);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    CHECK(es.eigenvalues().minCoeff() >= -1e-8);
  }
}
