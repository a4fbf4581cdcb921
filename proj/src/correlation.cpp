#include "pace/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "pace/numerics.hpp"

namespace pace {

KernelParams::KernelParams(double lambda0_, double kappa_, double mu_, double theta_, double psi_)
    : lambda0(lambda0_), kappa(kappa_), mu(mu_), theta(theta_), psi(psi_) {
  if (!(lambda0 > 0.0)) throw std::invalid_argument("KernelParams: lambda0 must be positive");
  if (kappa != 0.0) {
    throw std::invalid_argument(
        "KernelParams: kappa != 0 requires a complex-argument Bessel kernel, which is not supported");
  }
}

double kernel(double z1, double z2, double lambda0) {
  if (!(lambda0 > 0.0)) throw std::invalid_argument("kernel: lambda0 must be positive");
  return bessel_j0(2.0 * std::numbers::pi * std::abs(z2 - z1) / lambda0);
}

double isotropic_correlation(double a, double b, double angle_diff) {
  if (a < 0.0 || b < 0.0) throw std::invalid_argument("isotropic_correlation: a, b must be >= 0");
  double sq = a * a + b * b - 2.0 * a * b * std::cos(angle_diff);
  return bessel_j0(std::sqrt(std::max(sq, 0.0)));
}

double block_lag_eta(int m, int n, const SystemParams& params, bool exact_t0) {
  if (m < 1 || n < 1) throw std::invalid_argument("block_lag_eta: block indices must be >= 1");
  double t0_blocks = exact_t0 ? params.block_length_exact()
                              : static_cast<double>(block_length(params));
  double arg = 2.0 * std::numbers::pi * std::abs(m - n) * params.v0 * t0_blocks /
               (params.lambda0 * params.B0);
  return bessel_j0(arg);
}

std::optional<InterpolationEtas> interpolation_etas(double z_target,
                                                    std::span<const double> anchors,
                                                    double lambda0, int L0) {
  if (L0 < 1) throw std::invalid_argument("interpolation_etas: L0 must be >= 1");
  if (anchors.size() < 2) return std::nullopt;
  // Bracketing anchor: last position <= target (small tolerance so a target
  // coinciding with an anchor counts as sitting on it).
  const double tol = 1e-9 * lambda0;
  auto it = std::upper_bound(anchors.begin(), anchors.end(), z_target + tol);
  if (it == anchors.begin()) return std::nullopt;
  int k0 = static_cast<int>(std::distance(anchors.begin(), it)) - 1;
  if (k0 - L0 + 1 < 0) return std::nullopt;
  if (k0 + L0 >= static_cast<int>(anchors.size())) return std::nullopt;

  InterpolationEtas out;
  out.k0 = k0;
  out.eta_prime.resize(L0);
  out.eta_dprime.resize(L0);
  for (int l = 1; l <= L0; ++l) {
    out.eta_prime(l - 1) = kernel(z_target, anchors[k0 + l], lambda0);
    out.eta_dprime(l - 1) = kernel(z_target, anchors[k0 - l + 1], lambda0);
  }
  return out;
}

Eigen::MatrixXd AnchorCovariance::block() const {
  Eigen::MatrixXd b(2 * L0, 2 * L0);
  b.topLeftCorner(L0, L0) = R1;
  b.topRightCorner(L0, L0) = R2;
  b.bottomLeftCorner(L0, L0) = R2.transpose();
  b.bottomRightCorner(L0, L0) = R1;
  return b;
}

AnchorCovariance build_anchor_covariance(int L0, double sigma0_sq,
                                         std::span<const double> eta_by_lag) {
  if (L0 < 1) throw std::invalid_argument("build_anchor_covariance: L0 must be >= 1");
  if (!(sigma0_sq > 0.0 && sigma0_sq < 1.0)) {
    throw std::invalid_argument("build_anchor_covariance: sigma0_sq must lie in (0, 1)");
  }
  if (static_cast<int>(eta_by_lag.size()) < 2 * L0) {
    throw std::invalid_argument("build_anchor_covariance: need eta values for lags 0 .. 2 L0 - 1");
  }
  const double s2 = sigma0_sq;
  const double s4 = sigma0_sq * sigma0_sq;
  AnchorCovariance cov;
  cov.L0 = L0;
  cov.sigma0_sq = s2;
  cov.R1.resize(L0, L0);
  cov.R2.resize(L0, L0);
  for (int i = 0; i < L0; ++i) {
    for (int j = 0; j < L0; ++j) {
      cov.R1(i, j) = (i == j) ? s2 : eta_by_lag[std::abs(i - j)] * s4;
      cov.R2(i, j) = eta_by_lag[L0 + j - i] * s4;
    }
  }
  return cov;
}

void set_target_etas(AnchorCovariance& cov, const InterpolationEtas& etas) {
  const int L0 = cov.L0;
  if (etas.eta_prime.size() != L0 || etas.eta_dprime.size() != L0) {
    throw std::invalid_argument("set_target_etas: eta vectors must have length L0");
  }
  cov.r1.resize(L0);
  cov.r2.resize(L0);
  for (int l = 1; l <= L0; ++l) {
    cov.r1(L0 - l) = etas.eta_prime(l - 1) * cov.sigma0_sq;   // r1 = [eta'_{L0} .. eta'_1] s2
    cov.r2(l - 1) = etas.eta_dprime(l - 1) * cov.sigma0_sq;   // r2 = [eta''_1 .. eta''_{L0}] s2
  }
}

}  // namespace pace
