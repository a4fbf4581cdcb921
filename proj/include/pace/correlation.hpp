#pragma once

#include <optional>
#include <span>

#include <Eigen/Dense>

#include "pace/params.hpp"

namespace pace {

/// Kernel configuration. Only the isotropic case kappa = 0 is supported;
/// the general angle-of-arrival concentration requires a complex-argument
/// Bessel evaluation and is rejected at construction.
struct KernelParams {
  double lambda0;
  double kappa = 0.0;
  double mu = 0.0;  // mean AOA, unused when kappa = 0
  double theta = 0.0;
  double psi = 0.0;

  KernelParams(double lambda0_, double kappa_ = 0.0, double mu_ = 0.0,
               double theta_ = 0.0, double psi_ = 0.0);
};

/// Spatio-temporal correlation between channel responses sampled at path
/// positions z1 and z2: J0(2 pi |z2 - z1| / lambda0).
double kernel(double z1, double z2, double lambda0);

/// General isotropic form J0(sqrt(a^2 + b^2 - 2 a b cos(angle_diff))) with
/// a = 2 pi f_D tau and b = 2 pi D / lambda0. Collapses to J0(|a - b|) when
/// the array is aligned with the motion.
double isotropic_correlation(double a, double b, double angle_diff);

/// Correlation between the anchor samples of blocks m and n,
/// J0(2 pi |m - n| v0 T0 / (lambda0 B0)). T0 floored by default; exact_t0
/// switches to the un-floored value used by the closed-form cross-checks.
double block_lag_eta(int m, int n, const SystemParams& params, bool exact_t0 = false);

/// Correlations between an interpolation target and the L0 anchors on each
/// side: eta_prime[l-1] to the anchor l steps ahead of the bracketing index
/// k0 (positions z[k0 + l]), eta_dprime[l-1] to the anchor l - 1 steps
/// behind (positions z[k0 - l + 1]).
struct InterpolationEtas {
  Eigen::VectorXd eta_prime;
  Eigen::VectorXd eta_dprime;
  int k0 = -1;  // index into the anchor array of the bracketing anchor
};

/// anchors must be sorted ascending along the path and z_target must lie
/// within their span. Returns nullopt (history underflow) when fewer than L0
/// anchors are available on either side of the target.
std::optional<InterpolationEtas> interpolation_etas(double z_target,
                                                    std::span<const double> anchors,
                                                    double lambda0, int L0);

/// Covariance blocks of the stacked anchor-estimate window
/// (L0 ahead, target, L0 behind):
///   R1[i][i] = sigma0^2,       R1[i][j] = eta_{|i-j|} sigma0^4 (i != j)
///   R2[i][j] = eta_{L0+j-i} sigma0^4
/// r1/r2 hold the target cross-covariances once set_target_etas has run.
struct AnchorCovariance {
  int L0 = 0;
  Eigen::MatrixXd R1;
  Eigen::MatrixXd R2;
  Eigen::VectorXd r1;
  Eigen::VectorXd r2;
  double sigma0_sq = 0.0;

  /// The full 2 L0 x 2 L0 matrix [[R1, R2], [R2^T, R1]].
  Eigen::MatrixXd block() const;
};

/// eta_by_lag[d] is the anchor correlation at block lag d; at least 2 L0
/// entries are required (lags 0 .. 2 L0 - 1).
AnchorCovariance build_anchor_covariance(int L0, double sigma0_sq,
                                         std::span<const double> eta_by_lag);

/// Fills r1 = [eta'_{L0} .. eta'_1] sigma0^2 and r2 = [eta''_1 .. eta''_{L0}] sigma0^2.
void set_target_etas(AnchorCovariance& cov, const InterpolationEtas& etas);

}  // namespace pace
