#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "pace/numerics.hpp"
#include "pace/params.hpp"

namespace pace {

struct Allocation {
  double P_tau = 0.0;
  double P_d = 0.0;
  int T_tau = 0;
  int T_d = 0;
};

/// Optimal power split at the shortest admissible training interval T_tau = Mg:
/// P_d T_d = alpha P0 T0 and P_tau T_tau = (1 - alpha) P0 T0.
Allocation optimal_allocation(double P0, int T0, int Mg);
/// Uniform power P_tau = P_d = P0 with T_tau = Mg, the setting used by the
/// L0 > 1 sweeps for a like-for-like comparison.
Allocation uniform_allocation(double P0, int T0, int Mg);
/// Throws unless T_tau + T_d = T0 and P_tau T_tau + P_d T_d = P0 T0 to
/// relative 1e-12.
void check_allocation(const Allocation& a, double P0, int T0);

/// rho_eff = P_d (P_tau/Mg) T_tau / (1 + P_d + (P_tau/Mg) T_tau).
double effective_snr(double P_d, double P_tau, int T_tau, int Mg);
/// rho_eff at the optimal power split for a given data length T_d.
double effective_snr_at_td(double P0, int T0, int Mg, int T_d);
/// Closed form at the jointly optimal allocation (T_d = T0 - Mg):
/// P0^2 T0^2 / [sqrt(Mg (T0 - Mg + P0 T0)) + sqrt((T0 - Mg)(Mg + P0 T0))]^2.
double effective_snr_optimal(double P0, int T0, int Mg);

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

struct McOptions {
  int trials = 2000;
  std::uint64_t seed = 0;
  std::uint64_t stream_base = 0;  // trial t draws from stream (seed, base + t)
  int threads = 1;
};

/// Monte Carlo mean of log2 det(I_N + (rho/M) Hb Hb^H) over i.i.d. CN(0,1)
/// matrices Hb, with the standard error of the mean. Identical options give
/// identical draws, so sweeps evaluated with common options share their
/// random matrices (common random numbers).
McEstimate capacity_lower_bound(int M, int N, double rho_eff, const McOptions& opt);

enum class Scheme { position_aided, conventional };

enum class AllocationPolicy { optimal, uniform };

struct ThroughputOptions {
  McOptions mc;
  AllocationPolicy policy = AllocationPolicy::optimal;
  /// History depth for the worst-column error variance. For L0 = 1 the worst
  /// variance is 1 - sigma0^2; deeper refinement shrinks it via the anchor
  /// block-lag correlations supplied in eta_by_lag (lags 0 .. L0 - 1).
  int L0 = 1;
  std::vector<double> eta_by_lag;
};

struct ThroughputResult {
  double bits_per_use = 0.0;
  double std_error = 0.0;
  double rho_eff = 0.0;
  double pre_log = 0.0;
  double worst_error_var = 1.0;
  bool degenerate = false;  // training would consume the whole block
};

/// Lower bound on the end-to-end throughput: pre-log (T0 - Mg)/T0 (or
/// (T0 - M)/T0 for conventional training) times the capacity bound at the
/// allocated effective SNR. Every column is assigned the worst (anchor)
/// error variance; degenerate geometries return exactly zero.
ThroughputResult throughput(Scheme scheme, double P0, int T0, int M, int N,
                            const GroupLayout& layout, const ThroughputOptions& opt);

/// High-SNR slope parabola {-(Mg - T0/2)^2 + T0^2/4} Me / T0.
double dof_analytic(int Mg, int Me, int T0);

struct DofEstimate {
  double slope = 0.0;
  double residual = 0.0;  // relative RMS deviation of the top-decade fit
  bool reliable = true;
};

/// Least-squares slope of throughput versus log2(P0) over the top decade of
/// the grid (which must span at least three decades). M = N = Me * Mg for
/// the position-aided scheme, per the antenna-sizing setup.
DofEstimate dof_empirical(Scheme scheme, int T0, const GroupLayout& layout,
                          std::span<const double> p0_grid, const ThroughputOptions& opt);

}  // namespace pace
