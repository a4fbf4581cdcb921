#include "pace/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pace/estimator.hpp"
#include "pace/optimizer.hpp"

namespace pace {

Allocation optimal_allocation(double P0, int T0, int Mg) {
  if (Mg < 1 || Mg >= T0) throw std::domain_error("optimal_allocation: need 0 < Mg < T0");
  Allocation a;
  a.T_tau = Mg;  // training just long enough to sound every group
  a.T_d = T0 - Mg;
  double alpha = optimal_power_fraction(a.T_d, Mg, P0, T0);
  a.P_d = alpha * P0 * T0 / a.T_d;
  a.P_tau = (1.0 - alpha) * P0 * T0 / a.T_tau;
  return a;
}

Allocation uniform_allocation(double P0, int T0, int Mg) {
  if (Mg < 1 || Mg >= T0) throw std::domain_error("uniform_allocation: need 0 < Mg < T0");
  return {P0, P0, Mg, T0 - Mg};
}

void check_allocation(const Allocation& a, double P0, int T0) {
  if (a.T_tau + a.T_d != T0) throw std::invalid_argument("allocation: T_tau + T_d != T0");
  double energy = a.P_tau * a.T_tau + a.P_d * a.T_d;
  double budget = P0 * T0;
  if (std::abs(energy - budget) > 1e-12 * budget) {
    throw std::invalid_argument("allocation: energy constraint violated");
  }
}

double effective_snr(double P_d, double P_tau, int T_tau, int Mg) {
  if (!(P_d >= 0.0) || !(P_tau > 0.0) || T_tau < 1 || Mg < 1) {
    throw std::domain_error("effective_snr: invalid inputs");
  }
  double pilot = P_tau * T_tau / Mg;
  return P_d * pilot / (1.0 + P_d + pilot);
}

double effective_snr_at_td(double P0, int T0, int Mg, int T_d) {
  if (T_d < 1 || T_d >= T0) throw std::domain_error("effective_snr_at_td: need 0 < T_d < T0");
  double e = P0 * T0;
  double denom = std::sqrt(Mg * (T_d + e)) + std::sqrt(T_d * (Mg + e));
  return e * e / (denom * denom);
}

double effective_snr_optimal(double P0, int T0, int Mg) {
  if (Mg < 1 || Mg >= T0) throw std::domain_error("effective_snr_optimal: need 0 < Mg < T0");
  return effective_snr_at_td(P0, T0, Mg, T0 - Mg);
}

McEstimate capacity_lower_bound(int M, int N, double rho_eff, const McOptions& opt) {
  if (M < 1 || N < 1) throw std::domain_error("capacity_lower_bound: M, N must be >= 1");
  if (opt.trials < 1) throw std::domain_error("capacity_lower_bound: trials must be >= 1");
  if (!(rho_eff >= 0.0)) throw std::domain_error("capacity_lower_bound: rho_eff must be >= 0");

  std::vector<double> values(opt.trials);
  parallel_for_index(opt.trials, opt.threads, [&](int t) {
    RngStream rng(opt.seed, opt.stream_base + static_cast<std::uint64_t>(t));
    Eigen::MatrixXcd H(N, M);
    for (int m = 0; m < M; ++m) {
      for (int n = 0; n < N; ++n) H(n, m) = rng.complex_gaussian();
    }
    values[t] = logdet_capacity(H, rho_eff);
  });

  McEstimate est;
  est.mean = pairwise_sum(values) / opt.trials;
  if (opt.trials > 1) {
    std::vector<double> sq(opt.trials);
    for (int t = 0; t < opt.trials; ++t) {
      double d = values[t] - est.mean;
      sq[t] = d * d;
    }
    est.std_error = std::sqrt(pairwise_sum(sq) / (static_cast<double>(opt.trials) *
                                                  (opt.trials - 1)));
  }
  return est;
}

ThroughputResult throughput(Scheme scheme, double P0, int T0, int M, int N,
                            const GroupLayout& layout, const ThroughputOptions& opt) {
  ThroughputResult res;
  const int overhead = scheme == Scheme::conventional ? M : layout.Mg;
  if (overhead >= T0) {
    res.degenerate = true;  // training consumes the block
    return res;
  }
  Allocation alloc = opt.policy == AllocationPolicy::optimal
                         ? optimal_allocation(P0, T0, overhead)
                         : uniform_allocation(P0, T0, overhead);
  double s2 = sigma0_sq(alloc.P_tau, alloc.T_tau, overhead);
  double worst = 1.0 - s2;
  if (opt.L0 > 1) {
    if (static_cast<int>(opt.eta_by_lag.size()) < opt.L0) {
      throw std::invalid_argument("throughput: eta_by_lag must cover lags 0 .. L0 - 1");
    }
    worst = anchor_refinement_mse(opt.L0, s2, opt.eta_by_lag);
  }
  res.worst_error_var = worst;
  res.rho_eff = alloc.P_d * (1.0 - worst) / (1.0 + alloc.P_d * worst);
  res.pre_log = static_cast<double>(T0 - overhead) / T0;
  McEstimate cap = capacity_lower_bound(M, N, res.rho_eff, opt.mc);
  res.bits_per_use = res.pre_log * cap.mean;
  res.std_error = res.pre_log * cap.std_error;
  return res;
}

double dof_analytic(int Mg, int Me, int T0) {
  if (Mg < 0 || Mg > T0) throw std::domain_error("dof_analytic: need 0 <= Mg <= T0");
  double half = T0 / 2.0;
  double d = Mg - half;
  return (-(d * d) + half * half) * Me / T0;
}

DofEstimate dof_empirical(Scheme scheme, int T0, const GroupLayout& layout,
                          std::span<const double> p0_grid, const ThroughputOptions& opt) {
  if (p0_grid.size() < 2) throw std::invalid_argument("dof_empirical: need at least two grid points");
  double lo = *std::min_element(p0_grid.begin(), p0_grid.end());
  double hi = *std::max_element(p0_grid.begin(), p0_grid.end());
  if (hi / lo < 1e3 * (1.0 - 1e-9)) {
    throw std::invalid_argument("dof_empirical: P0 grid must span at least three decades");
  }
  const int M = layout.Me * layout.Mg;
  const int N = M;

  std::vector<double> x, y;
  for (double p0 : p0_grid) {
    ThroughputResult r = throughput(scheme, p0, T0, M, N, layout, opt);
    if (p0 >= hi / 10.0 * (1.0 - 1e-12)) {
      x.push_back(std::log2(p0));
      y.push_back(r.bits_per_use);
    }
  }

  const int n = static_cast<int>(x.size());
  if (n < 2) throw std::invalid_argument("dof_empirical: top decade needs at least two grid points");
  double mx = 0, my = 0;
  for (int i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (int i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  DofEstimate est;
  est.slope = sxy / sxx;
  double intercept = my - est.slope * mx;
  double rss = 0;
  for (int i = 0; i < n; ++i) {
    double dev = y[i] - (intercept + est.slope * x[i]);
    rss += dev * dev;
  }
  est.residual = my != 0.0 ? std::sqrt(rss / n) / std::abs(my) : 0.0;
  est.reliable = est.residual <= 0.10;
  return est;
}

}  // namespace pace
