#include "pace/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "pace/correlation.hpp"
#include "pace/numerics.hpp"

namespace pace {

double optimal_power_fraction(int T_d, int Mg, double P0, int T0) {
  if (T_d < 1 || T_d >= T0) throw std::domain_error("optimal_power_fraction: need 0 < T_d < T0");
  if (Mg < 1 || !(P0 > 0.0)) throw std::domain_error("optimal_power_fraction: invalid Mg or P0");
  double e = P0 * T0;
  double a = std::sqrt(T_d * (Mg + e));
  double b = std::sqrt(Mg * (T_d + e));
  return a / (a + b);
}

bool PowerConvexityReport::pass() const {
  return convex && unique_minimum &&
         std::abs(grid_min - closed_form_min) <= 1e-6 * closed_form_min &&
         std::abs(grid_alpha - closed_form_alpha) <= 1e-4;
}

PowerConvexityReport verify_power_convexity(int T_d, int Mg, double P0, int T0,
                                            int grid_points) {
  if (grid_points < 16) throw std::invalid_argument("verify_power_convexity: grid too coarse");
  const double A = Mg * (T_d + P0 * static_cast<double>(T0));
  const double B = T_d * (Mg + P0 * static_cast<double>(T0));
  auto objective = [&](double alpha) { return A / (1.0 - alpha) + B / alpha; };

  PowerConvexityReport rep;
  rep.closed_form_alpha = optimal_power_fraction(T_d, Mg, P0, T0);
  rep.closed_form_min = (std::sqrt(A) + std::sqrt(B)) * (std::sqrt(A) + std::sqrt(B));

  // Interior grid; the objective diverges at both ends.
  const double h = 1.0 / (grid_points + 1);
  double best = std::numeric_limits<double>::infinity();
  double best_alpha = 0.0;
  int best_index = -1;
  std::vector<double> vals(grid_points);
  for (int i = 0; i < grid_points; ++i) {
    double alpha = (i + 1) * h;
    vals[i] = objective(alpha);
    if (vals[i] < best) {
      best = vals[i];
      best_alpha = alpha;
      best_index = i;
    }
  }
  rep.grid_min = best;
  rep.grid_alpha = best_alpha;

  // Tolerances absorb rounding noise in the near-flat region at the minimum.
  rep.convex = true;
  for (int i = 1; i + 1 < grid_points; ++i) {
    if (vals[i - 1] - 2.0 * vals[i] + vals[i + 1] < -1e-9 * vals[i]) {
      rep.convex = false;
      break;
    }
  }
  int violations = 0;
  for (int i = 0; i + 1 < grid_points; ++i) {
    double diff = vals[i + 1] - vals[i];
    if (std::abs(diff) <= 1e-9 * vals[i]) continue;
    if ((diff > 0.0) != (i >= best_index)) ++violations;
  }
  rep.unique_minimum = violations == 0 && best_index > 0 && best_index < grid_points - 1;
  return rep;
}

int optimal_training_interval(int Mg) {
  if (Mg < 1) throw std::domain_error("optimal_training_interval: Mg must be >= 1");
  return Mg;
}

TdMonotonicityReport verify_td_monotonicity(double P0, int T0, int Mg, int M, int N,
                                            const McOptions& opt) {
  if (Mg < 1 || Mg >= T0) throw std::domain_error("verify_td_monotonicity: need 0 < Mg < T0");
  const int steps = T0 - Mg;
  // Pathwise evaluation: each trial draws one channel matrix and scores it at
  // every T_d, so the monotonicity check shares the randomness exactly.
  std::vector<std::vector<double>> per_td(steps, std::vector<double>(opt.trials));
  parallel_for_index(opt.trials, opt.threads, [&](int t) {
    RngStream rng(opt.seed, opt.stream_base + static_cast<std::uint64_t>(t));
    Eigen::MatrixXcd H(N, M);
    for (int m = 0; m < M; ++m) {
      for (int n = 0; n < N; ++n) H(n, m) = rng.complex_gaussian();
    }
    for (int td = 1; td <= steps; ++td) {
      double rho = effective_snr_at_td(P0, T0, Mg, td);
      per_td[td - 1][t] = (static_cast<double>(td) / T0) * logdet_capacity(H, rho);
    }
  });

  TdMonotonicityReport rep;
  rep.throughput_by_td.resize(steps);
  for (int i = 0; i < steps; ++i) {
    rep.throughput_by_td[i] = pairwise_sum(per_td[i]) / opt.trials;
  }
  rep.non_decreasing = true;
  rep.worst_step_sigma = 0.0;
  for (int i = 0; i + 1 < steps; ++i) {
    std::vector<double> diff(opt.trials);
    for (int t = 0; t < opt.trials; ++t) diff[t] = per_td[i + 1][t] - per_td[i][t];
    double mean = pairwise_sum(diff) / opt.trials;
    double var = 0.0;
    for (int t = 0; t < opt.trials; ++t) {
      double d = diff[t] - mean;
      var += d * d;
    }
    double se = opt.trials > 1 ? std::sqrt(var / (static_cast<double>(opt.trials) *
                                                  (opt.trials - 1)))
                               : 0.0;
    if (se > 0.0) {
      rep.worst_step_sigma = std::min(rep.worst_step_sigma, mean / se);
    } else if (mean < 0.0) {
      rep.worst_step_sigma = -std::numeric_limits<double>::infinity();
    }
    if (mean < -2.0 * se) rep.non_decreasing = false;
  }
  rep.endpoint_is_max =
      rep.throughput_by_td.back() >=
      *std::max_element(rep.throughput_by_td.begin(), rep.throughput_by_td.end()) - 1e-12;
  return rep;
}

namespace {

struct OmegaPoint {
  double value = 1.0;
  bool skipped = false;
};

// Smaller root of the quadratic in sigma0^2 whose
// positivity is the Gamma > 1 condition, at target correlations eta'/eta''.
OmegaPoint omega_expression(double eta1, double eta_p, double eta_pp) {
  double disc = 4.0 * eta1 * eta1 * eta_p * eta_p * eta_pp * eta_pp -
                4.0 * eta1 * eta1 * (eta_p * eta_p + eta_pp * eta_pp - 1.0);
  if (disc < 0.0) return {1.0, true};  // condition holds unconditionally here
  double root = (2.0 * eta1 * eta_p * eta_pp - std::sqrt(disc)) / (2.0 * eta1 * eta1);
  return {root, false};
}

}  // namespace

OmegaResult omega_threshold(const SystemParams& params, const GroupLayout& layout,
                            bool exact_t0, int grid_points) {
  params.validate();
  if (layout.Me < 2) {
    throw std::invalid_argument("omega_threshold: no interpolated columns when Me < 2");
  }
  if (grid_points < 100) throw std::invalid_argument("omega_threshold: grid too coarse");

  // Anchor spacing per block, as a fraction of the wavelength.
  double spacing_over_lambda =
      exact_t0 ? 1.0 / (2.0 * params.xi0)
               : params.v0 * block_length(params) / (params.lambda0 * params.B0);
  const double x1 = 2.0 * std::numbers::pi * spacing_over_lambda;
  const double eta1 = bessel_j0(x1);

  OmegaResult res;
  res.omega = 1.0;
  auto value_at = [&](double frac) {
    double eta_pp = bessel_j0(x1 * frac);          // to the anchor behind
    double eta_p = bessel_j0(x1 * (1.0 - frac));   // to the anchor ahead
    return omega_expression(eta1, eta_p, eta_pp);
  };

  for (int j = 2; j <= layout.Me; ++j) {
    double best_frac = 0.5;
    double best = 1.0;
    for (int i = 0; i <= grid_points; ++i) {
      double frac = static_cast<double>(i) / grid_points;
      OmegaPoint p = value_at(frac);
      if (p.skipped) {
        ++res.skipped_points;
        continue;
      }
      if (p.value < best) {
        best = p.value;
        best_frac = frac;
      }
    }
    // Golden-section refinement around the best grid cell.
    double lo = std::max(0.0, best_frac - 1.0 / grid_points);
    double hi = std::min(1.0, best_frac + 1.0 / grid_points);
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = hi - gr * (hi - lo);
    double d = lo + gr * (hi - lo);
    double fc = value_at(c).value;
    double fd = value_at(d).value;
    while (hi - lo > 1e-10) {
      if (fc < fd) {
        hi = d;
        d = c;
        fd = fc;
        c = hi - gr * (hi - lo);
        fc = value_at(c).value;
      } else {
        lo = c;
        c = d;
        fc = fd;
        d = lo + gr * (hi - lo);
        fd = value_at(d).value;
      }
    }
    double frac = 0.5 * (lo + hi);
    OmegaPoint refined = value_at(frac);
    if (!refined.skipped && refined.value < best) {
      best = refined.value;
      best_frac = frac;
    }
    if (best < res.omega) {
      res.omega = best;
      res.worst_fraction = best_frac;
      res.worst_offset = j;
    }
  }
  res.threshold_db = 10.0 * std::log10(res.omega / (1.0 - res.omega));
  return res;
}

int optimal_group_count(int T0) {
  if (T0 < 2) throw std::domain_error("optimal_group_count: T0 must be >= 2");
  int lo = T0 / 2;
  int hi = (T0 + 1) / 2;
  if (lo == hi) return lo;
  double dof_lo = dof_analytic(lo, 1, T0);
  double dof_hi = dof_analytic(hi, 1, T0);
  return dof_hi > dof_lo ? hi : lo;  // exact ties prefer fewer groups
}

AntennaSizing optimal_antennas(Scheme scheme, int T0, int Me) {
  if (Me < 1) throw std::domain_error("optimal_antennas: Me must be >= 1");
  const int me_eff = scheme == Scheme::conventional ? 1 : Me;
  AntennaSizing out;
  int lo = T0 / 2;
  int hi = (T0 + 1) / 2;
  out.candidates.push_back({lo, dof_analytic(lo, me_eff, T0)});
  if (hi != lo) out.candidates.push_back({hi, dof_analytic(hi, me_eff, T0)});
  out.Mg_star = optimal_group_count(T0);
  out.M_star = out.Mg_star * me_eff;
  return out;
}

}  // namespace pace
