#include "pace/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pace {

PilotConfig PilotConfig::dft(int Mg, int T_tau, double P_tau) {
  if (Mg < 1) throw std::invalid_argument("PilotConfig: Mg must be >= 1");
  if (T_tau < Mg) throw std::invalid_argument("PilotConfig: T_tau must be >= Mg");
  if (!(P_tau > 0.0)) throw std::invalid_argument("PilotConfig: P_tau must be positive");
  PilotConfig cfg;
  cfg.T_tau = T_tau;
  cfg.P_tau = P_tau;
  cfg.S.resize(Mg, T_tau);
  for (int i = 0; i < Mg; ++i) {
    for (int t = 0; t < T_tau; ++t) {
      double phase = -2.0 * std::numbers::pi * i * t / T_tau;
      cfg.S(i, t) = {std::cos(phase), std::sin(phase)};
    }
  }
  return cfg;
}

double sigma0_sq(double P_tau, int T_tau, int Mg) {
  if (!(P_tau > 0.0) || T_tau < 1 || Mg < 1) {
    throw std::invalid_argument("sigma0_sq: inputs must be positive");
  }
  double c = P_tau * T_tau / Mg;
  return c / (1.0 + c);
}

Eigen::MatrixXcd initial_estimate(const Eigen::MatrixXcd& Y_tau,
                                  const PilotConfig& pilots, int Mg) {
  if (pilots.S.rows() != Mg) throw std::invalid_argument("initial_estimate: pilot matrix has wrong row count");
  if (Y_tau.cols() != pilots.S.cols()) {
    throw std::invalid_argument("initial_estimate: Y_tau and pilot lengths differ");
  }
  const double scale = std::sqrt(Mg / pilots.P_tau);
  Eigen::MatrixXcd A = (Mg / pilots.P_tau) * Eigen::MatrixXcd::Identity(Mg, Mg) +
                       pilots.S * pilots.S.adjoint();
  // Ghat^H = A^{-1} (S Y^H), with A Hermitian positive definite.
  Eigen::MatrixXcd X = A.llt().solve(pilots.S * Y_tau.adjoint());
  return scale * X.adjoint();
}

double gamma_factor(double eta1, double eta1p, double eta1pp, double s2) {
  double denom = 1.0 - eta1 * eta1 * s2 * s2;
  if (!(denom > 0.0)) throw std::domain_error("gamma_factor: non-positive denominator");
  return (eta1p * eta1p + eta1pp * eta1pp - 2.0 * eta1 * eta1p * eta1pp * s2) / denom;
}

namespace {

// MMSE combination of noisy anchor estimates against a target at z_target:
// solve R w = r with R[a][b] = s2 (diag) / s2^2 eta(z_a, z_b) (off-diag) and
// r[a] = s2 eta(z_target, z_a). Analytic error is 1 - r^T w.
struct MmseSolution {
  Eigen::VectorXd w;
  double mse = 1.0;
};

Eigen::VectorXd psd_solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
  auto chol = cholesky_psd(A, 0.0);
  return chol.L.transpose().triangularView<Eigen::Upper>().solve(
      chol.L.triangularView<Eigen::Lower>().solve(b));
}

MmseSolution solve_one_sided(std::span<const double> positions, double z_target,
                             double s2, double lambda0) {
  const int n = static_cast<int>(positions.size());
  const double s4 = s2 * s2;
  Eigen::MatrixXd R(n, n);
  Eigen::VectorXd r(n);
  for (int a = 0; a < n; ++a) {
    r(a) = s2 * kernel(z_target, positions[a], lambda0);
    R(a, a) = s2;
    for (int b = a + 1; b < n; ++b) {
      R(a, b) = R(b, a) = s4 * kernel(positions[a], positions[b], lambda0);
    }
  }
  MmseSolution sol;
  sol.w = psd_solve(R, r);
  sol.mse = std::clamp(1.0 - r.dot(sol.w), 0.0, 1.0);
  return sol;
}

// Two-sided solution around a full window: covariance blocks per the stacked
// ordering (g_{k0+L0}, ..., g_{k0+1}, g_{k0}, ..., g_{k0-L0+1}).
struct TwoSidedSolution {
  MmseSolution sol;
  int k0_index = -1;
};

std::optional<TwoSidedSolution> solve_two_sided(const CsiTable& table, double z_target,
                                                int L0, double s2, double lambda0) {
  auto etas = interpolation_etas(z_target, table.positions(), lambda0, L0);
  if (!etas) return std::nullopt;
  auto pos = table.positions();
  std::vector<double> lag_etas(2 * L0);
  lag_etas[0] = 1.0;
  int base = etas->k0 - L0 + 1;
  for (int d = 1; d < 2 * L0; ++d) {
    lag_etas[d] = kernel(pos[base], pos[base + d], lambda0);
  }
  AnchorCovariance cov = build_anchor_covariance(L0, s2, lag_etas);
  set_target_etas(cov, *etas);
  Eigen::MatrixXd B = cov.block();
  Eigen::VectorXd r(2 * L0);
  r.head(L0) = cov.r1;
  r.tail(L0) = cov.r2;
  TwoSidedSolution out;
  out.sol.w = psd_solve(B, r);
  out.sol.mse = std::clamp(1.0 - r.dot(out.sol.w), 0.0, 1.0);
  out.k0_index = etas->k0;
  return out;
}

// Applies window weights in the stacked (descending block) order.
Eigen::VectorXcd apply_window_weights(const CsiTable& table, int k0_index, int L0,
                                      const Eigen::VectorXd& w) {
  const auto& entries = table.entries();
  Eigen::VectorXcd h = Eigen::VectorXcd::Zero(entries.front().g_hat.size());
  for (int i = 0; i < 2 * L0; ++i) {
    h += w(i) * entries[k0_index + L0 - i].g_hat;
  }
  return h;
}

ColumnEstimate fallback_one_sided(const CsiTable& table, double z_target, int L0,
                                  double s2, double lambda0) {
  const auto& entries = table.entries();
  const int available = static_cast<int>(entries.size());
  const int use = std::min(L0, available);
  // Entries nearest to the target, grown greedily from the insertion point.
  auto pos = table.positions();
  auto it = std::lower_bound(pos.begin(), pos.end(), z_target);
  int hi = static_cast<int>(std::distance(pos.begin(), it));
  int lo = hi - 1;
  std::vector<int> chosen;
  while (static_cast<int>(chosen.size()) < use) {
    bool take_lo =
        lo >= 0 && (hi >= available || z_target - pos[lo] <= pos[hi] - z_target);
    if (take_lo) {
      chosen.push_back(lo--);
    } else if (hi < available) {
      chosen.push_back(hi++);
    } else {
      break;
    }
  }
  std::sort(chosen.begin(), chosen.end());
  std::vector<double> zs(chosen.size());
  for (std::size_t i = 0; i < chosen.size(); ++i) zs[i] = pos[chosen[i]];
  MmseSolution sol = solve_one_sided(zs, z_target, s2, lambda0);
  ColumnEstimate est;
  est.h_hat = Eigen::VectorXcd::Zero(entries.front().g_hat.size());
  for (std::size_t i = 0; i < chosen.size(); ++i) {
    est.h_hat += sol.w(i) * entries[chosen[i]].g_hat;
  }
  est.analytic_mse = sol.mse;
  est.fallback = true;
  return est;
}

}  // namespace

double anchor_refinement_mse(int L0, double s2, std::span<const double> eta_by_lag) {
  if (L0 < 1) throw std::invalid_argument("anchor_refinement_mse: L0 must be >= 1");
  if (static_cast<int>(eta_by_lag.size()) < L0) {
    throw std::invalid_argument("anchor_refinement_mse: need eta values for lags 0 .. L0 - 1");
  }
  const double s4 = s2 * s2;
  Eigen::MatrixXd R(L0, L0);
  Eigen::VectorXd r(L0);
  for (int a = 0; a < L0; ++a) {
    r(a) = s2 * eta_by_lag[a];
    R(a, a) = s2;
    for (int b = a + 1; b < L0; ++b) R(a, b) = R(b, a) = s4 * eta_by_lag[b - a];
  }
  Eigen::VectorXd w = psd_solve(R, r);
  return std::clamp(1.0 - r.dot(w), 0.0, 1.0);
}

void CsiTable::push(CsiEntry entry) {
  if (!entries_.empty() && entry.epoch != entries_.back().epoch) {
    // Stale epochs are independent of the current field; purge.
    entries_.clear();
    positions_.clear();
  }
  entries_.push_back(std::move(entry));
  positions_.push_back(entries_.back().z);
  while (static_cast<int>(entries_.size()) > capacity_) {
    entries_.pop_front();
    positions_.erase(positions_.begin());
  }
}

ColumnEstimate refine_anchor(const CsiTable& table, int L0, double s2, double lambda0) {
  if (table.empty()) throw std::invalid_argument("refine_anchor: empty CSI table");
  const auto& entries = table.entries();
  const int use = std::min<int>(L0, static_cast<int>(entries.size()));
  const double z_target = entries.back().z;
  std::vector<double> zs(use);
  for (int i = 0; i < use; ++i) zs[i] = entries[entries.size() - 1 - i].z;
  MmseSolution sol = solve_one_sided(zs, z_target, s2, lambda0);
  ColumnEstimate est;
  est.h_hat = Eigen::VectorXcd::Zero(entries.back().g_hat.size());
  for (int i = 0; i < use; ++i) est.h_hat += sol.w(i) * entries[entries.size() - 1 - i].g_hat;
  est.analytic_mse = sol.mse;
  est.fallback = use < L0;
  return est;
}

ColumnEstimate interpolate_column(const CsiTable& table, double z_target, int L0,
                                  double s2, double lambda0) {
  if (table.empty()) throw std::invalid_argument("interpolate_column: empty CSI table");
  auto two_sided = solve_two_sided(table, z_target, L0, s2, lambda0);
  if (!two_sided) return fallback_one_sided(table, z_target, L0, s2, lambda0);
  ColumnEstimate est;
  est.h_hat = apply_window_weights(table, two_sided->k0_index, L0, two_sided->sol.w);
  est.analytic_mse = two_sided->sol.mse;
  est.fallback = false;
  return est;
}

EstimationSession::EstimationSession(const SystemParams& params, const GroupLayout& layout,
                                     const PilotConfig& pilots, int L0)
    : params_(params), layout_(layout), pilots_(pilots), L0_(L0) {
  params_.validate();
  if (L0 < 1) throw std::invalid_argument("EstimationSession: L0 must be >= 1");
  if (pilots_.S.rows() != layout_.Mg) {
    throw std::invalid_argument("EstimationSession: pilot matrix must have Mg rows");
  }
  // History horizon: interpolation reaches back about (Me - 1) xi0 blocks,
  // plus the refinement depth on both sides.
  int horizon = static_cast<int>(std::ceil(2.0 * L0 + layout_.Me * params_.xi0)) + 4;
  tables_.reserve(layout_.Mg);
  for (int g = 0; g < layout_.Mg; ++g) tables_.emplace_back(g, horizon);
}

EstimateReport EstimationSession::process_block(const ChannelBlock& block, RngStream& rng) {
  if (block.k != next_block_) {
    throw std::invalid_argument("EstimationSession: blocks must be processed in order");
  }
  ++next_block_;
  const int M = params_.M;
  const int N = params_.N;
  const int Mg = layout_.Mg;
  const int Me = layout_.Me;
  const double s2 = sigma0_sq(pilots_.P_tau, pilots_.T_tau, Mg);

  // Step 1: pilot phase on the group anchors.
  Eigen::MatrixXcd G(N, Mg);
  for (int g = 0; g < Mg; ++g) G.col(g) = block.H.col(g * Me);
  Eigen::MatrixXcd V(N, pilots_.T_tau);
  for (int t = 0; t < pilots_.T_tau; ++t) {
    for (int n = 0; n < N; ++n) V(n, t) = rng.complex_gaussian();
  }
  Eigen::MatrixXcd Y = std::sqrt(pilots_.P_tau / Mg) * G * pilots_.S + V;
  Eigen::MatrixXcd G_hat = initial_estimate(Y, pilots_, Mg);
  for (int g = 0; g < Mg; ++g) {
    tables_[g].push({block.k, block.positions[g * Me], block.epoch, G_hat.col(g)});
  }

  EstimateReport report;
  report.block = block.k;
  report.epoch = block.epoch;
  report.H_hat.resize(N, M);
  report.analytic_mse.resize(M);
  report.fallback.assign(M, 0);
  report.sigma0_sq = s2;
  report.L0 = L0_;

  for (int g = 0; g < Mg; ++g) {
    const CsiTable& table = tables_[g];
    const int cols = std::min(Me, M - g * Me);

    // Step 2: refine the anchor column from its history.
    {
      int col = g * Me;
      if (static_cast<int>(table.entries().size()) >= L0_ && refine_cache_valid_) {
        const auto& entries = table.entries();
        Eigen::VectorXcd h = Eigen::VectorXcd::Zero(N);
        for (int i = 0; i < L0_; ++i) {
          h += refine_cache_.w(i) * entries[entries.size() - 1 - i].g_hat;
        }
        report.H_hat.col(col) = h;
        report.analytic_mse(col) = refine_cache_.mse;
        report.fallback[col] = 0;
      } else {
        ColumnEstimate est = refine_anchor(table, L0_, s2, params_.lambda0);
        report.H_hat.col(col) = est.h_hat;
        report.analytic_mse(col) = est.analytic_mse;
        report.fallback[col] = est.fallback ? 1 : 0;
        if (!est.fallback) {
          // Same weights apply at every block: lag geometry is uniform.
          const auto& entries = table.entries();
          std::vector<double> zs(L0_);
          for (int i = 0; i < L0_; ++i) zs[i] = entries[entries.size() - 1 - i].z;
          MmseSolution sol = solve_one_sided(zs, entries.back().z, s2, params_.lambda0);
          refine_cache_ = {sol.w, sol.mse};
          refine_cache_valid_ = true;
        }
      }
    }

    // Step 3: interpolate the remaining columns of the group.
    for (int j = 2; j <= cols; ++j) {
      int col = g * Me + j - 1;
      double z_target = block.positions[col];
      ColumnEstimate est;
      auto cached = interp_cache_.find(j);
      if (cached != interp_cache_.end()) {
        auto etas = interpolation_etas(z_target, table.positions(), params_.lambda0, L0_);
        if (etas) {
          est.h_hat = apply_window_weights(table, etas->k0, L0_, cached->second.w);
          est.analytic_mse = cached->second.mse;
          est.fallback = false;
        } else {
          est = fallback_one_sided(table, z_target, L0_, s2, params_.lambda0);
        }
      } else {
        auto two_sided = solve_two_sided(table, z_target, L0_, s2, params_.lambda0);
        if (two_sided) {
          est.h_hat = apply_window_weights(table, two_sided->k0_index, L0_, two_sided->sol.w);
          est.analytic_mse = two_sided->sol.mse;
          est.fallback = false;
          interp_cache_[j] = {two_sided->sol.w, two_sided->sol.mse};
        } else {
          est = fallback_one_sided(table, z_target, L0_, s2, params_.lambda0);
        }
      }
      report.H_hat.col(col) = est.h_hat;
      report.analytic_mse(col) = est.analytic_mse;
      report.fallback[col] = est.fallback ? 1 : 0;
    }
  }
  return report;
}

EstimateReport estimate_full_matrix(std::span<const ChannelBlock> blocks,
                                    const SystemParams& params, const GroupLayout& layout,
                                    const PilotConfig& pilots, int L0, RngStream& rng) {
  if (blocks.empty()) throw std::invalid_argument("estimate_full_matrix: need at least one block");
  EstimationSession session(params, layout, pilots, L0);
  EstimateReport report;
  for (const auto& blk : blocks) report = session.process_block(blk, rng);
  return report;
}

ConventionalResult conventional_estimate(const Eigen::MatrixXcd& Y_tau,
                                         const PilotConfig& pilots, int M) {
  if (pilots.T_tau < M) {
    throw std::invalid_argument("conventional_estimate: T_tau must be >= M");
  }
  ConventionalResult res;
  res.H_hat = initial_estimate(Y_tau, pilots, M);
  res.mse = 1.0 - sigma0_sq(pilots.P_tau, pilots.T_tau, M);
  return res;
}

}  // namespace pace
