#pragma once

#include <deque>
#include <span>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "pace/correlation.hpp"
#include "pace/field.hpp"
#include "pace/numerics.hpp"
#include "pace/params.hpp"

namespace pace {

struct PilotConfig {
  int T_tau = 0;       // training length, symbols
  double P_tau = 0.0;  // training power (linear)
  Eigen::MatrixXcd S;  // Mg x T_tau pilot matrix, S S^H = T_tau I

  /// Discrete-Fourier rows: exactly orthogonal for any T_tau >= Mg.
  static PilotConfig dft(int Mg, int T_tau, double P_tau);
};

/// Initial-estimate quality sigma0^2 = (P_tau T_tau / Mg) / (1 + P_tau T_tau / Mg).
double sigma0_sq(double P_tau, int T_tau, int Mg);

/// MMSE estimate of the anchor sub-matrix from the received training signal:
/// Ghat = sqrt(Mg/P_tau) Y S^H ((Mg/P_tau) I + S S^H)^{-1}.
Eigen::MatrixXcd initial_estimate(const Eigen::MatrixXcd& Y_tau,
                                  const PilotConfig& pilots, int Mg);

/// Interpolation gain factor
/// Gamma = (eta1p^2 + eta1pp^2 - 2 eta1 eta1p eta1pp s2) / (1 - eta1^2 s2^2).
/// Gamma > 1 means interpolated columns beat the anchor estimate.
double gamma_factor(double eta1, double eta1p, double eta1pp, double sigma0_sq);

/// Analytic anchor-refinement MSE 1 - r^T R^{-1} r for history depth L0;
/// eta_by_lag[d] is the anchor correlation at block lag d (eta_by_lag[0] = 1).
double anchor_refinement_mse(int L0, double sigma0_sq, std::span<const double> eta_by_lag);

struct CsiEntry {
  int block = 0;
  double z = 0.0;  // anchor position on the path [m]
  int epoch = 0;
  Eigen::VectorXcd g_hat;
};

/// Per-group history of anchor estimates paired with positions. Entries are
/// purged whenever the environment epoch advances; positions are strictly
/// increasing with one entry per block.
class CsiTable {
 public:
  CsiTable(int group, int capacity) : group_(group), capacity_(capacity) {}

  void push(CsiEntry entry);
  const std::deque<CsiEntry>& entries() const { return entries_; }
  std::span<const double> positions() const { return positions_; }
  int group() const { return group_; }
  bool empty() const { return entries_.empty(); }

 private:
  int group_;
  int capacity_;
  std::deque<CsiEntry> entries_;
  std::vector<double> positions_;  // mirrors entries_, ascending
};

struct ColumnEstimate {
  Eigen::VectorXcd h_hat;
  double analytic_mse = 1.0;
  bool fallback = false;  // one-sided or short-history estimate
};

/// Refined estimate of the newest anchor from its most recent same-epoch
/// history (L0 entries; fewer are used and flagged when the table is short).
ColumnEstimate refine_anchor(const CsiTable& table, int L0, double sigma0_sq,
                             double lambda0);

/// Interpolated estimate of the column at z_target from L0 anchor estimates
/// on each side of the target; one-sided fallback on history underflow.
ColumnEstimate interpolate_column(const CsiTable& table, double z_target, int L0,
                                  double sigma0_sq, double lambda0);

struct EstimateReport {
  int block = 0;
  int epoch = 0;
  Eigen::MatrixXcd H_hat;        // N x M
  Eigen::VectorXd analytic_mse;  // per column, in (0, 1]
  std::vector<char> fallback;    // per column
  double sigma0_sq = 0.0;
  int L0 = 0;
};

/// Runs the three-step pipeline block by block: pilot phase on the group
/// anchors, history refinement of each anchor column, and position-aided
/// interpolation of the remaining columns.
class EstimationSession {
 public:
  EstimationSession(const SystemParams& params, const GroupLayout& layout,
                    const PilotConfig& pilots, int L0);

  /// Consumes the next block (blocks must arrive in order) and returns the
  /// estimate of its full channel matrix. The pilot-phase noise is drawn
  /// from rng.
  EstimateReport process_block(const ChannelBlock& block, RngStream& rng);

  const PilotConfig& pilots() const { return pilots_; }

 private:
  struct CachedWeights {
    Eigen::VectorXd w;
    double mse = 1.0;
  };

  SystemParams params_;
  GroupLayout layout_;
  PilotConfig pilots_;
  int L0_;
  int next_block_ = 1;
  std::vector<CsiTable> tables_;
  // Steady-state interpolation weights depend only on the within-group
  // offset j, so they are solved once and reused.
  std::unordered_map<int, CachedWeights> interp_cache_;
  CachedWeights refine_cache_;
  bool refine_cache_valid_ = false;
};

/// Replays the given blocks through a fresh session and returns the report
/// for the last one.
EstimateReport estimate_full_matrix(std::span<const ChannelBlock> blocks,
                                    const SystemParams& params,
                                    const GroupLayout& layout,
                                    const PilotConfig& pilots, int L0,
                                    RngStream& rng);

struct ConventionalResult {
  Eigen::MatrixXcd H_hat;
  double mse = 1.0;  // per column, 1 - sigma0^2(P_tau, T_tau, M)
};

/// Full-pilot baseline: every transmit antenna trains, no history is used.
ConventionalResult conventional_estimate(const Eigen::MatrixXcd& Y_tau,
                                         const PilotConfig& pilots, int M);

}  // namespace pace
