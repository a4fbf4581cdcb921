#pragma once

#include <vector>

#include "pace/capacity.hpp"
#include "pace/params.hpp"

namespace pace {

/// Fraction of the energy budget assigned to the data phase that maximizes
/// the effective SNR at a given T_d:
/// alpha = sqrt(T_d (Mg + P0 T0)) / (sqrt(Mg (T_d + P0 T0)) + sqrt(T_d (Mg + P0 T0))).
double optimal_power_fraction(int T_d, int Mg, double P0, int T0);

struct PowerConvexityReport {
  bool convex = false;          // second differences positive on the grid
  bool unique_minimum = false;  // single interior minimum
  double grid_alpha = 0.0;
  double grid_min = 0.0;
  double closed_form_alpha = 0.0;
  double closed_form_min = 0.0;  // [sqrt(Mg(T_d+P0T0)) + sqrt(T_d(Mg+P0T0))]^2
  bool pass() const;
};

/// Grid check of the energy-split objective
/// L(alpha) = Mg (T_d + P0 T0)/(1 - alpha) + T_d (Mg + P0 T0)/alpha.
PowerConvexityReport verify_power_convexity(int T_d, int Mg, double P0, int T0,
                                            int grid_points = 100000);

/// The throughput-optimal training length equals the group count.
int optimal_training_interval(int Mg);

struct TdMonotonicityReport {
  bool non_decreasing = false;  // within 2x the MC standard error of each step
  double worst_step_sigma = 0.0;  // most negative step in SE units
  std::vector<double> throughput_by_td;
  bool endpoint_is_max = false;  // T_d = T0 - Mg attains the sweep maximum
};

/// Common-random-number sweep of R_L(T_d) = (T_d/T0) E log2 det(...) at the
/// optimal power split for each T_d in {1 .. T0 - Mg}.
TdMonotonicityReport verify_td_monotonicity(double P0, int T0, int Mg, int M, int N,
                                            const McOptions& opt);

struct OmegaResult {
  double omega = 1.0;
  double threshold_db = 0.0;   // 10 log10(omega / (1 - omega))
  double worst_fraction = 0.5; // fractional target position attaining the min
  int worst_offset = 2;        // within-group offset j attaining the min
  int skipped_points = 0;      // grid points with negative discriminant
};

/// Training-SNR threshold below which interpolation beats the anchor
/// estimate everywhere: minimizes the two-root expression over within-group
/// offsets j in {2..Me} and fractional positions between bracketing anchors
/// (dense grid plus golden-section refinement). exact_t0 uses the un-floored
/// block length, under which the threshold is independent of the speed.
OmegaResult omega_threshold(const SystemParams& params, const GroupLayout& layout,
                            bool exact_t0 = true, int grid_points = 10000);

/// DoF-optimal group count round(T0/2); odd T0 ties break toward fewer groups.
int optimal_group_count(int T0);

struct AntennaSizing {
  int Mg_star = 0;
  int M_star = 0;
  struct Candidate {
    int Mg;
    double dof;
  };
  std::vector<Candidate> candidates;  // floor and ceil of T0/2 with their DoF
};

/// DoF-optimal antenna sizing: M* = Mg* Me for position-aided training,
/// Mg* alone for conventional.
AntennaSizing optimal_antennas(Scheme scheme, int T0, int Me);

}  // namespace pace
