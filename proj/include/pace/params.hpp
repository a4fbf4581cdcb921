#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pace {

/// System constants: carrier wavelength lambda0 [m], symbol rate B0 [sym/s],
/// terminal speed v0 [m/s], block-shortening factor xi0, environment
/// coherence time t0 [s], average power budget P0 (linear, noise-normalized),
/// antenna counts M (tx) / N (rx), and the history depth L0 used by the
/// MMSE refinement. theta/psi are the motion and array angles; they default
/// equal, which is the only geometry the isotropic kernel needs.
struct SystemParams {
  double lambda0 = 0.15;
  double B0 = 1e7;
  double v0 = 100.0;
  double xi0 = 20.0;
  double t0 = 5e-3;
  double P0 = 1.0;
  int M = 16;
  int N = 16;
  int L0 = 1;
  double theta = 0.0;
  double psi = 0.0;

  /// Throws std::invalid_argument on hard violations (non-positive physical
  /// quantities, xi0 < 2, L0 < 1 or L0 > xi0).
  void validate() const;
  /// Soft advisories, e.g. xi0 below 10.
  std::vector<std::string> warnings() const;

  double doppler() const { return v0 / lambda0; }
  /// Un-floored block length lambda0*B0/(2*xi0*v0); analytic cross-checks of
  /// the closed forms use this, simulation code uses the floored value.
  double block_length_exact() const { return lambda0 * B0 / (2.0 * xi0 * v0); }
};

/// Floored block length T0 [symbols]. Throws a configuration error naming the
/// offending speed when the result would drop below 2.
int block_length(const SystemParams& params);

/// Largest group size allowed by the environment coherence time,
/// floor(2 v0 t0 / lambda0 + 1) >= 1.
int max_group_size(const SystemParams& params);

struct GroupLayout {
  int Me = 1;              // columns per group
  int Mg = 1;              // group count
  int padded_columns = 0;  // zero columns appended to the last group
  int padded_total() const { return Me * Mg; }
};

/// Layout with Me = max_group_size(params), Mg = ceil(M / Me).
GroupLayout group_layout(int M, const SystemParams& params);
/// Layout with an explicit Me (must satisfy 1 <= Me <= max_group_size).
/// Me = 1 reduces the scheme to conventional training.
GroupLayout group_layout(int M, const SystemParams& params, int Me);

/// Index k0 of the block whose anchor position brackets column j of the
/// current block k from behind: k0 = floor(k - (j-1) lambda0 B0 / (2 v0 T0)).
/// Returns nullopt when k0 < 1 (insufficient history; caller falls back).
/// With exact_t0 the un-floored block length is used, giving
/// k - k0 = (j-1) xi0 exactly.
std::optional<int> anchor_block_index(int k, int j, const SystemParams& params,
                                      bool exact_t0 = false);

// Path geometry under uniform motion. Column m (1-based) of block k
// (1-based) sits at (k-1)*block_advance - (m-1)*lambda0/2: the first antenna
// leads, so later columns revisit positions the leading antenna has passed.
double block_advance(const SystemParams& params);  // v0 * T0 / B0 [m]
double column_position(const SystemParams& params, int k, int m);
/// Environment-renewal epoch of block k: floor(elapsed time / t0).
int epoch_of_block(const SystemParams& params, int k);

/// floor with a small relative guard so that values which are integers up to
/// rounding (e.g. 0.15e7 / 4000) do not floor one short.
long long floor_guard(double x);

// Plain-text key/value configuration ("key = value", '#' comments).
// Recognized keys: lambda0, B0, v0, xi0, t0, P0, M, N, L0, seed, trials.
using ConfigMap = std::map<std::string, std::string, std::less<>>;
ConfigMap parse_config_text(const std::string& text);
ConfigMap load_config(const std::string& path);
SystemParams params_from_config(const ConfigMap& config);

}  // namespace pace
