#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pace/numerics.hpp"
#include "pace/params.hpp"

namespace pace {

/// physical: every column of a group reads one Gaussian process over path
/// position with the J0 correlation kernel; sampled jointly per environment
/// epoch via Cholesky of the kernel covariance.
/// idealized: the anchor track is sampled as in physical mode, and each
/// remaining column is drawn from the exact conditional Gaussian law given
/// the same-epoch anchor values. This reproduces the covariance structure
/// the MMSE estimator assumes, so analytic and empirical estimation error
/// agree up to Monte Carlo noise.
enum class FieldMode { physical, idealized };

struct ChannelBlock {
  int k = 0;                       // 1-based block index
  Eigen::MatrixXcd H;              // N x M, real (non-padded) columns only
  std::vector<double> positions;   // path coordinate of each column [m]
  int epoch = 0;                   // environment-renewal epoch
};

/// Ground-truth channel realizations for blocks 1..K. Fields are redrawn
/// independently whenever the elapsed time crosses a multiple of t0; within
/// an epoch the field value at a fixed position is constant. Groups and
/// receive antennas use independent field copies.
std::vector<ChannelBlock> generate_blocks(const SystemParams& params,
                                          const GroupLayout& layout, int K,
                                          FieldMode mode, RngStream& rng);

std::uint64_t params_hash(const SystemParams& params);

/// Binary replay dump: fixed header (magic, params hash, K, M, N, mode,
/// seed) followed by K row-major N x M matrices of complex64 (two float32
/// per entry). Positions and epochs are reconstructed from the parameters.
void dump_blocks(const std::string& path, const std::vector<ChannelBlock>& blocks,
                 const SystemParams& params, FieldMode mode, std::uint64_t seed);

struct BlockDump {
  std::uint64_t params_hash = 0;
  int K = 0, M = 0, N = 0;
  FieldMode mode = FieldMode::physical;
  std::uint64_t seed = 0;
  std::vector<ChannelBlock> blocks;  // float32 precision, no positions/epochs
};

BlockDump load_blocks(const std::string& path);

}  // namespace pace
