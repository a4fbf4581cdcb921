#include "pace/field.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <stdexcept>

#include "pace/correlation.hpp"

namespace pace {

namespace {

constexpr int kMaxGridPoints = 4096;  // per (group, epoch); beyond it, snap to lambda0/64

struct GroupColumns {
  int first = 0;  // 1-based global column index of the group's anchor
  int count = 0;  // real (non-padded) columns in this group
};

std::vector<GroupColumns> group_columns(int M, const GroupLayout& layout) {
  std::vector<GroupColumns> out(layout.Mg);
  for (int g = 0; g < layout.Mg; ++g) {
    out[g].first = g * layout.Me + 1;
    out[g].count = std::min(layout.Me, M - g * layout.Me);
  }
  return out;
}

// Blocks of each epoch, in ascending block order.
std::map<int, std::vector<int>> blocks_by_epoch(const SystemParams& params, int K) {
  std::map<int, std::vector<int>> out;
  for (int k = 1; k <= K; ++k) out[epoch_of_block(params, k)].push_back(k);
  return out;
}

// Deduplicated sorted position grid. Positions that coincide up to rounding
// (exact-ratio geometries) collapse to one grid point; oversized grids snap
// to a lambda0/64 lattice, which bounds the correlation error of the snap at
// 1 - J0(2 pi / 64).
std::vector<double> build_grid(std::vector<double> positions, double lambda0) {
  const double tol = 1e-9 * lambda0;
  std::sort(positions.begin(), positions.end());
  std::vector<double> grid;
  for (double z : positions) {
    if (grid.empty() || z - grid.back() > tol) grid.push_back(z);
  }
  if (static_cast<int>(grid.size()) > kMaxGridPoints) {
    const double res = lambda0 / 64.0;
    std::vector<double> snapped;
    for (double z : grid) {
      double s = std::round(z / res) * res;
      if (snapped.empty() || s - snapped.back() > tol) snapped.push_back(s);
    }
    grid = std::move(snapped);
  }
  return grid;
}

int grid_index(const std::vector<double>& grid, double z, double lambda0) {
  auto it = std::lower_bound(grid.begin(), grid.end(), z - 2e-9 * lambda0);
  if (it == grid.end()) return static_cast<int>(grid.size()) - 1;
  int idx = static_cast<int>(std::distance(grid.begin(), it));
  if (idx + 1 < static_cast<int>(grid.size()) &&
      std::abs(grid[idx + 1] - z) < std::abs(grid[idx] - z)) {
    ++idx;
  }
  return idx;
}

Eigen::MatrixXd kernel_covariance(const std::vector<double>& pos, double lambda0) {
  const int n = static_cast<int>(pos.size());
  Eigen::MatrixXd cov(n, n);
  for (int i = 0; i < n; ++i) {
    cov(i, i) = 1.0;
    for (int j = i + 1; j < n; ++j) {
      cov(i, j) = cov(j, i) = kernel(pos[i], pos[j], lambda0);
    }
  }
  return cov;
}

void generate_physical(const SystemParams& params, const GroupLayout& layout, int K,
                       RngStream& rng, std::vector<ChannelBlock>& blocks) {
  auto groups = group_columns(params.M, layout);
  auto epochs = blocks_by_epoch(params, K);
  for (const auto& grp : groups) {
    for (const auto& [epoch, ks] : epochs) {
      (void)epoch;
      std::vector<double> positions;
      positions.reserve(ks.size() * grp.count);
      for (int k : ks) {
        for (int c = 0; c < grp.count; ++c) {
          positions.push_back(column_position(params, k, grp.first + c));
        }
      }
      std::vector<double> grid = build_grid(std::move(positions), params.lambda0);
      auto chol = cholesky_psd(kernel_covariance(grid, params.lambda0), 0.0);
      const int P = static_cast<int>(grid.size());
      for (int n = 0; n < params.N; ++n) {
        Eigen::VectorXcd f = chol.L * rng.complex_gaussian_vector(P);
        for (int k : ks) {
          auto& blk = blocks[k - 1];
          for (int c = 0; c < grp.count; ++c) {
            int col = grp.first + c - 1;
            blk.H(n, col) = f(grid_index(grid, blk.positions[col], params.lambda0));
          }
        }
      }
    }
  }
}

void generate_idealized(const SystemParams& params, const GroupLayout& layout, int K,
                        RngStream& rng, std::vector<ChannelBlock>& blocks) {
  auto groups = group_columns(params.M, layout);
  auto epochs = blocks_by_epoch(params, K);
  for (const auto& grp : groups) {
    for (const auto& [epoch, ks] : epochs) {
      (void)epoch;
      const int B = static_cast<int>(ks.size());
      std::vector<double> anchor_pos(B);
      for (int b = 0; b < B; ++b) anchor_pos[b] = column_position(params, ks[b], grp.first);
      auto chol = cholesky_psd(kernel_covariance(anchor_pos, params.lambda0), 0.0);

      // Anchor track per receive antenna.
      Eigen::MatrixXcd track(B, params.N);
      for (int n = 0; n < params.N; ++n) track.col(n) = chol.L * rng.complex_gaussian_vector(B);
      for (int b = 0; b < B; ++b) {
        auto& blk = blocks[ks[b] - 1];
        for (int n = 0; n < params.N; ++n) blk.H(n, grp.first - 1) = track(b, n);
      }

      // Remaining columns: conditional mean over the epoch's anchor values
      // plus an independent residual with the exact conditional variance.
      Eigen::VectorXd kvec(B);
      for (int b = 0; b < B; ++b) {
        auto& blk = blocks[ks[b] - 1];
        for (int c = 1; c < grp.count; ++c) {
          int col = grp.first + c - 1;
          double z = blk.positions[col];
          for (int i = 0; i < B; ++i) kvec(i) = kernel(z, anchor_pos[i], params.lambda0);
          Eigen::VectorXd w = chol.L.transpose().triangularView<Eigen::Upper>().solve(
              chol.L.triangularView<Eigen::Lower>().solve(kvec));
          double resid_sd = std::sqrt(std::max(0.0, 1.0 - kvec.dot(w)));
          Eigen::VectorXcd mean = track.transpose() * w;  // per-antenna means
          for (int n = 0; n < params.N; ++n) {
            blk.H(n, col) = mean(n) + resid_sd * rng.complex_gaussian();
          }
        }
      }
    }
  }
}

}  // namespace

std::vector<ChannelBlock> generate_blocks(const SystemParams& params,
                                          const GroupLayout& layout, int K,
                                          FieldMode mode, RngStream& rng) {
  params.validate();
  if (K < 1) throw std::invalid_argument("generate_blocks: K must be >= 1");
  if (layout.Me * layout.Mg < params.M) {
    throw std::invalid_argument("generate_blocks: layout does not cover M columns");
  }
  std::vector<ChannelBlock> blocks(K);
  for (int k = 1; k <= K; ++k) {
    auto& blk = blocks[k - 1];
    blk.k = k;
    blk.epoch = epoch_of_block(params, k);
    blk.H = Eigen::MatrixXcd::Zero(params.N, params.M);
    blk.positions.resize(params.M);
    for (int m = 1; m <= params.M; ++m) blk.positions[m - 1] = column_position(params, k, m);
  }
  if (mode == FieldMode::physical) {
    generate_physical(params, layout, K, rng, blocks);
  } else {
    generate_idealized(params, layout, K, rng, blocks);
  }
  return blocks;
}

std::uint64_t params_hash(const SystemParams& params) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%.17g|%.17g|%.17g|%.17g|%.17g|%.17g|%d|%d|%d",
                params.lambda0, params.B0, params.v0, params.xi0, params.t0,
                params.P0, params.M, params.N, params.L0);
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (const char* p = buf; *p; ++p) {
    h ^= static_cast<unsigned char>(*p);
    h *= 1099511628211ULL;
  }
  return h;
}

namespace {
constexpr char kDumpMagic[8] = {'P', 'A', 'C', 'E', 'B', 'L', 'K', '1'};
}

void dump_blocks(const std::string& path, const std::vector<ChannelBlock>& blocks,
                 const SystemParams& params, FieldMode mode, std::uint64_t seed) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("dump_blocks: cannot open " + path);
  const std::uint64_t hash = params_hash(params);
  const std::int32_t K = static_cast<std::int32_t>(blocks.size());
  const std::int32_t M = params.M;
  const std::int32_t N = params.N;
  const std::uint8_t mode_byte = mode == FieldMode::physical ? 0 : 1;
  f.write(kDumpMagic, 8);
  f.write(reinterpret_cast<const char*>(&hash), 8);
  f.write(reinterpret_cast<const char*>(&K), 4);
  f.write(reinterpret_cast<const char*>(&M), 4);
  f.write(reinterpret_cast<const char*>(&N), 4);
  f.write(reinterpret_cast<const char*>(&mode_byte), 1);
  char pad[3] = {0, 0, 0};
  f.write(pad, 3);
  f.write(reinterpret_cast<const char*>(&seed), 8);
  std::vector<float> row(2 * M);
  for (const auto& blk : blocks) {
    for (int n = 0; n < N; ++n) {
      for (int m = 0; m < M; ++m) {
        row[2 * m] = static_cast<float>(blk.H(n, m).real());
        row[2 * m + 1] = static_cast<float>(blk.H(n, m).imag());
      }
      f.write(reinterpret_cast<const char*>(row.data()), row.size() * sizeof(float));
    }
  }
  if (!f) throw std::runtime_error("dump_blocks: write failed for " + path);
}

BlockDump load_blocks(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("load_blocks: cannot open " + path);
  char magic[8];
  f.read(magic, 8);
  if (!f || std::memcmp(magic, kDumpMagic, 8) != 0) {
    throw std::runtime_error("load_blocks: bad magic in " + path);
  }
  BlockDump dump;
  std::int32_t K = 0, M = 0, N = 0;
  std::uint8_t mode_byte = 0;
  char pad[3];
  f.read(reinterpret_cast<char*>(&dump.params_hash), 8);
  f.read(reinterpret_cast<char*>(&K), 4);
  f.read(reinterpret_cast<char*>(&M), 4);
  f.read(reinterpret_cast<char*>(&N), 4);
  f.read(reinterpret_cast<char*>(&mode_byte), 1);
  f.read(pad, 3);
  f.read(reinterpret_cast<char*>(&dump.seed), 8);
  if (!f || K < 0 || M < 1 || N < 1) throw std::runtime_error("load_blocks: bad header in " + path);
  dump.K = K;
  dump.M = M;
  dump.N = N;
  dump.mode = mode_byte == 0 ? FieldMode::physical : FieldMode::idealized;
  dump.blocks.resize(K);
  std::vector<float> row(2 * M);
  for (int k = 0; k < K; ++k) {
    auto& blk = dump.blocks[k];
    blk.k = k + 1;
    blk.H.resize(N, M);
    for (int n = 0; n < N; ++n) {
      f.read(reinterpret_cast<char*>(row.data()), row.size() * sizeof(float));
      if (!f) throw std::runtime_error("load_blocks: truncated payload in " + path);
      for (int m = 0; m < M; ++m) blk.H(n, m) = {row[2 * m], row[2 * m + 1]};
    }
  }
  return dump;
}

}  // namespace pace
