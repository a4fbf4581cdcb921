#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "oracles.hpp"
#include "pace/correlation.hpp"
#include "pace/field.hpp"

using namespace pace;

namespace {

// Exact-ratio geometry: T0 = 500, one block advance = lambda0/4, so column 2
// revisits the anchor position two blocks later.
SystemParams ratio2_params(int N) {
  SystemParams p;
  p.lambda0 = 0.15;
  p.B0 = 1e6;
  p.v0 = 75.0;
  p.xi0 = 2.0;
  p.t0 = 1.0;  // effectively one epoch
  p.M = 2;
  p.N = N;
  return p;
}

double sample_corr(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
  std::complex<double> num = (a.conjugate().array() * b.array()).sum();
  return num.real() / std::sqrt(a.squaredNorm() * b.squaredNorm());
}

}  // namespace

TEST_CASE("marginals are CN(0,1) in both modes") {
  for (FieldMode mode : {FieldMode::physical, FieldMode::idealized}) {
    SystemParams p = ratio2_params(1250);  // 1250 * 2 * 4 = 10^4 entries
    GroupLayout layout = group_layout(p.M, p, 2);
    RngStream rng(101, 0);
    auto blocks = generate_blocks(p, layout, 4, mode, rng);
    double power = 0.0;
    std::complex<double> mean = 0.0;
    int count = 0;
    for (const auto& blk : blocks) {
      power += blk.H.squaredNorm();
      mean += blk.H.sum();
      count += static_cast<int>(blk.H.size());
    }
    power /= count;
    mean /= static_cast<double>(count);
    CAPTURE(static_cast<int>(mode));
    CHECK(std::abs(mean) <= 3.0 / std::sqrt(static_cast<double>(count)));
    CHECK(power > 0.95);
    CHECK(power < 1.05);
  }
}

TEST_CASE("physical mode reproduces the kernel over one block advance") {
  // Anchor samples one block apart at xi0 = 20: correlation J0(pi/20).
  SystemParams p;
  p.lambda0 = 0.15;
  p.B0 = 1e7;
  p.v0 = 100.0;
  p.xi0 = 20.0;
  p.t0 = 1.0;
  p.M = 1;
  p.N = 10000;  // independent field copies
  GroupLayout layout = group_layout(p.M, p, 1);
  RngStream rng(51, 0);
  auto blocks = generate_blocks(p, layout, 2, FieldMode::physical, rng);
  Eigen::VectorXcd h1 = blocks[0].H.col(0);
  Eigen::VectorXcd h2 = blocks[1].H.col(0);
  CHECK(sample_corr(h1, h2) == doctest::Approx(0.993841003338540684).epsilon(0.03));
}

TEST_CASE("physical mode: field value at a fixed position is constant within an epoch") {
  SystemParams p = ratio2_params(256);
  GroupLayout layout = group_layout(p.M, p, 2);
  RngStream rng(52, 0);
  auto blocks = generate_blocks(p, layout, 4, FieldMode::physical, rng);
  // Column 2 of block 3 sits exactly where the anchor of block 1 was.
  CHECK(blocks[2].positions[1] == doctest::Approx(blocks[0].positions[0]).epsilon(1e-12));
  CHECK((blocks[2].H.col(1) - blocks[0].H.col(0)).norm() <=
        1e-6 * blocks[0].H.col(0).norm());
}

TEST_CASE("stationarity: correlation depends only on displacement") {
  SystemParams p = ratio2_params(4000);
  p.M = 1;
  GroupLayout layout = group_layout(p.M, p, 1);
  RngStream rng(53, 0);
  auto blocks = generate_blocks(p, layout, 6, FieldMode::physical, rng);
  for (int lag : {1, 2, 3}) {
    double c_early = sample_corr(blocks[0].H.col(0), blocks[lag].H.col(0));
    double c_late = sample_corr(blocks[2].H.col(0), blocks[2 + lag].H.col(0));
    CAPTURE(lag);
    CHECK(c_early == doctest::Approx(c_late).epsilon(0.08));
    double expected = block_lag_eta(1, 1 + lag, p);
    CHECK(c_early == doctest::Approx(expected).epsilon(0.05));
  }
}

TEST_CASE("epoch renewal draws an independent field") {
  SystemParams p = ratio2_params(10000);
  p.M = 1;
  // t0 = 0.75 block durations: consecutive blocks land in different epochs.
  p.t0 = 0.75 * 500.0 / p.B0;
  GroupLayout layout = group_layout(p.M, p, 1);
  RngStream rng(54, 0);
  auto blocks = generate_blocks(p, layout, 2, FieldMode::physical, rng);
  REQUIRE(blocks[0].epoch != blocks[1].epoch);
  // Within one epoch this correlation would be J0(pi/2) ~ 0.47.
  CHECK(std::abs(sample_corr(blocks[0].H.col(0), blocks[1].H.col(0))) <= 0.05);
}

TEST_CASE("idealized mode: target columns carry the kernel correlation to anchors") {
  // Fractional geometry (ratio 2.5): the target column sits mid-gap.
  SystemParams p;
  p.lambda0 = 0.15;
  p.B0 = 1e6;
  p.v0 = 75.0;
  p.xi0 = 2.5;
  p.t0 = 1.0;
  p.M = 2;
  p.N = 8000;
  GroupLayout layout = group_layout(p.M, p, 2);
  RngStream rng(55, 0);
  const int K = 8;
  auto blocks = generate_blocks(p, layout, K, FieldMode::idealized, rng);
  // h = column 2 of block 6; anchors = column 1 of blocks 1..8.
  Eigen::VectorXcd target = blocks[5].H.col(1);
  double z_t = blocks[5].positions[1];
  for (int b : {3, 4, 5, 6}) {
    Eigen::VectorXcd anchor = blocks[b].H.col(0);
    double expected = kernel(z_t, blocks[b].positions[0], p.lambda0);
    CAPTURE(b);
    CHECK(sample_corr(target, anchor) == doctest::Approx(expected).epsilon(0.08));
  }
  // Unit variance for the interpolated column as well.
  CHECK(target.squaredNorm() / p.N == doctest::Approx(1.0).epsilon(0.06));
}

TEST_CASE("same seed reproduces blocks exactly; different streams differ") {
  for (FieldMode mode : {FieldMode::physical, FieldMode::idealized}) {
    SystemParams p = ratio2_params(8);
    GroupLayout layout = group_layout(p.M, p, 2);
    RngStream a(77, 3), b(77, 3), c(77, 4);
    auto blocks_a = generate_blocks(p, layout, 3, mode, a);
    auto blocks_b = generate_blocks(p, layout, 3, mode, b);
    auto blocks_c = generate_blocks(p, layout, 3, mode, c);
    for (int k = 0; k < 3; ++k) {
      CHECK((blocks_a[k].H - blocks_b[k].H).norm() == 0.0);
    }
    CHECK((blocks_a[0].H - blocks_c[0].H).norm() != 0.0);
  }
}

TEST_CASE("block dump round trip") {
  SystemParams p = ratio2_params(4);
  GroupLayout layout = group_layout(p.M, p, 2);
  RngStream rng(88, 0);
  auto blocks = generate_blocks(p, layout, 3, FieldMode::idealized, rng);
  auto path = std::filesystem::temp_directory_path() / "pace_blocks_test.bin";
  dump_blocks(path.string(), blocks, p, FieldMode::idealized, 88);
  BlockDump dump = load_blocks(path.string());
  CHECK(dump.params_hash == params_hash(p));
  CHECK(dump.K == 3);
  CHECK(dump.M == p.M);
  CHECK(dump.N == p.N);
  CHECK(dump.seed == 88);
  CHECK(dump.mode == FieldMode::idealized);
  for (int k = 0; k < 3; ++k) {
    CHECK((dump.blocks[k].H.cast<std::complex<float>>() -
           blocks[k].H.cast<std::complex<float>>())
              .norm() == 0.0f);
  }
  std::filesystem::remove(path);
}
