#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pace/params.hpp"

using namespace pace;

namespace {
SystemParams reference_params() {
  SystemParams p;
  p.lambda0 = 0.15;
  p.B0 = 1e7;
  p.v0 = 100.0;
  p.xi0 = 20.0;
  p.t0 = 5e-3;
  p.P0 = 1.0;
  p.M = 200;
  p.N = 200;
  p.L0 = 1;
  return p;
}
}  // namespace

TEST_CASE("block_length evaluates the floored block formula") {
  SystemParams p = reference_params();
  CHECK(block_length(p) == 375);
  p.v0 = 50.0;
  CHECK(block_length(p) == 750);
  p.v0 = 1e7;  // T0 would floor to zero
  CHECK_THROWS_AS(block_length(p), std::invalid_argument);
}

TEST_CASE("max_group_size follows the coherence-time bound") {
  SystemParams p = reference_params();
  CHECK(max_group_size(p) == 7);  // floor(2*100*0.005/0.15 + 1) = floor(7.67)
  p.v0 = 50.0;
  CHECK(max_group_size(p) == 4);  // floor(4.33)
  p.v0 = 1e-6;
  CHECK(max_group_size(p) == 1);  // single-column groups: conventional scheme
}

TEST_CASE("group_layout covers M with padded zero columns") {
  SystemParams p = reference_params();
  GroupLayout l = group_layout(200, p);
  CHECK(l.Me == 7);
  CHECK(l.Mg == 29);
  CHECK(l.padded_columns == 3);
  CHECK(l.Me * l.Mg >= 200);
  CHECK(l.padded_columns < l.Me);

  GroupLayout exact = group_layout(14, p);
  CHECK(exact.Mg == 2);
  CHECK(exact.padded_columns == 0);

  GroupLayout one = group_layout(1, p);
  CHECK(one.Mg == 1);
  CHECK(one.padded_columns == 6);

  GroupLayout conv = group_layout(10, p, 1);  // forced conventional reduction
  CHECK(conv.Me == 1);
  CHECK(conv.Mg == 10);
  CHECK_THROWS_AS(group_layout(10, p, 8), std::invalid_argument);  // above the bound
}

TEST_CASE("anchor_block_index matches the boxed floor expression") {
  SystemParams p = reference_params();
  auto k0 = anchor_block_index(100, 2, p, true);
  REQUIRE(k0.has_value());
  CHECK(*k0 == 80);  // k - (j-1) xi0 with the floor inactive
  auto k0b = anchor_block_index(100, 3, p, true);
  REQUIRE(k0b.has_value());
  CHECK(*k0b == 60);
  CHECK_FALSE(anchor_block_index(30, 3, p, true).has_value());  // history underflow

  // Floored T0 = 375 equals the exact value for these constants.
  auto k0c = anchor_block_index(100, 2, p, false);
  REQUIRE(k0c.has_value());
  CHECK(*k0c == 80);
}

TEST_CASE("anchor sandwich condition holds under uniform motion") {
  SystemParams p = reference_params();
  p.xi0 = 20.0;
  p.v0 = 87.0;  // non-round ratio
  for (int j = 2; j <= 7; ++j) {
    for (int k = 160; k <= 170; ++k) {
      auto k0 = anchor_block_index(k, j, p);
      REQUIRE(k0.has_value());
      double z_target = column_position(p, k, j);
      double z_lo = column_position(p, *k0, 1);
      double z_hi = column_position(p, *k0 + 1, 1);
      CAPTURE(j);
      CAPTURE(k);
      CHECK(z_lo <= z_target + 1e-9);
      CHECK(z_target <= z_hi + 1e-9);
    }
  }
}

TEST_CASE("column positions advance with blocks and trail within the array") {
  SystemParams p = reference_params();
  double adv = block_advance(p);
  CHECK(adv == doctest::Approx(100.0 * 375 / 1e7));
  CHECK(column_position(p, 1, 1) == 0.0);
  CHECK(column_position(p, 2, 1) == doctest::Approx(adv));
  CHECK(column_position(p, 1, 2) == doctest::Approx(-p.lambda0 / 2));
}

TEST_CASE("epoch advances every t0 seconds") {
  SystemParams p = reference_params();
  // Block duration 37.5 us; epoch length 5 ms -> 133.3 blocks.
  CHECK(epoch_of_block(p, 1) == 0);
  CHECK(epoch_of_block(p, 134) == 0);
  CHECK(epoch_of_block(p, 135) == 1);
}

TEST_CASE("params validation") {
  SystemParams p = reference_params();
  CHECK_NOTHROW(p.validate());
  CHECK(p.warnings().empty());
  p.xi0 = 5.0;
  CHECK(p.warnings().size() == 1);
  p.xi0 = 1.5;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = reference_params();
  p.L0 = 21;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);  // L0 <= xi0
  p = reference_params();
  p.v0 = -1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("config parsing round trip") {
  std::string text =
      "# test configuration\n"
      "lambda0 = 0.15\n"
      "B0 = 1e7\n"
      "v0 = 100\n"
      "xi0 = 20\n"
      "t0 = 5e-3\n"
      "P0 = 1000\n"
      "M = 16\n"
      "N = 16   # receive antennas\n"
      "L0 = 1\n"
      "seed = 42\n"
      "trials = 500\n";
  ConfigMap cfg = parse_config_text(text);
  CHECK(cfg.at("seed") == "42");
  SystemParams p = params_from_config(cfg);
  CHECK(p.P0 == 1000.0);
  CHECK(p.M == 16);
  CHECK(block_length(p) == 375);

  CHECK_THROWS_AS(parse_config_text("nonsense line\n"), std::invalid_argument);
  ConfigMap bad = cfg;
  bad["M"] = "sixteen";
  CHECK_THROWS_AS(params_from_config(bad), std::invalid_argument);
}
