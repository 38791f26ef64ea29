#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nhl/errors.hpp"
#include "nhl/topology.hpp"

using namespace nhl;

TEST_CASE("winding is 1 for phase III and 0 for phase II") {
  auto w3 = winding_number(LossPattern::from_g2(1.1), 0.045, 1.4, 128);
  auto w2 = winding_number(LossPattern::from_g2(-1.1), 0.045, 1.4, 128);
  CHECK(std::abs(w3.W - 1.0) < 1e-6);
  CHECK(std::abs(w2.W) < 1e-6);
  CHECK(w3.quantization_residual < 1e-6);
  CHECK(w3.k_grid_size == 128);
  CHECK(w3.min_line_gap > 0);
}

TEST_CASE("winding is stable under grid doubling") {
  for (double g2 : {1.1, -1.1, 0.5, -2.0}) {
    double a = winding_number(LossPattern::from_g2(g2), 0.045, 1.4, 128).W;
    double b = winding_number(LossPattern::from_g2(g2), 0.045, 1.4, 256).W;
    CHECK(std::abs(a - b) < 1e-8);
  }
}

TEST_CASE("property: winding is invariant under random eigenvector gauges") {
  for (std::uint64_t seed : {1ull, 2ull, 99ull}) {
    for (double g2 : {1.1, -1.1}) {
      WindingOptions o;
      o.random_gauge_seed = seed;
      double a = winding_number(LossPattern::from_g2(g2), 0.045, 1.4, 64).W;
      double b = winding_number(LossPattern::from_g2(g2), 0.045, 1.4, 64, o).W;
      CHECK(std::abs(a - b) < 1e-9);
    }
  }
}

TEST_CASE("a loop over n zones winds n times") {
  for (int n : {2, 3, 4}) {
    WindingOptions o;
    o.zones = n;
    auto w = winding_number(LossPattern::from_g2(1.1), 0.045, 1.4, 64, o);
    CHECK(std::abs(w.W - n) < 1e-6);
    CHECK(w.zones == n);
  }
}

TEST_CASE("winding does not depend on J or d") {
  for (double J : {0.02, 0.09})
    for (double d : {1.0, 1.8}) CHECK(std::abs(winding_number(LossPattern::from_g2(0.8), J, d, 64).W - 1.0) < 1e-6);
}

TEST_CASE("property: phase diagram is a step at g2 = 0") {
  std::vector<double> g2s;
  for (int i = -20; i <= 20; ++i) g2s.push_back(0.15 * i);
  auto pts = winding_phase_diagram(g2s, 0.045, 1.4, 64);
  CHECK(pts.size() == 40);  // g2 = 0 is excluded
  for (const auto& p : pts) {
    CHECK(p.W == doctest::Approx(p.g2 > 0 ? 1.0 : 0.0).epsilon(1e-6));
    CHECK(p.residual < 1e-6);
  }
}

TEST_CASE("gapless lossless lattice is refused") {
  CHECK_THROWS_AS(winding_number(LossPattern{}, 0.045, 1.4, 128), GaplessError);
}

TEST_CASE("bad grids are configuration errors") {
  CHECK_THROWS_AS(winding_number(LossPattern::from_g2(1.0), 0.045, 1.4, 8), ConfigError);
  CHECK_THROWS_AS(winding_number(LossPattern::from_g2(1.0), -1.0, 1.4, 64), ConfigError);
}

TEST_CASE("real band gap opens with loss") {
  double gap = real_band_gap(LossPattern::preset(Phase::II, 1.1), 0.045, 1.4);
  CHECK(gap > 0);
  CHECK(gap < 4 * 0.045);
  CHECK(real_band_gap(LossPattern::preset(Phase::II, 0.5), 0.045, 1.4) < gap);
  CHECK(gap <= 2 * 0.045 + 1e-12);
}

TEST_CASE("phase assignment for moderate loss") {
  for (auto [g2, W] : std::vector<std::pair<double, double>>{{-1.1, 0}, {-0.7, 0}, {0.7, 1}, {1.1, 1}}) {
    auto p = LossPattern::general(std::abs(g2), std::abs(g2), g2);
    CHECK(std::abs(winding_number(p, 0.045, 1.4, 64).W - W) < 1e-6);
  }
}
