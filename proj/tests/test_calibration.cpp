#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "nhl/calibration.hpp"
#include "nhl/errors.hpp"

using namespace nhl;

TEST_CASE("default J(d) passes through its anchors") {
  auto c = default_curve(CurveKind::J_vs_d);
  CHECK(c.predict(1.4) == doctest::Approx(0.045).epsilon(1e-12));
  CHECK(c.predict(1.0) == doctest::Approx(0.09).epsilon(1e-12));
  CHECK(c.x0 == doctest::Approx(0.4 / std::log(2.0)).epsilon(1e-12));
  CHECK(c.predict(1.8) < c.predict(1.6));
  bool has_inferred = false, has_measured = false;
  for (const auto& a : c.anchors) {
    has_inferred |= a.provenance == "inferred";
    has_measured |= a.provenance == "measured";
  }
  CHECK(has_inferred);
  CHECK(has_measured);
}

TEST_CASE("default Im beta(w) interpolates the table") {
  auto c = default_curve(CurveKind::imbeta_vs_w);
  CHECK(c.model == CurveModel::table_interp);
  CHECK(c.predict(0.7) == doctest::Approx(0.1));
  CHECK(c.predict(0.0) == doctest::Approx(0.0));
  CHECK(c.predict(0.6) == doctest::Approx(0.095));
}

TEST_CASE("g2 is Im beta over 2J") {
  CHECK(g2_of(0.1, 0.045) == doctest::Approx(0.1 / 0.09));
  CHECK_THROWS_AS(g2_of(0.1, 0.0), ConfigError);
}

TEST_CASE("property: exponential fit round-trips synthetic data") {
  for (double x0 : {0.3, 0.577, 1.2})
    for (double A : {0.5, 2.0}) {
      std::vector<AnchorPoint> pts;
      for (double x : {0.8, 1.0, 1.3, 1.7}) pts.push_back({x, A * std::exp(-x / x0), "1/um", "measured"});
      auto c = fit_curve(pts, CurveModel::exponential, CurveKind::J_vs_d);
      CHECK(c.A == doctest::Approx(A).epsilon(1e-10));
      CHECK(c.x0 == doctest::Approx(x0).epsilon(1e-10));
      CHECK(c.rms_residual < 1e-12);
    }
}

TEST_CASE("fixed decay constant and linear models") {
  std::vector<AnchorPoint> pts{{1.4, 0.045, "1/um", "measured"}};
  auto c = fit_curve(pts, CurveModel::exponential, CurveKind::J_vs_d, 0.5);
  CHECK(c.x0 == 0.5);
  CHECK(c.predict(1.4) == doctest::Approx(0.045));
  std::vector<AnchorPoint> lin{{0.5, 0.1, "1/um", "inferred"}, {1.0, 0.2, "1/um", "inferred"}};
  auto l = fit_curve(lin, CurveModel::linear_through_origin, CurveKind::imbeta_vs_w);
  CHECK(l.slope == doctest::Approx(0.2));
  CHECK_THROWS_AS(fit_curve({}, CurveModel::exponential, CurveKind::J_vs_d), ConfigError);
  std::vector<AnchorPoint> neg{{1.0, -1.0, "", "measured"}, {2.0, 1.0, "", "measured"}};
  CHECK_THROWS_AS(fit_curve(neg, CurveModel::exponential, CurveKind::J_vs_d), ConfigError);
}

TEST_CASE("anchor files are parsed strictly") {
  const char* good = "/tmp/nhl_anchor_good.json";
  const char* bad = "/tmp/nhl_anchor_bad.json";
  std::ofstream(good) << R"([{"x": 1.0, "y": 0.09, "units": "1/um", "provenance": "measured"},
                              {"x": 1.4, "y": 0.045, "units": "1/um", "provenance": "measured"}])";
  std::ofstream(bad) << R"([{"x": 1.0, "y": 0.09, "colour": "red"}])";
  auto pts = load_anchor_file(good);
  CHECK(pts.size() == 2);
  CHECK(pts[1].provenance == "measured");
  CHECK_THROWS_AS(load_anchor_file(bad), ConfigError);
  CHECK_THROWS_AS(load_anchor_file("/tmp/does_not_exist_nhl.json"), ConfigError);
  std::remove(good);
  std::remove(bad);
}

TEST_CASE("curve names round-trip") {
  CHECK(curve_kind_from_string(to_string(CurveKind::imbeta_vs_w)) == CurveKind::imbeta_vs_w);
  CHECK(curve_model_from_string(to_string(CurveModel::linear_through_origin)) == CurveModel::linear_through_origin);
  CHECK_THROWS_AS(curve_model_from_string("spline"), ConfigError);
}

TEST_CASE("loss-to-g conversions used by the figure configs") {
  CHECK(g2_of(0.1, 0.045) == doctest::Approx(1.11).epsilon(1e-3));
  CHECK(g2_of(0.0, 0.045) == 0.0);
  CHECK(g2_of(0.06, 0.045) == doctest::Approx(0.667).epsilon(1e-3));
}

TEST_CASE("one anchor plus a fixed decay constant passes through the anchor") {
  std::vector<AnchorPoint> pts{{0.7, 0.1, "1/um", "measured"}};
  auto c = fit_curve(pts, CurveModel::exponential, CurveKind::imbeta_vs_w, -0.5);
  CHECK(c.predict(0.7) == doctest::Approx(0.1).epsilon(1e-12));
}
