#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "nhl/errors.hpp"
#include "nhl/propagation.hpp"

using namespace nhl;

namespace {
double max_rel_dev(const FieldEvolution& a, const FieldEvolution& b) {
  return (a.a - b.a).cwiseAbs().maxCoeff() / b.a.cwiseAbs().maxCoeff();
}
}  // namespace

TEST_CASE("single lossy waveguide decays as exp(-2 Im beta z)") {
  // absorption 0.1 / um -> |a|^2 = exp(-0.2 z)
  auto s = custom_lattice({cplx(0, -0.1 / 0.05)}, 0.05, 1.0, 0.0);
  CHECK(s.absorption(0) == doctest::Approx(0.1));
  PropagationOptions o;
  o.z_max = 20;
  o.dz = 0.01;
  for (auto m : {Method::rk4, Method::expm}) {
    o.method = m;
    auto f = propagate(s, resolve_excitation(ExcitationKind::edge, s), o);
    auto I = f.site_intensity(0);
    for (size_t k = 0; k < f.z.size(); k += 100)
      CHECK(I(k) == doctest::Approx(std::exp(-0.2 * f.z[k])).epsilon(1e-10));
  }
}

TEST_CASE("carrier phase advances as exp(i re_beta z)") {
  auto s = custom_lattice({cplx(0, 0)}, 0.05, 1.0, 6.6);
  PropagationOptions o;
  o.z_max = 1.0;
  o.dz = 0.01;
  auto f = propagate(s, resolve_excitation(ExcitationKind::edge, s), o);
  CHECK(std::abs(f.a(f.z.size() - 1, 0) - std::exp(cplx(0, 6.6 * 1.0))) < 1e-12);
}

TEST_CASE("two coupled waveguides exchange power as cos^2(Jz)") {
  const double J = 0.2;
  auto s = custom_lattice({0.0, 0.0}, J, 1.0);
  PropagationOptions o;
  o.z_max = 30;
  o.dz = 0.01;
  auto f = propagate(s, resolve_excitation(ExcitationKind::edge, s), o);
  auto I = f.site_intensity(0);
  for (size_t k = 0; k < f.z.size(); k += 50) CHECK(std::abs(I(k) - std::pow(std::cos(J * f.z[k]), 2)) < 1e-10);
}

TEST_CASE("lossless evolution conserves total intensity") {
  auto s = uniform_lattice(LossPattern{}, 48, 0.045, 1.4, 6.6);
  PropagationOptions o;
  o.z_max = 100;
  o.sample_every = 10;
  auto f = propagate(s, resolve_excitation(ExcitationKind::edge, s), o);
  auto tot = f.total_intensity();
  CHECK((tot.array() - 1.0).abs().maxCoeff() < 1e-9);
}

TEST_CASE("property: lossy evolution never gains intensity") {
  for (auto ph : {Phase::II, Phase::III}) {
    auto s = uniform_lattice(LossPattern::preset(ph, 1.1), 24, 0.045, 1.4, 6.6);
    PropagationOptions o;
    o.z_max = 50;
    o.sample_every = 5;
    auto tot = propagate(s, resolve_excitation(ExcitationKind::edge, s), o).total_intensity();
    for (int k = 1; k < tot.size(); ++k) CHECK(tot(k) <= tot(k - 1) * (1 + 1e-12));
  }
}

TEST_CASE("rk4 and expm agree") {
  auto s = interface_lattice(LossPattern::preset(Phase::II, 1.1), LossPattern::preset(Phase::III, 1.1), 6, 6, 0.045,
                             1.4, 6.6);
  PropagationOptions o;
  o.z_max = 100;
  o.sample_every = 10;
  auto e = resolve_excitation(ExcitationKind::interface, s);
  auto a = propagate(s, e, o);
  o.method = Method::expm;
  auto b = propagate(s, e, o);
  CHECK(a.z.size() == b.z.size());
  CHECK(max_rel_dev(a, b) < 1e-8);
}

TEST_CASE("rk4 error falls by ~16 when dz halves") {
  auto s = uniform_lattice(LossPattern::preset(Phase::III, 0.7), 16, 1.0, 1.0);
  auto e = resolve_excitation(ExcitationKind::edge, s);
  PropagationOptions o;
  o.z_max = 10;
  o.dz = 0.00625;
  o.method = Method::expm;
  o.sample_every = 8;
  auto ref = propagate(s, e, o);
  o.method = Method::rk4;
  o.dz = 0.025;
  o.sample_every = 2;
  auto c = propagate(s, e, o);
  o.dz = 0.0125;
  o.sample_every = 4;
  auto f = propagate(s, e, o);
  double ec = (c.a - ref.a).cwiseAbs().maxCoeff(), ef = (f.a - ref.a).cwiseAbs().maxCoeff();
  double ratio = ec / ef;
  CHECK(ratio >= 8);
  CHECK(ratio <= 32);
}

TEST_CASE("too coarse a step is a configuration error") {
  auto s = uniform_lattice(LossPattern::preset(Phase::III, 1.0), 16, 1.0, 1.0);
  PropagationOptions o;
  o.dz = 1.0;
  o.z_max = 10;
  CHECK_THROWS_AS(propagate(s, resolve_excitation(ExcitationKind::edge, s), o), ConfigError);
}

TEST_CASE("excitation kinds resolve to the documented sites") {
  auto s = interface_lattice(LossPattern::preset(Phase::II, 1.1), LossPattern::preset(Phase::III, 1.1), 6, 6, 0.045,
                             1.4);
  CHECK(resolve_excitation(ExcitationKind::edge, s).site == 0);
  CHECK(resolve_excitation(ExcitationKind::interface, s).site == 24);
  auto b = resolve_excitation(ExcitationKind::bulk_cell_start, s);
  CHECK(b.site % 4 == 0);
  CHECK(b.site >= 8);
  CHECK(b.site <= 24 - 8);
  CHECK(resolve_excitation(ExcitationKind::site_index, s, 7).site == 7);
  CHECK_THROWS_AS(resolve_excitation(ExcitationKind::site_index, s), ConfigError);
  CHECK_THROWS_AS(resolve_excitation(ExcitationKind::site_index, s, 48), ConfigError);
  CHECK_THROWS_AS(resolve_excitation(ExcitationKind::bulk_cell_start, s, 5), ConfigError);
  auto u = uniform_lattice(LossPattern{}, 8, 0.045, 1.4);
  CHECK_THROWS_AS(resolve_excitation(ExcitationKind::interface, u), ConfigError);
  CHECK(excitation_kind_from_string("bulk_cell_start") == ExcitationKind::bulk_cell_start);
  CHECK(method_from_string("expm") == Method::expm);
  CHECK_THROWS_AS(method_from_string("euler"), ConfigError);
}

TEST_CASE("centre of mass starts at the excited site") {
  auto s = uniform_lattice(LossPattern{}, 20, 0.045, 1.4);
  PropagationOptions o;
  o.z_max = 5;
  auto com = center_of_mass(propagate(s, resolve_excitation(ExcitationKind::site_index, s, 10), o));
  CHECK(com.front().second == doctest::Approx(10 * 1.4));
}

TEST_CASE("simulated beating period matches the band splitting in the trivial bulk") {
  auto s = uniform_lattice(LossPattern::preset(Phase::II, 2.0), 48, 0.045, 1.4, 6.6);
  PropagationOptions o;
  o.z_max = 100;
  o.sample_every = 10;
  auto b = beating_period(s, resolve_excitation(ExcitationKind::site_index, s, 20), o);
  REQUIRE(b.simulated_period);
  CHECK(b.beating);
  CHECK(*b.simulated_period == doctest::Approx(b.spectral_period).epsilon(0.02));
  CHECK(b.spectral_period == doctest::Approx(2 * M_PI / b.delta_kz));
}

TEST_CASE("phase III edge excitation stays locked to the outermost waveguide") {
  auto s = uniform_lattice(LossPattern::preset(Phase::III, 1.1), 48, 0.045, 1.4, 6.6);
  PropagationOptions o;
  o.z_max = 50;
  auto f = propagate(s, resolve_excitation(ExcitationKind::edge, s), o);
  Eigen::VectorXd frac = f.site_intensity(0).cwiseQuotient(f.total_intensity());
  CHECK(frac.minCoeff() > 0.5);
}

TEST_CASE("centre of mass: fixed for isolated and mirror-symmetric spreads") {
  auto one = custom_lattice({cplx(0, -1.0)}, 0.05, 1.4);
  PropagationOptions o;
  o.z_max = 20;
  for (auto [z, x] : center_of_mass(propagate(one, resolve_excitation(ExcitationKind::edge, one), o)))
    CHECK(x == doctest::Approx(0.0));
  auto s = uniform_lattice(LossPattern{}, 41, 0.045, 1.4);
  o.z_max = 60;
  for (auto [z, x] : center_of_mass(propagate(s, resolve_excitation(ExcitationKind::site_index, s, 20), o)))
    CHECK(x == doctest::Approx(20 * 1.4).epsilon(1e-9));
}

TEST_CASE("phase II bulk population swings between neighbouring low-loss sites") {
  auto s = uniform_lattice(LossPattern::preset(Phase::II, 1.1), 48, 0.045, 1.4, 6.6);
  PropagationOptions o;
  o.z_max = 100;
  o.sample_every = 10;
  auto e = resolve_excitation(ExcitationKind::bulk_cell_start, s);
  auto com = center_of_mass(propagate(s, e, o));
  double x0 = e.site * 1.4, lo = 1e9, hi = -1e9;
  for (auto [z, x] : com) {
    lo = std::min(lo, x - x0);
    hi = std::max(hi, x - x0);
  }
  // the low-loss pair is sites 0 and 1 of the cell, one spacing apart
  CHECK(lo > -0.5 * 1.4);
  CHECK(hi > 0.4 * 1.4);
}

TEST_CASE("no beating for the topological edge; longer period at higher loss") {
  PropagationOptions o;
  o.z_max = 100;
  o.sample_every = 10;
  auto s3 = uniform_lattice(LossPattern::preset(Phase::III, 1.1), 48, 0.045, 1.4, 6.6);
  CHECK_FALSE(beating_period(s3, resolve_excitation(ExcitationKind::edge, s3), o).beating);
  double prev = 0;
  for (double g : {0.7, 1.1, 2.0, 3.0}) {
    auto s = uniform_lattice(LossPattern::preset(Phase::II, g), 48, 0.045, 1.4, 6.6);
    auto b = beating_period(s, resolve_excitation(ExcitationKind::site_index, s, 20), o);
    CHECK(b.spectral_period > prev);
    prev = b.spectral_period;
  }
}
