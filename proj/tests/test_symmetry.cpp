#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nhl/errors.hpp"
#include "nhl/symmetry.hpp"

using namespace nhl;

namespace {
double unitarity(const Eigen::MatrixXcd& U) {
  return (U.adjoint() * U - Eigen::MatrixXcd::Identity(U.rows(), U.cols())).norm();
}
}  // namespace

TEST_CASE("H is Hermitian, D is the identity, P is anti-Hermitian") {
  for (auto c : {LossCase::nontrivial, LossCase::trivial})
    for (double k : {-2.0, 0.0, 0.7}) {
      auto m = build_HDP(k, 1.3, c);
      CHECK(m.H.rows() == 8);
      CHECK((m.H - m.H.adjoint()).norm() < 1e-14);
      CHECK((m.D - Eigen::MatrixXcd::Identity(8, 8)).norm() < 1e-14);
      CHECK((m.P + m.P.adjoint()).norm() < 1e-14);
      CHECK(m.P.norm() > 0);
    }
}

TEST_CASE("symmetry unitaries are unitary") {
  for (auto c : {LossCase::nontrivial, LossCase::trivial})
    for (double k : {-3.0, 0.4, 2.2}) {
      auto u = symmetry_unitaries(k, c);
      CHECK(unitarity(u.UT) < 1e-13);
      CHECK(unitarity(u.UC) < 1e-13);
      CHECK(unitarity(u.US) < 1e-13);
    }
  CHECK(unitarity(cell_shift(0.9)) < 1e-13);
}

TEST_CASE("cell shift maps the nontrivial loss matrix onto the trivial one") {
  for (double k : {-1.0, 0.0, 1.7}) {
    auto S = cell_shift(k);
    auto a = build_HDP(k, 1.0, LossCase::nontrivial), b = build_HDP(k, 1.0, LossCase::trivial);
    CHECK((S * a.H * S.adjoint() - a.H).norm() < 1e-13);
    CHECK((S * a.P * S.adjoint() - b.P).norm() < 1e-13);
  }
}

TEST_CASE("both loss cases are in class BDI") {
  for (auto c : {LossCase::nontrivial, LossCase::trivial}) {
    auto r = check_symmetries(uniform_k_samples(32), c);
    CHECK(r.residual_T < 1e-12);
    CHECK(r.residual_C < 1e-12);
    CHECK(r.residual_S < 1e-12);
    CHECK(r.class_label == "BDI");
    CHECK(r.per_k.size() == 32);
  }
}

TEST_CASE("a random Hermitian perturbation breaks the symmetries") {
  auto dH = random_hermitian(8, 1e-3, 42);
  CHECK((dH - dH.adjoint()).norm() < 1e-15);
  CHECK(dH.norm() == doctest::Approx(1e-3));
  for (auto c : {LossCase::nontrivial, LossCase::trivial}) {
    auto base = check_symmetries(uniform_k_samples(32), c);
    auto pert = check_symmetries(uniform_k_samples(32), c, 1.0, &dH);
    double b = std::max({base.residual_T, base.residual_C, base.residual_S, 1e-18});
    double p = std::max({pert.residual_T, pert.residual_C, pert.residual_S});
    CHECK(p / b >= 1e6);
    CHECK(pert.class_label == "not BDI");
  }
}

TEST_CASE("k samples are uniform in [-pi, pi)") {
  auto k = uniform_k_samples(8);
  CHECK(k.size() == 8);
  CHECK(k.front() == doctest::Approx(-M_PI));
  CHECK(k.back() < M_PI);
  CHECK(loss_case_from_string("trivial") == LossCase::trivial);
  CHECK_THROWS_AS(loss_case_from_string("other"), ConfigError);
}
