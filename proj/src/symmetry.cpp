#include "nhl/symmetry.hpp"

#include <numbers>
#include <random>

#include "nhl/errors.hpp"

namespace nhl {

using cplx = std::complex<double>;

std::string to_string(LossCase c) { return c == LossCase::nontrivial ? "nontrivial" : "trivial"; }

LossCase loss_case_from_string(const std::string& s) {
  if (s == "nontrivial") return LossCase::nontrivial;
  if (s == "trivial") return LossCase::trivial;
  throw ConfigError("unknown loss case '" + s + "' (expected nontrivial or trivial)");
}

namespace {

Eigen::Matrix2cd sz() { return (Eigen::Matrix2cd() << 1, 0, 0, -1).finished(); }
Eigen::Matrix2cd sx() { return (Eigen::Matrix2cd() << 0, 1, 1, 0).finished(); }

void put(Eigen::MatrixXcd& M, int br, int bc, const Eigen::Matrix2cd& b) { M.block<2, 2>(2 * br, 2 * bc) = b; }

}  // namespace

HDP build_HDP(double k, double g, LossCase c) {
  if (g < 0) throw ConfigError("build_HDP needs g >= 0");
  const cplx i(0, 1);
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(8, 8);
  Eigen::Matrix2cd h;
  h << -std::exp(-4.0 * i * k), 0, 0, std::exp(4.0 * i * k);
  put(H, 0, 1, -sz());
  put(H, 1, 0, -sz());
  put(H, 1, 2, -sz());
  put(H, 2, 1, -sz());
  put(H, 2, 3, -sz());
  put(H, 3, 2, -sz());
  put(H, 0, 3, h);
  put(H, 3, 0, h.conjugate());
  HDP out;
  out.H = H;
  out.D = Eigen::MatrixXcd::Identity(8, 8);
  out.P = Eigen::MatrixXcd::Zero(8, 8);
  if (c == LossCase::nontrivial) {
    put(out.P, 1, 1, i * sz());
    put(out.P, 2, 2, i * sz());
  } else {
    put(out.P, 2, 2, i * sz());
    put(out.P, 3, 3, i * sz());
  }
  return out;
}

Eigen::MatrixXcd cell_shift(double k) {
  const cplx i(0, 1);
  // new blocks (A', B', C', D') take old (D, A, B, C); the wrapped block picks up the Bloch phase
  const int old_of_new[4] = {3, 0, 1, 2};
  Eigen::MatrixXcd Pi = Eigen::MatrixXcd::Zero(8, 8);
  for (int b = 0; b < 4; ++b) Pi.block<2, 2>(2 * b, 2 * old_of_new[b]) = Eigen::Matrix2cd::Identity();
  Eigen::MatrixXcd Phi = Eigen::MatrixXcd::Identity(8, 8);
  Phi(0, 0) = std::exp(-4.0 * i * k);
  Phi(1, 1) = std::exp(4.0 * i * k);
  return Phi * Pi;
}

SymmetryUnitaries symmetry_unitaries(double k, LossCase c) {
  SymmetryUnitaries u;
  u.UT = Eigen::MatrixXcd::Zero(8, 8);
  for (int b = 0; b < 4; ++b) put(u.UT, b, b, (b % 2 ? -1.0 : 1.0) * Eigen::Matrix2cd::Identity());
  u.UC = Eigen::MatrixXcd::Zero(8, 8);
  for (int b = 0; b < 4; ++b) put(u.UC, b, 3 - b, sx());
  if (c == LossCase::trivial) {
    Eigen::MatrixXcd S = cell_shift(k);
    u.UT = S * u.UT * S.adjoint();
    u.UC = S * u.UC * S.adjoint();
  }
  u.US = u.UT * u.UC;
  return u;
}

SymmetryReport check_symmetries(const std::vector<double>& ks, LossCase c, double g, const Eigen::MatrixXcd* dH,
                                double tol) {
  if (dH && (dH->rows() != 8 || dH->cols() != 8)) throw ConfigError("perturbation must be 8x8");
  SymmetryReport r;
  r.k_samples = ks;
  auto at = [&](double k) {
    HDP m = build_HDP(k, g, c);
    if (dH) m.H += *dH;
    return m;
  };
  for (double k : ks) {
    HDP p = at(k), m = at(-k);
    auto u = symmetry_unitaries(k, c);
    // signs for (H, D, P): T and C use (-, +, -), S uses (+, +, +)
    const double sgnTC[3] = {-1.0, 1.0, -1.0};
    const Eigen::MatrixXcd* Xk[3] = {&p.H, &p.D, &p.P};
    const Eigen::MatrixXcd* Xm[3] = {&m.H, &m.D, &m.P};
    double rt = 0, rc = 0, rs = 0;
    Eigen::MatrixXcd UTi = u.UT.adjoint(), UCi = u.UC.adjoint(), USi = u.US.adjoint();
    for (int a = 0; a < 3; ++a) {
      rt = std::max(rt, (u.UT * Xm[a]->conjugate() * UTi - sgnTC[a] * *Xk[a]).norm());
      rc = std::max(rc, (u.UC * Xm[a]->transpose() * UCi - sgnTC[a] * *Xk[a]).norm());
      rs = std::max(rs, (u.US * Xk[a]->adjoint() * USi - *Xk[a]).norm());
    }
    r.per_k.push_back({rt, rc, rs});
    r.residual_T = std::max(r.residual_T, rt);
    r.residual_C = std::max(r.residual_C, rc);
    r.residual_S = std::max(r.residual_S, rs);
  }
  r.holds_T = r.residual_T < tol;
  r.holds_C = r.residual_C < tol;
  r.holds_S = r.residual_S < tol;
  r.class_label = (r.holds_T && r.holds_C && r.holds_S) ? "BDI" : "not BDI";
  return r;
}

std::vector<double> uniform_k_samples(int n) {
  if (n < 1) throw ConfigError("need at least one k sample");
  std::vector<double> ks(n);
  for (int m = 0; m < n; ++m) ks[m] = -std::numbers::pi + 2.0 * std::numbers::pi * m / n;
  return ks;
}

Eigen::MatrixXcd random_hermitian(int n, double scale, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Eigen::MatrixXcd A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = cplx(nd(rng), nd(rng));
  Eigen::MatrixXcd Hm = 0.5 * (A + A.adjoint());
  return Hm * (scale / Hm.norm());
}

}  // namespace nhl
