#pragma once
/// 8x8 Nambu matrices H(k), D, P of the Lindblad description and the T/C/S checks.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace nhl {

enum class LossCase { nontrivial, trivial };

std::string to_string(LossCase c);
LossCase loss_case_from_string(const std::string& s);

struct HDP {
  Eigen::MatrixXcd H, D, P;
};

/// k is the dimensionless Bloch phase (4 k_x d for a physical momentum). Prefactors J and sqrt(gJ) dropped.
HDP build_HDP(double k, double g, LossCase c);

struct SymmetryUnitaries {
  Eigen::MatrixXcd UT, UC, US;
};

/// Constant unitaries for the nontrivial case. The trivial case is a one-site relabelling of the cell,
/// so its unitaries are the nontrivial ones conjugated by that k-dependent relabelling.
SymmetryUnitaries symmetry_unitaries(double k, LossCase c);

/// Cell relabelling S(k) with S H S^H = H and S P_nontrivial S^H = P_trivial.
Eigen::MatrixXcd cell_shift(double k);

struct SymmetryReport {
  double residual_T = 0.0, residual_C = 0.0, residual_S = 0.0;  // max over k and the three relations
  bool holds_T = false, holds_C = false, holds_S = false;
  std::string class_label;
  std::vector<double> k_samples;
  std::vector<std::array<double, 3>> per_k;  // (T, C, S) residual at each k
};

/// Residuals of the T, C, S relations; dH (if given) is added to H(k) at every k.
SymmetryReport check_symmetries(const std::vector<double>& k_samples, LossCase c, double g = 1.0,
                                const Eigen::MatrixXcd* dH = nullptr, double tol = 1e-12);

/// n uniform Bloch phases in [-pi, pi).
std::vector<double> uniform_k_samples(int n);

/// Random Hermitian matrix with Frobenius norm `scale`.
Eigen::MatrixXcd random_hermitian(int n, double scale, std::uint64_t seed);

}  // namespace nhl
