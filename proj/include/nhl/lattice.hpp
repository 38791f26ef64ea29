#pragma once
/// Four-site loss-patterned lattice: Bloch and open-chain Hamiltonians.

#include <array>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace nhl {

using cplx = std::complex<double>;
using CellDiagonal = std::array<cplx, 4>;

enum class Phase { I, II, III, Custom };
enum class EnergyUnit { inverse_micron, hopping };

std::string to_string(Phase p);
Phase phase_from_string(const std::string& s);

struct LossPattern {
  Phase phase = Phase::I;
  double g0 = 0.0, g1 = 0.0, g2 = 0.0;
  std::optional<CellDiagonal> custom_cell;

  // Symmetric presets g0 = g1 = |g2|; II carries g2 < 0, III carries g2 > 0.
  static LossPattern preset(Phase p, double g);
  // Sign of g2 picks the phase: > 0 is III, < 0 is II, 0 is I.
  static LossPattern from_g2(double g2);
  static LossPattern general(double g0, double g1, double g2);
  static LossPattern custom(const CellDiagonal& cell);

  void validate() const;
};

/// On-site values of one cell, units of J.
CellDiagonal cell_diagonal(const LossPattern& pattern);

struct Domain {
  LossPattern pattern;
  int first_site = 0;
  int n_sites = 0;
};

struct LatticeSpec {
  int n_sites = 0;
  double hopping_J = 0.0;  // 1/um
  double spacing_d = 1.0;  // um
  double re_beta = 0.0;    // 1/um
  std::vector<cplx> onsite;  // per site, units of J
  std::vector<Domain> domains;
  std::optional<int> interface_site;  // 0-based

  void validate() const;
  // Im beta_j in 1/um as the physical absorption (positive for loss).
  double absorption(int site) const { return -hopping_J * onsite.at(site).imag(); }
};

/// Single-phase open chain; the last cell is truncated site by site.
LatticeSpec uniform_lattice(const LossPattern& pattern, int n_sites, double J, double d, double re_beta = 0.0);

/// Left domain followed by right domain; interface_site is the first right-domain site.
LatticeSpec interface_lattice(const LossPattern& left, const LossPattern& right, int n_left_cells,
                              int n_right_cells, double J, double d, double re_beta = 0.0);

/// Lattice with loss -2igJ everywhere except a single low-loss site.
LatticeSpec defect_lattice(double g, int n_sites, int defect_site, double J, double d, double re_beta = 0.0);

struct Hamiltonian {
  Eigen::MatrixXcd matrix;
  EnergyUnit unit = EnergyUnit::inverse_micron;
};

/// Bloch matrix at momentum k (1/um); unit selects J-scaled or 1/um entries.
Hamiltonian bloch_hamiltonian(double k, const LossPattern& pattern, double J, double d,
                              EnergyUnit unit = EnergyUnit::hopping);

/// Tridiagonal open-boundary matrix in 1/um with re_beta on the diagonal.
Hamiltonian real_space_hamiltonian(const LatticeSpec& spec);

/// Reduced zone length pi/(2d).
double reduced_zone(double d);

}  // namespace nhl
