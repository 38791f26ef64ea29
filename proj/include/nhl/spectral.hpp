#pragma once
/// Complex eigen-decomposition with biorthogonal left vectors, zero modes, EP sweeps.

#include <array>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "nhl/lattice.hpp"

namespace nhl {

constexpr double kDefectThreshold = 1e8;

struct ComplexSpectrum {
  Eigen::VectorXcd eigenvalues;
  Eigen::MatrixXcd right;  // columns, unit norm
  Eigen::MatrixXcd left;   // columns; unit norm until biorthonormalized
  bool biorthonormal = false;
  Eigen::VectorXd condition;  // 1/|<l|r>| for unit l, r
  EnergyUnit unit = EnergyUnit::inverse_micron;

  int size() const { return static_cast<int>(eigenvalues.size()); }
  double max_condition() const { return condition.size() ? condition.maxCoeff() : 0.0; }
  bool near_defective(double threshold = kDefectThreshold) const { return !(max_condition() <= threshold); }
};

ComplexSpectrum eig_full(const Eigen::MatrixXcd& H, EnergyUnit unit = EnergyUnit::inverse_micron);
inline ComplexSpectrum eig_full(const Hamiltonian& H) { return eig_full(H.matrix, H.unit); }

/// Rescales left vectors so <<l_m|r_n>> = delta_mn; throws DefectiveError above the threshold.
ComplexSpectrum biorthonormalize(const ComplexSpectrum& s, double threshold = kDefectThreshold);

struct ZeroModeReport {
  std::vector<int> indices;  // sorted by |Re E - reference|
  double tol = 0.0;          // units of J
  std::vector<cplx> energies;
  std::vector<double> localization_lengths;  // um, 1/e length of |psi|^2
  std::vector<double> edge_weights;          // weight in the first and last unit cell
  std::vector<double> fit_r2;
  std::vector<int> dominant_edge;  // 0 = left end, 1 = right end
};

/// Modes with |Re E - re_beta| < tol_J * J in a finite lattice spectrum.
ZeroModeReport find_zero_modes(const ComplexSpectrum& s, const LatticeSpec& spec, double tol_J = 1e-6);

struct LocalizationFit {
  double length = 0.0;  // um
  double r2 = 0.0;
  int edge = 0;
};

/// Exponential fit of log|psi|^2 on the dominant sublattice, from the heavier edge to the centre.
LocalizationFit localization_fit(const Eigen::VectorXcd& psi, double d);

struct EPSweepSpec {
  Phase left = Phase::II;
  Phase right = Phase::III;
  int left_cells = 6;
  int right_cells = 6;
  double im_beta = 0.1;  // 1/um, held fixed; g = im_beta / (2J)
  double spacing_d = 1.0;
  double re_beta = 0.0;
};

LatticeSpec ep_lattice(const EPSweepSpec& spec, double J);

struct EPSweepResult {
  std::vector<double> J_values;
  std::vector<std::array<cplx, 2>> tracked;  // 1/um, re_beta removed
  std::vector<double> separation;
  std::vector<double> re_split;
  std::vector<double> im_split;
  std::vector<double> step_overlap;  // weakest continuation overlap entering each J
  int ep_index = 0;
  double J_ep_estimate = 0.0;
  double coalescence_condition = 0.0;
};

EPSweepResult ep_sweep(const EPSweepSpec& spec, const std::vector<double>& J_values);

struct EPRefinement {
  double J_ep = 0.0;
  double bracket_lo = 0.0, bracket_hi = 0.0;
  double condition = 0.0;  // largest pair condition number at the closest bracket end
  double separation = 0.0;
};

/// Bisects the flip of (Re split > Im split) around the sweep minimum.
EPRefinement refine_exceptional_point(const EPSweepSpec& spec, const EPSweepResult& sweep, int iterations = 60);

}  // namespace nhl
