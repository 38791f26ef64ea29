#pragma once
/// Winding number from biorthogonal Wilson loops over the reduced Brillouin zone.

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "nhl/lattice.hpp"

namespace nhl {

struct WindingOptions {
  int zones = 1;                     // loop length in reduced zones; n zones yield n*W
  std::uint64_t random_gauge_seed = 0;  // nonzero: multiply every eigenvector by a random phase
};

struct WindingResult {
  double W = 0.0;
  std::array<double, 4> per_band_phase{};  // radians, bands continued by overlap (diagnostic)
  int k_grid_size = 0;
  double quantization_residual = 0.0;
  double gamma_lower = 0.0;  // Wilson phase of the bands with Re E < 0
  double gamma_upper = 0.0;  // Wilson phase of the bands with Re E > 0
  double min_line_gap = 0.0;  // min |Re E| over the node grid, units of J
  int zones = 1;
};

/// Gauge-invariant Wilson phase -arg prod_m det(L_m^H R_{m+1}) over a closed loop.
/// R[m], L[m] hold biorthonormal column bases of the same subspace at consecutive k.
double wilson_loop_phase(const std::vector<Eigen::MatrixXcd>& R, const std::vector<Eigen::MatrixXcd>& L);

/// W = (|gamma_lower| + |gamma_upper|) / 2pi. Throws GaplessError when the real line gap closes.
WindingResult winding_number(const LossPattern& pattern, double J, double d, int k_grid_size,
                             const WindingOptions& opt = {});

struct PhaseDiagramPoint {
  double g2 = 0.0;
  double W = 0.0;
  double residual = 0.0;
};

/// Symmetric convention g0 = g1 = |g2|; values with |g2| < exclusion are skipped.
std::vector<PhaseDiagramPoint> winding_phase_diagram(const std::vector<double>& g2_values, double J, double d,
                                                     int k_grid_size, double exclusion = 0.05);

}  // namespace nhl

namespace nhl {

/// Width of the real gap around Re E = 0 over the zone, 1/um:
/// min over k of the lowest positive Re E minus max over k of the highest negative Re E.
double real_band_gap(const LossPattern& pattern, double J, double d, int k_grid_size = 256);

}  // namespace nhl
