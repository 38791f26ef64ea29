#pragma once
/// Momentum spectra, decay and oscillation fits, interface-vs-defect loss comparison.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "nhl/propagation.hpp"

namespace nhl {

enum class Window { none, hann };
std::string to_string(Window w);
Window window_from_string(const std::string& s);

struct MomentumSpectrum {
  Eigen::VectorXd kx;     // 1/um, ascending in [-pi/d, pi/d)
  Eigen::VectorXd kz;     // 1/um, ascending, centred on re_beta
  Eigen::MatrixXd power;  // rows kz, cols kx
  Window window = Window::hann;
  int pad_factor = 4;
  double windowed_norm = 0.0;  // sum |w a|^2, equals power.sum() by Parseval
};

/// 2D DFT of a_j(z) with x_j = -j d. The carrier re_beta is removed before and restored on the kz axis.
/// z is zero-padded to at least pad_factor * n_z (rounded up to a 2-3-5 smooth length).
MomentumSpectrum momentum_spectrum(const FieldEvolution& f, Window window = Window::hann, int pad_factor = 4);

struct RidgePeak {
  double kz = 0.0;
  double rel_height = 0.0;
};

/// Local maxima (log-parabola refined) of the column nearest kx inside [kz_lo, kz_hi].
std::vector<RidgePeak> column_peaks(const MomentumSpectrum& s, double kx, double kz_lo, double kz_hi,
                                    double rel_threshold = 0.05);

struct RidgeSummary {
  double centroid = 0.0;   // power-weighted kz over the window
  double kz_min = 0.0;     // extremes of the per-column dominant peak
  double kz_max = 0.0;
  double variation = 0.0;  // kz_max - kz_min
  int columns_used = 0;
};

/// Dominant-peak position per kx column (columns below min_rel of the strongest are skipped).
RidgeSummary ridge_summary(const MomentumSpectrum& s, double kz_lo, double kz_hi, double min_rel = 1e-2);

/// Full width at half maximum of the dominant peak in the column nearest kx.
double ridge_fwhm(const MomentumSpectrum& s, double kx, double kz_lo, double kz_hi);

struct DecayFit {
  double ell = 0.0;  // um
  double a0 = 0.0;
  std::vector<std::pair<double, double>> fit_ranges;  // accepted ranges
  std::vector<double> ells;                           // per accepted range
  double ell_error = 0.0;
  std::vector<double> r_squared;
  int rejected = 0;
};

/// Log-linear least squares per range; ell is the mean and ell_error the spread over ranges.
DecayFit fit_decay(const std::vector<double>& z, const Eigen::VectorXd& I,
                   const std::vector<std::pair<double, double>>& ranges);

/// Start z in {4..10} um, end 80 um.
std::vector<std::pair<double, double>> default_fit_ranges();

struct OscillationFit {
  double kz_osc = 0.0;  // 1/um
  double phi = 0.0;
  double ell = 0.0;
  double a0 = 0.0, a1 = 0.0;
  double kz_stderr = 0.0;
  double residual_rms = 0.0;
  int iterations = 0;
  bool converged = false;
  bool oscillation_resolved = false;
  std::pair<double, double> fit_range;
};

/// I(z) = a1 cos(kz z + phi) exp(-z/ell) + a0. Traces without an interior extremum in the range carry no
/// resolvable frequency and return the exponential decay fit with a1 = 0, kz = 0.
OscillationFit fit_oscillation(const std::vector<double>& z, const Eigen::VectorXd& I,
                               std::pair<double, double> range = {0.0, 80.0});

struct InterfaceDefectRow {
  double g2 = 0.0;
  double im_interface = 0.0;  // 1/um
  double im_defect = 0.0;     // 1/um
  bool ambiguous = false;
};

struct InterfaceDefectOptions {
  int left_cells = 6;
  int right_cells = 6;
  int defect_sites = 40;
  double spacing_d = 1.0;
};

/// Least-lossy-at-the-site comparison between the II/III interface mode and an isolated low-loss site.
std::vector<InterfaceDefectRow> interface_vs_defect(const std::vector<double>& g2_values, double J,
                                                    const InterfaceDefectOptions& opt = {});

}  // namespace nhl
