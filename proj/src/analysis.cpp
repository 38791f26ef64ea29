#include "nhl/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <limits>
#include <numeric>

#include <unsupported/Eigen/FFT>
#include <unsupported/Eigen/LevenbergMarquardt>

#include "nhl/errors.hpp"
#include "nhl/spectral.hpp"

namespace nhl {

namespace {
constexpr double kPi = std::numbers::pi;
}

std::string to_string(Window w) { return w == Window::hann ? "hann" : "none"; }

Window window_from_string(const std::string& s) {
  if (s == "hann") return Window::hann;
  if (s == "none") return Window::none;
  throw ConfigError("unknown window '" + s + "' (expected hann or none)");
}

MomentumSpectrum momentum_spectrum(const FieldEvolution& f, Window window, int pad_factor) {
  if (!f.has_phase) throw PhaseRequiredError("momentum spectrum needs complex amplitudes, field holds intensities only");
  const int nz = static_cast<int>(f.a.rows());
  const int nx = static_cast<int>(f.a.cols());
  if (nx < 8) throw ConfigError("momentum spectrum needs at least 8 sites");
  if (nz < 64) throw ConfigError("momentum spectrum needs at least 64 z samples");
  if (pad_factor < 1) throw ConfigError("pad_factor must be >= 1");
  const double dzs = f.z[1] - f.z[0];
  const double d = f.spec.spacing_d;
  // z padding is rounded up to a 2-3-5 smooth length; a large prime factor makes the FFT quadratic
  auto smooth = [](int n) {
    for (;; ++n) {
      int m = n;
      for (int p : {2, 3, 5})
        while (m % p == 0) m /= p;
      if (m == 1) return n;
    }
  };
  const int Nz = smooth(nz * pad_factor), Nx = nx * pad_factor;

  MomentumSpectrum s;
  s.window = window;
  s.pad_factor = pad_factor;

  Eigen::MatrixXcd B = Eigen::MatrixXcd::Zero(Nz, Nx);
  const std::complex<double> i(0, 1);
  for (int r = 0; r < nz; ++r) {
    double w = window == Window::hann ? 0.5 * (1.0 - std::cos(2.0 * kPi * r / (nz - 1))) : 1.0;
    std::complex<double> demod = std::exp(-i * f.spec.re_beta * f.z[r]) * w;
    for (int j = 0; j < nx; ++j) B(r, j) = f.a(r, j) * demod;
  }
  s.windowed_norm = B.cwiseAbs2().sum();

  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> in, out;
  for (int j = 0; j < nx; ++j) {
    in.assign(B.col(j).data(), B.col(j).data() + Nz);
    fft.fwd(out, in);
    for (int r = 0; r < Nz; ++r) B(r, j) = out[r];
  }
  for (int r = 0; r < Nz; ++r) {
    in.resize(Nx);
    for (int j = 0; j < Nx; ++j) in[j] = B(r, j);
    fft.fwd(out, in);
    for (int j = 0; j < Nx; ++j) B(r, j) = out[j];
  }

  auto fftfreq = [](int q, int N) { return q < (N + 1) / 2 ? double(q) / N : double(q - N) / N; };
  std::vector<std::pair<double, int>> kzs(Nz), kxs(Nx);
  for (int q = 0; q < Nz; ++q) kzs[q] = {f.spec.re_beta + 2.0 * kPi * fftfreq(q, Nz) / dzs, q};
  for (int p = 0; p < Nx; ++p) {
    // kernel exp(-i kx x_j), x_j = -j d, so bin p sits at kx = -2 pi f_p / d
    double kx = -2.0 * kPi * fftfreq(p, Nx) / d;
    if (kx >= kPi / d * (1 - 1e-12)) kx -= 2.0 * kPi / d;
    kxs[p] = {kx, p};
  }
  std::sort(kzs.begin(), kzs.end());
  std::sort(kxs.begin(), kxs.end());
  s.kz.resize(Nz);
  s.kx.resize(Nx);
  s.power.resize(Nz, Nx);
  const double norm = 1.0 / (double(Nz) * Nx);
  for (int a = 0; a < Nz; ++a) {
    s.kz(a) = kzs[a].first;
    for (int b = 0; b < Nx; ++b) s.power(a, b) = std::norm(B(kzs[a].second, kxs[b].second)) * norm;
  }
  for (int b = 0; b < Nx; ++b) s.kx(b) = kxs[b].first;
  return s;
}

namespace {

int nearest_column(const MomentumSpectrum& s, double kx) {
  Eigen::Index c;
  (s.kx.array() - kx).abs().minCoeff(&c);
  return static_cast<int>(c);
}

std::pair<int, int> kz_window(const MomentumSpectrum& s, double lo, double hi) {
  int a = 0, b = static_cast<int>(s.kz.size()) - 1;
  while (a < s.kz.size() && s.kz(a) < lo) ++a;
  while (b >= 0 && s.kz(b) > hi) --b;
  if (b - a < 2) throw ConfigError("kz window holds fewer than 3 grid points");
  return {a, b};
}

double refine(const MomentumSpectrum& s, int col, int r) {
  double y0 = std::log(std::max(s.power(r - 1, col), 1e-300));
  double y1 = std::log(std::max(s.power(r, col), 1e-300));
  double y2 = std::log(std::max(s.power(r + 1, col), 1e-300));
  double den = y0 - 2 * y1 + y2;
  double delta = den != 0 ? 0.5 * (y0 - y2) / den : 0.0;
  delta = std::clamp(delta, -0.5, 0.5);
  return s.kz(r) + delta * (s.kz(r + 1) - s.kz(r));
}

}  // namespace

std::vector<RidgePeak> column_peaks(const MomentumSpectrum& s, double kx, double kz_lo, double kz_hi,
                                    double rel_threshold) {
  int c = nearest_column(s, kx);
  auto [a, b] = kz_window(s, kz_lo, kz_hi);
  double mx = s.power.col(c).segment(a, b - a + 1).maxCoeff();
  std::vector<RidgePeak> out;
  if (!(mx > 0)) return out;
  for (int r = a + 1; r < b; ++r) {
    double v = s.power(r, c);
    if (v > s.power(r - 1, c) && v >= s.power(r + 1, c) && v > rel_threshold * mx) out.push_back({refine(s, c, r), v / mx});
  }
  return out;
}

RidgeSummary ridge_summary(const MomentumSpectrum& s, double kz_lo, double kz_hi, double min_rel) {
  auto [a, b] = kz_window(s, kz_lo, kz_hi);
  RidgeSummary r;
  Eigen::MatrixXd W = s.power.middleRows(a, b - a + 1);
  double tot = W.sum();
  if (!(tot > 0)) throw NumericalError("no spectral power in the kz window");
  r.centroid = (W.transpose() * s.kz.segment(a, b - a + 1)).sum() / tot;
  double gmax = W.maxCoeff();
  r.kz_min = std::numeric_limits<double>::infinity();
  r.kz_max = -std::numeric_limits<double>::infinity();
  for (int c = 0; c < W.cols(); ++c) {
    Eigen::Index rr;
    double cm = W.col(c).maxCoeff(&rr);
    if (cm < min_rel * gmax) continue;
    int row = a + static_cast<int>(rr);
    double kz = (row > a && row < b) ? refine(s, c, row) : s.kz(row);
    r.kz_min = std::min(r.kz_min, kz);
    r.kz_max = std::max(r.kz_max, kz);
    ++r.columns_used;
  }
  r.variation = r.kz_max - r.kz_min;
  return r;
}

double ridge_fwhm(const MomentumSpectrum& s, double kx, double kz_lo, double kz_hi) {
  int c = nearest_column(s, kx);
  auto [a, b] = kz_window(s, kz_lo, kz_hi);
  Eigen::Index rr;
  double mx = s.power.col(c).segment(a, b - a + 1).maxCoeff(&rr);
  int p = a + static_cast<int>(rr);
  double half = 0.5 * mx;
  auto cross = [&](int step) {
    int r = p;
    while (r + step >= a && r + step <= b && s.power(r + step, c) > half) r += step;
    int q = r + step;
    if (q < a || q > b) return s.kz(r);
    double v0 = s.power(r, c), v1 = s.power(q, c);
    double t = (v0 - half) / (v0 - v1);
    return s.kz(r) + t * (s.kz(q) - s.kz(r));
  };
  return cross(1) - cross(-1);
}

std::vector<std::pair<double, double>> default_fit_ranges() {
  std::vector<std::pair<double, double>> r;
  for (int lo = 4; lo <= 10; ++lo) r.emplace_back(lo, 80.0);
  return r;
}

DecayFit fit_decay(const std::vector<double>& z, const Eigen::VectorXd& I,
                   const std::vector<std::pair<double, double>>& ranges) {
  if (static_cast<Eigen::Index>(z.size()) != I.size()) throw ConfigError("z grid and trace differ in length");
  if (ranges.empty()) throw ConfigError("fit_decay needs at least one fit range");
  DecayFit out;
  std::vector<double> amps;
  for (auto [lo, hi] : ranges) {
    std::vector<double> xs, ys;
    bool bad = false;
    for (size_t s = 0; s < z.size(); ++s) {
      if (z[s] < lo - 1e-9 || z[s] > hi + 1e-9) continue;
      if (!(I(s) > 0)) { bad = true; break; }
      xs.push_back(z[s]);
      ys.push_back(std::log(I(s)));
    }
    if (bad || xs.size() < 10) { ++out.rejected; continue; }
    const double n = static_cast<double>(xs.size());
    double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (size_t k = 0; k < xs.size(); ++k) {
      sxx += (xs[k] - mx) * (xs[k] - mx);
      sxy += (xs[k] - mx) * (ys[k] - my);
      syy += (ys[k] - my) * (ys[k] - my);
    }
    double slope = sxy / sxx;
    if (!(slope < 0)) { ++out.rejected; continue; }
    out.fit_ranges.emplace_back(lo, hi);
    out.ells.push_back(-1.0 / slope);
    amps.push_back(std::exp(my - slope * mx));
    out.r_squared.push_back(syy > 0 ? sxy * sxy / (sxx * syy) : 1.0);
  }
  if (out.ells.empty()) throw FitError("all fit ranges rejected (non-positive intensity, too few samples, or no decay)");
  const double k = static_cast<double>(out.ells.size());
  out.ell = std::accumulate(out.ells.begin(), out.ells.end(), 0.0) / k;
  out.a0 = std::accumulate(amps.begin(), amps.end(), 0.0) / k;
  double var = 0;
  for (double e : out.ells) var += (e - out.ell) * (e - out.ell);
  out.ell_error = out.ells.size() > 1 ? std::sqrt(var / (k - 1)) : 0.0;
  return out;
}

namespace {

// parameters: a0, a1, kz, phi, gamma = 1/ell
struct OscModel : Eigen::DenseFunctor<double> {
  const std::vector<double>& z;
  const std::vector<double>& y;
  OscModel(const std::vector<double>& z_, const std::vector<double>& y_)
      : DenseFunctor<double>(5, static_cast<int>(z_.size())), z(z_), y(y_) {}
  int operator()(const Eigen::VectorXd& p, Eigen::VectorXd& f) const {
    for (size_t i = 0; i < z.size(); ++i)
      f(i) = p(1) * std::cos(p(2) * z[i] + p(3)) * std::exp(-p(4) * z[i]) + p(0) - y[i];
    return 0;
  }
  int df(const Eigen::VectorXd& p, Eigen::MatrixXd& J) const {
    for (size_t i = 0; i < z.size(); ++i) {
      double e = std::exp(-p(4) * z[i]);
      double c = std::cos(p(2) * z[i] + p(3)), s = std::sin(p(2) * z[i] + p(3));
      J(i, 0) = 1.0;
      J(i, 1) = c * e;
      J(i, 2) = -p(1) * s * e * z[i];
      J(i, 3) = -p(1) * s * e;
      J(i, 4) = -z[i] * p(1) * c * e;
    }
    return 0;
  }
};

}  // namespace

OscillationFit fit_oscillation(const std::vector<double>& z, const Eigen::VectorXd& I, std::pair<double, double> range) {
  if (static_cast<Eigen::Index>(z.size()) != I.size()) throw ConfigError("z grid and trace differ in length");
  std::vector<double> zs, ys;
  for (size_t s = 0; s < z.size(); ++s)
    if (z[s] >= range.first - 1e-9 && z[s] <= range.second + 1e-9) {
      zs.push_back(z[s]);
      ys.push_back(I(s));
    }
  if (zs.size() < 10) throw FitError("fit_oscillation needs at least 10 samples in range");
  OscillationFit out;
  out.fit_range = range;

  // interior extrema, ignoring changes at the rounding level
  const double scale = *std::max_element(ys.begin(), ys.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
  const double eps = 1e-12 * std::abs(scale);
  int last_sign = 0, extrema = 0;
  for (size_t k = 1; k < ys.size(); ++k) {
    double dlt = ys[k] - ys[k - 1];
    int sg = dlt > eps ? 1 : (dlt < -eps ? -1 : 0);
    if (sg == 0) continue;
    if (last_sign != 0 && sg != last_sign) ++extrema;
    last_sign = sg;
  }

  const Eigen::Map<const Eigen::VectorXd> ymap(ys.data(), ys.size());
  if (extrema == 0) {
    auto dec = fit_decay(zs, ymap, {{range.first, range.second}});
    out.ell = dec.ell;
    out.a0 = dec.a0;
    out.converged = true;
    double ss = 0;
    for (size_t k = 0; k < zs.size(); ++k) {
      double r = dec.a0 * std::exp(-zs[k] / dec.ell) - ys[k];
      ss += r * r;
    }
    out.residual_rms = std::sqrt(ss / zs.size());
    return out;
  }
  out.oscillation_resolved = true;

  // slow envelope as the starting trend; an oscillation on a constant offset need not decay overall
  struct Trend {
    double a0, ell;
  } dec{std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size(), std::numeric_limits<double>::infinity()};
  try {
    auto d = fit_decay(zs, ymap, {{range.first, range.second}});
    dec = {d.a0, d.ell};
  } catch (const FitError&) {
  }

  // kz guess: dominant DFT peak of the detrended trace, DC excluded
  const size_t n = zs.size();
  const double dz = (zs.back() - zs.front()) / (n - 1);
  std::vector<std::complex<double>> det(8 * n, 0.0), spec;
  double mean = 0;
  for (size_t k = 0; k < n; ++k) mean += ys[k] - dec.a0 * std::exp(-zs[k] / dec.ell);
  mean /= n;
  for (size_t k = 0; k < n; ++k) det[k] = ys[k] - dec.a0 * std::exp(-zs[k] / dec.ell) - mean;
  Eigen::FFT<double> fft;
  fft.fwd(spec, det);
  size_t best = 1;
  for (size_t q = 1; q < spec.size() / 2; ++q)
    if (std::abs(spec[q]) > std::abs(spec[best])) best = q;
  double kz0 = 2.0 * kPi * best / (spec.size() * dz);

  double amp = 0.5 * (*std::max_element(ys.begin(), ys.end()) - *std::min_element(ys.begin(), ys.end()));
  double best_norm = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_p;
  int best_status = -1, best_iter = 0;
  OscModel model(zs, ys);
  for (double phi0 : {0.0, 0.5 * kPi, kPi, 1.5 * kPi}) {
    Eigen::VectorXd p(5);
    p << 0.0, std::max(amp, dec.a0), kz0, phi0, std::isfinite(dec.ell) ? 1.0 / dec.ell : 0.0;
    Eigen::LevenbergMarquardt<OscModel> lm(model);
    lm.setMaxfev(4000);
    lm.setXtol(1e-12);
    lm.setFtol(1e-12);
    auto st = lm.minimize(p);
    if (!p.allFinite()) continue;
    double fn = lm.fnorm();
    if (fn < best_norm) {
      best_norm = fn;
      best_p = p;
      best_status = static_cast<int>(st);
      best_iter = static_cast<int>(lm.iterations());
    }
  }
  if (best_p.size() == 0) throw FitError("oscillation fit produced no finite solution");
  using namespace Eigen::LevenbergMarquardtSpace;
  out.converged = best_status != TooManyFunctionEvaluation && best_status != ImproperInputParameters;
  out.iterations = best_iter;
  out.residual_rms = best_norm / std::sqrt(static_cast<double>(n));
  if (!out.converged) throw FitError("oscillation fit did not converge within the iteration budget", out.residual_rms);

  double kz = best_p(2), phi = best_p(3), a1 = best_p(1);
  if (kz < 0) { kz = -kz; phi = -phi; }
  if (a1 < 0) { a1 = -a1; phi += kPi; }
  out.kz_osc = kz;
  out.phi = std::remainder(phi, 2.0 * kPi);
  out.a0 = best_p(0);
  out.a1 = a1;
  out.ell = best_p(4) > 0 ? 1.0 / best_p(4) : std::numeric_limits<double>::infinity();

  Eigen::MatrixXd Jm(n, 5);
  model.df(best_p, Jm);
  Eigen::MatrixXd JtJ = Jm.transpose() * Jm;
  double s2 = n > 5 ? best_norm * best_norm / (n - 5) : 0.0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(JtJ);
  out.kz_stderr = lu.isInvertible() ? std::sqrt(std::max(0.0, s2 * lu.inverse()(2, 2)))
                                    : std::numeric_limits<double>::infinity();
  return out;
}

std::vector<InterfaceDefectRow> interface_vs_defect(const std::vector<double>& g2_values, double J,
                                                    const InterfaceDefectOptions& opt) {
  if (!(J > 0)) throw ConfigError("interface_vs_defect needs J > 0");
  std::vector<InterfaceDefectRow> rows;
  auto pick = [](const ComplexSpectrum& s, int site, bool& ambiguous) {
    std::vector<std::pair<double, int>> w;
    for (int j = 0; j < s.size(); ++j) w.emplace_back(std::norm(s.right(site, j)), j);
    std::sort(w.begin(), w.end(), [](auto& a, auto& b) { return a.first > b.first; });
    if (w.size() > 1 && w[1].first >= 0.99 * w[0].first) ambiguous = true;
    return w[0].second;
  };
  for (double g : g2_values) {
    if (!(g > 0)) throw ConfigError("interface_vs_defect uses g2 > 0 (symmetric convention)");
    InterfaceDefectRow r;
    r.g2 = g;
    auto iface = interface_lattice(LossPattern::preset(Phase::II, g), LossPattern::preset(Phase::III, g),
                                   opt.left_cells, opt.right_cells, J, opt.spacing_d);
    auto si = eig_full(real_space_hamiltonian(iface));
    r.im_interface = si.eigenvalues(pick(si, *iface.interface_site, r.ambiguous)).imag();
    auto def = defect_lattice(g, opt.defect_sites, opt.defect_sites / 2, J, opt.spacing_d);
    auto sd = eig_full(real_space_hamiltonian(def));
    r.im_defect = sd.eigenvalues(pick(sd, *def.interface_site, r.ambiguous)).imag();
    rows.push_back(r);
  }
  return rows;
}

}  // namespace nhl
