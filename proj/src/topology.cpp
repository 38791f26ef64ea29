#include "nhl/topology.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "nhl/assignment.hpp"
#include "nhl/errors.hpp"
#include "nhl/spectral.hpp"

namespace nhl {

namespace {

constexpr double kPi = std::numbers::pi;

double wrap(double a) {
  a = std::remainder(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

struct KPoint {
  ComplexSpectrum s;   // biorthonormal
  std::vector<int> lower, upper;
};

KPoint decompose(double k, const LossPattern& p, double J, double d, std::mt19937_64* rng) {
  KPoint kp;
  kp.s = biorthonormalize(eig_full(bloch_hamiltonian(k, p, J, d, EnergyUnit::hopping)));
  if (rng) {
    std::uniform_real_distribution<double> u(0.0, 2.0 * kPi);
    for (int j = 0; j < 4; ++j) {
      cplx ph = std::polar(1.0, u(*rng));
      kp.s.right.col(j) *= ph;
      kp.s.left.col(j) *= ph;
    }
  }
  for (int j = 0; j < 4; ++j) (kp.s.eigenvalues(j).real() < 0 ? kp.lower : kp.upper).push_back(j);
  return kp;
}

Eigen::MatrixXcd columns(const Eigen::MatrixXcd& M, const std::vector<int>& idx) {
  Eigen::MatrixXcd out(M.rows(), static_cast<Eigen::Index>(idx.size()));
  for (size_t c = 0; c < idx.size(); ++c) out.col(c) = M.col(idx[c]);
  return out;
}

cplx link(const KPoint& a, const KPoint& b, bool upper) {
  const auto& ia = upper ? a.upper : a.lower;
  const auto& ib = upper ? b.upper : b.lower;
  if (ia.empty()) return 1.0;
  Eigen::MatrixXcd M = columns(a.s.left, ia).adjoint() * columns(b.s.right, ib);
  return M.determinant();
}

}  // namespace

double wilson_loop_phase(const std::vector<Eigen::MatrixXcd>& R, const std::vector<Eigen::MatrixXcd>& L) {
  if (R.size() != L.size() || R.empty()) throw ConfigError("Wilson loop needs matching, non-empty bases");
  cplx prod = 1.0;
  const size_t n = R.size();
  for (size_t m = 0; m < n; ++m) {
    cplx det = (L[m].adjoint() * R[(m + 1) % n]).determinant();
    prod *= det / std::abs(det);
  }
  return -std::arg(prod);
}

WindingResult winding_number(const LossPattern& pattern, double J, double d, int N, const WindingOptions& opt) {
  if (N < 16) throw ConfigError("k_grid_size must be >= 16");
  if (opt.zones < 1) throw ConfigError("zones must be >= 1");
  if (!(J > 0) || !(d > 0)) throw ConfigError("winding_number needs J > 0 and d > 0");
  const double zone = reduced_zone(d);
  const double dk = zone / N;

  // Real line gap on the node grid k = m dk (includes k = 0), plus the loop points.
  double gap = std::numeric_limits<double>::infinity();
  for (int m = 0; m < N; ++m)
    for (double off : {0.0, 0.5}) {
      auto H = bloch_hamiltonian((m + off) * dk, pattern, J, d, EnergyUnit::hopping).matrix;
      Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(H, false);
      for (int j = 0; j < 4; ++j) gap = std::min(gap, std::abs(es.eigenvalues()(j).real()));
    }
  if (!(gap > 1e-8)) {
    std::ostringstream os;
    os << "real line gap closes on the k grid (min |Re E| = " << gap << " J); W undefined";
    throw GaplessError(os.str(), gap);
  }

  std::mt19937_64 rng(opt.random_gauge_seed);
  std::mt19937_64* rp = opt.random_gauge_seed ? &rng : nullptr;
  std::vector<KPoint> pts;
  pts.reserve(N);
  for (int m = 0; m < N; ++m) pts.push_back(decompose((m + 0.5) * dk, pattern, J, d, rp));
  for (const auto& p : pts)
    if (p.lower.size() != pts[0].lower.size()) throw GaplessError("band count below the line gap changes along k", gap);

  WindingResult r;
  r.k_grid_size = N;
  r.zones = opt.zones;
  r.min_line_gap = gap;

  // Subspace loops, walked zone by zone; each zone adds one closed-loop phase increment.
  double total = 0.0;
  for (bool upper : {false, true}) {
    cplx running = 1.0;
    double prev_theta = 0.0, acc = 0.0, one_zone = 0.0;
    for (int z = 0; z < opt.zones; ++z) {
      for (int m = 0; m < N; ++m) {
        const KPoint& a = pts[m];
        const KPoint& b = pts[(m + 1) % N];
        if (m + 1 == N) {
          // closing link of this zone: the loop so far, closed back onto the start
          cplx l = link(a, b, upper);
          if (std::abs(l) < 1e-3) throw NumericalError("Wilson link overlap below 1e-3; refine the k grid");
          double theta = -std::arg(running * (l / std::abs(l)));
          double inc = wrap(theta - prev_theta);
          if (z == 0) one_zone = inc;
          acc += std::abs(inc);
          prev_theta = theta;
          running *= l / std::abs(l);
        } else {
          cplx l = link(a, b, upper);
          if (std::abs(l) < 1e-3) throw NumericalError("Wilson link overlap below 1e-3; refine the k grid");
          running *= l / std::abs(l);
        }
      }
    }
    (upper ? r.gamma_upper : r.gamma_lower) = one_zone;
    total += acc;
  }
  r.W = total / (2.0 * kPi);
  r.quantization_residual = std::abs(r.W - std::round(r.W));

  // Per-band phases, bands continued by eigenvector overlap around the loop.
  std::array<int, 4> band{0, 1, 2, 3};
  std::array<cplx, 4> prod{1.0, 1.0, 1.0, 1.0};
  for (int m = 0; m < N; ++m) {
    const auto& a = pts[m].s;
    const auto& b = pts[(m + 1) % N].s;
    Eigen::MatrixXd cost(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) cost(i, j) = -std::abs(a.right.col(band[i]).dot(b.right.col(j)));
    auto next = greedy_then_hungarian(cost);
    for (int i = 0; i < 4; ++i) {
      cplx l = a.left.col(band[i]).dot(b.right.col(next[i]));
      prod[i] *= l / std::abs(l);
      band[i] = next[i];
    }
  }
  for (int i = 0; i < 4; ++i) r.per_band_phase[i] = -std::arg(prod[i]);
  return r;
}

std::vector<PhaseDiagramPoint> winding_phase_diagram(const std::vector<double>& g2_values, double J, double d,
                                                     int N, double exclusion) {
  std::vector<PhaseDiagramPoint> out;
  for (double g2 : g2_values) {
    if (std::abs(g2) < exclusion) continue;
    auto w = winding_number(LossPattern::from_g2(g2), J, d, N);
    out.push_back({g2, w.W, w.quantization_residual});
  }
  return out;
}

}  // namespace nhl

namespace nhl {

double real_band_gap(const LossPattern& pattern, double J, double d, int N) {
  double up = std::numeric_limits<double>::infinity(), lo = -std::numeric_limits<double>::infinity();
  for (int m = 0; m <= N; ++m) {
    double k = reduced_zone(d) * m / N;
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(bloch_hamiltonian(k, pattern, J, d, EnergyUnit::inverse_micron).matrix,
                                                   false);
    for (int j = 0; j < 4; ++j) {
      double e = es.eigenvalues()(j).real();
      if (e > 0) up = std::min(up, e);
      else lo = std::max(lo, e);
    }
  }
  return up - lo;
}

}  // namespace nhl
