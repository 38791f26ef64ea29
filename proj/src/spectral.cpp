#include "nhl/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "nhl/assignment.hpp"
#include "nhl/calibration.hpp"
#include "nhl/errors.hpp"

namespace nhl {

ComplexSpectrum eig_full(const Eigen::MatrixXcd& H, EnergyUnit unit) {
  if (H.rows() != H.cols() || H.rows() == 0) throw ConfigError("eig_full needs a non-empty square matrix");
  if (!H.allFinite()) throw ConfigError("eig_full: matrix has non-finite entries");
  const Eigen::Index n = H.rows();

  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(H, true);
  if (es.info() != Eigen::Success) {
    std::ostringstream os;
    os << "complex eigensolver did not converge (n=" << n << ", max iterations per eigenvalue "
       << es.getMaxIterations() << ")";
    throw ConvergenceError(os.str());
  }
  ComplexSpectrum s;
  s.unit = unit;
  s.eigenvalues = es.eigenvalues();
  s.right = es.eigenvectors();
  for (Eigen::Index j = 0; j < n; ++j) s.right.col(j).normalize();

  const double hnorm = H.norm();
  const double res = (H * s.right - s.right * s.eigenvalues.asDiagonal()).colwise().norm().maxCoeff();
  if (res > 1e-9 * std::max(hnorm, std::numeric_limits<double>::min())) {
    std::ostringstream os;
    os << "eigenpair residual " << res << " exceeds 1e-9*||H||_F = " << 1e-9 * hnorm;
    throw ConvergenceError(os.str());
  }

  // Rows of R^-1 are the left eigenvectors with <<l_n|r_m>> = delta_nm already built in.
  Eigen::MatrixXcd Rinv = Eigen::PartialPivLU<Eigen::MatrixXcd>(s.right).inverse();
  s.left = Rinv.adjoint();
  s.condition.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double ln = s.left.col(j).norm();
    if (std::isfinite(ln) && ln > 0) {
      cplx ov = s.left.col(j).dot(s.right.col(j)) / ln;
      s.condition(j) = 1.0 / std::abs(ov);
      s.left.col(j) /= ln;
    } else {
      s.condition(j) = std::numeric_limits<double>::infinity();
    }
  }
  return s;
}

ComplexSpectrum biorthonormalize(const ComplexSpectrum& in, double threshold) {
  ComplexSpectrum s = in;
  for (int j = 0; j < s.size(); ++j) {
    if (!(s.condition(j) <= threshold)) {
      std::ostringstream os;
      os << "eigenpair " << j << " (E = " << s.eigenvalues(j) << ") has condition number " << s.condition(j)
         << " above " << threshold << "; matrix is (near) defective";
      throw DefectiveError(os.str(), s.condition(j));
    }
  }
  for (int j = 0; j < s.size(); ++j) {
    cplx ov = s.left.col(j).dot(s.right.col(j));
    s.left.col(j) /= std::conj(ov);
  }
  s.biorthonormal = true;
  return s;
}

LocalizationFit localization_fit(const Eigen::VectorXcd& psi, double d) {
  const int n = static_cast<int>(psi.size());
  Eigen::VectorXd w = psi.cwiseAbs2();
  double tot = w.sum();
  if (!(tot > 0)) throw NumericalError("localization fit on a zero vector");
  w /= tot;
  const int half = n / 2;
  double wl = w.head(half).sum(), wr = w.tail(n - half).sum();
  LocalizationFit out;
  out.edge = wl >= wr ? 0 : 1;
  // site index measured from the dominant edge
  auto site = [&](int m) { return out.edge == 0 ? m : n - 1 - m; };
  int best = 0;
  for (int m = 0; m < half; ++m)
    if (w(site(m)) > w(site(best))) best = m;
  const double wmax = w(site(best));
  std::vector<double> xs, ys;
  for (int m = best % 4; m < half; m += 4) {
    double v = w(site(m));
    if (v <= 1e-30 * wmax) continue;
    xs.push_back(m * d);
    ys.push_back(std::log(v));
  }
  if (xs.size() < 2) {
    out.length = std::numeric_limits<double>::infinity();
    out.r2 = 0.0;
    return out;
  }
  const double k = static_cast<double>(xs.size());
  double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / k;
  double my = std::accumulate(ys.begin(), ys.end(), 0.0) / k;
  double sxx = 0, sxy = 0, syy = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  double slope = sxy / sxx;
  out.r2 = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  out.length = slope < 0 ? -1.0 / slope : std::numeric_limits<double>::infinity();
  return out;
}

ZeroModeReport find_zero_modes(const ComplexSpectrum& s, const LatticeSpec& spec, double tol_J) {
  ZeroModeReport rep;
  rep.tol = tol_J;
  const double tol = tol_J * spec.hopping_J;
  std::vector<int> idx;
  for (int j = 0; j < s.size(); ++j)
    if (std::abs(s.eigenvalues(j).real() - spec.re_beta) < tol) idx.push_back(j);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    return std::abs(s.eigenvalues(a).real() - spec.re_beta) < std::abs(s.eigenvalues(b).real() - spec.re_beta);
  });
  const int n = spec.n_sites;
  const int cell = std::min(4, n);
  for (int j : idx) {
    Eigen::VectorXd w = s.right.col(j).cwiseAbs2();
    w /= w.sum();
    double edge = w.head(cell).sum() + w.tail(cell).sum();
    if (2 * cell > n) edge = 1.0;
    auto fit = localization_fit(s.right.col(j), spec.spacing_d);
    rep.indices.push_back(j);
    rep.energies.push_back(s.eigenvalues(j));
    rep.edge_weights.push_back(edge);
    rep.localization_lengths.push_back(fit.length);
    rep.fit_r2.push_back(fit.r2);
    rep.dominant_edge.push_back(fit.edge);
  }
  return rep;
}

LatticeSpec ep_lattice(const EPSweepSpec& spec, double J) {
  double g = g2_of(spec.im_beta, J);
  return interface_lattice(LossPattern::preset(spec.left, g), LossPattern::preset(spec.right, g), spec.left_cells,
                           spec.right_cells, J, spec.spacing_d, spec.re_beta);
}

namespace {

// Two edge/interface modes: midgap states ranked by weight on the interface and end sites.
std::array<int, 2> select_edge_pair(const ComplexSpectrum& s, const LatticeSpec& lat) {
  const int n = lat.n_sites;
  std::vector<int> sites{0, n - 1};
  if (lat.interface_site) sites.push_back(*lat.interface_site);
  std::vector<int> cand;
  for (int j = 0; j < s.size(); ++j)
    if (std::abs(s.eigenvalues(j).real() - lat.re_beta) < 0.25 * lat.hopping_J) cand.push_back(j);
  if (cand.size() < 2) {
    cand.resize(s.size());
    std::iota(cand.begin(), cand.end(), 0);
  }
  auto score = [&](int j) {
    double acc = 0;
    for (int site : sites) acc += std::norm(s.right(site, j));
    return acc;
  };
  std::stable_sort(cand.begin(), cand.end(), [&](int a, int b) { return score(a) > score(b); });
  std::array<int, 2> pair{cand[0], cand[1]};
  return pair;
}

struct Continuation {
  std::array<int, 2> idx;
  double weakest = 1.0;
};

Continuation continue_pair(const Eigen::MatrixXcd& prev, const ComplexSpectrum& s) {
  Eigen::MatrixXd cost(2, s.size());
  for (int a = 0; a < 2; ++a)
    for (int m = 0; m < s.size(); ++m) cost(a, m) = -std::abs(prev.col(a).dot(s.right.col(m)));
  auto pick = greedy_then_hungarian(cost);
  Continuation c{{pick[0], pick[1]}, std::min(-cost(0, pick[0]), -cost(1, pick[1]))};
  return c;
}

}  // namespace

EPSweepResult ep_sweep(const EPSweepSpec& spec, const std::vector<double>& J_values) {
  if (J_values.empty()) throw ConfigError("EP sweep needs at least one J value");
  std::vector<double> Js = J_values;
  std::sort(Js.begin(), Js.end());
  for (double J : Js)
    if (!(J > 0)) throw ConfigError("EP sweep J values must be > 0");

  EPSweepResult r;
  r.J_values = Js;
  Eigen::MatrixXcd prev;
  std::vector<double> conds;
  for (size_t i = 0; i < Js.size(); ++i) {
    auto lat = ep_lattice(spec, Js[i]);
    auto s = eig_full(real_space_hamiltonian(lat));
    std::array<int, 2> idx;
    double weakest = 1.0;
    if (i == 0) {
      idx = select_edge_pair(s, lat);
    } else {
      auto c = continue_pair(prev, s);
      idx = c.idx;
      weakest = c.weakest;
      if (weakest < 0.5) {
        std::ostringstream os;
        os << "mode tracking lost between J=" << Js[i - 1] << " and J=" << Js[i] << " (overlap " << weakest << ")";
        throw TrackingError(os.str(), Js[i], weakest);
      }
    }
    prev.resize(s.right.rows(), 2);
    prev.col(0) = s.right.col(idx[0]);
    prev.col(1) = s.right.col(idx[1]);
    cplx ea = s.eigenvalues(idx[0]) - lat.re_beta, eb = s.eigenvalues(idx[1]) - lat.re_beta;
    r.tracked.push_back({ea, eb});
    r.separation.push_back(std::abs(ea - eb));
    r.re_split.push_back(std::abs(ea.real() - eb.real()));
    r.im_split.push_back(std::abs(ea.imag() - eb.imag()));
    r.step_overlap.push_back(weakest);
    conds.push_back(std::max(s.condition(idx[0]), s.condition(idx[1])));
  }
  auto it = std::min_element(r.separation.begin(), r.separation.end());
  r.ep_index = static_cast<int>(it - r.separation.begin());
  r.J_ep_estimate = Js[r.ep_index];
  r.coalescence_condition = conds[r.ep_index];
  return r;
}

EPRefinement refine_exceptional_point(const EPSweepSpec& spec, const EPSweepResult& sw, int iterations) {
  const int n = static_cast<int>(sw.J_values.size());
  auto flipped = [&](int i) { return sw.re_split[i] > sw.im_split[i]; };
  int lo = -1;
  for (int i = 0; i + 1 < n; ++i)
    if (!flipped(i) && flipped(i + 1)) {
      if (lo < 0 || std::abs(i - sw.ep_index) < std::abs(lo - sw.ep_index)) lo = i;
    }
  if (lo < 0) throw NumericalError("no Re/Im split flip in the sweep; cannot bracket an exceptional point");

  double a = sw.J_values[lo], b = sw.J_values[lo + 1];
  // pair vectors at the lower bracket, carried along by overlap continuation
  auto pair_at = [&](double J, const Eigen::MatrixXcd* ref, Eigen::MatrixXcd& vecs) {
    auto lat = ep_lattice(spec, J);
    auto s = eig_full(real_space_hamiltonian(lat));
    std::array<int, 2> idx = ref ? continue_pair(*ref, s).idx : select_edge_pair(s, lat);
    vecs.resize(s.right.rows(), 2);
    vecs.col(0) = s.right.col(idx[0]);
    vecs.col(1) = s.right.col(idx[1]);
    cplx ea = s.eigenvalues(idx[0]), eb = s.eigenvalues(idx[1]);
    struct R { bool flip; double cond; double sep; } out{std::abs(ea.real() - eb.real()) > std::abs(ea.imag() - eb.imag()),
                                                        std::max(s.condition(idx[0]), s.condition(idx[1])),
                                                        std::abs(ea - eb)};
    return out;
  };
  // walk the sweep up to the bracket so the pair identity is the tracked one
  Eigen::MatrixXcd vecs, tmp;
  pair_at(sw.J_values[0], nullptr, vecs);
  for (int i = 1; i <= lo; ++i) {
    pair_at(sw.J_values[i], &vecs, tmp);
    vecs = tmp;
  }
  auto at_a = pair_at(a, &vecs, tmp);
  vecs = tmp;
  EPRefinement out;
  auto best = at_a;
  for (int it = 0; it < iterations; ++it) {
    double mid = 0.5 * (a + b);
    if (mid <= a || mid >= b) break;
    auto m = pair_at(mid, &vecs, tmp);
    if (m.flip) b = mid;
    else {
      a = mid;
      vecs = tmp;
    }
    if (m.cond > best.cond) best = m;
  }
  out.J_ep = 0.5 * (a + b);
  out.bracket_lo = a;
  out.bracket_hi = b;
  out.condition = best.cond;
  out.separation = best.sep;
  return out;
}

}  // namespace nhl
