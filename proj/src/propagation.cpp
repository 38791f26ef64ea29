#include "nhl/propagation.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "nhl/errors.hpp"
#include "nhl/spectral.hpp"

namespace nhl {

std::string to_string(ExcitationKind k) {
  switch (k) {
    case ExcitationKind::edge: return "edge";
    case ExcitationKind::bulk_cell_start: return "bulk_cell_start";
    case ExcitationKind::interface: return "interface";
    case ExcitationKind::site_index: return "site_index";
  }
  return "?";
}

ExcitationKind excitation_kind_from_string(const std::string& s) {
  if (s == "edge") return ExcitationKind::edge;
  if (s == "bulk_cell_start" || s == "bulk") return ExcitationKind::bulk_cell_start;
  if (s == "interface") return ExcitationKind::interface;
  if (s == "site_index" || s == "site") return ExcitationKind::site_index;
  throw ConfigError("unknown excitation kind '" + s + "'");
}

std::string to_string(Method m) { return m == Method::rk4 ? "rk4" : "expm"; }

Method method_from_string(const std::string& s) {
  if (s == "rk4") return Method::rk4;
  if (s == "expm") return Method::expm;
  throw ConfigError("unknown propagation method '" + s + "'");
}

Excitation resolve_excitation(ExcitationKind kind, const LatticeSpec& spec, std::optional<int> site, cplx amplitude) {
  Excitation e;
  e.kind = kind;
  e.amplitude = amplitude;
  const int n = spec.n_sites;
  switch (kind) {
    case ExcitationKind::edge: e.site = 0; break;
    case ExcitationKind::interface:
      if (!spec.interface_site) throw ConfigError("interface excitation on a lattice without an interface");
      e.site = *spec.interface_site;
      break;
    case ExcitationKind::site_index:
      if (!site) throw ConfigError("site_index excitation needs a site");
      e.site = *site;
      break;
    case ExcitationKind::bulk_cell_start: {
      int first = 0, len = n;
      if (!spec.domains.empty()) {
        first = spec.domains[0].first_site;
        len = spec.domains[0].n_sites;
      }
      if (site) {
        e.site = *site;
      } else {
        int cells = len / 4;
        e.site = first + 4 * (cells / 2);
      }
      if ((e.site - first) % 4 != 0) throw ConfigError("bulk excitation must sit on the first site of a unit cell");
      // at least two full cells to every boundary: lattice ends and the interface
      std::vector<int> walls{0, n};
      if (spec.interface_site) walls.push_back(*spec.interface_site);
      for (int w : walls) {
        int dist = e.site >= w ? e.site - w : w - e.site - 4;
        if (dist < 8) throw ConfigError("bulk excitation must be at least two cells from any boundary");
      }
      break;
    }
  }
  if (e.site < 0 || e.site >= n) throw ConfigError("excitation site out of range");
  return e;
}

LatticeSpec custom_lattice(const std::vector<cplx>& onsite_J, double J, double d, double re_beta) {
  LatticeSpec s;
  s.n_sites = static_cast<int>(onsite_J.size());
  s.hopping_J = J;
  s.spacing_d = d;
  s.re_beta = re_beta;
  s.onsite = onsite_J;
  s.validate();
  return s;
}

namespace {

// y' = i (K - re_beta) y for tridiagonal K: diagonal kd, uniform off-diagonal J.
struct Tridiag {
  Eigen::VectorXcd kd;
  double J;
  void apply(const Eigen::VectorXcd& y, Eigen::VectorXcd& out) const {
    const Eigen::Index n = y.size();
    const cplx i(0, 1);
    for (Eigen::Index j = 0; j < n; ++j) {
      cplx acc = kd(j) * y(j);
      if (j > 0) acc += J * y(j - 1);
      if (j + 1 < n) acc += J * y(j + 1);
      out(j) = i * acc;
    }
  }
};

}  // namespace

FieldEvolution propagate(const LatticeSpec& spec, const Excitation& exc, const PropagationOptions& opt) {
  spec.validate();
  if (!(opt.z_max > 0) || !(opt.dz > 0)) throw ConfigError("z_max and dz must be > 0");
  if (opt.sample_every < 1) throw ConfigError("sample_every must be >= 1");
  if (exc.site < 0 || exc.site >= spec.n_sites) throw ConfigError("excitation site out of range");
  const int n = spec.n_sites;
  const long steps = std::lround(opt.z_max / opt.dz);
  if (steps < 1) throw ConfigError("z_max shorter than one step");

  // Generator without the uniform carrier: K - re_beta, K = conj(H).
  Eigen::MatrixXcd H = real_space_hamiltonian(spec).matrix;
  Eigen::MatrixXcd K = H.conjugate() - spec.re_beta * Eigen::MatrixXcd::Identity(n, n);
  double knorm = K.cwiseAbs().rowwise().sum().maxCoeff();
  if (opt.method == Method::rk4 && opt.dz > 0.1 / knorm) {
    std::ostringstream os;
    os << "dz = " << opt.dz << " exceeds the stability heuristic 0.1/||H|| = " << 0.1 / knorm;
    throw ConfigError(os.str());
  }
  bool lossy_only = true;
  for (int j = 0; j < n; ++j)
    if (K(j, j).imag() < 0) lossy_only = false;

  FieldEvolution f;
  f.spec = spec;
  f.dz = opt.dz;
  const long nsamp = steps / opt.sample_every + 1;
  f.a.resize(nsamp, n);
  f.z.resize(nsamp);

  Eigen::VectorXcd y = Eigen::VectorXcd::Zero(n);
  y(exc.site) = exc.amplitude;
  const cplx i(0, 1);
  auto store = [&](long s, long step, const Eigen::VectorXcd& v) {
    double z = step * opt.dz;
    f.z[s] = z;
    f.a.row(s) = (v * std::exp(i * spec.re_beta * z)).transpose();
  };
  store(0, 0, y);

  auto check_growth = [&](double before, double after, long step) {
    if (lossy_only && after > before * (1.0 + 1e-10) + 1e-300) {
      std::ostringstream os;
      os << "intensity grew from " << before << " to " << after << " at z = " << step * opt.dz
         << " in a purely lossy lattice; reduce dz";
      throw StepSizeError(os.str());
    }
  };

  if (opt.method == Method::rk4) {
    f.method_used = "rk4";
    Tridiag T{K.diagonal(), spec.hopping_J};
    Eigen::VectorXcd k1(n), k2(n), k3(n), k4(n), tmp(n);
    const double h = opt.dz;
    for (long s = 1; s <= steps; ++s) {
      double before = y.squaredNorm();
      T.apply(y, k1);
      tmp = y + 0.5 * h * k1;
      T.apply(tmp, k2);
      tmp = y + 0.5 * h * k2;
      T.apply(tmp, k3);
      tmp = y + h * k3;
      T.apply(tmp, k4);
      y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      if (!y.allFinite()) throw StepSizeError("non-finite amplitudes during rk4 integration");
      check_growth(before, y.squaredNorm(), s);
      if (s % opt.sample_every == 0) store(s / opt.sample_every, s, y);
    }
    return f;
  }

  auto sp = eig_full(K);
  if (!sp.near_defective()) {
    f.method_used = "expm-eigen";
    auto b = biorthonormalize(sp);
    Eigen::VectorXcd c = b.left.adjoint() * y;
    for (long s = 1; s < nsamp; ++s) {
      double z = static_cast<double>(s * opt.sample_every) * opt.dz;
      Eigen::VectorXcd ph = (i * b.eigenvalues * z).array().exp();
      Eigen::VectorXcd v = b.right * (ph.cwiseProduct(c));
      store(s, s * opt.sample_every, v);
    }
    return f;
  }
  // Near a defective generator: scaling-and-squaring step propagator.
  f.method_used = "expm-pade";
  Eigen::MatrixXcd step = (i * opt.dz * K).exp();
  for (long s = 1; s <= steps; ++s) {
    double before = y.squaredNorm();
    y = step * y;
    check_growth(before, y.squaredNorm(), s);
    if (s % opt.sample_every == 0) store(s / opt.sample_every, s, y);
  }
  return f;
}

std::vector<std::pair<double, double>> center_of_mass(const FieldEvolution& f) {
  std::vector<std::pair<double, double>> out;
  const double d = f.spec.spacing_d;
  for (Eigen::Index s = 0; s < f.a.rows(); ++s) {
    double tot = 0, mom = 0;
    for (Eigen::Index j = 0; j < f.a.cols(); ++j) {
      double w = std::norm(f.a(s, j));
      tot += w;
      mom += w * j * d;
    }
    if (tot < 1e-300) break;
    out.emplace_back(f.z[s], mom / tot);
  }
  return out;
}

BeatingResult beating_period(const LatticeSpec& spec, const Excitation& exc, const PropagationOptions& opt) {
  BeatingResult r;
  auto sp = eig_full(real_space_hamiltonian(spec));
  const double tol = 1e-6 * spec.hopping_J;
  double up = 0, lo = 0;
  int nu = 0, nl = 0;
  for (int j = 0; j < sp.size(); ++j) {
    double e = sp.eigenvalues(j).real() - spec.re_beta;
    if (e > tol) { up += e; ++nu; }
    else if (e < -tol) { lo += e; ++nl; }
  }
  if (nu == 0 || nl == 0) throw NumericalError("beating period needs states above and below the gap");
  r.delta_kz = up / nu - lo / nl;
  r.spectral_period = 2.0 * std::numbers::pi / r.delta_kz;

  auto f = propagate(spec, exc, opt);
  Eigen::VectorXd I = f.site_intensity(exc.site);
  Eigen::VectorXd tot = f.total_intensity();
  std::vector<double> frac(I.size());
  for (Eigen::Index s = 0; s < I.size(); ++s) frac[s] = tot(s) > 1e-300 ? I(s) / tot(s) : 0.0;
  const double start = frac[0];
  size_t m = 1;
  // first local minimum that dips below half the starting fraction
  bool dipped = false;
  for (; m + 1 < frac.size(); ++m) {
    if (frac[m] < 0.5 * start) dipped = true;
    if (dipped && frac[m] <= frac[m - 1] && frac[m] <= frac[m + 1]) break;
  }
  for (size_t s = m + 1; dipped && s + 1 < frac.size(); ++s) {
    if (frac[s] >= frac[s - 1] && frac[s] > frac[s + 1]) {
      r.simulated_period = f.z[s];
      r.beating = true;
      break;
    }
  }
  return r;
}

}  // namespace nhl
