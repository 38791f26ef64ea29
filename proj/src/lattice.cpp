#include "nhl/lattice.hpp"

#include <cmath>
#include <numbers>

#include "nhl/errors.hpp"

namespace nhl {

std::string to_string(Phase p) {
  switch (p) {
    case Phase::I: return "I";
    case Phase::II: return "II";
    case Phase::III: return "III";
    case Phase::Custom: return "Custom";
  }
  return "?";
}

Phase phase_from_string(const std::string& s) {
  if (s == "I") return Phase::I;
  if (s == "II") return Phase::II;
  if (s == "III") return Phase::III;
  if (s == "Custom" || s == "custom") return Phase::Custom;
  throw ConfigError("unknown phase '" + s + "' (expected I, II, III or Custom)");
}

LossPattern LossPattern::preset(Phase p, double g) {
  LossPattern lp;
  double a = std::abs(g);
  if (a == 0.0 && p != Phase::Custom) return lp;  // zero loss is phase I whatever the label
  lp.phase = p;
  switch (p) {
    case Phase::I: break;
    case Phase::II: lp.g0 = lp.g1 = a; lp.g2 = -a; break;
    case Phase::III: lp.g0 = lp.g1 = lp.g2 = a; break;
    case Phase::Custom: throw ConfigError("Custom phase needs an explicit cell, not a preset");
  }
  return lp;
}

LossPattern LossPattern::from_g2(double g2) {
  if (g2 > 0) return preset(Phase::III, g2);
  if (g2 < 0) return preset(Phase::II, g2);
  return preset(Phase::I, 0.0);
}

LossPattern LossPattern::general(double g0, double g1, double g2) {
  LossPattern lp;
  lp.g0 = g0; lp.g1 = g1; lp.g2 = g2;
  double s = g1 * g2;
  if (s > 0) lp.phase = Phase::III;
  else if (s < 0) lp.phase = Phase::II;
  else if (g1 == 0.0 && g2 == 0.0 && g0 == 0.0) lp.phase = Phase::I;
  else {
    lp.phase = Phase::Custom;
    lp.custom_cell = CellDiagonal{cplx(0, g1 - g0), cplx(0, -g2 - g0), cplx(0, -g1 - g0), cplx(0, g2 - g0)};
  }
  lp.validate();
  return lp;
}

LossPattern LossPattern::custom(const CellDiagonal& cell) {
  LossPattern lp;
  lp.phase = Phase::Custom;
  lp.custom_cell = cell;
  lp.validate();
  return lp;
}

void LossPattern::validate() const {
  if (phase == Phase::Custom) {
    if (!custom_cell) throw ConfigError("Custom loss pattern requires custom_cell");
    for (const auto& c : *custom_cell)
      if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) throw ConfigError("custom_cell entries must be finite");
    return;
  }
  if (custom_cell) throw ConfigError("custom_cell is only allowed with phase Custom");
  if (!std::isfinite(g0) || !std::isfinite(g1) || !std::isfinite(g2)) throw ConfigError("loss parameters must be finite");
  if (g0 < 0) throw ConfigError("g0 must be >= 0");
  if (phase == Phase::I && (g1 != 0.0 || g2 != 0.0 || g0 != 0.0))
    throw ConfigError("phase I has no loss (g0 = g1 = g2 = 0)");
  if (phase == Phase::II && !(g1 * g2 < 0)) throw ConfigError("phase II requires g1*g2 < 0");
  if (phase == Phase::III && !(g1 * g2 > 0)) throw ConfigError("phase III requires g1*g2 > 0");
}

CellDiagonal cell_diagonal(const LossPattern& p) {
  p.validate();
  if (p.phase == Phase::Custom) return *p.custom_cell;
  const cplx i(0, 1);
  return {i * p.g1 - i * p.g0, -i * p.g2 - i * p.g0, -i * p.g1 - i * p.g0, i * p.g2 - i * p.g0};
}

void LatticeSpec::validate() const {
  if (n_sites < 1) throw ConfigError("lattice needs at least 1 site");
  if (!(hopping_J > 0) || !std::isfinite(hopping_J)) throw ConfigError("hopping_J must be > 0");
  if (!(spacing_d > 0) || !std::isfinite(spacing_d)) throw ConfigError("spacing_d must be > 0");
  if (!std::isfinite(re_beta)) throw ConfigError("re_beta must be finite");
  if (static_cast<int>(onsite.size()) != n_sites) throw ConfigError("on-site list length differs from n_sites");
  if (interface_site && (*interface_site < 0 || *interface_site >= n_sites))
    throw ConfigError("interface site out of range");
}

namespace {

void append_domain(LatticeSpec& spec, const LossPattern& pattern, int n) {
  auto cell = cell_diagonal(pattern);
  Domain dom{pattern, static_cast<int>(spec.onsite.size()), n};
  for (int j = 0; j < n; ++j) spec.onsite.push_back(cell[j % 4]);
  spec.domains.push_back(dom);
}

}  // namespace

LatticeSpec uniform_lattice(const LossPattern& pattern, int n_sites, double J, double d, double re_beta) {
  if (n_sites < 1) throw ConfigError("lattice needs at least 1 site");
  LatticeSpec s;
  s.n_sites = n_sites;
  s.hopping_J = J;
  s.spacing_d = d;
  s.re_beta = re_beta;
  append_domain(s, pattern, n_sites);
  s.validate();
  return s;
}

LatticeSpec interface_lattice(const LossPattern& left, const LossPattern& right, int n_left_cells,
                              int n_right_cells, double J, double d, double re_beta) {
  if (n_left_cells <= 0 || n_right_cells <= 0) throw ConfigError("interface lattice needs at least one cell per side");
  LatticeSpec s;
  s.hopping_J = J;
  s.spacing_d = d;
  s.re_beta = re_beta;
  append_domain(s, left, 4 * n_left_cells);
  append_domain(s, right, 4 * n_right_cells);
  s.n_sites = static_cast<int>(s.onsite.size());
  s.interface_site = 4 * n_left_cells;
  s.validate();
  return s;
}

LatticeSpec defect_lattice(double g, int n_sites, int defect_site, double J, double d, double re_beta) {
  if (defect_site < 0 || defect_site >= n_sites) throw ConfigError("defect site out of range");
  LatticeSpec s;
  s.n_sites = n_sites;
  s.hopping_J = J;
  s.spacing_d = d;
  s.re_beta = re_beta;
  s.onsite.assign(n_sites, cplx(0, -2.0 * g));
  s.onsite[defect_site] = 0.0;
  s.interface_site = defect_site;
  s.validate();
  return s;
}

double reduced_zone(double d) { return std::numbers::pi / (2.0 * d); }

Hamiltonian bloch_hamiltonian(double k, const LossPattern& pattern, double J, double d, EnergyUnit unit) {
  auto cell = cell_diagonal(pattern);
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(4, 4);
  for (int a = 0; a < 4; ++a) H(a, a) = cell[a];
  for (int a = 0; a < 3; ++a) H(a, a + 1) = H(a + 1, a) = 1.0;
  const cplx i(0, 1);
  H(0, 3) = std::exp(-4.0 * i * k * d);
  H(3, 0) = std::exp(4.0 * i * k * d);
  if (unit == EnergyUnit::inverse_micron) H *= J;
  return {H, unit};
}

Hamiltonian real_space_hamiltonian(const LatticeSpec& spec) {
  spec.validate();
  const int n = spec.n_sites;
  const double J = spec.hopping_J;
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(n, n);
  for (int j = 0; j < n; ++j) H(j, j) = spec.re_beta + J * spec.onsite[j];
  for (int j = 0; j + 1 < n; ++j) H(j, j + 1) = H(j + 1, j) = J;
  return {H, EnergyUnit::inverse_micron};
}

}  // namespace nhl
