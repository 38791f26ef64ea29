#pragma once
/// Coupled-mode propagation along z: da/dz = i K a with K = conj(H).

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "nhl/lattice.hpp"

namespace nhl {

enum class ExcitationKind { edge, bulk_cell_start, interface, site_index };
enum class Method { rk4, expm };

std::string to_string(ExcitationKind k);
ExcitationKind excitation_kind_from_string(const std::string& s);
std::string to_string(Method m);
Method method_from_string(const std::string& s);

struct Excitation {
  ExcitationKind kind = ExcitationKind::edge;
  int site = 0;  // 0-based, resolved
  cplx amplitude = 1.0;
};

/// Resolves the excited site. `site` is required for site_index and optional for bulk_cell_start,
/// where the default is the middle cell of the first domain.
Excitation resolve_excitation(ExcitationKind kind, const LatticeSpec& spec, std::optional<int> site = std::nullopt,
                              cplx amplitude = 1.0);

struct PropagationOptions {
  double z_max = 100.0;  // um
  double dz = 0.01;      // um
  Method method = Method::rk4;
  int sample_every = 1;  // keep every n-th step
};

struct FieldEvolution {
  std::vector<double> z;  // um
  Eigen::MatrixXcd a;     // rows: z samples, cols: sites
  LatticeSpec spec;
  double dz = 0.0;
  bool has_phase = true;
  std::string method_used;

  Eigen::VectorXd site_intensity(int site) const { return a.col(site).cwiseAbs2(); }
  Eigen::VectorXd total_intensity() const { return a.cwiseAbs2().rowwise().sum(); }
  Eigen::MatrixXd intensity() const { return a.cwiseAbs2(); }
};

/// Lattice from explicit on-site values (units of J); handy for tiny test systems.
LatticeSpec custom_lattice(const std::vector<cplx>& onsite_J, double J, double d, double re_beta = 0.0);

FieldEvolution propagate(const LatticeSpec& spec, const Excitation& exc, const PropagationOptions& opt = {});

/// (z, x_com) with x_j = j d; stops where the total intensity underflows.
std::vector<std::pair<double, double>> center_of_mass(const FieldEvolution& f);

struct BeatingResult {
  double delta_kz = 0.0;         // 1/um, upper minus lower band-mean Re E
  double spectral_period = 0.0;  // 2 pi / delta_kz
  std::optional<double> simulated_period;
  bool beating = false;
};

/// Spectral and simulated beating period. The simulated value is the first revival of the excited-site
/// intensity fraction after a dip below half its initial value; none within z_max means no beating.
BeatingResult beating_period(const LatticeSpec& spec, const Excitation& exc, const PropagationOptions& opt = {});

}  // namespace nhl
