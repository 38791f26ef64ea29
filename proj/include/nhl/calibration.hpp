#pragma once
/// Fabrication parameters to model parameters: Im beta(w), J(d), g2.

#include <optional>
#include <string>
#include <vector>

namespace nhl {

enum class CurveKind { imbeta_vs_w, J_vs_d };
enum class CurveModel { exponential, linear_through_origin, table_interp };

std::string to_string(CurveKind k);
std::string to_string(CurveModel m);
CurveKind curve_kind_from_string(const std::string& s);
CurveModel curve_model_from_string(const std::string& s);

struct AnchorPoint {
  double x = 0.0;
  double y = 0.0;
  std::string units;
  std::string provenance;  // "measured" or "inferred"
};

struct CalibrationCurve {
  CurveKind kind = CurveKind::J_vs_d;
  CurveModel model = CurveModel::exponential;
  double A = 0.0;      // exponential prefactor
  double x0 = 0.0;     // exponential decay constant, y = A exp(-x/x0)
  double slope = 0.0;  // linear_through_origin
  std::vector<AnchorPoint> anchors;  // sorted by x
  double rms_residual = 0.0;

  double predict(double x) const;
};

/// Least squares fit; fixed_x0 turns the exponential into a one-parameter model.
CalibrationCurve fit_curve(std::vector<AnchorPoint> points, CurveModel model, CurveKind kind,
                           std::optional<double> fixed_x0 = std::nullopt);

/// g2 = Im beta / (2J).
double g2_of(double im_beta, double J);

/// Shipped anchor data. J(d) includes one inferred point, labelled as such.
std::vector<AnchorPoint> builtin_anchors(CurveKind kind);

/// Exponential J(d) through the built-in anchors, or table-interpolated Im beta(w).
CalibrationCurve default_curve(CurveKind kind);

/// JSON list of {x, y, units, provenance}.
std::vector<AnchorPoint> load_anchor_file(const std::string& path);

}  // namespace nhl
