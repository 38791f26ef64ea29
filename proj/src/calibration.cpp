#include "nhl/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "nhl/errors.hpp"

namespace nhl {

std::string to_string(CurveKind k) { return k == CurveKind::imbeta_vs_w ? "imbeta_vs_w" : "J_vs_d"; }

std::string to_string(CurveModel m) {
  switch (m) {
    case CurveModel::exponential: return "exponential";
    case CurveModel::linear_through_origin: return "linear_through_origin";
    case CurveModel::table_interp: return "table_interp";
  }
  return "?";
}

CurveKind curve_kind_from_string(const std::string& s) {
  if (s == "imbeta_vs_w") return CurveKind::imbeta_vs_w;
  if (s == "J_vs_d") return CurveKind::J_vs_d;
  throw ConfigError("unknown calibration kind '" + s + "'");
}

CurveModel curve_model_from_string(const std::string& s) {
  if (s == "exponential") return CurveModel::exponential;
  if (s == "linear_through_origin") return CurveModel::linear_through_origin;
  if (s == "table_interp") return CurveModel::table_interp;
  throw ConfigError("unknown calibration model '" + s + "'");
}

double CalibrationCurve::predict(double x) const {
  switch (model) {
    case CurveModel::exponential: return A * std::exp(-x / x0);
    case CurveModel::linear_through_origin: return slope * x;
    case CurveModel::table_interp: {
      const auto& a = anchors;
      if (a.size() == 1) return a[0].y;
      size_t hi = 1;
      while (hi + 1 < a.size() && x > a[hi].x) ++hi;
      const auto& p = a[hi - 1];
      const auto& q = a[hi];
      return p.y + (q.y - p.y) * (x - p.x) / (q.x - p.x);
    }
  }
  return 0.0;
}

CalibrationCurve fit_curve(std::vector<AnchorPoint> pts, CurveModel model, CurveKind kind,
                           std::optional<double> fixed_x0) {
  for (const auto& p : pts)
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw ConfigError("calibration points must be finite");
  std::stable_sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.x < b.x; });
  CalibrationCurve c;
  c.kind = kind;
  c.model = model;
  c.anchors = pts;
  const size_t n = pts.size();
  switch (model) {
    case CurveModel::exponential: {
      for (const auto& p : pts)
        if (!(p.y > 0)) throw ConfigError("exponential calibration needs positive y values");
      if (fixed_x0) {
        if (n < 1) throw ConfigError("exponential fit with fixed decay constant needs at least 1 point");
        if (*fixed_x0 == 0.0) throw ConfigError("decay constant must be nonzero");
        double acc = 0;
        for (const auto& p : pts) acc += std::log(p.y) + p.x / *fixed_x0;
        c.x0 = *fixed_x0;
        c.A = std::exp(acc / n);
        break;
      }
      if (n < 2) throw ConfigError("exponential fit needs at least 2 points");
      double mx = 0, my = 0;
      for (const auto& p : pts) { mx += p.x; my += std::log(p.y); }
      mx /= n; my /= n;
      double sxx = 0, sxy = 0;
      for (const auto& p : pts) {
        sxx += (p.x - mx) * (p.x - mx);
        sxy += (p.x - mx) * (std::log(p.y) - my);
      }
      if (!(sxx > 0)) throw ConfigError("exponential fit needs at least 2 distinct x values");
      double slope = sxy / sxx;
      if (slope == 0.0) throw ConfigError("exponential fit degenerate: zero slope");
      c.x0 = -1.0 / slope;
      c.A = std::exp(my - slope * mx);
      break;
    }
    case CurveModel::linear_through_origin: {
      if (n < 1) throw ConfigError("linear fit needs at least 1 point");
      double sxx = 0, sxy = 0;
      for (const auto& p : pts) { sxx += p.x * p.x; sxy += p.x * p.y; }
      if (!(sxx > 0)) throw ConfigError("linear fit needs a nonzero x value");
      c.slope = sxy / sxx;
      break;
    }
    case CurveModel::table_interp: {
      if (n < 2) throw ConfigError("table interpolation needs at least 2 points");
      for (size_t i = 1; i < n; ++i)
        if (!(pts[i].x > pts[i - 1].x)) throw ConfigError("table interpolation needs distinct x values");
      break;
    }
  }
  double ss = 0;
  for (const auto& p : pts) {
    double r = c.predict(p.x) - p.y;
    ss += r * r;
  }
  c.rms_residual = n ? std::sqrt(ss / n) : 0.0;
  return c;
}

double g2_of(double im_beta, double J) {
  if (!(J > 0)) throw ConfigError("g2_of: J must be > 0");
  return im_beta / (2.0 * J);
}

std::vector<AnchorPoint> builtin_anchors(CurveKind kind) {
  if (kind == CurveKind::J_vs_d)
    return {{1.0, 0.09, "1/um", "inferred"}, {1.4, 0.045, "1/um", "measured"}};
  // Im beta for the four stripe widths of the interface experiment; only w = 0.7 is a direct value.
  return {{0.0, 0.0, "1/um", "inferred"},
          {0.25, 0.06, "1/um", "inferred"},
          {0.5, 0.09, "1/um", "inferred"},
          {0.7, 0.1, "1/um", "measured"}};
}

CalibrationCurve default_curve(CurveKind kind) {
  if (kind == CurveKind::J_vs_d) return fit_curve(builtin_anchors(kind), CurveModel::exponential, kind);
  return fit_curve(builtin_anchors(kind), CurveModel::table_interp, kind);
}

std::vector<AnchorPoint> load_anchor_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open calibration file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("calibration file " + path + ": " + e.what());
  }
  if (!j.is_array()) throw ConfigError("calibration file must hold a JSON list");
  std::vector<AnchorPoint> out;
  for (size_t i = 0; i < j.size(); ++i) {
    const auto& e = j[i];
    if (!e.is_object()) throw ConfigError("calibration entry " + std::to_string(i) + " is not an object");
    for (auto it = e.begin(); it != e.end(); ++it)
      if (it.key() != "x" && it.key() != "y" && it.key() != "units" && it.key() != "provenance")
        throw ConfigError("calibration entry " + std::to_string(i) + ": unknown key '" + it.key() + "'");
    if (!e.contains("x") || !e.contains("y") || !e["x"].is_number() || !e["y"].is_number())
      throw ConfigError("calibration entry " + std::to_string(i) + " needs numeric x and y");
    AnchorPoint p;
    p.x = e["x"].get<double>();
    p.y = e["y"].get<double>();
    p.units = e.value("units", "");
    p.provenance = e.value("provenance", "user");
    out.push_back(p);
  }
  return out;
}

}  // namespace nhl
