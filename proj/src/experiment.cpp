#include "nhl/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <mutex>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

#include "nhl/analysis.hpp"
#include "nhl/calibration.hpp"
#include "nhl/errors.hpp"
#include "nhl/io.hpp"
#include "nhl/lattice.hpp"
#include "nhl/propagation.hpp"
#include "nhl/spectral.hpp"
#include "nhl/symmetry.hpp"
#include "nhl/topology.hpp"

namespace nhl {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------------------
// Line lookup for JSON pointers: a light scan of the raw text, since the
// parser keeps no positions.

std::string escape_token(const std::string& k) {
  std::string out;
  for (char c : k) {
    if (c == '~') out += "~0";
    else if (c == '/') out += "~1";
    else out += c;
  }
  return out;
}

class LineIndex {
 public:
  explicit LineIndex(const std::string& text) { scan(text); }

  int line(std::string ptr) const {
    while (true) {
      auto it = lines_.find(ptr);
      if (it != lines_.end()) return it->second;
      if (ptr.empty()) return 0;
      ptr = ptr.substr(0, ptr.rfind('/'));
    }
  }

 private:
  struct Frame {
    bool obj;
    std::string ptr;
    std::string key;
    int idx = 0;
    bool want_key = true;
  };
  std::map<std::string, int> lines_;

  void scan(const std::string& t) {
    std::vector<Frame> st;
    int line = 1;
    auto value_ptr = [&]() -> std::string {
      if (st.empty()) return "";
      const auto& f = st.back();
      return f.ptr + "/" + (f.obj ? escape_token(f.key) : std::to_string(f.idx));
    };
    auto mark = [&](const std::string& p) { lines_.emplace(p, line); };
    for (size_t i = 0; i < t.size(); ++i) {
      char c = t[i];
      if (c == '\n') { ++line; continue; }
      if (c == ' ' || c == '\t' || c == '\r' || c == ':') continue;
      if (c == '"') {
        std::string s;
        for (++i; i < t.size() && t[i] != '"'; ++i) {
          if (t[i] == '\\' && i + 1 < t.size()) { s += t[++i]; continue; }
          if (t[i] == '\n') ++line;
          s += t[i];
        }
        if (!st.empty() && st.back().obj && st.back().want_key) {
          st.back().key = s;
          st.back().want_key = false;
          mark(value_ptr());
        } else {
          mark(value_ptr());
        }
        continue;
      }
      if (c == '{' || c == '[') {
        std::string p = value_ptr();
        mark(p);
        st.push_back(Frame{c == '{', p, std::string(), 0, true});
        continue;
      }
      if (c == '}' || c == ']') {
        if (!st.empty()) st.pop_back();
        continue;
      }
      if (c == ',') {
        if (!st.empty()) {
          if (st.back().obj) st.back().want_key = true;
          else ++st.back().idx;
        }
        continue;
      }
      mark(value_ptr());
      while (i + 1 < t.size() && std::string(",}]\n \t\r").find(t[i + 1]) == std::string::npos) ++i;
    }
  }
};

struct Ctx {
  std::string source;
  std::shared_ptr<LineIndex> lines;
  std::string config_dir;
};

[[noreturn]] void fail(const Ctx& c, const std::string& ptr, const std::string& msg) {
  std::ostringstream os;
  os << c.source;
  int line = c.lines ? c.lines->line(ptr) : 0;
  if (line > 0) os << ":" << line;
  os << ": " << (ptr.empty() ? "/" : ptr) << ": " << msg;
  throw ConfigError(os.str());
}

// Strict object view: every key must be consumed before done().
class Obj {
 public:
  Obj(const json& j, std::string ptr, const Ctx& c) : j_(j), ptr_(std::move(ptr)), c_(c) {
    if (!j_.is_object()) fail(c_, ptr_, "expected an object");
  }

  bool has(const std::string& k) const { return j_.contains(k); }
  std::string at(const std::string& k) const { return ptr_ + "/" + escape_token(k); }
  const Ctx& ctx() const { return c_; }
  const std::string& ptr() const { return ptr_; }

  const json& raw(const std::string& k) {
    if (!has(k)) fail(c_, at(k), "required key missing");
    used_.insert(k);
    return j_.at(k);
  }

  double num(const std::string& k) {
    const json& v = raw(k);
    if (!v.is_number()) fail(c_, at(k), "expected a number");
    double x = v.get<double>();
    if (!std::isfinite(x)) fail(c_, at(k), "expected a finite number");
    return x;
  }
  double num(const std::string& k, double def) { return has(k) ? num(k) : def; }
  std::optional<double> opt_num(const std::string& k) { return has(k) ? std::optional<double>(num(k)) : std::nullopt; }

  long integer(const std::string& k) {
    const json& v = raw(k);
    if (!v.is_number_integer()) fail(c_, at(k), "expected an integer");
    return v.get<long>();
  }
  long integer(const std::string& k, long def) { return has(k) ? integer(k) : def; }

  bool boolean(const std::string& k, bool def) {
    if (!has(k)) return def;
    const json& v = raw(k);
    if (!v.is_boolean()) fail(c_, at(k), "expected true or false");
    return v.get<bool>();
  }

  std::string str(const std::string& k) {
    const json& v = raw(k);
    if (!v.is_string()) fail(c_, at(k), "expected a string");
    return v.get<std::string>();
  }
  std::string str(const std::string& k, const std::string& def) { return has(k) ? str(k) : def; }

  std::vector<double> nums(const std::string& k) {
    const json& v = raw(k);
    if (!v.is_array()) fail(c_, at(k), "expected a list of numbers");
    std::vector<double> out;
    for (size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) fail(c_, at(k) + "/" + std::to_string(i), "expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  std::vector<std::string> strs(const std::string& k) {
    const json& v = raw(k);
    if (!v.is_array()) fail(c_, at(k), "expected a list of strings");
    std::vector<std::string> out;
    for (size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_string()) fail(c_, at(k) + "/" + std::to_string(i), "expected a string");
      out.push_back(v[i].get<std::string>());
    }
    return out;
  }

  Obj obj(const std::string& k) { return Obj(raw(k), at(k), c_); }

  void done() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) fail(c_, at(it.key()), "unknown key '" + it.key() + "'");
  }

  template <class F>
  auto guard(const std::string& k, F&& f) -> decltype(f()) {
    try {
      return f();
    } catch (const ConfigError& e) {
      if (std::string(e.what()).rfind(c_.source, 0) == 0) throw;
      fail(c_, at(k), e.what());
    }
  }

 private:
  const json& j_;
  std::string ptr_;
  const Ctx& c_;
  std::set<std::string> used_;
};

// ---------------------------------------------------------------------------
// Lattice and excitation

json pattern_json(const LossPattern& p) {
  json j;
  j["phase"] = to_string(p.phase);
  j["g0"] = p.g0;
  j["g1"] = p.g1;
  j["g2"] = p.g2;
  auto cell = cell_diagonal(p);
  json c = json::array();
  for (auto v : cell) c.push_back({v.real(), v.imag()});
  j["cell_diagonal_J"] = c;
  return j;
}

struct Calibrations {
  CalibrationCurve J_of_d = default_curve(CurveKind::J_vs_d);
  CalibrationCurve imbeta_of_w = default_curve(CurveKind::imbeta_vs_w);
};

json curve_json(const CalibrationCurve& c) {
  json j;
  j["kind"] = to_string(c.kind);
  j["model"] = to_string(c.model);
  if (c.model == CurveModel::exponential) {
    j["A"] = c.A;
    j["x0"] = c.x0;
  }
  if (c.model == CurveModel::linear_through_origin) j["slope"] = c.slope;
  json a = json::array();
  for (const auto& p : c.anchors) a.push_back({{"x", p.x}, {"y", p.y}, {"units", p.units}, {"provenance", p.provenance}});
  j["anchors"] = a;
  j["rms_residual"] = c.rms_residual;
  return j;
}

std::string resolve_path(const Ctx& c, const std::string& p) {
  fs::path path(p);
  if (path.is_absolute()) return p;
  return (fs::path(c.config_dir) / path).string();
}

LossPattern parse_pattern(Obj o, double J, const Calibrations& cal, json& derived) {
  LossPattern p;
  if (o.has("cell")) {
    if (o.has("phase") && o.str("phase") != "Custom") fail(o.ctx(), o.at("phase"), "cell requires phase Custom");
    const json& cell = o.raw("cell");
    if (!cell.is_array() || cell.size() != 4) fail(o.ctx(), o.at("cell"), "expected 4 on-site values");
    CellDiagonal cd;
    for (size_t i = 0; i < 4; ++i) {
      const json& e = cell[i];
      if (e.is_number()) cd[i] = e.get<double>();
      else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number())
        cd[i] = cplx(e[0].get<double>(), e[1].get<double>());
      else fail(o.ctx(), o.at("cell") + "/" + std::to_string(i), "expected a number or [re, im]");
    }
    p = o.guard("cell", [&] { return LossPattern::custom(cd); });
  } else if (o.has("g0") || o.has("g1")) {
    double g0 = o.num("g0"), g1 = o.num("g1"), g2 = o.num("g2");
    if (o.has("phase")) {
      std::string ph = o.str("phase");
      auto lp = o.guard("g0", [&] { return LossPattern::general(g0, g1, g2); });
      if (to_string(lp.phase) != ph) fail(o.ctx(), o.at("phase"), "phase " + ph + " contradicts the sign of g1*g2");
    }
    p = o.guard("g0", [&] { return LossPattern::general(g0, g1, g2); });
  } else if (o.has("phase")) {
    Phase ph = o.guard("phase", [&] { return phase_from_string(o.str("phase")); });
    if (ph == Phase::Custom) fail(o.ctx(), o.at("phase"), "Custom requires a cell");
    int given = o.has("g") + o.has("im_beta") + o.has("chromium_width");
    if (o.has("g2")) fail(o.ctx(), o.at("g2"), "use g (magnitude) together with phase, or g2 alone");
    double g = 0.0;
    if (ph == Phase::I) {
      if (given) fail(o.ctx(), o.ptr(), "phase I takes no loss parameter");
    } else {
      if (given != 1) fail(o.ctx(), o.ptr(), "give exactly one of g, im_beta, chromium_width");
      if (o.has("g")) {
        g = o.num("g");
        derived["g_source"] = "config";
      } else if (o.has("im_beta")) {
        double ib = o.num("im_beta");
        g = g2_of(ib, J);
        derived["im_beta"] = ib;
        derived["g_source"] = "im_beta / (2 J)";
      } else {
        double w = o.num("chromium_width");
        double ib = cal.imbeta_of_w.predict(w);
        g = g2_of(ib, J);
        derived["chromium_width"] = w;
        derived["im_beta"] = ib;
        derived["g_source"] = "im_beta(w) calibration / (2 J)";
      }
      if (g < 0) fail(o.ctx(), o.ptr(), "loss magnitude must be >= 0");
    }
    p = LossPattern::preset(ph, g);
  } else if (o.has("g2")) {
    p = LossPattern::from_g2(o.num("g2"));
  } else {
    fail(o.ctx(), o.ptr(), "pattern needs phase, g2, explicit g0/g1/g2, or cell");
  }
  o.done();
  derived["pattern"] = pattern_json(p);
  return p;
}

struct LatticePlan {
  LatticeSpec spec;
  json derived;
};

LatticePlan parse_lattice(Obj o, Calibrations& cal) {
  LatticePlan plan;
  json& d = plan.derived;
  if (o.has("J_calibration")) {
    std::string f = resolve_path(o.ctx(), o.str("J_calibration"));
    cal.J_of_d = o.guard("J_calibration",
                         [&] { return fit_curve(load_anchor_file(f), CurveModel::exponential, CurveKind::J_vs_d); });
  }
  if (o.has("imbeta_calibration")) {
    std::string f = resolve_path(o.ctx(), o.str("imbeta_calibration"));
    cal.imbeta_of_w = o.guard("imbeta_calibration", [&] {
      return fit_curve(load_anchor_file(f), CurveModel::table_interp, CurveKind::imbeta_vs_w);
    });
  }
  double J, dsp;
  if (o.has("hopping_J")) {
    J = o.num("hopping_J");
    dsp = o.num("spacing_d", 1.4);
    d["hopping_J_source"] = "config";
  } else {
    if (!o.has("spacing_d")) fail(o.ctx(), o.ptr(), "give hopping_J, or spacing_d to derive J from the J(d) calibration");
    dsp = o.num("spacing_d");
    J = cal.J_of_d.predict(dsp);
    d["hopping_J_source"] = "J(d) calibration";
    d["J_calibration"] = curve_json(cal.J_of_d);
  }
  if (!(J > 0)) fail(o.ctx(), o.at("hopping_J"), "hopping_J must be > 0");
  if (!(dsp > 0)) fail(o.ctx(), o.at("spacing_d"), "spacing_d must be > 0");
  double re_beta = o.num("re_beta", 6.6);

  if (o.has("interface") == o.has("pattern")) fail(o.ctx(), o.ptr(), "give exactly one of pattern (with n_sites) or interface");
  if (o.has("pattern")) {
    long n = o.integer("n_sites");
    if (n < 1 || n > 4096) fail(o.ctx(), o.at("n_sites"), "n_sites must be in [1, 4096]");
    json pd;
    auto p = parse_pattern(o.obj("pattern"), J, cal, pd);
    d["domains"] = json::array({pd});
    plan.spec = o.guard("pattern", [&] { return uniform_lattice(p, static_cast<int>(n), J, dsp, re_beta); });
  } else {
    Obj in = o.obj("interface");
    long nl = in.integer("left_cells", 6), nr = in.integer("right_cells", 6);
    if (nl < 1 || nr < 1) fail(o.ctx(), in.ptr(), "need at least one cell on each side");
    if (nl + nr > 1024) fail(o.ctx(), in.ptr(), "too many cells");
    json ld, rd;
    auto lp = parse_pattern(in.obj("left"), J, cal, ld);
    auto rp = parse_pattern(in.obj("right"), J, cal, rd);
    in.done();
    d["domains"] = json::array({ld, rd});
    d["left_cells"] = nl;
    d["right_cells"] = nr;
    plan.spec = interface_lattice(lp, rp, static_cast<int>(nl), static_cast<int>(nr), J, dsp, re_beta);
    if (o.has("n_sites")) fail(o.ctx(), o.at("n_sites"), "n_sites is implied by the interface cell counts");
  }
  o.done();
  d["n_sites"] = plan.spec.n_sites;
  d["hopping_J"] = J;
  d["spacing_d"] = dsp;
  d["re_beta"] = re_beta;
  if (plan.spec.interface_site) {
    d["interface_site"] = *plan.spec.interface_site;
    d["interface_site_1based"] = *plan.spec.interface_site + 1;
  }
  json im = json::array();
  for (const auto& v : plan.spec.onsite) im.push_back(v.imag());
  d["onsite_imag_J"] = im;
  return plan;
}

Excitation parse_excitation(Obj o, const LatticeSpec& spec, json& derived) {
  auto kind = o.guard("kind", [&] { return excitation_kind_from_string(o.str("kind")); });
  std::optional<int> site;
  if (o.has("site")) site = static_cast<int>(o.integer("site"));
  cplx amp = 1.0;
  if (o.has("amplitude")) {
    const json& a = o.raw("amplitude");
    if (a.is_number()) amp = a.get<double>();
    else if (a.is_array() && a.size() == 2 && a[0].is_number() && a[1].is_number())
      amp = cplx(a[0].get<double>(), a[1].get<double>());
    else fail(o.ctx(), o.at("amplitude"), "expected a number or [re, im]");
  }
  o.done();
  auto e = o.guard("kind", [&] { return resolve_excitation(kind, spec, site, amp); });
  derived["kind"] = to_string(e.kind);
  derived["site"] = e.site;
  derived["amplitude"] = {e.amplitude.real(), e.amplitude.imag()};
  return e;
}

std::vector<double> grid_or_list(Obj& p, const std::string& list, const std::string& lo, const std::string& hi,
                                 const std::string& step, std::optional<std::array<double, 3>> def) {
  if (p.has(list)) {
    if (p.has(lo) || p.has(hi) || p.has(step)) fail(p.ctx(), p.at(list), "give either a list or a range, not both");
    auto v = p.nums(list);
    if (v.empty()) fail(p.ctx(), p.at(list), "list is empty");
    return v;
  }
  std::array<double, 3> r{0, 0, 0};
  if (def) r = *def;
  else if (!p.has(lo)) fail(p.ctx(), p.at(list), "required: " + list + " or " + lo + "/" + hi + "/" + step);
  r[0] = p.num(lo, r[0]);
  r[1] = p.num(hi, r[1]);
  r[2] = p.num(step, r[2]);
  if (!(r[2] > 0) || r[1] < r[0]) fail(p.ctx(), p.at(step), "range needs step > 0 and max >= min");
  long n = std::lround((r[1] - r[0]) / r[2]);
  if (n > 100000) fail(p.ctx(), p.at(step), "range has too many points");
  std::vector<double> v;
  for (long i = 0; i <= n; ++i) v.push_back(r[0] + i * r[2]);
  return v;
}

PropagationOptions parse_prop(Obj& p, double z_default) {
  PropagationOptions o;
  o.z_max = p.num("z_max", z_default);
  o.dz = p.num("dz", 0.01);
  o.method = p.guard("method", [&] { return method_from_string(p.str("method", "rk4")); });
  o.sample_every = static_cast<int>(p.integer("output_every", 10));
  if (!(o.z_max > 0)) fail(p.ctx(), p.at("z_max"), "z_max must be > 0");
  if (!(o.dz > 0)) fail(p.ctx(), p.at("dz"), "dz must be > 0");
  if (o.sample_every < 1) fail(p.ctx(), p.at("output_every"), "output_every must be >= 1");
  if (o.z_max / o.dz > 1e7) fail(p.ctx(), p.at("dz"), "too many integration steps");
  return o;
}

json prop_json(const PropagationOptions& o) {
  return {{"z_max", o.z_max}, {"dz", o.dz}, {"method", to_string(o.method)}, {"output_every", o.sample_every},
          {"sample_spacing", o.dz * o.sample_every}};
}

std::string tag(double v) { return fmt(v); }

// ---------------------------------------------------------------------------
// Runs. Each parser validates everything and returns the deferred computation.

using Runner = std::function<RunResult()>;

Runner prep_spectrum(Obj& p, std::optional<LatticePlan> lat, const Ctx& c) {
  if (!lat) fail(c, "/lattice", "spectrum run needs a lattice");
  std::vector<double> g2s;
  bool sweep_g2 = p.has("g2_values");
  if (sweep_g2) {
    g2s = p.nums("g2_values");
    if (g2s.empty()) fail(c, p.at("g2_values"), "list is empty");
    if (lat->spec.domains.size() != 1) fail(c, p.at("g2_values"), "g2_values needs a single-pattern lattice");
  }
  double tol = p.num("zero_mode_tol", 1e-6);
  bool vectors = p.boolean("write_vectors", false);
  LatticePlan L = *lat;
  return [=]() {
    RunResult r;
    r.manifest["derived"]["lattice"] = L.derived;
    r.manifest["derived"]["zero_mode_tol_J"] = tol;
    auto one = [&](const LatticeSpec& spec, const std::string& suffix) {
      auto s = eig_full(real_space_hamiltonian(spec));
      r.files["spectrum" + suffix + ".csv"] = spectrum_csv(s);
      if (vectors) r.files["vectors" + suffix + ".csv"] = vectors_csv(s);
      auto z = find_zero_modes(s, spec, tol);
      CsvTable t({"index", "ReE", "ImE", "edge_weight", "localization_length", "fit_r2", "dominant_edge"});
      for (size_t k = 0; k < z.indices.size(); ++k)
        t.add({double(z.indices[k]), z.energies[k].real(), z.energies[k].imag(), z.edge_weights[k],
               z.localization_lengths[k], z.fit_r2[k], double(z.dominant_edge[k])});
      r.files["zero_modes" + suffix + ".csv"] = t.str();
      r.scalars["n_zero_modes" + suffix] = static_cast<double>(z.indices.size());
      r.scalars["max_condition" + suffix] = s.max_condition();
    };
    if (sweep_g2) {
      for (double g2 : g2s) {
        auto spec = uniform_lattice(LossPattern::from_g2(g2), L.spec.n_sites, L.spec.hopping_J, L.spec.spacing_d,
                                    L.spec.re_beta);
        r.manifest["derived"]["patterns"][tag(g2)] = pattern_json(LossPattern::from_g2(g2));
        one(spec, "_g2_" + tag(g2));
      }
    } else {
      one(L.spec, "");
    }
    return r;
  };
}

Runner prep_propagate(Obj& p, std::optional<LatticePlan> lat, std::optional<Excitation> exc, const Ctx& c) {
  if (!lat) fail(c, "/lattice", "propagate run needs a lattice");
  if (!exc) fail(c, "/excitation", "propagate run needs an excitation");
  auto opt = parse_prop(p, 100.0);
  bool amps = p.boolean("write_amplitudes", false);
  bool beat = p.boolean("beating", false);
  LatticePlan L = *lat;
  Excitation E = *exc;
  return [=]() {
    RunResult r;
    r.manifest["derived"]["lattice"] = L.derived;
    r.manifest["derived"]["propagation"] = prop_json(opt);
    auto f = propagate(L.spec, E, opt);
    r.manifest["derived"]["propagation"]["method_used"] = f.method_used;
    r.files["intensity.csv"] = intensity_csv(f);
    json axes{{"z0", f.z.front()}, {"n_z", f.z.size()}, {"sample_spacing", f.z.size() > 1 ? f.z[1] - f.z[0] : 0.0},
              {"n_sites", L.spec.n_sites}, {"x_of_site", "j * spacing_d"}, {"spacing_d", L.spec.spacing_d}};
    r.files["intensity_axes.json"] = axes.dump(2) + "\n";
    if (amps) r.files["amplitudes.csv"] = amplitude_csv(f);
    CsvTable com({"z", "x_com"});
    for (auto [z, x] : center_of_mass(f)) com.add({z, x});
    r.files["center_of_mass.csv"] = com.str();
    auto tot = f.total_intensity();
    r.scalars["final_total_intensity"] = tot(tot.size() - 1);
    r.scalars["final_excited_fraction"] = f.site_intensity(E.site)(tot.size() - 1) / tot(tot.size() - 1);
    if (beat) {
      auto b = beating_period(L.spec, E, opt);
      r.scalars["spectral_period"] = b.spectral_period;
      r.scalars["delta_kz"] = b.delta_kz;
      r.scalars["beating"] = b.beating ? 1.0 : 0.0;
      if (b.simulated_period) r.scalars["simulated_period"] = *b.simulated_period;
    }
    return r;
  };
}

Runner prep_momentum(Obj& p, std::optional<LatticePlan> lat, std::optional<Excitation> exc, const Ctx& c) {
  if (!lat) fail(c, "/lattice", "momentum run needs a lattice");
  if (!exc) fail(c, "/excitation", "momentum run needs an excitation");
  auto opt = parse_prop(p, 200.0);
  Window w = p.guard("window", [&] { return window_from_string(p.str("window", "hann")); });
  int pad = static_cast<int>(p.integer("pad_factor", 4));
  if (pad < 1 || pad > 16) fail(c, p.at("pad_factor"), "pad_factor must be in [1, 16]");
  double rb = lat->spec.re_beta;
  std::vector<double> win{rb - 0.3, rb + 0.3};
  if (p.has("kz_window")) {
    win = p.nums("kz_window");
    if (win.size() != 2 || !(win[1] > win[0])) fail(c, p.at("kz_window"), "expected [kz_lo, kz_hi] with kz_hi > kz_lo");
  }
  std::vector<double> probes{-0.5};
  if (p.has("kx_probes")) probes = p.nums("kx_probes");
  LatticePlan L = *lat;
  Excitation E = *exc;
  return [=]() {
    RunResult r;
    r.manifest["derived"]["lattice"] = L.derived;
    r.manifest["derived"]["propagation"] = prop_json(opt);
    r.manifest["derived"]["spectrum"] = {{"window", to_string(w)}, {"pad_factor", pad}, {"kz_window", win},
                                         {"x_of_site", "-j * spacing_d"}};
    auto f = propagate(L.spec, E, opt);
    auto s = momentum_spectrum(f, w, pad);
    r.files["momentum.csv"] = momentum_csv(s, win[0], win[1], L.spec.spacing_d);
    json axes{{"kx_min", s.kx(0)},
              {"kx_max", s.kx(s.kx.size() - 1)},
              {"n_kx", s.kx.size()},
              {"kz_spacing", s.kz(1) - s.kz(0)},
              {"display_zones", 2},
              {"windowed_norm", s.windowed_norm},
              {"power_sum", s.power.sum()}};
    r.files["momentum_axes.json"] = axes.dump(2) + "\n";
    auto rs = ridge_summary(s, win[0], win[1]);
    json ridge{{"centroid", rs.centroid}, {"kz_min", rs.kz_min}, {"kz_max", rs.kz_max}, {"variation", rs.variation},
               {"columns_used", rs.columns_used}};
    for (double pr : probes) {
      json peaks = json::array();
      for (auto pk : column_peaks(s, pr * std::numbers::pi / L.spec.spacing_d, win[0], win[1]))
        peaks.push_back({{"kz", pk.kz}, {"rel_height", pk.rel_height}});
      ridge["peaks"][tag(pr)] = peaks;
    }
    r.files["ridge.json"] = ridge.dump(2) + "\n";
    r.scalars["ridge_centroid"] = rs.centroid;
    r.scalars["ridge_variation"] = rs.variation;
    return r;
  };
}

Runner prep_winding(Obj& p, const Ctx& c) {
  auto g2s = p.nums("g2_values");
  if (g2s.empty()) fail(c, p.at("g2_values"), "list is empty");
  long N = p.integer("k_grid_size", 128);
  if (N < 16 || N > 1 << 20) fail(c, p.at("k_grid_size"), "k_grid_size must be >= 16");
  double excl = p.num("exclusion", 0.05);
  long zones = p.integer("zones", 1);
  if (zones < 1 || zones > 64) fail(c, p.at("zones"), "zones must be in [1, 64]");
  double J = p.num("hopping_J", 0.045), d = p.num("spacing_d", 1.4);
  if (!(J > 0) || !(d > 0)) fail(c, p.ptr(), "hopping_J and spacing_d must be > 0");
  return [=]() {
    RunResult r;
    r.manifest["derived"]["winding"] = {{"hopping_J", J}, {"spacing_d", d}, {"k_grid_size", N}, {"exclusion", excl},
                                        {"zones", zones}, {"convention", "g0 = g1 = |g2|"}};
    CsvTable t({"g2", "W", "residual", "gamma_lower", "gamma_upper", "min_line_gap_J", "status"});
    int ok = 0;
    for (double g2 : g2s) {
      if (std::abs(g2) < excl) {
        t.add_raw({fmt(g2), "nan", "nan", "nan", "nan", "nan", "excluded"});
        continue;
      }
      try {
        WindingOptions wo;
        wo.zones = static_cast<int>(zones);
        auto w = winding_number(LossPattern::from_g2(g2), J, d, static_cast<int>(N), wo);
        t.add_raw({fmt(g2), fmt(w.W), fmt(w.quantization_residual), fmt(w.gamma_lower), fmt(w.gamma_upper),
                   fmt(w.min_line_gap), "ok"});
        r.scalars["W_g2_" + tag(g2)] = w.W;
        ++ok;
      } catch (const GaplessError& e) {
        t.add_raw({fmt(g2), "nan", "nan", "nan", "nan", fmt(e.min_gap), "gapless"});
      }
    }
    r.files["winding.csv"] = t.str();
    r.scalars["points_ok"] = ok;
    return r;
  };
}

Runner prep_symmetry(Obj& p, long seed, const Ctx& c) {
  long n = p.integer("k_samples", 32);
  if (n < 1 || n > 100000) fail(c, p.at("k_samples"), "k_samples must be in [1, 100000]");
  std::vector<std::string> cases{"nontrivial", "trivial"};
  if (p.has("cases")) cases = p.strs("cases");
  for (size_t i = 0; i < cases.size(); ++i)
    p.guard("cases", [&] { return loss_case_from_string(cases[i]); });
  double g = p.num("g", 1.0);
  if (g < 0) fail(c, p.at("g"), "g must be >= 0");
  double pert = p.num("perturbation", 0.0);
  if (pert < 0) fail(c, p.at("perturbation"), "perturbation must be >= 0");
  return [=]() {
    RunResult r;
    r.manifest["derived"]["symmetry"] = {{"k_samples", n}, {"g", g}, {"perturbation", pert}, {"seed", seed},
                                         {"k_convention", "dimensionless Bloch phase, 4 kx d"}};
    json rep;
    Eigen::MatrixXcd dH;
    if (pert > 0) dH = random_hermitian(8, pert, static_cast<std::uint64_t>(seed));
    double worst = 0;
    for (const auto& cs : cases) {
      auto lc = loss_case_from_string(cs);
      auto s = check_symmetries(uniform_k_samples(static_cast<int>(n)), lc, g, pert > 0 ? &dH : nullptr);
      json per = json::array();
      for (size_t i = 0; i < s.k_samples.size(); ++i)
        per.push_back({{"k", s.k_samples[i]}, {"T", s.per_k[i][0]}, {"C", s.per_k[i][1]}, {"S", s.per_k[i][2]}});
      rep[cs] = {{"residual_T", s.residual_T}, {"residual_C", s.residual_C}, {"residual_S", s.residual_S},
                 {"holds_T", s.holds_T},       {"holds_C", s.holds_C},       {"holds_S", s.holds_S},
                 {"class_label", s.class_label}, {"per_k", per}};
      worst = std::max({worst, s.residual_T, s.residual_C, s.residual_S});
      r.scalars["bdi_" + cs] = s.class_label == "BDI" ? 1.0 : 0.0;
    }
    r.files["symmetry.json"] = rep.dump(2) + "\n";
    r.scalars["max_residual"] = worst;
    return r;
  };
}

Runner prep_ep(Obj& p, const Ctx& c) {
  EPSweepSpec s;
  s.im_beta = p.num("im_beta", 0.1);
  if (s.im_beta < 0) fail(c, p.at("im_beta"), "im_beta must be >= 0");
  auto Js = grid_or_list(p, "J_values", "J_min", "J_max", "J_step", std::array<double, 3>{0.04, 0.12, 0.001});
  for (double J : Js)
    if (!(J > 0)) fail(c, p.ptr(), "J values must be > 0");
  s.left = p.guard("left_phase", [&] { return phase_from_string(p.str("left_phase", "II")); });
  s.right = p.guard("right_phase", [&] { return phase_from_string(p.str("right_phase", "III")); });
  if (s.left == Phase::Custom || s.right == Phase::Custom) fail(c, p.ptr(), "EP sweep needs preset phases");
  s.left_cells = static_cast<int>(p.integer("left_cells", 6));
  s.right_cells = static_cast<int>(p.integer("right_cells", 6));
  if (s.left_cells < 1 || s.right_cells < 1) fail(c, p.ptr(), "need at least one cell per side");
  s.spacing_d = p.num("spacing_d", 1.4);
  s.re_beta = p.num("re_beta", 0.0);
  bool refine = p.boolean("refine", true);
  return [=]() {
    RunResult r;
    r.manifest["derived"]["ep_sweep"] = {{"im_beta", s.im_beta},         {"left_phase", to_string(s.left)},
                                         {"right_phase", to_string(s.right)}, {"left_cells", s.left_cells},
                                         {"right_cells", s.right_cells},   {"spacing_d", s.spacing_d},
                                         {"n_points", Js.size()},          {"g_rule", "g = im_beta / (2 J)"}};
    auto res = ep_sweep(s, Js);
    CsvTable t({"J", "g", "ReE_a", "ImE_a", "ReE_b", "ImE_b", "separation", "re_split", "im_split", "step_overlap"});
    for (size_t i = 0; i < res.J_values.size(); ++i) {
      auto [a, b] = res.tracked[i];
      t.add({res.J_values[i], g2_of(s.im_beta, res.J_values[i]), a.real(), a.imag(), b.real(), b.imag(),
             res.separation[i], res.re_split[i], res.im_split[i], res.step_overlap[i]});
    }
    r.files["ep_sweep.csv"] = t.str();
    r.scalars["J_ep_estimate"] = res.J_ep_estimate;
    r.scalars["coalescence_condition"] = res.coalescence_condition;
    if (refine) {
      auto ref = refine_exceptional_point(s, res);
      r.scalars["J_ep_refined"] = ref.J_ep;
      r.scalars["refined_condition"] = ref.condition;
    }
    return r;
  };
}

Runner prep_interface_compare(Obj& p, const Ctx& c) {
  auto g2s = grid_or_list(p, "g2_values", "g2_min", "g2_max", "g2_step", std::array<double, 3>{0.2, 3.0, 0.1});
  for (double g : g2s)
    if (!(g > 0)) fail(c, p.ptr(), "g2 values must be > 0");
  double J = p.num("hopping_J", 0.045);
  if (!(J > 0)) fail(c, p.at("hopping_J"), "hopping_J must be > 0");
  InterfaceDefectOptions o;
  o.left_cells = static_cast<int>(p.integer("left_cells", 6));
  o.right_cells = static_cast<int>(p.integer("right_cells", 6));
  o.defect_sites = static_cast<int>(p.integer("defect_sites", 40));
  o.spacing_d = p.num("spacing_d", 1.4);
  if (o.left_cells < 1 || o.right_cells < 1 || o.defect_sites < 3) fail(c, p.ptr(), "lattice sizes too small");
  return [=]() {
    RunResult r;
    r.manifest["derived"]["interface_compare"] = {{"hopping_J", J},
                                                  {"left_cells", o.left_cells},
                                                  {"right_cells", o.right_cells},
                                                  {"defect_sites", o.defect_sites},
                                                  {"defect_site", o.defect_sites / 2},
                                                  {"convention", "g0 = g1 = g2"}};
    auto rows = interface_vs_defect(g2s, J, o);
    CsvTable t({"g2", "ImE_interface", "ImE_defect", "ambiguous"});
    int adv = 0;
    for (const auto& row : rows) {
      t.add({row.g2, row.im_interface, row.im_defect, row.ambiguous ? 1.0 : 0.0});
      if (std::abs(row.im_interface) < std::abs(row.im_defect)) ++adv;
    }
    r.files["interface_vs_defect.csv"] = t.str();
    r.scalars["points_with_advantage"] = adv;
    return r;
  };
}

Runner prep_fit(Obj& p, std::optional<LatticePlan> lat, std::optional<Excitation> exc, const Ctx& c) {
  if (!lat) fail(c, "/lattice", "fit run needs a lattice");
  if (!exc) fail(c, "/excitation", "fit run needs an excitation");
  auto opt = parse_prop(p, 100.0);
  int site = exc->site;
  if (p.has("site")) site = static_cast<int>(p.integer("site"));
  if (site < 0 || site >= lat->spec.n_sites) fail(c, p.at("site"), "site out of range");
  std::string what = p.str("analysis", "both");
  if (what != "decay" && what != "oscillation" && what != "both")
    fail(c, p.at("analysis"), "expected decay, oscillation or both");
  auto ranges = default_fit_ranges();
  if (p.has("fit_ranges")) {
    const json& fr = p.raw("fit_ranges");
    if (!fr.is_array() || fr.empty()) fail(c, p.at("fit_ranges"), "expected a non-empty list of [lo, hi]");
    ranges.clear();
    for (size_t i = 0; i < fr.size(); ++i) {
      const json& e = fr[i];
      if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number() || !(e[1].get<double>() > e[0].get<double>()))
        fail(c, p.at("fit_ranges") + "/" + std::to_string(i), "expected [lo, hi] with hi > lo");
      ranges.emplace_back(e[0].get<double>(), e[1].get<double>());
    }
  }
  std::pair<double, double> orange{0.0, 80.0};
  if (p.has("oscillation_range")) {
    auto v = p.nums("oscillation_range");
    if (v.size() != 2 || !(v[1] > v[0])) fail(c, p.at("oscillation_range"), "expected [lo, hi] with hi > lo");
    orange = {v[0], v[1]};
  }
  LatticePlan L = *lat;
  Excitation E = *exc;
  return [=]() {
    RunResult r;
    r.manifest["derived"]["lattice"] = L.derived;
    r.manifest["derived"]["propagation"] = prop_json(opt);
    r.manifest["derived"]["fit"] = {{"site", site}, {"analysis", what}, {"fit_ranges", ranges},
                                    {"oscillation_range", {orange.first, orange.second}}};
    auto f = propagate(L.spec, E, opt);
    Eigen::VectorXd I = f.site_intensity(site);
    CsvTable t({"z", "I"});
    for (size_t s = 0; s < f.z.size(); ++s) t.add({f.z[s], I(s)});
    r.files["trace.csv"] = t.str();
    json out;
    if (what != "oscillation") {
      auto d = fit_decay(f.z, I, ranges);
      out["decay"] = {{"ell", d.ell}, {"ell_error", d.ell_error}, {"a0", d.a0}, {"ells", d.ells},
                      {"r_squared", d.r_squared}, {"fit_ranges", d.fit_ranges}, {"rejected", d.rejected}};
      r.scalars["ell"] = d.ell;
      r.scalars["ell_error"] = d.ell_error;
    }
    if (what != "decay") {
      auto o = fit_oscillation(f.z, I, orange);
      out["oscillation"] = {{"kz_osc", o.kz_osc}, {"phi", o.phi}, {"ell", o.ell}, {"a0", o.a0}, {"a1", o.a1},
                            {"kz_stderr", o.kz_stderr}, {"residual_rms", o.residual_rms},
                            {"iterations", o.iterations}, {"converged", o.converged},
                            {"oscillation_resolved", o.oscillation_resolved}};
      r.scalars["kz_osc"] = o.kz_osc;
      r.scalars["oscillation_resolved"] = o.oscillation_resolved ? 1.0 : 0.0;
    }
    r.files["fit.json"] = out.dump(2) + "\n";
    return r;
  };
}

Runner prep_calibrate(Obj& p, const Ctx& c) {
  CurveKind kind = p.guard("kind", [&] { return curve_kind_from_string(p.str("kind", "J_vs_d")); });
  CurveModel model = p.guard("model", [&] {
    return curve_model_from_string(
        p.str("model", kind == CurveKind::J_vs_d ? "exponential" : "table_interp"));
  });
  bool builtin = p.boolean("builtin", true);
  std::vector<AnchorPoint> pts;
  if (builtin) pts = builtin_anchors(kind);
  if (p.has("points_file")) {
    std::string f = resolve_path(c, p.str("points_file"));
    auto extra = p.guard("points_file", [&] { return load_anchor_file(f); });
    pts.insert(pts.end(), extra.begin(), extra.end());
  }
  auto x0 = p.opt_num("fixed_x0");
  std::vector<double> at;
  if (p.has("predict_at")) at = p.nums("predict_at");
  auto curve = p.guard("model", [&] { return fit_curve(pts, model, kind, x0); });
  return [=]() {
    RunResult r;
    r.manifest["derived"]["calibration"] = curve_json(curve);
    r.files["calibration.json"] = curve_json(curve).dump(2) + "\n";
    CsvTable t({"x", "y"});
    for (double x : at) t.add({x, curve.predict(x)});
    r.files["predictions.csv"] = t.str();
    if (model == CurveModel::exponential) {
      r.scalars["A"] = curve.A;
      r.scalars["x0"] = curve.x0;
    }
    r.scalars["rms_residual"] = curve.rms_residual;
    return r;
  };
}

std::string error_class(const std::exception& e) {
  if (auto* n = dynamic_cast<const NumericalError*>(&e)) return n->kind();
  if (dynamic_cast<const ConfigError*>(&e)) return "config";
  return "internal";
}

json diagnostics(const std::exception& e, const std::string& run) {
  json d{{"error_class", error_class(e)}, {"message", e.what()}, {"run", run}};
  if (auto* x = dynamic_cast<const DefectiveError*>(&e)) d["condition_number"] = x->condition_number;
  if (auto* x = dynamic_cast<const GaplessError*>(&e)) d["min_gap"] = x->min_gap;
  if (auto* x = dynamic_cast<const TrackingError*>(&e)) {
    d["J"] = x->J;
    d["overlap"] = x->overlap;
  }
  if (auto* x = dynamic_cast<const FitError*>(&e)) d["last_residual"] = x->last_residual;
  return d;
}

std::string config_label(const std::string& path) { return fs::path(path).filename().string(); }

}  // namespace

// ---------------------------------------------------------------------------

json load_config(const std::string& path) {
  std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // nlohmann reports a byte offset; turn it into line:column
    size_t off = std::min(e.byte, text.size());
    int line = 1;
    size_t col = 1;
    for (size_t i = 0; i + 1 < off; ++i) {
      if (text[i] == '\n') { ++line; col = 1; }
      else ++col;
    }
    std::ostringstream os;
    os << config_label(path) << ":" << line << ":" << col << ": malformed JSON: " << e.what();
    throw ConfigError(os.str());
  }
}

PreparedRun prepare(const json& cfg, const std::string& config_dir, const std::string& source_text) {
  Ctx c;
  c.source = "config";
  if (!source_text.empty()) c.lines = std::make_shared<LineIndex>(source_text);
  c.config_dir = config_dir;
  return [&]() -> PreparedRun {
    Obj top(cfg, "", c);
    std::string run = top.str("run");
    std::string out = top.str("output_dir");
    if (out.empty()) fail(c, "/output_dir", "output_dir must not be empty");
    long seed = top.integer("seed", 0);
    if (top.has("description")) top.str("description");
    if (top.has("sweep")) top.raw("sweep");  // handled by run_sweep

    Calibrations cal;
    std::optional<LatticePlan> lat;
    json exc_derived;
    std::optional<Excitation> exc;
    static const std::set<std::string> lattice_runs{"spectrum", "propagate", "momentum", "fit"};
    if (top.has("lattice")) {
      if (!lattice_runs.count(run)) fail(c, "/lattice", "run '" + run + "' does not use a lattice");
      lat = parse_lattice(top.obj("lattice"), cal);
    }
    if (top.has("excitation")) {
      if (run != "propagate" && run != "momentum" && run != "fit")
        fail(c, "/excitation", "run '" + run + "' does not use an excitation");
      if (!lat) fail(c, "/excitation", "excitation needs a lattice");
      exc = parse_excitation(top.obj("excitation"), lat->spec, exc_derived);
    }
    json empty = json::object();
    Obj params = top.has("params") ? top.obj("params") : Obj(empty, "/params", c);

    Runner runner;
    if (run == "spectrum") runner = prep_spectrum(params, lat, c);
    else if (run == "propagate") runner = prep_propagate(params, lat, exc, c);
    else if (run == "momentum") runner = prep_momentum(params, lat, exc, c);
    else if (run == "winding") runner = prep_winding(params, c);
    else if (run == "symmetry") runner = prep_symmetry(params, seed, c);
    else if (run == "ep-sweep") runner = prep_ep(params, c);
    else if (run == "interface-compare") runner = prep_interface_compare(params, c);
    else if (run == "fit") runner = prep_fit(params, lat, exc, c);
    else if (run == "calibrate") runner = prep_calibrate(params, c);
    else fail(c, "/run", "unknown run '" + run +
                             "' (expected spectrum, propagate, momentum, winding, symmetry, ep-sweep, "
                             "interface-compare, fit, calibrate)");
    params.done();
    top.done();

    json cfg_copy = cfg;
    cfg_copy.erase("sweep");
    std::string hash = sha256_hex(cfg_copy.dump());
    PreparedRun pr;
    pr.output_dir = out;
    pr.execute = [=]() {
      RunResult r = runner();
      json& m = r.manifest;
      m["config_hash"] = hash;
      m["config_hash_algorithm"] = "sha256 of the canonical (sorted-key, compact) config JSON";
      m["run"] = run;
      m["seed"] = seed;
      m["versions"] = {{"nhl", kVersion},
                       {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                     std::to_string(EIGEN_MINOR_VERSION)}};
      if (!exc_derived.is_null()) m["derived"]["excitation"] = exc_derived;
      json files = json::array();
      for (const auto& [k, v] : r.files) files.push_back(k);
      m["outputs"] = files;
      json sc = json::object();
      for (const auto& [k, v] : r.scalars) sc[k] = v;
      m["results"] = sc;
      return r;
    };
    return pr;
  }();
}

void write_outputs(const std::string& output_dir, const RunResult& r) {
  fs::create_directories(output_dir);
  for (const auto& [name, content] : r.files) write_file((fs::path(output_dir) / name).string(), content);
  write_file((fs::path(output_dir) / "manifest.json").string(), r.manifest.dump(2) + "\n");
}

int validate_config(const std::string& path, std::ostream& log) {
  try {
    std::string text = read_file(path);
    json cfg = load_config(path);
    auto c = [&] {
      try {
        return prepare(cfg, fs::path(path).parent_path().string(), text);
      } catch (const ConfigError& e) {
        std::string msg = e.what();
        if (msg.rfind("config", 0) == 0) msg = config_label(path) + msg.substr(6);
        throw ConfigError(msg);
      }
    }();
    (void)c;
    log << config_label(path) << ": valid\n";
    return kOk;
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << "\n";
    return kConfigInvalid;
  }
}

namespace {

PreparedRun prepare_file(const std::string& path, json* cfg_out = nullptr) {
  std::string text = read_file(path);
  json cfg = load_config(path);
  if (cfg_out) *cfg_out = cfg;
  try {
    return prepare(cfg, fs::path(path).parent_path().string(), text);
  } catch (const ConfigError& e) {
    std::string msg = e.what();
    if (msg.rfind("config", 0) == 0) msg = config_label(path) + msg.substr(6);
    throw ConfigError(msg);
  }
}

}  // namespace

int run_experiment(const std::string& path, std::ostream& log) {
  PreparedRun pr;
  try {
    pr = prepare_file(path);
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << "\n";
    return kConfigInvalid;
  }
  try {
    RunResult r = pr.execute();
    write_outputs(pr.output_dir, r);
    log << "wrote " << r.files.size() + 1 << " files to " << pr.output_dir << "\n";
    return kOk;
  } catch (const NumericalError& e) {
    fs::create_directories(pr.output_dir);
    write_file((fs::path(pr.output_dir) / "diagnostics.json").string(), diagnostics(e, "run").dump(2) + "\n");
    log << "numerical error (" << e.kind() << "): " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << "\n";
    return kConfigInvalid;
  }
}

int worker_count() {
  const char* v = std::getenv("NHL_WORKERS");
  if (!v) return 1;
  try {
    int n = std::stoi(v);
    return std::clamp(n, 1, 256);
  } catch (...) {
    return 1;
  }
}

int run_sweep(const std::string& path, std::ostream& log) {
  struct Dim {
    std::string name;
    std::vector<std::string> paths;
    std::vector<json> values;
  };
  json cfg;
  std::vector<Dim> dims;
  std::string out;
  std::vector<json> point_cfgs;
  std::vector<std::vector<json>> point_vals;
  try {
    std::string text = read_file(path);
    cfg = load_config(path);
    Ctx c;
    c.source = config_label(path);
    c.lines = std::make_shared<LineIndex>(text);
    if (!cfg.is_object()) fail(c, "", "expected an object");
    if (!cfg.contains("sweep")) fail(c, "", "sweep needs a 'sweep' section");
    if (!cfg.contains("output_dir") || !cfg["output_dir"].is_string()) fail(c, "/output_dir", "expected a string");
    out = cfg["output_dir"].get<std::string>();
    Obj sw(cfg["sweep"], "/sweep", c);
    const json& ps = sw.raw("parameters");
    if (!ps.is_array()) fail(c, "/sweep/parameters", "expected a list");
    if (ps.empty() || ps.size() > 2) fail(c, "/sweep/parameters", "sweep over exactly one or two parameters");
    for (size_t i = 0; i < ps.size(); ++i) {
      Obj po(ps[i], "/sweep/parameters/" + std::to_string(i), c);
      Dim d;
      d.name = po.str("name");
      const json& pp = po.raw("paths");
      if (!pp.is_array() || pp.empty()) fail(c, po.at("paths"), "expected a non-empty list of JSON pointers");
      for (const auto& s : pp) {
        if (!s.is_string()) fail(c, po.at("paths"), "expected JSON pointer strings");
        std::string p = s.get<std::string>();
        if (p.empty() || p[0] != '/') fail(c, po.at("paths"), "JSON pointers start with '/'");
        if (p == "/output_dir" || p.rfind("/sweep", 0) == 0) fail(c, po.at("paths"), "cannot sweep " + p);
        d.paths.push_back(p);
      }
      const json& vals = po.raw("values");
      if (!vals.is_array() || vals.empty()) fail(c, po.at("values"), "empty grid");
      for (const auto& v : vals) d.values.push_back(v);
      po.done();
      dims.push_back(d);
    }
    sw.done();

    // grid in row-major order over the dimensions
    size_t total = 1;
    for (const auto& d : dims) total *= d.values.size();
    json base = cfg;
    base.erase("sweep");
    for (size_t idx = 0; idx < total; ++idx) {
      json pc = base;
      std::vector<json> vals;
      size_t rem = idx;
      for (int k = static_cast<int>(dims.size()) - 1; k >= 0; --k) {
        const auto& d = dims[k];
        const json& v = d.values[rem % d.values.size()];
        rem /= d.values.size();
        vals.insert(vals.begin(), v);
        for (const auto& p : d.paths) {
          json::json_pointer jp(p);
          if (!pc.contains(jp.parent_pointer()))
            fail(c, "/sweep", "path " + p + " has no parent object in the config");
          pc[jp] = v;
        }
      }
      char buf[32];
      std::snprintf(buf, sizeof buf, "point_%03zu", idx);
      pc["output_dir"] = (fs::path(out) / buf).string();
      point_cfgs.push_back(pc);
      point_vals.push_back(vals);
    }
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << "\n";
    return kConfigInvalid;
  } catch (const json::exception& e) {
    log << "error: " << config_label(path) << ": " << e.what() << "\n";
    return kConfigInvalid;
  }

  const std::string dir = fs::path(path).parent_path().string();
  const size_t n = point_cfgs.size();
  struct Outcome {
    bool ok = false;
    std::string error_class, message;
    std::map<std::string, double> scalars;
    RunResult result;
    std::string out_dir;
  };
  std::vector<Outcome> res(n);
  std::atomic<size_t> next{0};
  auto work = [&]() {
    for (size_t i = next++; i < n; i = next++) {
      Outcome& o = res[i];
      try {
        auto pr = prepare(point_cfgs[i], dir);
        o.out_dir = pr.output_dir;
        o.result = pr.execute();
        o.scalars = o.result.scalars;
        o.ok = true;
      } catch (const std::exception& e) {
        o.error_class = error_class(e);
        o.message = e.what();
        if (o.out_dir.empty()) o.out_dir = point_cfgs[i]["output_dir"].get<std::string>();
        o.result.manifest = diagnostics(e, "sweep point");
      }
    }
  };
  int workers = std::min<int>(worker_count(), static_cast<int>(n));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  std::set<std::string> keys;
  for (const auto& o : res)
    for (const auto& [k, v] : o.scalars) keys.insert(k);
  std::vector<std::string> header{"index"};
  for (const auto& d : dims) header.push_back(d.name);
  header.push_back("status");
  header.push_back("error_class");
  for (const auto& k : keys) header.push_back(k);
  CsvTable t(header);
  int failed = 0;
  for (size_t i = 0; i < n; ++i) {
    const auto& o = res[i];
    std::vector<std::string> row{std::to_string(i)};
    for (const auto& v : point_vals[i]) row.push_back(v.is_number() ? fmt(v.get<double>()) : v.is_string() ? v.get<std::string>() : v.dump());
    row.push_back(o.ok ? "ok" : "failed");
    row.push_back(o.error_class);
    for (const auto& k : keys) {
      auto it = o.scalars.find(k);
      row.push_back(it == o.scalars.end() ? "" : fmt(it->second));
    }
    t.add_raw(row);
    if (o.ok) {
      write_outputs(o.out_dir, o.result);
    } else {
      ++failed;
      write_file((fs::path(o.out_dir) / "diagnostics.json").string(), o.result.manifest.dump(2) + "\n");
    }
  }
  write_file((fs::path(out) / "sweep.csv").string(), t.str());
  json dj = json::array();
  for (const auto& d : dims) dj.push_back({{"name", d.name}, {"paths", d.paths}, {"values", d.values}});
  json cfg_copy = cfg;
  json m{{"config_hash", sha256_hex(cfg_copy.dump())},
         {"parameters", dj},
         {"n_points", n},
         {"failed_points", failed},
         {"versions", {{"nhl", kVersion}}}};
  write_file((fs::path(out) / "sweep_manifest.json").string(), m.dump(2) + "\n");
  log << "sweep: " << n << " points, " << failed << " failed; results in " << out << "\n";
  return kOk;
}

}  // namespace nhl
