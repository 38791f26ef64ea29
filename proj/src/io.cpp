#include "nhl/io.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include <openssl/evp.h>

#include "nhl/errors.hpp"

namespace nhl {

std::string fmt(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

CsvTable::CsvTable(std::vector<std::string> header) : width_(header.size()) { add_raw(header); }

void CsvTable::add(const std::vector<double>& values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(fmt(v));
  add_raw(cells);
}

void CsvTable::add_raw(const std::vector<std::string>& cells) {
  if (cells.size() != width_) throw NumericalError("CSV row width differs from header");
  for (size_t i = 0; i < cells.size(); ++i) {
    if (i) text_ += ',';
    text_ += cells[i];
  }
  text_ += '\n';
}

std::string CsvTable::str() const { return text_; }

std::string matrix_csv(const Eigen::MatrixXcd& M) {
  std::vector<std::string> h;
  for (Eigen::Index c = 0; c < M.cols(); ++c) {
    h.push_back("c" + std::to_string(c) + "_re");
    h.push_back("c" + std::to_string(c) + "_im");
  }
  CsvTable t(h);
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    std::vector<double> row;
    for (Eigen::Index c = 0; c < M.cols(); ++c) {
      row.push_back(M(r, c).real());
      row.push_back(M(r, c).imag());
    }
    t.add(row);
  }
  return t.str();
}

std::string spectrum_csv(const ComplexSpectrum& s) {
  CsvTable t({"index", "ReE", "ImE", "condition_number"});
  for (int j = 0; j < s.size(); ++j) t.add({double(j), s.eigenvalues(j).real(), s.eigenvalues(j).imag(), s.condition(j)});
  return t.str();
}

std::string vectors_csv(const ComplexSpectrum& s) { return matrix_csv(s.right); }

std::string intensity_csv(const FieldEvolution& f) {
  std::vector<std::string> h{"z"};
  for (Eigen::Index j = 0; j < f.a.cols(); ++j) h.push_back("I_" + std::to_string(j));
  CsvTable t(h);
  for (Eigen::Index s = 0; s < f.a.rows(); ++s) {
    std::vector<double> row{f.z[s]};
    for (Eigen::Index j = 0; j < f.a.cols(); ++j) row.push_back(std::norm(f.a(s, j)));
    t.add(row);
  }
  return t.str();
}

std::string amplitude_csv(const FieldEvolution& f) {
  std::vector<std::string> h{"z"};
  for (Eigen::Index j = 0; j < f.a.cols(); ++j) {
    h.push_back("a_" + std::to_string(j) + "_re");
    h.push_back("a_" + std::to_string(j) + "_im");
  }
  CsvTable t(h);
  for (Eigen::Index s = 0; s < f.a.rows(); ++s) {
    std::vector<double> row{f.z[s]};
    for (Eigen::Index j = 0; j < f.a.cols(); ++j) {
      row.push_back(f.a(s, j).real());
      row.push_back(f.a(s, j).imag());
    }
    t.add(row);
  }
  return t.str();
}

std::string momentum_csv(const MomentumSpectrum& s, double kz_lo, double kz_hi, double d) {
  const double G = 2.0 * std::numbers::pi / d;
  const Eigen::Index nx = s.kx.size();
  std::vector<std::string> h{"kz"};
  // header holds the kx value of each column
  std::vector<double> kxs;
  for (int zone = 0; zone < 2; ++zone)
    for (Eigen::Index c = 0; c < nx; ++c) kxs.push_back(s.kx(c) + (zone == 0 ? -G / 2 : G / 2));
  for (double kx : kxs) h.push_back("kx=" + fmt(kx));
  CsvTable t(h);
  for (Eigen::Index r = 0; r < s.kz.size(); ++r) {
    if (s.kz(r) < kz_lo || s.kz(r) > kz_hi) continue;
    std::vector<double> row{s.kz(r)};
    for (size_t i = 0; i < kxs.size(); ++i) {
      // periodic in kx with period 2pi/d: map back into [-pi/d, pi/d)
      double k = kxs[i];
      double base = k - G * std::floor((k + G / 2) / G);
      Eigen::Index c;
      (s.kx.array() - base).abs().minCoeff(&c);
      row.push_back(s.power(r, c));
    }
    t.add(row);
  }
  return t.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error("write failed for " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 digest failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return os.str();
}

}  // namespace nhl
