#pragma once
/// Deterministic text output: shortest round-trip floats, LF-terminated CSV, sorted-key JSON.

#include <complex>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nhl/analysis.hpp"
#include "nhl/spectral.hpp"

namespace nhl {

/// Shortest representation that parses back to the same double.
std::string fmt(double v);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);
  void add(const std::vector<double>& values);
  void add_raw(const std::vector<std::string>& cells);
  std::string str() const;

 private:
  size_t width_;
  std::string text_;
};

std::string matrix_csv(const Eigen::MatrixXcd& M);
std::string spectrum_csv(const ComplexSpectrum& s);
std::string vectors_csv(const ComplexSpectrum& s);
std::string intensity_csv(const FieldEvolution& f);
std::string amplitude_csv(const FieldEvolution& f);
/// kz window of the spectrum, kx extended over two zones for display.
std::string momentum_csv(const MomentumSpectrum& s, double kz_lo, double kz_hi, double d);

/// Writes bytes verbatim (no newline translation); creates parent directories.
void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

std::string sha256_hex(const std::string& data);

}  // namespace nhl
