#pragma once

// File formats: CSV emitters/readers (17 significant digits, round-trip exact
// for doubles; complex data as adjacent re/im columns with a mandatory header)
// and the JSON design-spec file.  Angles in spec files are stored normalized
// by pi; everything in memory is radians.

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "beamforge/band_spec.hpp"
#include "beamforge/beampattern.hpp"
#include "beamforge/common.hpp"
#include "beamforge/optimizer.hpp"

namespace beamforge {

namespace detail {

inline std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw input_error("cannot open '" + path + "' for writing");
  return f;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw input_error("cannot open '" + path + "' for reading");
  return f;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline double parse_double(const std::string& s, const std::string& where) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || errno == ERANGE)
    throw input_error(where + ": cannot parse number '" + s + "'");
  while (*end == ' ' || *end == '\t') ++end;
  if (*end != '\0') throw input_error(where + ": trailing characters in '" + s + "'");
  return v;
}

// Read all non-empty CSV rows after the mandatory header line.
inline std::vector<std::vector<std::string>> read_csv_rows(const std::string& path,
                                                           std::string& header) {
  std::ifstream f = open_in(path);
  if (!std::getline(f, header)) throw input_error(path + ": empty file (header required)");
  while (!header.empty() && (header.back() == '\r' || header.back() == '\n')) header.pop_back();
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(f, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (line.empty()) continue;
    rows.push_back(split_csv_line(line));
  }
  return rows;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Coefficients: header "index,r".
// ---------------------------------------------------------------------------

inline void write_coeffs_csv(const std::string& path, const VectorXd& r) {
  std::ofstream f = detail::open_out(path);
  f << "index,r\n";
  for (Eigen::Index l = 0; l < r.size(); ++l) f << l << "," << fmt17(r[l]) << "\n";
}

inline VectorXd read_coeffs_csv(const std::string& path) {
  std::string header;
  const auto rows = detail::read_csv_rows(path, header);
  if (rows.empty()) throw input_error(path + ": no coefficient rows");
  VectorXd r(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != 2)
      throw input_error(path + ": row " + std::to_string(i + 2) + " needs 2 columns (index,r)");
    const double idx = detail::parse_double(rows[i][0], path);
    if (idx != static_cast<double>(i))
      throw input_error(path + ": coefficient indices must run 0.." +
                        std::to_string(rows.size() - 1) + " in order");
    r[static_cast<Eigen::Index>(i)] = detail::parse_double(rows[i][1], path);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Complex matrices (R, W): header "re0,im0,re1,im1,...".
// ---------------------------------------------------------------------------

inline void write_complex_matrix_csv(const std::string& path, const MatrixXcd& A) {
  std::ofstream f = detail::open_out(path);
  for (Eigen::Index j = 0; j < A.cols(); ++j)
    f << (j ? "," : "") << "re" << j << ",im" << j;
  f << "\n";
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < A.cols(); ++j)
      f << (j ? "," : "") << fmt17(A(i, j).real()) << "," << fmt17(A(i, j).imag());
    f << "\n";
  }
}

inline MatrixXcd read_complex_matrix_csv(const std::string& path) {
  std::string header;
  const auto rows = detail::read_csv_rows(path, header);
  if (rows.empty()) throw input_error(path + ": no matrix rows");
  const std::size_t ncol = detail::split_csv_line(header).size();
  if (ncol % 2 != 0)
    throw input_error(path + ": complex matrix requires an even column count (re/im pairs)");
  const Eigen::Index C = static_cast<Eigen::Index>(ncol / 2);
  MatrixXcd A(static_cast<Eigen::Index>(rows.size()), C);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != ncol)
      throw input_error(path + ": row " + std::to_string(i + 2) + " has " +
                        std::to_string(rows[i].size()) + " columns, header has " +
                        std::to_string(ncol));
    for (Eigen::Index j = 0; j < C; ++j)
      A(static_cast<Eigen::Index>(i), j) = {detail::parse_double(rows[i][2 * j], path),
                                            detail::parse_double(rows[i][2 * j + 1], path)};
  }
  return A;
}

// ---------------------------------------------------------------------------
// Real matrices (alpha): header "p0,p1,...".
// ---------------------------------------------------------------------------

inline void write_real_matrix_csv(const std::string& path, const MatrixXd& A) {
  std::ofstream f = detail::open_out(path);
  for (Eigen::Index j = 0; j < A.cols(); ++j) f << (j ? "," : "") << "p" << j;
  f << "\n";
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < A.cols(); ++j) f << (j ? "," : "") << fmt17(A(i, j));
    f << "\n";
  }
}

inline MatrixXd read_real_matrix_csv(const std::string& path) {
  std::string header;
  const auto rows = detail::read_csv_rows(path, header);
  if (rows.empty()) throw input_error(path + ": no matrix rows");
  const std::size_t ncol = detail::split_csv_line(header).size();
  MatrixXd A(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(ncol));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != ncol)
      throw input_error(path + ": row " + std::to_string(i + 2) + " has " +
                        std::to_string(rows[i].size()) + " columns, header has " +
                        std::to_string(ncol));
    for (std::size_t j = 0; j < ncol; ++j)
      A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          detail::parse_double(rows[i][j], path);
  }
  return A;
}

// ---------------------------------------------------------------------------
// Waveform sets: one row per sample, header "m,n,re,im".
// ---------------------------------------------------------------------------

inline void write_waveforms_csv(const std::string& path, const MatrixXcd& X) {
  std::ofstream f = detail::open_out(path);
  f << "m,n,re,im\n";
  for (Eigen::Index m = 0; m < X.rows(); ++m)
    for (Eigen::Index n = 0; n < X.cols(); ++n)
      f << m << "," << n << "," << fmt17(X(m, n).real()) << "," << fmt17(X(m, n).imag()) << "\n";
}

inline MatrixXcd read_waveforms_csv(const std::string& path) {
  std::string header;
  const auto rows = detail::read_csv_rows(path, header);
  if (rows.empty()) throw input_error(path + ": no samples");
  Eigen::Index M = 0, N = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != 4)
      throw input_error(path + ": row " + std::to_string(i + 2) + " needs 4 columns (m,n,re,im)");
    M = std::max(M, static_cast<Eigen::Index>(detail::parse_double(rows[i][0], path)) + 1);
    N = std::max(N, static_cast<Eigen::Index>(detail::parse_double(rows[i][1], path)) + 1);
  }
  if (rows.size() != static_cast<std::size_t>(M * N))
    throw input_error(path + ": expected a complete " + std::to_string(M) + " x " +
                      std::to_string(N) + " sample grid, found " + std::to_string(rows.size()) +
                      " rows");
  MatrixXcd X = MatrixXcd::Zero(M, N);
  for (const auto& row : rows) {
    const Eigen::Index m = static_cast<Eigen::Index>(detail::parse_double(row[0], path));
    const Eigen::Index n = static_cast<Eigen::Index>(detail::parse_double(row[1], path));
    X(m, n) = {detail::parse_double(row[2], path), detail::parse_double(row[3], path)};
  }
  return X;
}

// ---------------------------------------------------------------------------
// Beampattern samples: header "u,power,power_db" (dB floored at -400).
// ---------------------------------------------------------------------------

inline void write_pattern_csv(const std::string& path, const PatternSamples& s) {
  std::ofstream f = detail::open_out(path);
  f << "u,power,power_db\n";
  for (Eigen::Index k = 0; k < s.angles.size(); ++k) {
    const double p = s.values[k];
    const double db = p > 1e-40 ? 10.0 * std::log10(p) : -400.0;
    f << fmt17(s.angles[k]) << "," << fmt17(p) << "," << fmt17(db) << "\n";
  }
}

// ---------------------------------------------------------------------------
// JSON helpers.
// ---------------------------------------------------------------------------

inline void write_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream f = detail::open_out(path);
  f << j.dump(2) << "\n";
}

// report.json accumulates one object per pipeline stage so a design/realize/
// waveforms sequence into one directory keeps every stage's report.  An
// unreadable existing file is replaced.
inline void update_report_file(const std::string& path, const std::string& stage_key,
                               const nlohmann::json& stage_report) {
  nlohmann::json j = nlohmann::json::object();
  if (std::ifstream f(path); f) {
    try {
      f >> j;
      if (!j.is_object()) j = nlohmann::json::object();
    } catch (const nlohmann::json::exception&) {
      j = nlohmann::json::object();
    }
  }
  j[stage_key] = stage_report;
  write_json_file(path, j);
}

inline nlohmann::json metrics_to_json(const PatternMetrics& m) {
  nlohmann::json j;
  j["passband_ripple"] = m.passband_ripple;
  j["stopband_peak"] = m.stopband_peak;
  j["stopband_peak_db"] = m.stopband_peak_db;
  j["transition_width"] = m.transition_width;
  return j;
}

// ---------------------------------------------------------------------------
// Design spec files (JSON).  Angles are stored normalized by pi.
// ---------------------------------------------------------------------------

struct SpecOptimizerBlock {
  std::string objective = "fit";  // fit | orthogonalize
  OptimizerConfig cfg;
  int harmonics = 32;  // P
  int samples = 321;   // N
};

struct DesignSpecFile {
  BandSpec band;
  int elements = 0;          // 0 => derived from target_delta
  double target_delta = 0.0;
  double energy = 1.0;
  std::string mode = "toeplitz";  // toeplitz | psd-fit | tbp | waveforms
  bool equal_power = false;
  double psd_tol = 1e-10;
  int psd_max_iter = 20000;
  int grid_density = 16;
  SpecOptimizerBlock optimizer;
  std::string output_dir;
};

namespace detail {

inline const nlohmann::json& spec_field(const nlohmann::json& j, const std::string& name,
                                        const std::string& path) {
  const auto it = j.find(name);
  if (it == j.end()) throw input_error("spec: missing field '" + path + "'");
  return *it;
}

inline double spec_number(const nlohmann::json& j, const std::string& name,
                          const std::string& path) {
  const auto& v = spec_field(j, name, path);
  if (!v.is_number()) throw input_error("spec: field '" + path + "' must be a number");
  return v.get<double>();
}

template <typename T>
void spec_optional(const nlohmann::json& j, const std::string& name, T& out,
                   const std::string& path) {
  const auto it = j.find(name);
  if (it == j.end()) return;
  try {
    out = it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw input_error("spec: field '" + path + "' has the wrong type");
  }
}

}  // namespace detail

inline DesignSpecFile parse_spec_json(const nlohmann::json& j) {
  DesignSpecFile s;
  const auto& band = detail::spec_field(j, "band", "band");
  if (!band.is_object()) throw input_error("spec: field 'band' must be an object");
  s.band.passband_edge = pi * detail::spec_number(band, "u_p", "band.u_p");
  s.band.stopband_edge = pi * detail::spec_number(band, "u_s", "band.u_s");
  s.band.passband_level = detail::spec_number(band, "P0", "band.P0");
  s.band.stopband_level = detail::spec_number(band, "eps0", "band.eps0");
  detail::spec_optional(band, "weight_ratio", s.band.weight_ratio, "band.weight_ratio");
  try {
    s.band.validate();
  } catch (const input_error& e) {
    throw input_error("spec: band: " + std::string(e.what()));
  }

  if (const auto it = j.find("elements"); it != j.end()) {
    if (it->is_string()) {
      if (it->get<std::string>() != "auto")
        throw input_error("spec: field 'elements' must be an integer or \"auto\"");
      s.elements = 0;
    } else if (it->is_number_integer()) {
      s.elements = it->get<int>();
      if (s.elements < 1) throw input_error("spec: field 'elements' must be >= 1");
    } else {
      throw input_error("spec: field 'elements' must be an integer or \"auto\"");
    }
  }
  detail::spec_optional(j, "target_delta", s.target_delta, "target_delta");
  if (s.elements == 0 && !(s.target_delta > 0.0))
    throw input_error("spec: field 'target_delta' must be > 0 when elements is \"auto\"");

  detail::spec_optional(j, "energy", s.energy, "energy");
  if (!(s.energy > 0.0)) throw input_error("spec: field 'energy' must be > 0");
  detail::spec_optional(j, "mode", s.mode, "mode");
  if (s.mode != "toeplitz" && s.mode != "psd-fit" && s.mode != "tbp" && s.mode != "waveforms")
    throw input_error("spec: field 'mode' must be one of toeplitz|psd-fit|tbp|waveforms");
  detail::spec_optional(j, "equal_power", s.equal_power, "equal_power");
  detail::spec_optional(j, "psd_tol", s.psd_tol, "psd_tol");
  if (!(s.psd_tol > 0.0)) throw input_error("spec: field 'psd_tol' must be > 0");
  detail::spec_optional(j, "psd_max_iter", s.psd_max_iter, "psd_max_iter");
  if (s.psd_max_iter < 1) throw input_error("spec: field 'psd_max_iter' must be >= 1");
  detail::spec_optional(j, "grid_density", s.grid_density, "grid_density");
  if (s.grid_density < 4) throw input_error("spec: field 'grid_density' must be >= 4");
  detail::spec_optional(j, "output_dir", s.output_dir, "output_dir");

  if (const auto it = j.find("optimizer"); it != j.end()) {
    if (!it->is_object()) throw input_error("spec: field 'optimizer' must be an object");
    const auto& o = *it;
    detail::spec_optional(o, "objective", s.optimizer.objective, "optimizer.objective");
    if (s.optimizer.objective != "fit" && s.optimizer.objective != "orthogonalize")
      throw input_error("spec: field 'optimizer.objective' must be fit|orthogonalize");
    detail::spec_optional(o, "mu", s.optimizer.cfg.mu, "optimizer.mu");
    detail::spec_optional(o, "max_iter", s.optimizer.cfg.max_iter, "optimizer.max_iter");
    detail::spec_optional(o, "seed", s.optimizer.cfg.seed, "optimizer.seed");
    detail::spec_optional(o, "rho0", s.optimizer.cfg.rho0, "optimizer.rho0");
    detail::spec_optional(o, "outer_max", s.optimizer.cfg.outer_max, "optimizer.outer_max");
    detail::spec_optional(o, "beta_ref", s.optimizer.cfg.beta_sq_ref, "optimizer.beta_ref");
    detail::spec_optional(o, "harmonics", s.optimizer.harmonics, "optimizer.harmonics");
    detail::spec_optional(o, "samples", s.optimizer.samples, "optimizer.samples");
    std::string gm;
    detail::spec_optional(o, "gradient_mode", gm, "optimizer.gradient_mode");
    if (!gm.empty()) {
      if (gm == "analytic")
        s.optimizer.cfg.gradient_mode = GradientMode::analytic;
      else if (gm == "finite-difference")
        s.optimizer.cfg.gradient_mode = GradientMode::finite_difference;
      else
        throw input_error("spec: field 'optimizer.gradient_mode' must be analytic|finite-difference");
    }
    try {
      s.optimizer.cfg.validate();
    } catch (const input_error& e) {
      throw input_error("spec: optimizer: " + std::string(e.what()));
    }
  }
  return s;
}

inline DesignSpecFile read_spec_file(const std::string& path) {
  std::ifstream f = detail::open_in(path);
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw input_error("spec: '" + path + "' is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw input_error("spec: '" + path + "' must contain a JSON object");
  return parse_spec_json(j);
}

}  // namespace beamforge
