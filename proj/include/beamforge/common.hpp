#pragma once

// Shared utilities: error taxonomy, logging, deterministic RNG, numeric helpers.

#include <cmath>
#include <complex>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace beamforge {

inline constexpr double pi = 3.141592653589793238462643383279502884;

// Bad arguments, malformed files, violated preconditions.  CLI maps to exit 1.
struct input_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An iterative routine exhausted its budget without meeting tolerance.
// CLI maps to exit 2.  Residual details belong in the message.
struct convergence_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A realized matrix violates a feasibility requirement (e.g. a Toeplitz
// candidate that is not PSD).  CLI maps to exit 3.
struct infeasible_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Logging.  Verbosity from BEAMFORGE_LOG: error|warn|info|debug (default warn).
// ---------------------------------------------------------------------------

enum class LogLevel : int { error = 0, warn = 1, info = 2, debug = 3 };

inline LogLevel log_level() {
  static const LogLevel lvl = [] {
    const char* env = std::getenv("BEAMFORGE_LOG");
    if (!env) return LogLevel::warn;
    std::string s(env);
    if (s == "error" || s == "0") return LogLevel::error;
    if (s == "warn" || s == "1") return LogLevel::warn;
    if (s == "info" || s == "2") return LogLevel::info;
    if (s == "debug" || s == "3") return LogLevel::debug;
    return LogLevel::warn;
  }();
  return lvl;
}

inline void logf(LogLevel lvl, const char* fmt, ...) {
  if (static_cast<int>(lvl) > static_cast<int>(log_level())) return;
  static const char* names[] = {"error", "warn", "info", "debug"};
  std::fprintf(stderr, "[beamforge:%s] ", names[static_cast<int>(lvl)]);
  va_list args;
  va_start(args, fmt);
  std::vfprintf(stderr, fmt, args);
  va_end(args);
  std::fprintf(stderr, "\n");
}

// ---------------------------------------------------------------------------
// Deterministic RNG.  mt19937_64 is bit-reproducible across platforms; the
// standard distributions are not, so uniform/gaussian are mapped explicitly.
// ---------------------------------------------------------------------------

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller (deterministic, pair-cached).
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform(), u2 = uniform();
    while (u1 <= 0x1.0p-60) u1 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * pi * u2;
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
  }

  std::uint64_t raw() { return eng_(); }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// ---------------------------------------------------------------------------
// Numeric helpers.
// ---------------------------------------------------------------------------

// Shortest text that round-trips a double exactly (17 significant digits).
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using VectorXd = Eigen::VectorXd;
using MatrixXd = Eigen::MatrixXd;
using VectorXcd = Eigen::VectorXcd;
using MatrixXcd = Eigen::MatrixXcd;

// n points, endpoints included: lo + (hi-lo)*i/(n-1).
inline VectorXd linspace(double lo, double hi, Eigen::Index n) {
  if (n < 2) throw input_error("linspace: need at least 2 points");
  VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i)
    v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

// Uniform plotting grid over [-pi, pi], endpoints included.
inline VectorXd uniform_grid(Eigen::Index n = 4096) { return linspace(-pi, pi, n); }

// Uniform periodic grid over [-pi, pi): exact quadrature for trigonometric
// polynomials of degree < n (the closing endpoint would double-count).
inline VectorXd periodic_grid(Eigen::Index n) {
  if (n < 1) throw input_error("periodic_grid: need at least 1 point");
  VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i)
    v[i] = -pi + 2.0 * pi * static_cast<double>(i) / static_cast<double>(n);
  return v;
}

}  // namespace beamforge
