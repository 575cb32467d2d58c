#pragma once

// Transmit beampattern evaluation: P(u) = a(u)^H R a(u) for a uniform linear
// array at half-wavelength spacing, u = pi*sin(theta); plus the equivalent
// cosine-series evaluation and ripple/sidelobe metrics against a BandSpec.

#include <cmath>
#include <complex>
#include <string>

#include "beamforge/band_spec.hpp"
#include "beamforge/common.hpp"
#include "beamforge/cosine_poly.hpp"

namespace beamforge {

enum class PatternSource { matrix, coeffs, waveforms };

struct PatternSamples {
  VectorXd angles;  // increasing, in [-pi, pi]
  VectorXd values;  // real power samples
  PatternSource source = PatternSource::coeffs;
};

struct PatternMetrics {
  double passband_ripple = 0.0;   // max |P - P0| over the passband
  double stopband_peak = 0.0;     // max P over the stopband
  double stopband_peak_db = 0.0;  // 10*log10(stopband_peak / P0)
  double transition_width = 0.0;  // u_s - u_p, radians
};

// a(u)[m] = exp(j*m*u), m = 0..M-1.
inline VectorXcd steering_vector(double u, int M) {
  if (M < 1) throw input_error("steering_vector: M must be >= 1");
  VectorXcd a(M);
  for (int m = 0; m < M; ++m) a[m] = std::polar(1.0, m * u);
  return a;
}

namespace detail {

// Hermitian quadratic form a(u)^H R a(u); returns (real part, |imag residue|).
template <typename Derived>
std::pair<double, double> quad_form(const Eigen::MatrixBase<Derived>& R, double u) {
  const int M = static_cast<int>(R.rows());
  const VectorXcd a = steering_vector(u, M);
  std::complex<double> acc(0.0, 0.0);
  for (int i = 0; i < M; ++i) {
    std::complex<double> row(0.0, 0.0);
    for (int j = 0; j < M; ++j) row += std::complex<double>(R(i, j)) * a[j];
    acc += std::conj(a[i]) * row;
  }
  return {acc.real(), std::abs(acc.imag())};
}

}  // namespace detail

// P(u_k) = a(u_k)^H R a(u_k).  R must be Hermitian within 1e-12 relative;
// the imaginary residue of each quadratic form is asserted, not returned.
template <typename Derived>
PatternSamples pattern_from_matrix(const Eigen::MatrixBase<Derived>& R, const VectorXd& angles) {
  if (R.rows() != R.cols() || R.rows() < 1)
    throw input_error("pattern_from_matrix: R must be square and nonempty");
  if (angles.size() < 1) throw input_error("pattern_from_matrix: empty angle grid");
  const double rnorm = R.norm();
  const double herm_res = (R - R.adjoint()).norm();
  if (herm_res > 1e-12 * std::max(1.0, rnorm))
    throw input_error("pattern_from_matrix: R is non-Hermitian beyond tolerance (residual " +
                      fmt17(herm_res) + ")");
  PatternSamples s;
  s.angles = angles;
  s.values.resize(angles.size());
  s.source = PatternSource::matrix;
  double scale = std::max(1.0, rnorm) * static_cast<double>(R.rows());
  for (Eigen::Index k = 0; k < angles.size(); ++k) {
    const auto [re, im_res] = detail::quad_form(R.derived(), angles[k]);
    if (im_res > 1e-12 * scale)
      throw input_error("pattern_from_matrix: imaginary residue " + fmt17(im_res) +
                        " exceeds tolerance at u=" + fmt17(angles[k]));
    s.values[k] = re;
  }
  return s;
}

// P(u_k) = r_0 + 2*sum r_l cos(l*u_k).
template <typename Derived>
PatternSamples pattern_from_coeffs(const Eigen::MatrixBase<Derived>& coeffs,
                                   const VectorXd& angles) {
  if (angles.size() < 1) throw input_error("pattern_from_coeffs: empty angle grid");
  PatternSamples s;
  s.angles = angles;
  s.values = eval_cosine_poly(coeffs, angles);
  s.source = PatternSource::coeffs;
  return s;
}

// Band metrics over the sampled pattern.  Patterns are even in u, so band
// membership uses |u|; each band must be covered by at least 16 samples.
inline PatternMetrics metrics(const PatternSamples& samples, const BandSpec& spec) {
  spec.validate();
  PatternMetrics m;
  m.transition_width = spec.transition_width();
  Eigen::Index n_pass = 0, n_stop = 0;
  double ripple = 0.0, peak = -std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < samples.angles.size(); ++k) {
    const double au = std::abs(samples.angles[k]);
    if (au <= spec.passband_edge) {
      ripple = std::max(ripple, std::abs(samples.values[k] - spec.passband_level));
      ++n_pass;
    } else if (au >= spec.stopband_edge) {
      peak = std::max(peak, samples.values[k]);
      ++n_stop;
    }
  }
  if (n_pass < 16 || n_stop < 16)
    throw input_error("metrics: need >= 16 samples per band (passband " + std::to_string(n_pass) +
                      ", stopband " + std::to_string(n_stop) + ")");
  m.passband_ripple = ripple;
  m.stopband_peak = peak;
  m.stopband_peak_db =
      peak > 0.0 ? 10.0 * std::log10(peak / spec.passband_level)
                 : -std::numeric_limits<double>::infinity();
  return m;
}

}  // namespace beamforge
