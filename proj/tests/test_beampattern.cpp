#include <doctest.h>

#include "beamforge/beampattern.hpp"
#include "beamforge/corr_synth.hpp"
#include "beamforge/remez.hpp"
#include "helpers.hpp"

using namespace beamforge;
using namespace beamforge::testing;

TEST_CASE("steering_vector: phase progression") {
  const VectorXcd a0 = steering_vector(0.0, 4);
  for (int m = 0; m < 4; ++m) CHECK(std::abs(a0[m] - std::complex<double>(1.0, 0.0)) < 1e-15);
  const VectorXcd api = steering_vector(pi, 2);
  CHECK(std::abs(api[1] - std::complex<double>(-1.0, 0.0)) < 1e-15);
  const VectorXcd ah = steering_vector(pi / 2.0, 3);
  CHECK(std::abs(ah[1] - std::complex<double>(0.0, 1.0)) < 1e-15);
  CHECK(std::abs(ah[2] - std::complex<double>(-1.0, 0.0)) < 1e-15);
  for (int m = 0; m < 3; ++m) CHECK(std::abs(ah[m]) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(steering_vector(0.0, 0), input_error);
}

TEST_CASE("pattern_from_matrix: coherent sum and identity") {
  const int M = 10;
  VectorXd u0(1);
  u0[0] = 0.0;
  const MatrixXd ones = MatrixXd::Constant(M, M, 1.0 / M);
  CHECK(pattern_from_matrix(ones, u0).values[0] == doctest::Approx(10.0).epsilon(1e-12));

  const MatrixXd eye = MatrixXd::Identity(M, M) / M;
  const PatternSamples flat = pattern_from_matrix(eye, uniform_grid(128));
  for (Eigen::Index k = 0; k < flat.values.size(); ++k)
    CHECK(flat.values[k] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("pattern_from_matrix: rejects non-Hermitian input") {
  MatrixXcd R(2, 2);
  R << 1.0, std::complex<double>(0.0, 1.0), std::complex<double>(0.0, 1.0), 1.0;
  CHECK_THROWS_AS(pattern_from_matrix(R, uniform_grid(64)), input_error);
  CHECK_THROWS_AS(pattern_from_matrix(MatrixXd::Identity(2, 3), uniform_grid(64)), input_error);
}

TEST_CASE("pattern_from_coeffs: trivial polynomials") {
  VectorXd c(3);
  c << 1.0, 0.0, 0.0;
  const PatternSamples s = pattern_from_coeffs(c, uniform_grid(64));
  for (Eigen::Index k = 0; k < s.values.size(); ++k)
    CHECK(s.values[k] == doctest::Approx(1.0).epsilon(1e-14));
  VectorXd c2(2);
  c2 << 1.0, 0.5;
  VectorXd upi(1);
  upi[0] = pi;
  CHECK(std::abs(pattern_from_coeffs(c2, upi).values[0]) < 1e-14);
}

TEST_CASE("toeplitz pattern equals the cosine polynomial (Example-1)") {
  const RemezResult res = remez_design(10, example1_spec());
  const MatrixXd R = toeplitz_from_coeffs(res.coeffs);
  const VectorXd grid = uniform_grid(1024);
  const PatternSamples pm = pattern_from_matrix(R, grid);
  const PatternSamples pc = pattern_from_coeffs(res.coeffs, grid);
  const double scale = pc.values.cwiseAbs().maxCoeff();
  for (Eigen::Index k = 0; k < grid.size(); ++k)
    CHECK(std::abs(pm.values[k] - pc.values[k]) <= 1e-12 * scale);
}

TEST_CASE("Example-2 stopband peak matches the reference level") {
  const RemezResult res = remez_design(20, example2_spec());
  double peak = 0.0;
  for (int k = 0; k <= 8000; ++k) {
    const double u = 0.4 * pi + (pi - 0.4 * pi) * k / 8000.0;
    peak = std::max(peak, eval_cosine_poly(res.coeffs, u));
  }
  CHECK(std::abs(peak - 0.000678) / 0.000678 < 0.03);
}

TEST_CASE("metrics: worked examples and validation") {
  const BandSpec s1 = example1_spec();
  const RemezResult r1 = remez_design(10, s1);
  const PatternMetrics m1 = metrics(pattern_from_coeffs(r1.coeffs, uniform_grid()), s1);
  CHECK(std::abs(m1.stopband_peak_db - (-12.1)) <= 0.1);
  CHECK(m1.passband_ripple == doctest::Approx(r1.delta).epsilon(1e-3));
  CHECK(m1.transition_width == doctest::Approx(0.2 * pi));

  const BandSpec s2 = example2_spec();
  const RemezResult r2 = remez_design(20, s2);
  const PatternMetrics m2 = metrics(pattern_from_coeffs(r2.coeffs, uniform_grid()), s2);
  CHECK(std::abs(m2.stopband_peak_db - (-31.7)) <= 0.1);

  // Constant pattern at P0 has zero ripple.
  VectorXd c(2);
  c << 1.0, 0.0;
  const PatternMetrics mc = metrics(pattern_from_coeffs(c, uniform_grid(256)), s1);
  CHECK(mc.passband_ripple == 0.0);

  // Too few samples per band is an input error.
  CHECK_THROWS_AS(metrics(pattern_from_coeffs(c, uniform_grid(16)), s1), input_error);
}

TEST_CASE("representation identity: matrix vs diagonal-sum patterns") {
  Rng rng(31);
  const VectorXd grid = uniform_grid(512);
  for (int rep = 0; rep < 100; ++rep) {
    const int M = 2 + static_cast<int>(rng.uniform(0.0, 31.0));
    const MatrixXd R = random_symmetric(rng, M);
    const PatternSamples pm = pattern_from_matrix(R, grid);
    const PatternSamples pc = pattern_from_coeffs(diagonal_sums(R), grid);
    const double scale = pm.values.cwiseAbs().maxCoeff();
    CAPTURE(rep);
    CHECK((pm.values - pc.values).cwiseAbs().maxCoeff() <= 1e-10 * scale);
  }
}

TEST_CASE("pattern even symmetry for real-symmetric matrices") {
  Rng rng(33);
  const MatrixXd R = random_symmetric(rng, 12);
  const VectorXd grid = uniform_grid(257);  // symmetric, includes 0
  const PatternSamples p = pattern_from_matrix(R, grid);
  const double scale = p.values.cwiseAbs().maxCoeff();
  const Eigen::Index n = grid.size();
  for (Eigen::Index k = 0; k < n; ++k)
    CHECK(std::abs(p.values[k] - p.values[n - 1 - k]) <= 1e-12 * scale);
}

TEST_CASE("pattern nonnegativity for PSD matrices") {
  Rng rng(37);
  for (int rep = 0; rep < 20; ++rep) {
    const int M = 2 + static_cast<int>(rng.uniform(0.0, 15.0));
    const MatrixXd R = random_psd(rng, M, M);
    const PatternSamples p = pattern_from_matrix(R, uniform_grid(256));
    CHECK(p.values.minCoeff() >= -1e-10 * R.trace());
  }
}

TEST_CASE("pattern energy: mean over a full period equals the trace") {
  Rng rng(41);
  for (int rep = 0; rep < 10; ++rep) {
    const int M = 2 + static_cast<int>(rng.uniform(0.0, 20.0));
    const MatrixXd R = random_symmetric(rng, M);
    // Periodic (endpoint-exclusive) sampling makes the quadrature exact for
    // trigonometric polynomials; an endpoint-inclusive grid would count
    // u = +/- pi twice and miss the 1e-6 bound for non-tiny patterns.
    const PatternSamples p = pattern_from_matrix(R, periodic_grid(4096));
    const double mean = p.values.mean();
    CHECK(std::abs(mean - R.trace()) <= 1e-6 * std::max(1.0, std::abs(R.trace())));
  }
}
