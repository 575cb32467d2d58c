#pragma once

// Shared fixtures for the unit and property suites: the two worked example
// band specs and seeded random-instance generators.

#include "beamforge/band_spec.hpp"
#include "beamforge/common.hpp"

namespace beamforge::testing {

inline BandSpec example1_spec() {
  BandSpec s;
  s.passband_edge = 0.2 * pi;
  s.stopband_edge = 0.4 * pi;
  s.passband_level = 1.0;
  s.stopband_level = 0.05;
  return s;
}

inline BandSpec example2_spec() {
  BandSpec s = example1_spec();
  s.stopband_level = 0.000339;
  return s;
}

// Random two-band spec with a comfortably nondegenerate transition band and
// a stopband level spanning three decades.
inline BandSpec random_spec(Rng& rng) {
  BandSpec s;
  s.passband_edge = rng.uniform(0.10, 0.50) * pi;
  s.stopband_edge = s.passband_edge + rng.uniform(0.08, 0.35) * pi;
  if (s.stopband_edge > 0.92 * pi) s.stopband_edge = 0.92 * pi;
  s.passband_level = 1.0;
  s.stopband_level = std::pow(10.0, rng.uniform(-4.0, -1.0));
  return s;
}

// Random real-symmetric matrix with entries ~ N(0, 1).
inline MatrixXd random_symmetric(Rng& rng, int M) {
  MatrixXd A(M, M);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) A(i, j) = rng.gaussian();
  return 0.5 * (A + A.transpose()).eval();
}

// Random PSD matrix G*G^T with G M x K gaussian.
inline MatrixXd random_psd(Rng& rng, int M, int K) {
  MatrixXd G(M, K);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < K; ++j) G(i, j) = rng.gaussian();
  return G * G.transpose();
}

}  // namespace beamforge::testing
