#pragma once

// Cosine-series polynomials P(u) = r_0 + 2*sum_{l=1}^{M-1} r_l cos(l*u):
// the exchange currency between beampattern designs and correlation matrices.

#include <cmath>

#include "beamforge/common.hpp"

namespace beamforge {

// Evaluate P(u) = r_0 + 2*sum r_l cos(l*u).  Even in u by construction.
// Uses the Clenshaw recurrence in x = cos(u) for stability at larger M.
template <typename Derived>
typename Derived::Scalar eval_cosine_poly(const Eigen::MatrixBase<Derived>& coeffs, double u) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index M = coeffs.size();
  if (M < 1) throw input_error("eval_cosine_poly: empty coefficient vector");
  const Scalar x = static_cast<Scalar>(std::cos(u));
  // Clenshaw for sum_{l=0}^{M-1} c_l T_l(x) with c_0 = r_0, c_l = 2 r_l.
  Scalar b1 = Scalar(0), b2 = Scalar(0);
  for (Eigen::Index l = M - 1; l >= 1; --l) {
    const Scalar b0 = Scalar(2) * coeffs[l] + Scalar(2) * x * b1 - b2;
    b2 = b1;
    b1 = b0;
  }
  return coeffs[0] + x * b1 - b2;
}

// Vectorized evaluation over an angle grid.
template <typename Derived>
VectorX<typename Derived::Scalar> eval_cosine_poly(const Eigen::MatrixBase<Derived>& coeffs,
                                                   const VectorXd& angles) {
  VectorX<typename Derived::Scalar> out(angles.size());
  for (Eigen::Index k = 0; k < angles.size(); ++k) out[k] = eval_cosine_poly(coeffs, angles[k]);
  return out;
}

// Recover (r_0, ..., r_{M-1}) from point evaluations of a degree-(M-1)
// cosine polynomial.  Sampling at K >= 2M-1 uniform angles over [0, 2*pi)
// makes the discrete Fourier analysis exact (no aliasing):
//   r_l = (1/K) * sum_k P(u_k) * cos(l*u_k).
template <typename Eval>
VectorXd cosine_coeffs_from_samples(int M, Eval&& eval_at) {
  if (M < 1) throw input_error("cosine_coeffs_from_samples: M must be >= 1");
  const int K = 2 * M + 1;
  VectorXd samples(K);
  for (int k = 0; k < K; ++k) samples[k] = eval_at(2.0 * pi * k / K);
  VectorXd r(M);
  for (int l = 0; l < M; ++l) {
    double acc = 0.0;
    for (int k = 0; k < K; ++k) acc += samples[k] * std::cos(l * 2.0 * pi * k / K);
    r[l] = acc / K;
  }
  return r;
}

}  // namespace beamforge
