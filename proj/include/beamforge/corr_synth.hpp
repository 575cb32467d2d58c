#pragma once

// Correlation-matrix synthesis: realize cosine coefficients as Hermitian PSD
// matrices (Toeplitz candidate; PSD-constrained fit), test definiteness, and
// derive transmit-beamspace weight factors.

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <type_traits>

#include <Eigen/Eigenvalues>

#include "beamforge/common.hpp"

namespace beamforge {

// r_l = real part of the sum of the l-th superdiagonal of R; r_0 = trace.
// The imaginary residue across all superdiagonal sums must stay below
// 1e-10*|r_0| (sine-only waveform sets and even-symmetric designs give
// real-symmetric correlation structure).
template <typename Derived>
VectorXd diagonal_sums(const Eigen::MatrixBase<Derived>& R) {
  const Eigen::Index M = R.rows();
  if (R.cols() != M || M < 1) throw input_error("diagonal_sums: R must be square and nonempty");
  VectorXd r(M);
  double imag_res = 0.0;
  for (Eigen::Index l = 0; l < M; ++l) {
    std::complex<double> acc(0.0, 0.0);
    for (Eigen::Index m = 0; m + l < M; ++m) acc += std::complex<double>(R(m, m + l));
    r[l] = acc.real();
    imag_res = std::max(imag_res, std::abs(acc.imag()));
  }
  if (imag_res > 1e-10 * std::max(1e-300, std::abs(r[0])))
    throw input_error("diagonal_sums: imaginary residue " + fmt17(imag_res) +
                      " exceeds 1e-10*|r_0| (matrix is not real-symmetric in structure)");
  return r;
}

// Toeplitz candidate: entries r_{|i-j|} / (M - |i-j|).  Reproduces the
// diagonal sums exactly and has equal diagonal entries r_0/M, but is NOT
// guaranteed PSD -- callers must check.
template <typename Derived>
MatrixXd toeplitz_from_coeffs(const Eigen::MatrixBase<Derived>& coeffs) {
  const Eigen::Index M = coeffs.size();
  if (M < 1) throw input_error("toeplitz_from_coeffs: empty coefficients");
  MatrixXd R(M, M);
  for (Eigen::Index i = 0; i < M; ++i)
    for (Eigen::Index j = 0; j < M; ++j) {
      const Eigen::Index l = i > j ? i - j : j - i;
      R(i, j) = static_cast<double>(coeffs[l]) / static_cast<double>(M - l);
    }
  return R;
}

// PSD test: flag iff min eigenvalue >= -tol * max(1, ||R||_F).
template <typename Derived>
std::pair<bool, double> is_psd(const Eigen::MatrixBase<Derived>& R, double tol = 1e-10) {
  using Scalar = typename Derived::Scalar;
  if (R.rows() != R.cols() || R.rows() < 1) throw input_error("is_psd: R must be square");
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(R.derived(), Eigen::EigenvaluesOnly);
  const double min_eig = es.eigenvalues().minCoeff();
  return {min_eig >= -tol * std::max(1.0, R.norm()), min_eig};
}

// ---------------------------------------------------------------------------
// PSD-constrained realization.
// ---------------------------------------------------------------------------

struct PsdFitResult {
  MatrixXd R;
  bool converged = false;
  int iterations = 0;          // projection cycles + factor-refinement steps
  double diag_residual = 0.0;  // max_l |diag_sums(R)_l - r_l| / |r_0|
  double min_eigenvalue = 0.0;
  double power_spread = 0.0;   // max_m |R_mm - r_0/M| / (r_0/M)
};

namespace detail {

inline MatrixXd project_psd(const MatrixXd& S) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(S);
  const VectorXd lam = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

inline MatrixXd project_diag_sums(const MatrixXd& S, const VectorXd& r) {
  const Eigen::Index M = S.rows();
  MatrixXd R = S;
  for (Eigen::Index l = 0; l < M; ++l) {
    double sum = 0.0;
    for (Eigen::Index m = 0; m + l < M; ++m) sum += R(m, m + l);
    const double shift = (r[l] - sum) / static_cast<double>(M - l);
    for (Eigen::Index m = 0; m + l < M; ++m) {
      R(m, m + l) += shift;
      if (l > 0) R(m + l, m) += shift;
    }
  }
  return R;
}

inline MatrixXd project_equal_diag(const MatrixXd& S, double c) {
  MatrixXd R = S;
  R.diagonal().setConstant(c);
  return R;
}

struct FitStats {
  double diag_residual;   // relative to |r_0|
  double power_spread;    // relative to r_0/M
  double min_eigenvalue;
};

inline FitStats fit_stats(const MatrixXd& R, const VectorXd& r) {
  const Eigen::Index M = R.rows();
  FitStats st{0.0, 0.0, 0.0};
  const double r0 = std::max(1e-300, std::abs(r[0]));
  for (Eigen::Index l = 0; l < M; ++l) {
    double sum = 0.0;
    for (Eigen::Index m = 0; m + l < M; ++m) sum += R(m, m + l);
    st.diag_residual = std::max(st.diag_residual, std::abs(sum - r[l]) / r0);
  }
  const double c = r[0] / static_cast<double>(M);
  for (Eigen::Index m = 0; m < M; ++m)
    st.power_spread = std::max(st.power_spread, std::abs(R(m, m) - c) / std::max(1e-300, std::abs(c)));
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(R, Eigen::EigenvaluesOnly);
  st.min_eigenvalue = es.eigenvalues().minCoeff();
  return st;
}

// Feasibility completion in factor space: parameterize R = G*G^T (PSD by
// construction) and drive the diagonal-sum (and optional equal-diagonal)
// residuals to zero with a Levenberg-Marquardt iteration on G.  This handles
// the thin-intersection regime where alternating projections creep: when the
// designed pattern touches zero, every feasible matrix is nearly singular
// (min eig <= min_u P(u) / M), and the projection iteration needs O(1/eps^2)
// cycles to reach eigenvalue tolerance eps, while the factor iteration is
// unaffected because PSD holds identically.
inline int factor_refine(MatrixXd& G, const VectorXd& r, bool equal_power, double target_abs,
                         int max_steps) {
  const Eigen::Index M = G.rows();
  const Eigen::Index nres = equal_power ? 2 * M : M;
  const double c = r[0] / static_cast<double>(M);

  const auto residual = [&](const MatrixXd& Gc, VectorXd& res) {
    const MatrixXd R = Gc * Gc.transpose();
    for (Eigen::Index l = 0; l < M; ++l) {
      double sum = 0.0;
      for (Eigen::Index m = 0; m + l < M; ++m) sum += R(m, m + l);
      res[l] = sum - r[l];
    }
    if (equal_power)
      for (Eigen::Index m = 0; m < M; ++m) res[M + m] = R(m, m) - c;
  };

  VectorXd res(nres), res2(nres);
  residual(G, res);
  double lam = 1e-6;
  int steps = 0;
  MatrixXd J(nres, M * M);
  for (; steps < max_steps; ++steps) {
    // 2-norm throughout: LM descends it monotonically, while per-component
    // maxima can plateau for many accepted steps.
    const double nr = res.norm();
    if (nr <= target_abs) break;
    // d(diag_sum_l)/dG_{mn} = G_{m+l,n} [m+l < M] + G_{m-l,n} [m-l >= 0].
    J.setZero();
    for (Eigen::Index l = 0; l < M; ++l)
      for (Eigen::Index m = 0; m < M; ++m) {
        if (m + l < M) J.block(l, m * M, 1, M) += G.row(m + l);
        if (m >= l) J.block(l, m * M, 1, M) += G.row(m - l);
      }
    if (equal_power)
      for (Eigen::Index m = 0; m < M; ++m) J.block(M + m, m * M, 1, M) = 2.0 * G.row(m);

    bool accepted = false;
    for (int tries = 0; tries < 25; ++tries) {
      MatrixXd A = J * J.transpose();
      A.diagonal().array() += lam;
      const VectorXd y = A.ldlt().solve(res);
      MatrixXd G2 = G;
      const VectorXd dg = -(J.transpose() * y);
      for (Eigen::Index m = 0; m < M; ++m) G2.row(m) += dg.segment(m * M, M).transpose();
      residual(G2, res2);
      if (res2.norm() < nr) {
        G = G2;
        res.swap(res2);
        lam = std::max(lam * 0.3, 1e-12);
        accepted = true;
        break;
      }
      lam *= 10.0;
      if (lam > 1e12) break;
    }
    if (!accepted) break;  // residual floor reached (e.g. infeasible equal-power)
  }
  return steps;
}

}  // namespace detail

// Find a PSD matrix with the requested diagonal sums (and optionally equal
// diagonal entries r_0/M).  Strategy: start at the Toeplitz candidate, run
// Dykstra's alternating projections between the PSD cone and the affine
// diagonal-sum set (plus the equal-diagonal set when requested), and -- if
// the projections stall in the thin-intersection regime -- finish with a
// factor-space refinement that is PSD by construction.
template <typename Derived>
PsdFitResult psd_fit(const Eigen::MatrixBase<Derived>& coeffs, bool equal_power = false,
                     int max_iter = 20000, double tol = 1e-10) {
  const Eigen::Index M = coeffs.size();
  if (M < 1) throw input_error("psd_fit: empty coefficients");
  if (max_iter < 1) throw input_error("psd_fit: max_iter must be >= 1");
  if (!(tol > 0.0)) throw input_error("psd_fit: tol must be > 0");
  VectorXd r(M);
  for (Eigen::Index l = 0; l < M; ++l) r[l] = static_cast<double>(coeffs[l]);
  if (!r.allFinite()) throw input_error("psd_fit: coefficients must be finite");

  const double r0 = std::max(1e-300, std::abs(r[0]));
  const auto feasible = [&](const detail::FitStats& st, const MatrixXd& R) {
    const bool psd_ok = st.min_eigenvalue >= -tol * std::max(1.0, R.norm());
    const bool diag_ok = st.diag_residual <= tol;
    const bool power_ok = !equal_power || st.power_spread * (r0 / static_cast<double>(M)) <= tol * r0;
    return psd_ok && diag_ok && power_ok;
  };

  PsdFitResult out;
  out.R = toeplitz_from_coeffs(r);
  detail::FitStats st = detail::fit_stats(out.R, r);
  if (feasible(st, out.R)) {
    out.converged = true;
    out.iterations = 0;
    out.diag_residual = st.diag_residual;
    out.power_spread = st.power_spread;
    out.min_eigenvalue = st.min_eigenvalue;
    return out;
  }

  // Dykstra cycles (PSD -> [equal diag] -> diagonal sums), with per-set
  // correction terms.  Cheap cases converge here in a handful of cycles.
  const int dykstra_budget = std::min(max_iter, 300);
  MatrixXd x = out.R;
  MatrixXd p1 = MatrixXd::Zero(M, M), p2 = MatrixXd::Zero(M, M), p3 = MatrixXd::Zero(M, M);
  int cycles = 0;
  for (; cycles < dykstra_budget; ++cycles) {
    MatrixXd y = detail::project_psd(x + p1);
    p1 = x + p1 - y;
    if (equal_power) {
      const MatrixXd z = detail::project_equal_diag(y + p2, r[0] / static_cast<double>(M));
      p2 = y + p2 - z;
      y = z;
    }
    const MatrixXd w = detail::project_diag_sums(y + p3, r);
    p3 = y + p3 - w;
    x = w;
    st = detail::fit_stats(x, r);
    if (feasible(st, x)) {
      out.R = x;
      out.converged = true;
      out.iterations = cycles + 1;
      out.diag_residual = st.diag_residual;
      out.power_spread = st.power_spread;
      out.min_eigenvalue = st.min_eigenvalue;
      return out;
    }
  }

  // Factor-space completion, started from the clipped eigenfactor of the
  // Toeplitz candidate (the natural diagonal-sum-exact seed).
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(toeplitz_from_coeffs(r));
  const VectorXd lam = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  MatrixXd G = es.eigenvectors() * lam.asDiagonal();
  const int steps = detail::factor_refine(G, r, equal_power, 1e-3 * tol * std::max(1.0, r0),
                                          std::max(50, max_iter - cycles));
  out.R = G * G.transpose();
  out.R = 0.5 * (out.R + out.R.transpose()).eval();
  st = detail::fit_stats(out.R, r);
  out.converged = feasible(st, out.R);
  out.iterations = cycles + steps;
  out.diag_residual = st.diag_residual;
  out.power_spread = st.power_spread;
  out.min_eigenvalue = st.min_eigenvalue;
  if (!out.converged)
    logf(LogLevel::warn,
         "psd_fit: not converged (diag residual %s, min eig %s, power spread %s)",
         fmt17(st.diag_residual).c_str(), fmt17(st.min_eigenvalue).c_str(),
         fmt17(st.power_spread).c_str());
  return out;
}

// ---------------------------------------------------------------------------
// Transmit-beamspace weights.
// ---------------------------------------------------------------------------

template <typename Scalar>
struct TbpWeightsT {
  MatrixX<Scalar> W;  // U * sqrt(Lambda), eigenvalues descending
  int rank = 0;       // retained eigen-directions
};

using TbpWeights = TbpWeightsT<double>;

// W = U*sqrt(Lambda) with eigenvalues sorted descending.  Negative
// eigenvalues above -1e-10*||R||_F are numerical noise and clamp to zero;
// anything below is a materially indefinite input.
template <typename Derived>
TbpWeightsT<typename Derived::Scalar> tbp_weights(const Eigen::MatrixBase<Derived>& R) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index M = R.rows();
  if (R.cols() != M || M < 1) throw input_error("tbp_weights: R must be square and nonempty");
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(R.derived());
  const VectorXd lam = es.eigenvalues();  // ascending
  const double fro = R.norm();
  if (lam.minCoeff() < -1e-10 * std::max(1.0, fro))
    throw input_error("tbp_weights: materially indefinite input (min eigenvalue " +
                      fmt17(lam.minCoeff()) + ")");
  TbpWeightsT<Scalar> out;
  out.W.resize(M, M);
  const double lam_max = std::max(0.0, lam.maxCoeff());
  for (Eigen::Index i = 0; i < M; ++i) {
    const Eigen::Index src = M - 1 - i;  // descending
    const double l = std::max(0.0, lam[src]);
    out.W.col(i) = es.eigenvectors().col(src) * std::sqrt(l);
    if (l > 1e-12 * std::max(1.0, lam_max)) ++out.rank;
  }
  return out;
}

// Weighted waveform set: each output waveform mixes the input set by a row
// of W.  With an orthogonal input set of per-waveform energy E/M, the output
// correlation is (E/M) * W W^H up to the input's orthogonality residual.
template <typename WDerived>
MatrixXcd apply_tbp(const Eigen::MatrixBase<WDerived>& W, const MatrixXcd& X) {
  if (W.rows() != W.cols()) throw input_error("apply_tbp: W must be square");
  if (W.cols() != X.rows())
    throw input_error("apply_tbp: dimension mismatch (W is " + std::to_string(W.rows()) + "x" +
                      std::to_string(W.cols()) + ", X has " + std::to_string(X.rows()) +
                      " waveforms)");
  return W.template cast<std::complex<double>>() * X;
}

}  // namespace beamforge
