#pragma once

// Independent verification oracle for the Remez engine: solves the
// discretized minimax problem
//     min_{r,t} t   s.t.  |W_k (phi_k^T r - D_k)| <= t   for every grid angle
// as a linear program.  The dual has only M+1 equality rows, so a two-phase
// revised simplex with dense LU basis solves it quickly and exactly; the
// primal (r, t) is read off the optimal equality multipliers.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "beamforge/common.hpp"
#include "beamforge/remez.hpp"

namespace beamforge {

struct LpResult {
  VectorXd coeffs;      // (r_0, ..., r_{M-1})
  double delta = 0.0;   // max weighted deviation on the grid
  int iterations = 0;   // total simplex pivots (both phases)
};

namespace detail {

// min c^T x  s.t.  A x = h, x >= 0, via revised simplex with Dantzig pricing
// and a Bland fallback on degenerate streaks.  Returns equality multipliers y.
class RevisedSimplex {
 public:
  RevisedSimplex(const MatrixXd& A, const VectorXd& h) : A_(A), h_(h), m_(A.rows()), n_(A.cols()) {}

  // basis: initial basic column indices (size m).  On return holds the final
  // basis.  y receives the multipliers of the final (optimal) basis.
  // price_cols limits pricing to the first columns (phase 2 must not re-admit
  // the artificials, so they are excluded rather than penalized).
  int solve(const VectorXd& c, std::vector<Eigen::Index>& basis, VectorXd& y,
            double* objective, Eigen::Index price_cols = -1) {
    const Eigen::Index ncols = price_cols > 0 ? price_cols : n_;
    const double ctol = 1e-9 * (1.0 + c.head(ncols).cwiseAbs().maxCoeff());
    int pivots = 0, stall = 0;
    double last_obj = std::numeric_limits<double>::infinity();
    MatrixXd B(m_, m_);
    for (int it = 0; it < 100000; ++it) {
      for (Eigen::Index i = 0; i < m_; ++i) B.col(i) = A_.col(basis[static_cast<std::size_t>(i)]);
      Eigen::PartialPivLU<MatrixXd> lu(B);
      VectorXd xb = lu.solve(h_);
      if (xb.minCoeff() < -1e-7)
        throw convergence_error("simplex: basis lost feasibility (residual " +
                                fmt17(xb.minCoeff()) + ")");
      VectorXd cb(m_);
      for (Eigen::Index i = 0; i < m_; ++i) cb[i] = c[basis[static_cast<std::size_t>(i)]];
      y = lu.transpose().solve(cb);

      const double obj = cb.dot(xb);
      if (obj < last_obj - 1e-12 * (1.0 + std::abs(last_obj)))
        stall = 0;
      else
        ++stall;
      last_obj = obj;
      const bool bland = stall > 2 * static_cast<int>(m_) + 10;

      // Pricing.
      VectorXd d = c.head(ncols) - A_.leftCols(ncols).transpose() * y;
      Eigen::Index enter = -1;
      double best = -ctol;
      for (Eigen::Index j = 0; j < ncols; ++j) {
        if (d[j] < best) {
          enter = j;
          if (bland) break;  // first eligible index
          best = d[j];
        }
      }
      if (enter < 0) {
        if (objective) *objective = obj;
        return pivots;
      }

      VectorXd w = lu.solve(A_.col(enter));
      Eigen::Index leave = -1;
      double theta = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < m_; ++i) {
        if (w[i] > 1e-11) {
          const double t = std::max(xb[i], 0.0) / w[i];
          if (t < theta - 1e-13 ||
              (t < theta + 1e-13 &&
               (leave < 0 || basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)]))) {
            theta = t;
            leave = i;
          }
        }
      }
      if (leave < 0) throw convergence_error("simplex: unbounded direction (ill-posed grid)");
      basis[static_cast<std::size_t>(leave)] = enter;
      ++pivots;
    }
    throw convergence_error("simplex: pivot limit exceeded");
  }

 private:
  const MatrixXd& A_;
  const VectorXd& h_;
  Eigen::Index m_, n_;
};

}  // namespace detail

// Solve the discretized minimax design on the supplied angles (all of which
// must lie inside the approximation bands; >= 4M points required).
inline LpResult lp_minimax_oracle(int M, const BandSpec& spec, const VectorXd& angles) {
  spec.validate();
  if (M < 1) throw input_error("lp_minimax_oracle: M must be >= 1");
  const DesignGrid grid = classify_grid(spec, angles);
  const Eigen::Index K = grid.u.size();
  if (K < 4 * static_cast<Eigen::Index>(M))
    throw input_error("lp_minimax_oracle: need >= 4M grid points, got " + std::to_string(K));

  const Eigen::Index m = M + 1;       // dual equality rows
  const Eigen::Index n = 2 * K + m;   // sign-split columns + artificials
  MatrixXd A = MatrixXd::Zero(m, n);
  VectorXd b = VectorXd::Zero(n);     // phase-2 costs
  for (Eigen::Index k = 0; k < K; ++k) {
    VectorXd phi(M);
    phi[0] = 1.0;
    for (int l = 1; l < M; ++l) phi[l] = 2.0 * std::cos(l * grid.u[k]);
    for (int s = 0; s < 2; ++s) {
      const double sgn = s == 0 ? 1.0 : -1.0;
      const Eigen::Index j = 2 * k + s;
      A.block(0, j, M, 1) = sgn * grid.W[k] * phi;
      A(M, j) = 1.0;
      b[j] = sgn * grid.W[k] * grid.D[k];
    }
  }
  for (Eigen::Index i = 0; i < m; ++i) A(i, 2 * K + i) = 1.0;
  VectorXd h = VectorXd::Zero(m);
  h[M] = 1.0;

  detail::RevisedSimplex sx(A, h);
  std::vector<Eigen::Index> basis(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) basis[static_cast<std::size_t>(i)] = 2 * K + i;

  // Phase 1: drive the artificials out.
  VectorXd c1 = VectorXd::Zero(n);
  c1.tail(m).setOnes();
  VectorXd y(m);
  double p1_obj = 0.0;
  int pivots = sx.solve(c1, basis, y, &p1_obj);
  if (p1_obj > 1e-8)
    throw input_error("lp_minimax_oracle: infeasible grid (phase-1 residual " + fmt17(p1_obj) + ")");

  // Phase 2: artificials are excluded from pricing so they can leave the
  // basis but never re-enter (a big-M cost would wreck the pricing tolerance).
  pivots += sx.solve(b, basis, y, nullptr, 2 * K);

  LpResult res;
  res.coeffs = y.head(M);
  res.iterations = pivots;
  double dmax = 0.0;
  for (Eigen::Index k = 0; k < K; ++k) {
    double p = res.coeffs[0];
    for (int l = 1; l < M; ++l) p += 2.0 * res.coeffs[l] * std::cos(l * grid.u[k]);
    dmax = std::max(dmax, grid.W[k] * std::abs(p - grid.D[k]));
  }
  res.delta = dmax;
  return res;
}

// Proportionally allocate n grid points over the two approximation bands
// (used to build the shared grid for oracle-vs-Remez comparisons).
inline VectorXd band_proportional_grid(const BandSpec& spec, Eigen::Index n) {
  spec.validate();
  const double wp = spec.passband_edge;
  const double ws = pi - spec.stopband_edge;
  Eigen::Index np = static_cast<Eigen::Index>(std::llround(static_cast<double>(n) * wp / (wp + ws)));
  np = std::clamp<Eigen::Index>(np, 2, n - 2);
  VectorXd u(n);
  u.head(np) = linspace(0.0, spec.passband_edge, np);
  u.tail(n - np) = linspace(spec.stopband_edge, pi, n - np);
  return u;
}

}  // namespace beamforge
