#pragma once

// Equiripple cosine-series design by Remez exchange (Parks-McClellan).
// Works in x = cos(u): a degree-(M-1) cosine series is a degree-(M-1)
// algebraic polynomial in x, so the classic alternation machinery applies.

#include <algorithm>
#include <cmath>
#include <vector>

#include "beamforge/band_spec.hpp"
#include "beamforge/common.hpp"
#include "beamforge/cosine_poly.hpp"

namespace beamforge {

struct RemezResult {
  VectorXd coeffs;           // (r_0, ..., r_{M-1})
  double delta = 0.0;        // achieved equiripple magnitude
  VectorXd extremal_angles;  // M+1 increasing angles inside the bands
  int iterations = 0;
  bool converged = false;
};

// Dense approximation grid: angles u (increasing), desired response D,
// error weight W, and the band index of every point (local-extremum search
// must not compare errors across a band gap).
struct DesignGrid {
  VectorXd u, D, W;
  std::vector<int> band_of;
  int n_bands = 0;
};

// Classify explicit angles against a two-band spec.  Angles must lie inside
// the approximation bands (the transition band carries no error measure).
inline DesignGrid classify_grid(const BandSpec& spec, const VectorXd& angles) {
  spec.validate();
  DesignGrid g;
  g.u = angles;
  g.D.resize(angles.size());
  g.W.resize(angles.size());
  g.band_of.resize(static_cast<std::size_t>(angles.size()));
  for (Eigen::Index i = 0; i < angles.size(); ++i) {
    const double u = angles[i];
    if (i > 0 && !(u > angles[i - 1]))
      throw input_error("grid: angles must be strictly increasing");
    if (u >= -1e-15 && u <= spec.passband_edge + 1e-15) {
      g.D[i] = spec.passband_level;
      g.W[i] = 1.0;
      g.band_of[static_cast<std::size_t>(i)] = 0;
    } else if (u >= spec.stopband_edge - 1e-15 && u <= pi + 1e-15) {
      g.D[i] = spec.stopband_level;
      g.W[i] = spec.weight_ratio;
      g.band_of[static_cast<std::size_t>(i)] = 1;
    } else {
      throw input_error("grid: angle " + fmt17(u) + " lies outside the approximation bands");
    }
  }
  g.n_bands = 2;
  return g;
}

// Default dense grid: grid_density*(M+1) points per band, endpoints u = 0,
// u_p, u_s, pi always included.
inline DesignGrid make_design_grid(int M, const BandSpec& spec, int grid_density) {
  spec.validate();
  const Eigen::Index per_band = static_cast<Eigen::Index>(grid_density) * (M + 1);
  if (per_band < 2) throw input_error("make_design_grid: grid too coarse");
  VectorXd u(2 * per_band);
  u.head(per_band) = linspace(0.0, spec.passband_edge, per_band);
  u.tail(per_band) = linspace(spec.stopband_edge, pi, per_band);
  return classify_grid(spec, u);
}

namespace detail {

// Barycentric weights gamma_k = 1 / prod_{j != k} (x_k - x_j), computed with
// a common scale factor (cancels in every downstream ratio).
inline VectorXd barycentric_weights(const VectorXd& x) {
  const Eigen::Index n = x.size();
  const double span = x.maxCoeff() - x.minCoeff();
  const double scale = span > 0 ? 2.0 / span : 1.0;
  VectorXd g(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    double prod = 1.0;
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != k) prod *= (x[k] - x[j]) * scale;
    if (prod == 0.0) throw convergence_error("remez: coincident reference nodes");
    g[k] = 1.0 / prod;
  }
  return g;
}

// Second-form barycentric evaluation at x; exact at nodes.
inline double barycentric_eval(const VectorXd& xn, const VectorXd& yn, const VectorXd& g,
                               double x) {
  double num = 0.0, den = 0.0;
  for (Eigen::Index k = 0; k < xn.size(); ++k) {
    const double dx = x - xn[k];
    if (dx == 0.0) return yn[k];
    const double w = g[k] / dx;
    num += w * yn[k];
    den += w;
  }
  return num / den;
}

// Golden-section maximization on [lo, hi]; converges onto an endpoint when
// the function is monotone (band-edge extrema).
template <class F>
inline double golden_max(F&& f, double lo, double hi) {
  if (!(hi > lo)) return lo;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 110 && (b - a) > 1e-15 * (1.0 + std::abs(a) + std::abs(b)); ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace detail

// Core exchange loop on an explicit grid.  The returned delta is the leveled
// ripple of the final reference solve; coefficients are recovered exactly by
// uniform resampling of the final polynomial.
inline RemezResult remez_exchange(int M, const DesignGrid& grid,
                                  int max_iterations = 250, double ripple_tol = 1e-10) {
  const Eigen::Index K = grid.u.size();
  if (M < 2) throw input_error("remez: M must be >= 2");
  if (K < M + 1)
    throw input_error("remez: degenerate grid (" + std::to_string(K) + " points for " +
                      std::to_string(M + 1) + " references)");

  const double level_scale =
      std::max(1.0, grid.D.cwiseAbs().maxCoeff()) * std::max(1.0, grid.W.maxCoeff());

  RemezResult res;
  res.coeffs = VectorXd::Zero(M);

  // Exactly representable constant response: done without exchange.
  if ((grid.D.maxCoeff() - grid.D.minCoeff()) <= 1e-15 * std::max(1.0, level_scale)) {
    res.coeffs[0] = grid.D[0];
    res.delta = 0.0;
    res.converged = true;
    res.extremal_angles.resize(M + 1);
    for (int k = 0; k <= M; ++k)
      res.extremal_angles[k] = grid.u[static_cast<Eigen::Index>(k) * (K - 1) / M];
    return res;
  }

  VectorXd x(K);
  for (Eigen::Index i = 0; i < K; ++i) x[i] = std::cos(grid.u[i]);

  // Initial reference: uniform in angle over the union of the bands (not by
  // grid index -- the grid holds equal point counts per band, so an index
  // uniform start would cram references into a narrow band, where cos()
  // clusters them and the leveled solve cancels catastrophically).
  std::vector<Eigen::Index> ref(static_cast<std::size_t>(M + 1));
  {
    VectorXd pos(K);  // accumulated in-band arc length at each grid point
    pos[0] = 0.0;
    for (Eigen::Index i = 1; i < K; ++i) {
      const double step = grid.band_of[static_cast<std::size_t>(i)] ==
                                  grid.band_of[static_cast<std::size_t>(i - 1)]
                              ? grid.u[i] - grid.u[i - 1]
                              : 0.0;  // the transition gap carries no length
      pos[i] = pos[i - 1] + step;
    }
    Eigen::Index j = 0;
    for (int k = 0; k <= M; ++k) {
      const double target = pos[K - 1] * static_cast<double>(k) / static_cast<double>(M);
      while (j + 1 < K && pos[j + 1] <= target) ++j;
      Eigen::Index pick = j;
      if (j + 1 < K && (target - pos[j]) > (pos[j + 1] - target)) pick = j + 1;
      // Keep strictly increasing indices.
      const Eigen::Index prev = k > 0 ? ref[static_cast<std::size_t>(k - 1)] : -1;
      ref[static_cast<std::size_t>(k)] = std::min(std::max(pick, prev + 1), K - 1 - (M - k));
    }
  }

  VectorXd xn(M + 1), yn(M + 1), gam(M + 1);
  VectorXd err(K);
  double delta = 0.0;
  bool converged = false;
  int iter = 0;

  for (iter = 1; iter <= max_iterations; ++iter) {
    // Leveled solve on the current reference.
    for (int k = 0; k <= M; ++k) xn[k] = x[ref[static_cast<std::size_t>(k)]];
    gam = detail::barycentric_weights(xn);
    double num = 0.0, den = 0.0;
    for (int k = 0; k <= M; ++k) {
      const Eigen::Index i = ref[static_cast<std::size_t>(k)];
      const double sgn = (k % 2 == 0) ? 1.0 : -1.0;
      num += gam[k] * grid.D[i];
      den += gam[k] * sgn / grid.W[i];
    }
    if (den == 0.0) throw convergence_error("remez: degenerate leveled system");
    delta = -num / den;
    if (!std::isfinite(delta))
      throw convergence_error("remez: leveled solve produced non-finite ripple");
    for (int k = 0; k <= M; ++k) {
      const Eigen::Index i = ref[static_cast<std::size_t>(k)];
      const double sgn = (k % 2 == 0) ? 1.0 : -1.0;
      yn[k] = grid.D[i] + sgn * delta / grid.W[i];
    }

    // Weighted error on the whole grid.
    for (Eigen::Index i = 0; i < K; ++i)
      err[i] = grid.W[i] * (detail::barycentric_eval(xn, yn, gam, x[i]) - grid.D[i]);
    if (!err.allFinite())
      throw convergence_error("remez: non-finite error (degenerate reference nodes)");

    const double emax_grid = err.cwiseAbs().maxCoeff();
    if (emax_grid <= 1e-14 * level_scale) {  // exact fit (delta ~ 0)
      converged = true;
      break;
    }

    // Candidate extrema: the max-|err| point of every maximal same-sign run.
    // Reference nodes alternate in sign, so adjacent references always sit
    // in different runs -- this yields at least M+1 alternating candidates
    // even where the error is monotone across a reference (the case that
    // defeats naive local-maximum detection near band edges).  Same-sign
    // runs meeting across a band gap merge, which is the correct handling
    // of an unseen crossing inside the transition.
    std::vector<Eigen::Index> alt;
    {
      Eigen::Index best = -1;
      int run_sign = 0;
      for (Eigen::Index i = 0; i < K; ++i) {
        const double e = err[i];
        if (e == 0.0) continue;  // exact zeros join no run
        const int s = e > 0.0 ? 1 : -1;
        if (s != run_sign) {
          if (best >= 0) alt.push_back(best);
          run_sign = s;
          best = i;
        } else if (std::abs(e) > std::abs(err[best])) {
          best = i;
        }
      }
      if (best >= 0) alt.push_back(best);
    }

    if (static_cast<int>(alt.size()) < M + 1)
      throw convergence_error("remez: only " + std::to_string(alt.size()) +
                              " alternating extrema found for " + std::to_string(M + 1) +
                              " references (grid too coarse)");

    // Trim to M+1 preserving alternation without positional bias: while two
    // or more candidates are surplus, delete the globally smallest one; an
    // interior deletion leaves a same-sign neighbor pair, so the weaker
    // neighbor goes with it.  A single surplus is a parity excess: drop the
    // weaker endpoint.  (Trimming only from the ends keeps a contiguous
    // window and can collapse every reference into one error spike.)
    while (static_cast<int>(alt.size()) > M + 1) {
      if (static_cast<int>(alt.size()) == M + 2) {
        if (std::abs(err[alt.front()]) < std::abs(err[alt.back()]))
          alt.erase(alt.begin());
        else
          alt.pop_back();
        continue;
      }
      std::size_t imin = 0;
      for (std::size_t t = 1; t < alt.size(); ++t)
        if (std::abs(err[alt[t]]) < std::abs(err[alt[imin]])) imin = t;
      if (imin == 0) {
        alt.erase(alt.begin());
      } else if (imin + 1 == alt.size()) {
        alt.pop_back();
      } else {
        const std::size_t j =
            std::abs(err[alt[imin - 1]]) < std::abs(err[alt[imin + 1]]) ? imin - 1 : imin + 1;
        const std::size_t lo = std::min(imin, j), hi = std::max(imin, j);
        alt.erase(alt.begin() + static_cast<std::ptrdiff_t>(hi));
        alt.erase(alt.begin() + static_cast<std::ptrdiff_t>(lo));
      }
    }

    // Ripple deviation across the new reference.
    double emax = 0.0, emin = std::numeric_limits<double>::infinity();
    for (const Eigen::Index i : alt) {
      emax = std::max(emax, std::abs(err[i]));
      emin = std::min(emin, std::abs(err[i]));
    }
    const bool same = std::equal(alt.begin(), alt.end(), ref.begin(), ref.end());
    ref = alt;
    if ((emax - emin) <= ripple_tol * emax || same) {
      converged = true;
      break;
    }
  }
  iter = std::min(iter, max_iterations);

  // Final leveled solve on the (possibly exchanged) reference.
  for (int k = 0; k <= M; ++k) xn[k] = x[ref[static_cast<std::size_t>(k)]];
  gam = detail::barycentric_weights(xn);
  {
    double num = 0.0, den = 0.0;
    for (int k = 0; k <= M; ++k) {
      const Eigen::Index i = ref[static_cast<std::size_t>(k)];
      const double sgn = (k % 2 == 0) ? 1.0 : -1.0;
      num += gam[k] * grid.D[i];
      den += gam[k] * sgn / grid.W[i];
    }
    if (den == 0.0) throw convergence_error("remez: degenerate leveled system");
    delta = -num / den;
    if (!std::isfinite(delta))
      throw convergence_error("remez: leveled solve produced non-finite ripple");
    for (int k = 0; k <= M; ++k) {
      const Eigen::Index i = ref[static_cast<std::size_t>(k)];
      const double sgn = (k % 2 == 0) ? 1.0 : -1.0;
      yn[k] = grid.D[i] + sgn * delta / grid.W[i];
    }
  }

  res.coeffs = cosine_coeffs_from_samples(
      M, [&](double u) { return detail::barycentric_eval(xn, yn, gam, std::cos(u)); });
  res.delta = std::abs(delta);
  res.iterations = iter;
  res.converged = converged;
  res.extremal_angles.resize(M + 1);
  for (int k = 0; k <= M; ++k) res.extremal_angles[k] = grid.u[ref[static_cast<std::size_t>(k)]];
  return res;
}

namespace detail {

// Continuum refinement of a converged grid solution.  The grid exchange
// leaves each extremum within one cell of its true location, so the ripple
// overshoots the grid-leveled delta between samples -- enough to push the
// stopband response below zero when eps0 barely exceeds delta.  Polishing
// the reference onto the true continuum extrema (golden section inside each
// node's band) and re-solving restores |error| <= delta everywhere, which
// keeps P(u) >= eps0 - delta >= 0 whenever eps0 >= delta.
inline void continuum_refine(int M, const BandSpec& spec, RemezResult& res, int max_rounds = 12) {
  const int K = M + 1;
  VectorXd un = res.extremal_angles;
  VectorXd xn(K), yn(K), gam(K);
  double delta_signed = 0.0;

  const auto in_passband = [&](double u) { return u <= spec.passband_edge + 1e-12; };
  const auto desired = [&](double u) {
    return in_passband(u) ? spec.passband_level : spec.stopband_level;
  };
  const auto weight = [&](double u) { return in_passband(u) ? 1.0 : spec.weight_ratio; };

  const auto solve = [&]() {
    for (int k = 0; k < K; ++k) xn[k] = std::cos(un[k]);
    gam = barycentric_weights(xn);
    double num = 0.0, den = 0.0;
    for (int k = 0; k < K; ++k) {
      const double sgn = (k % 2 == 0) ? 1.0 : -1.0;
      num += gam[k] * desired(un[k]);
      den += gam[k] * sgn / weight(un[k]);
    }
    if (den == 0.0) throw convergence_error("remez: degenerate leveled system");
    delta_signed = -num / den;
    for (int k = 0; k < K; ++k) {
      const double sgn = (k % 2 == 0) ? 1.0 : -1.0;
      yn[k] = desired(un[k]) + sgn * delta_signed / weight(un[k]);
    }
  };
  const auto weighted_err = [&](double u) {
    return weight(u) * (barycentric_eval(xn, yn, gam, std::cos(u)) - desired(u));
  };

  solve();
  double prev = std::abs(delta_signed);
  for (int round = 0; round < max_rounds; ++round) {
    VectorXd polished = un;
    for (int k = 0; k < K; ++k) {
      const bool pass = in_passband(un[k]);
      const double band_lo = pass ? 0.0 : spec.stopband_edge;
      const double band_hi = pass ? spec.passband_edge : pi;
      const double lo = std::max(band_lo, k > 0 ? 0.5 * (un[k - 1] + un[k]) : band_lo);
      const double hi = std::min(band_hi, k < K - 1 ? 0.5 * (un[k] + un[k + 1]) : band_hi);
      const double s = ((k % 2 == 0) ? 1.0 : -1.0) * (delta_signed >= 0.0 ? 1.0 : -1.0);
      polished[k] = golden_max([&](double u) { return s * weighted_err(u); }, lo, hi);
    }
    bool increasing = true;
    for (int k = 1; k < K; ++k) increasing = increasing && polished[k] > polished[k - 1];
    if (!increasing) break;  // keep the previous (valid) reference
    un = polished;
    solve();
    ++res.iterations;
    const double cur = std::abs(delta_signed);
    if (std::abs(cur - prev) <= 1e-13 * std::max(cur, 1e-300)) break;
    prev = cur;
  }

  res.delta = std::abs(delta_signed);
  res.extremal_angles = un;
  res.coeffs = cosine_coeffs_from_samples(
      M, [&](double u) { return barycentric_eval(xn, yn, gam, std::cos(u)); });
}

}  // namespace detail

// Standard entry point: two-band spec, dense internal grid, continuum polish.
inline RemezResult remez_design(int M, const BandSpec& spec, int grid_density = 16) {
  spec.validate();
  if (M < 2) throw input_error("remez_design: M must be >= 2; got " + std::to_string(M));
  if (grid_density < 8)
    throw input_error("remez_design: grid_density must be >= 8; got " +
                      std::to_string(grid_density));
  // The requested density is ample for typical bands, but adversarial
  // edge/weight combinations can leave the reference search one extremum
  // short on the initial grid.  Densify before giving up.
  RemezResult res;
  for (int attempt = 0;; ++attempt) {
    try {
      res = remez_exchange(M, make_design_grid(M, spec, grid_density << attempt));
    } catch (const convergence_error&) {
      if (attempt >= 3) throw;
      continue;
    }
    if (res.converged || attempt >= 3) break;
  }
  if (res.converged && res.delta > 0.0) detail::continuum_refine(M, spec, res);
  return res;
}

}  // namespace beamforge
