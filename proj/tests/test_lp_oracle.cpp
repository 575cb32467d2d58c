#include <doctest.h>

#include "beamforge/cosine_poly.hpp"
#include "beamforge/lp_oracle.hpp"
#include "beamforge/remez.hpp"
#include "helpers.hpp"

using namespace beamforge;
using namespace beamforge::testing;

TEST_CASE("lp oracle: identical discrete problem matches the exchange") {
  // On the same grid the LP and the exchange solve the same discrete
  // minimax problem, so their ripples agree to solver precision.
  Rng rng(21);
  for (int rep = 0; rep < 3; ++rep) {
    const BandSpec spec = random_spec(rng);
    const int M = 5 + 3 * rep;
    const VectorXd angles = band_proportional_grid(spec, 1024);
    const RemezResult rx = remez_exchange(M, classify_grid(spec, angles));
    const LpResult lp = lp_minimax_oracle(M, spec, angles);
    REQUIRE(rx.converged);
    CAPTURE(rep);
    CHECK(std::abs(rx.delta - lp.delta) <= 1e-6 * lp.delta);
    // Optimality cross-check: the exchange is never worse than the LP.
    CHECK(rx.delta <= lp.delta * (1.0 + 1e-3));
  }
}

TEST_CASE("lp oracle: Example-1 on a 2048-point grid vs remez_design") {
  const BandSpec spec = example1_spec();
  const LpResult lp = lp_minimax_oracle(10, spec, band_proportional_grid(spec, 2048));
  const RemezResult rx = remez_design(10, spec);
  CHECK(std::abs(lp.delta - rx.delta) / rx.delta < 0.01);
}

TEST_CASE("lp oracle: M=3 coefficients match remez_design to 1e-4") {
  BandSpec spec;
  spec.passband_edge = 0.3 * pi;
  spec.stopband_edge = 0.6 * pi;
  spec.passband_level = 1.0;
  spec.stopband_level = 0.05;
  const LpResult lp = lp_minimax_oracle(3, spec, band_proportional_grid(spec, 4096));
  const RemezResult rx = remez_design(3, spec);
  REQUIRE(rx.converged);
  for (int l = 0; l < 3; ++l) CHECK(std::abs(lp.coeffs[l] - rx.coeffs[l]) <= 1e-4);
}

TEST_CASE("lp oracle: returned delta is the grid max deviation of its coeffs") {
  const BandSpec spec = example1_spec();
  const VectorXd angles = band_proportional_grid(spec, 512);
  const LpResult lp = lp_minimax_oracle(6, spec, angles);
  const DesignGrid g = classify_grid(spec, angles);
  double dmax = 0.0;
  for (Eigen::Index k = 0; k < g.u.size(); ++k)
    dmax = std::max(dmax, g.W[k] * std::abs(eval_cosine_poly(lp.coeffs, g.u[k]) - g.D[k]));
  CHECK(lp.delta == doctest::Approx(dmax).epsilon(1e-12));
}

TEST_CASE("lp oracle: input validation") {
  const BandSpec spec = example1_spec();
  // Fewer than 4M points inside the bands.
  CHECK_THROWS_AS(lp_minimax_oracle(10, spec, band_proportional_grid(spec, 30)), input_error);
  // Angles outside the approximation bands are rejected by classification.
  VectorXd bad(40);
  for (int i = 0; i < 40; ++i) bad[i] = 0.21 * pi + 1e-3 * i;  // transition band
  CHECK_THROWS_AS(lp_minimax_oracle(4, spec, bad), input_error);
}
