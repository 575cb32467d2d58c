#include <doctest.h>

#include "beamforge/band_spec.hpp"
#include "helpers.hpp"

using namespace beamforge;
using namespace beamforge::testing;

TEST_CASE("band_spec: validation rejects malformed specs") {
  BandSpec s = example1_spec();
  CHECK_NOTHROW(s.validate());

  BandSpec bad = s;
  bad.passband_edge = 0.0;
  CHECK_THROWS_AS(bad.validate(), input_error);
  bad = s;
  bad.passband_edge = pi;
  CHECK_THROWS_AS(bad.validate(), input_error);
  bad = s;
  bad.stopband_edge = bad.passband_edge;  // u_s must exceed u_p
  CHECK_THROWS_AS(bad.validate(), input_error);
  bad = s;
  bad.stopband_edge = pi;
  CHECK_THROWS_AS(bad.validate(), input_error);
  bad = s;
  bad.stopband_level = bad.passband_level;  // P0 must exceed eps0
  CHECK_THROWS_AS(bad.validate(), input_error);
  bad = s;
  bad.stopband_level = -0.01;
  CHECK_THROWS_AS(bad.validate(), input_error);
  bad = s;
  bad.weight_ratio = 0.0;
  CHECK_THROWS_AS(bad.validate(), input_error);
  bad = s;
  bad.passband_edge = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(bad.validate(), input_error);
}

TEST_CASE("estimate_ripple: worked design points") {
  const BandSpec s = example1_spec();
  // 10^(-(14.6*0.2*(M-1)+13)/20) exactly.
  CHECK(estimate_ripple(10, s) == doctest::Approx(1.0864256236170655e-02).epsilon(1e-12));
  CHECK(estimate_ripple(20, s) == doctest::Approx(3.7670379898390930e-04).epsilon(1e-12));
  // The quoted design ripples for the two worked examples are rounded
  // approximations of these values.
  CHECK(std::abs(estimate_ripple(10, s) - 0.0112) / 0.0112 < 0.05);
  CHECK(std::abs(estimate_ripple(20, s) - 0.000339) / 0.000339 < 0.15);
  // M = 1 zeroes the transition term.
  CHECK(estimate_ripple(1, s) == doctest::Approx(std::pow(10.0, -13.0 / 20.0)).epsilon(1e-14));
  CHECK_THROWS_AS(estimate_ripple(0, s), input_error);
}

TEST_CASE("estimate_elements: worked design points and round trip") {
  const BandSpec s = example1_spec();
  CHECK(estimate_elements(0.0112, s) == 10);
  CHECK(estimate_elements(0.000339, s) == 20);
  CHECK(estimate_elements(std::pow(10.0, -13.0 / 20.0), s) == 1);
  CHECK_THROWS_AS(estimate_elements(0.0, s), input_error);
  CHECK_THROWS_AS(estimate_elements(1.0, s), input_error);

  // Round trip |M - estimate_elements(estimate_ripple(M))| <= 1; with
  // nearest-integer rounding the round trip is exact.
  Rng rng(42);
  for (int rep = 0; rep < 100; ++rep) {
    const BandSpec spec = random_spec(rng);
    const int M = 1 + static_cast<int>(rng.uniform(0.0, 40.0));
    const int back = estimate_elements(estimate_ripple(M, spec), spec);
    CHECK(std::abs(back - M) <= 1);
  }
  for (int M = 1; M <= 40; ++M) CHECK(estimate_elements(estimate_ripple(M, s), s) == M);
}

TEST_CASE("transition width") {
  const BandSpec s = example1_spec();
  CHECK(s.transition_width() == doctest::Approx(0.2 * pi));
  CHECK(transition_width_normalized(s) == doctest::Approx(0.2));
}
