#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "beamforge/io.hpp"
#include "helpers.hpp"

using namespace beamforge;
using namespace beamforge::testing;
namespace fs = std::filesystem;

namespace {

std::string scratch(const std::string& name) {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "beamforge-io-tests";
    fs::create_directories(d);
    return d;
  }();
  return (dir / name).string();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  f << text;
}

}  // namespace

TEST_CASE("coefficients CSV: bitwise round trip") {
  VectorXd r(7);
  r << 1.0, -0.333333333333333315, 1e-300, -2.5e300, pi, 0.0, 7.000000000000001;
  const std::string path = scratch("coeffs.csv");
  write_coeffs_csv(path, r);
  const VectorXd back = read_coeffs_csv(path);
  REQUIRE(back.size() == r.size());
  for (Eigen::Index i = 0; i < r.size(); ++i) CHECK(back[i] == r[i]);
}

TEST_CASE("coefficients CSV: malformed inputs") {
  CHECK_THROWS_AS(read_coeffs_csv(scratch("does-not-exist.csv")), input_error);

  const std::string p1 = scratch("empty.csv");
  write_text(p1, "");
  CHECK_THROWS_AS(read_coeffs_csv(p1), input_error);  // no header

  const std::string p2 = scratch("header-only.csv");
  write_text(p2, "index,r\n");
  CHECK_THROWS_AS(read_coeffs_csv(p2), input_error);  // no rows

  const std::string p3 = scratch("index-jump.csv");
  write_text(p3, "index,r\n0,1.0\n2,0.5\n");
  CHECK_THROWS_AS(read_coeffs_csv(p3), input_error);  // indices must be contiguous

  const std::string p4 = scratch("trailing.csv");
  write_text(p4, "index,r\n0,1.0x\n");
  CHECK_THROWS_AS(read_coeffs_csv(p4), input_error);  // trailing characters

  const std::string p5 = scratch("columns.csv");
  write_text(p5, "index,r\n0,1.0,9\n");
  CHECK_THROWS_AS(read_coeffs_csv(p5), input_error);  // extra column
}

TEST_CASE("complex matrix CSV: round trip and malformed inputs") {
  Rng rng(31);
  MatrixXcd A(3, 4);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 4; ++j) A(i, j) = {rng.gaussian(), rng.gaussian() * 1e-12};
  const std::string path = scratch("cmat.csv");
  write_complex_matrix_csv(path, A);
  const MatrixXcd back = read_complex_matrix_csv(path);
  REQUIRE(back.rows() == 3);
  REQUIRE(back.cols() == 4);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 4; ++j) CHECK(back(i, j) == A(i, j));

  const std::string odd = scratch("odd-cols.csv");
  write_text(odd, "re0,im0,re1\n1,0,2\n");
  CHECK_THROWS_AS(read_complex_matrix_csv(odd), input_error);  // un-paired columns

  const std::string ragged = scratch("ragged.csv");
  write_text(ragged, "re0,im0\n1,0\n2\n");
  CHECK_THROWS_AS(read_complex_matrix_csv(ragged), input_error);
}

TEST_CASE("real matrix CSV: round trip") {
  Rng rng(33);
  MatrixXd A(4, 3);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 3; ++j) A(i, j) = rng.gaussian() * std::pow(10.0, -3 * j);
  const std::string path = scratch("rmat.csv");
  write_real_matrix_csv(path, A);
  const MatrixXd back = read_real_matrix_csv(path);
  REQUIRE(back.rows() == 4);
  REQUIRE(back.cols() == 3);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 3; ++j) CHECK(back(i, j) == A(i, j));

  const std::string ragged = scratch("rragged.csv");
  write_text(ragged, "p0,p1\n1,2\n3,4,5\n");
  CHECK_THROWS_AS(read_real_matrix_csv(ragged), input_error);
}

TEST_CASE("waveform CSV: round trip, row order independence, completeness") {
  Rng rng(35);
  MatrixXcd X(2, 5);
  for (int m = 0; m < 2; ++m)
    for (int n = 0; n < 5; ++n) X(m, n) = std::polar(0.25, rng.uniform(-pi, pi));
  const std::string path = scratch("wave.csv");
  write_waveforms_csv(path, X);
  const MatrixXcd back = read_waveforms_csv(path);
  REQUIRE(back.rows() == 2);
  REQUIRE(back.cols() == 5);
  for (int m = 0; m < 2; ++m)
    for (int n = 0; n < 5; ++n) CHECK(back(m, n) == X(m, n));

  // Sample rows may arrive in any order.
  const std::string shuffled = scratch("wave-shuffled.csv");
  write_text(shuffled, "m,n,re,im\n1,1,4,0\n0,0,1,0\n1,0,3,0\n0,1,2,0\n");
  const MatrixXcd S = read_waveforms_csv(shuffled);
  CHECK(S(0, 0) == std::complex<double>(1, 0));
  CHECK(S(0, 1) == std::complex<double>(2, 0));
  CHECK(S(1, 0) == std::complex<double>(3, 0));
  CHECK(S(1, 1) == std::complex<double>(4, 0));

  const std::string partial = scratch("wave-partial.csv");
  write_text(partial, "m,n,re,im\n0,0,1,0\n1,1,1,0\n");  // implies 2x2 but has 2 rows
  CHECK_THROWS_AS(read_waveforms_csv(partial), input_error);

  const std::string cols = scratch("wave-cols.csv");
  write_text(cols, "m,n,re,im\n0,0,1\n");
  CHECK_THROWS_AS(read_waveforms_csv(cols), input_error);
}

TEST_CASE("pattern CSV: dB column floors at -400") {
  PatternSamples s;
  s.angles = VectorXd::LinSpaced(3, 0.0, 1.0);
  s.values.resize(3);
  s.values << 100.0, 1e-50, 0.0;
  const std::string path = scratch("pattern.csv");
  write_pattern_csv(path, s);

  std::string header;
  const auto rows = beamforge::detail::read_csv_rows(path, header);
  CHECK(header == "u,power,power_db");
  REQUIRE(rows.size() == 3);
  CHECK(beamforge::detail::parse_double(rows[0][2], path) == doctest::Approx(20.0));
  CHECK(beamforge::detail::parse_double(rows[1][2], path) == -400.0);
  CHECK(beamforge::detail::parse_double(rows[2][2], path) == -400.0);
  CHECK(beamforge::detail::parse_double(rows[1][1], path) == 1e-50);  // power column unfloored
}

TEST_CASE("spec JSON: minimal file and angle conversion") {
  const nlohmann::json j = {
      {"band", {{"u_p", 0.2}, {"u_s", 0.4}, {"P0", 1.0}, {"eps0", 0.05}}},
      {"elements", 10},
  };
  const DesignSpecFile s = parse_spec_json(j);
  CHECK(s.band.passband_edge == 0.2 * pi);  // stored normalized by pi
  CHECK(s.band.stopband_edge == 0.4 * pi);
  CHECK(s.band.passband_level == 1.0);
  CHECK(s.band.stopband_level == 0.05);
  CHECK(s.band.weight_ratio == 1.0);
  CHECK(s.elements == 10);
  CHECK(s.mode == "toeplitz");
  CHECK(s.energy == 1.0);
  CHECK(s.grid_density == 16);
  CHECK_FALSE(s.equal_power);
}

TEST_CASE("spec JSON: elements auto and field errors") {
  nlohmann::json j = {
      {"band", {{"u_p", 0.2}, {"u_s", 0.4}, {"P0", 1.0}, {"eps0", 0.05}}},
      {"elements", "auto"},
      {"target_delta", 0.01},
  };
  CHECK(parse_spec_json(j).elements == 0);

  auto expect_error = [](nlohmann::json bad, const std::string& needle) {
    try {
      parse_spec_json(bad);
      FAIL_CHECK("expected input_error mentioning '" << needle << "'");
    } catch (const input_error& e) {
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };

  nlohmann::json bad = j;
  bad.erase("target_delta");
  expect_error(bad, "target_delta");

  bad = j;
  bad.erase("band");
  expect_error(bad, "band");

  bad = j;
  bad["band"].erase("u_p");
  expect_error(bad, "band.u_p");

  bad = j;
  bad["band"]["u_s"] = 0.1;  // below u_p: BandSpec validation, prefixed
  expect_error(bad, "spec: band:");

  bad = j;
  bad["elements"] = 2.5;
  expect_error(bad, "elements");

  bad = j;
  bad["elements"] = 0;
  expect_error(bad, "elements");

  bad = j;
  bad["mode"] = "fancy";
  expect_error(bad, "mode");

  bad = j;
  bad["psd_tol"] = 0.0;
  expect_error(bad, "psd_tol");

  bad = j;
  bad["grid_density"] = 3;
  expect_error(bad, "grid_density");

  bad = j;
  bad["energy"] = -1.0;
  expect_error(bad, "energy");
}

TEST_CASE("spec JSON: optimizer block") {
  nlohmann::json j = {
      {"band", {{"u_p", 0.25}, {"u_s", 0.5}, {"P0", 1.0}, {"eps0", 0.02}}},
      {"elements", 6},
      {"mode", "waveforms"},
      {"optimizer",
       {{"objective", "orthogonalize"},
        {"mu", 0.2},
        {"max_iter", 123},
        {"seed", 9},
        {"harmonics", 8},
        {"samples", 64},
        {"gradient_mode", "finite-difference"}}},
  };
  const DesignSpecFile s = parse_spec_json(j);
  CHECK(s.mode == "waveforms");
  CHECK(s.optimizer.objective == "orthogonalize");
  CHECK(s.optimizer.cfg.mu == 0.2);
  CHECK(s.optimizer.cfg.max_iter == 123);
  CHECK(s.optimizer.cfg.seed == 9);
  CHECK(s.optimizer.harmonics == 8);
  CHECK(s.optimizer.samples == 64);
  CHECK(s.optimizer.cfg.gradient_mode == GradientMode::finite_difference);

  nlohmann::json bad = j;
  bad["optimizer"]["gradient_mode"] = "magic";
  CHECK_THROWS_AS(parse_spec_json(bad), input_error);

  bad = j;
  bad["optimizer"]["mu"] = 1.5;  // config validation, prefixed with context
  try {
    parse_spec_json(bad);
    FAIL_CHECK("expected optimizer config rejection");
  } catch (const input_error& e) {
    CHECK(std::string(e.what()).find("spec: optimizer:") != std::string::npos);
  }

  bad = j;
  bad["optimizer"]["objective"] = "minimize";
  CHECK_THROWS_AS(parse_spec_json(bad), input_error);
}

TEST_CASE("spec file reader: bad JSON and non-objects") {
  const std::string p1 = scratch("bad.json");
  write_text(p1, "{ not json");
  CHECK_THROWS_AS(read_spec_file(p1), input_error);

  const std::string p2 = scratch("array.json");
  write_text(p2, "[1,2,3]\n");
  CHECK_THROWS_AS(read_spec_file(p2), input_error);

  CHECK_THROWS_AS(read_spec_file(scratch("missing.json")), input_error);
}

TEST_CASE("report file: stages accumulate, corrupt files are replaced") {
  const std::string path = scratch("report.json");
  fs::remove(path);

  update_report_file(path, "design", {{"delta", 0.01}});
  update_report_file(path, "realize", {{"mode", "tbp"}});
  {
    std::ifstream f(path);
    nlohmann::json j;
    f >> j;
    REQUIRE(j.is_object());
    CHECK(j.contains("design"));
    CHECK(j.contains("realize"));
    CHECK(j["design"]["delta"] == 0.01);
  }

  update_report_file(path, "design", {{"delta", 0.02}});  // same key overwrites
  {
    std::ifstream f(path);
    nlohmann::json j;
    f >> j;
    CHECK(j["design"]["delta"] == 0.02);
    CHECK(j.contains("realize"));
  }

  write_text(path, "not a json file");
  update_report_file(path, "fresh", {{"ok", true}});
  {
    std::ifstream f(path);
    nlohmann::json j;
    f >> j;
    REQUIRE(j.is_object());
    CHECK(j.contains("fresh"));
    CHECK(j.size() == 1);  // corrupt content dropped, not merged
  }
}

TEST_CASE("metrics serialize with stable keys") {
  PatternMetrics m;
  m.passband_ripple = 0.01;
  m.stopband_peak = 0.002;
  m.stopband_peak_db = -26.99;
  m.transition_width = 0.2;
  const nlohmann::json j = metrics_to_json(m);
  CHECK(j["passband_ripple"] == 0.01);
  CHECK(j["stopband_peak"] == 0.002);
  CHECK(j["stopband_peak_db"] == -26.99);
  CHECK(j["transition_width"] == 0.2);
}
