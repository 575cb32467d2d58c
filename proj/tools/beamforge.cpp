// beamforge: equiripple MIMO transmit beampattern synthesis.
//
// Pipeline subcommands:
//   design    cosine-series coefficients by Remez exchange   -> coeffs.csv
//   realize   correlation matrix / beamspace weights          -> R.csv [W.csv]
//   waveforms constant-envelope MTSFM set optimization        -> alpha.csv, waveforms.csv
//   evaluate  beampattern samples and band metrics            -> pattern.csv, metrics.json
//
// Exit codes: 0 success, 1 input error, 2 non-convergence, 3 realized-matrix
// infeasibility.

#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>

#include <CLI11.hpp>

#include "beamforge/band_spec.hpp"
#include "beamforge/beampattern.hpp"
#include "beamforge/common.hpp"
#include "beamforge/corr_synth.hpp"
#include "beamforge/io.hpp"
#include "beamforge/mtsfm.hpp"
#include "beamforge/optimizer.hpp"
#include "beamforge/remez.hpp"
#include "beamforge/report.hpp"

namespace bf = beamforge;
namespace fs = std::filesystem;

namespace {

struct CliOverrides {
  std::string mode;
  std::string out_dir;
  int grid_n = 4096;
  std::uint64_t seed = 0;
  bool has_seed = false;
  double mu = 0.0;
  bool has_mu = false;
  int max_iter = 0;
  bool has_max_iter = false;
};

std::string resolve_out_dir(const bf::DesignSpecFile& s, const CliOverrides& ov) {
  std::string out = !ov.out_dir.empty() ? ov.out_dir : s.output_dir;
  if (out.empty()) out = ".";
  fs::create_directories(out);
  return out;
}

int resolve_elements(const bf::DesignSpecFile& s) {
  if (s.elements > 0) return s.elements;
  const int M = bf::estimate_elements(s.target_delta, s.band);
  bf::logf(bf::LogLevel::info, "elements \"auto\": target delta %s -> M = %d",
           bf::fmt17(s.target_delta).c_str(), M);
  return M;
}

bf::OptimizerConfig resolve_optimizer(const bf::DesignSpecFile& s, const CliOverrides& ov) {
  bf::OptimizerConfig cfg = s.optimizer.cfg;
  if (ov.has_seed) cfg.seed = ov.seed;
  if (ov.has_mu) cfg.mu = ov.mu;
  if (ov.has_max_iter) cfg.max_iter = ov.max_iter;
  cfg.validate();
  return cfg;
}

// ---------------------------------------------------------------------------

int cmd_design(const bf::DesignSpecFile& s, const CliOverrides& ov) {
  const std::string out = resolve_out_dir(s, ov);
  const int M = resolve_elements(s);
  const bf::RemezResult rr = bf::remez_design(M, s.band, s.grid_density);
  bf::write_coeffs_csv(out + "/coeffs.csv", rr.coeffs);

  bf::DesignReport rep;
  rep.stage = "design";
  rep.M = M;
  rep.delta = rr.delta;
  rep.iterations = rr.iterations;
  rep.converged = rr.converged;
  rep.extremal_angles = rr.extremal_angles;
  const bf::PatternSamples ps =
      bf::pattern_from_coeffs(rr.coeffs, bf::uniform_grid(ov.grid_n));
  rep.stopband_peak_db = bf::metrics(ps, s.band).stopband_peak_db;
  bf::update_report_file(out + "/report.json", "design", bf::to_json(rep));

  if (!rr.converged) {
    bf::logf(bf::LogLevel::error, "design: Remez exchange did not converge in %d iterations",
             rr.iterations);
    return 2;
  }
  bf::logf(bf::LogLevel::info, "design: M=%d delta=%s stopband peak %.3f dB", M,
           bf::fmt17(rr.delta).c_str(), *rep.stopband_peak_db);
  return 0;
}

// ---------------------------------------------------------------------------

int cmd_realize(const bf::DesignSpecFile& s, const CliOverrides& ov,
                const std::string& coeffs_arg) {
  const std::string out = resolve_out_dir(s, ov);
  const std::string coeffs_path = !coeffs_arg.empty() ? coeffs_arg : out + "/coeffs.csv";
  const bf::VectorXd r = bf::read_coeffs_csv(coeffs_path);
  if (s.elements > 0 && r.size() != s.elements)
    throw bf::input_error("realize: coefficient file has " + std::to_string(r.size()) +
                          " rows but the spec requests elements = " + std::to_string(s.elements));

  std::string mode = !ov.mode.empty() ? ov.mode : s.mode;
  if (mode == "waveforms")
    throw bf::input_error("realize: mode 'waveforms' belongs to the waveforms subcommand; "
                          "use toeplitz|psd-fit|tbp here");
  if (mode != "toeplitz" && mode != "psd-fit" && mode != "tbp")
    throw bf::input_error("realize: unknown mode '" + mode + "' (use toeplitz|psd-fit|tbp)");

  bf::DesignReport rep;
  rep.stage = "realize";
  rep.mode = mode;
  rep.M = static_cast<int>(r.size());

  const double r0 = std::max(1e-300, std::abs(r[0]));
  bf::MatrixXd R;
  bool converged = true;

  if (mode == "toeplitz") {
    R = bf::toeplitz_from_coeffs(r);
    const auto [ok, minev] = bf::is_psd(R);
    rep.min_eigenvalue = minev;
    rep.diag_residual = (bf::diagonal_sums(R) - r).cwiseAbs().maxCoeff() / r0;
    rep.converged = ok;
    bf::write_complex_matrix_csv(out + "/R.csv", R.cast<std::complex<double>>());
    bf::update_report_file(out + "/report.json", "realize", bf::to_json(rep));
    if (!ok) {
      bf::logf(bf::LogLevel::error,
               "realize: Toeplitz candidate is not PSD (min eigenvalue %s); "
               "rerun with --mode psd-fit (or tbp) to project onto the PSD cone",
               bf::fmt17(minev).c_str());
      return 3;
    }
    return 0;
  }

  // psd-fit and tbp share the PSD realization; tbp prefers the exact Toeplitz
  // candidate when it happens to be feasible.
  bool used_toeplitz = false;
  if (mode == "tbp") {
    bf::MatrixXd T = bf::toeplitz_from_coeffs(r);
    const auto [ok, minev] = bf::is_psd(T);
    if (ok) {
      R = std::move(T);
      rep.min_eigenvalue = minev;
      rep.diag_residual = (bf::diagonal_sums(R) - r).cwiseAbs().maxCoeff() / r0;
      rep.converged = true;
      used_toeplitz = true;
    }
  }
  if (!used_toeplitz) {
    const bf::PsdFitResult fr = bf::psd_fit(r, s.equal_power, s.psd_max_iter, s.psd_tol);
    R = fr.R;
    converged = fr.converged;
    rep.min_eigenvalue = fr.min_eigenvalue;
    rep.diag_residual = fr.diag_residual;
    rep.power_spread = fr.power_spread;
    rep.iterations = fr.iterations;
    rep.converged = fr.converged;
  }
  bf::write_complex_matrix_csv(out + "/R.csv", R.cast<std::complex<double>>());

  if (mode == "tbp") {
    const bf::TbpWeights tw = bf::tbp_weights(R);
    bf::write_complex_matrix_csv(out + "/W.csv", tw.W.cast<std::complex<double>>());
    rep.factorization_error = (tw.W * tw.W.transpose() - R).norm() / std::max(1e-300, R.norm());
  }
  bf::update_report_file(out + "/report.json", "realize", bf::to_json(rep));

  if (!converged) {
    bf::logf(bf::LogLevel::error,
             "realize: psd_fit did not converge (diag residual %s, min eigenvalue %s)%s",
             bf::fmt17(*rep.diag_residual).c_str(), bf::fmt17(*rep.min_eigenvalue).c_str(),
             s.equal_power ? "; the equal-power constraint may be infeasible at this sidelobe level"
                           : "");
    return 2;
  }
  return 0;
}

// ---------------------------------------------------------------------------

int cmd_waveforms(const bf::DesignSpecFile& s, const CliOverrides& ov,
                  const std::string& target_arg) {
  const std::string out = resolve_out_dir(s, ov);
  std::string objective = !ov.mode.empty() ? ov.mode : s.optimizer.objective;
  if (objective == "waveforms" || objective == "fit") objective = "fit";
  else if (objective != "orthogonalize")
    throw bf::input_error("waveforms: unknown mode '" + objective +
                          "' (use fit|orthogonalize)");

  const bf::OptimizerConfig cfg = resolve_optimizer(s, ov);

  bf::VectorXd target;
  int M = 0;
  if (objective == "fit") {
    const std::string target_path = !target_arg.empty() ? target_arg : out + "/coeffs.csv";
    target = bf::read_coeffs_csv(target_path);
    M = static_cast<int>(target.size());
    if (s.elements > 0 && M != s.elements)
      throw bf::input_error("waveforms: target file has " + std::to_string(M) +
                            " coefficients but the spec requests elements = " +
                            std::to_string(s.elements));
  } else {
    M = resolve_elements(s);
  }

  bf::MtsfmEngine eng(M, s.optimizer.samples, s.optimizer.harmonics, s.energy);
  bf::MtsfmParams init{M, s.optimizer.samples, s.optimizer.harmonics, s.energy,
                       bf::init_alpha(eng, cfg.seed, cfg.beta_sq_ref)};

  auto [params, rep] = objective == "fit" ? bf::fit_coeffs(target, init, cfg)
                                          : bf::orthogonalize(init, cfg);
  rep.mode = objective;

  bf::write_real_matrix_csv(out + "/alpha.csv", params.alpha);
  bf::write_waveforms_csv(out + "/waveforms.csv", bf::synthesize(params).samples);
  bf::update_report_file(out + "/report.json", "waveforms", bf::to_json(rep));

  if (!rep.converged.value_or(false)) {
    bf::logf(bf::LogLevel::error,
             "waveforms: optimizer stalled (objective %s, constraint residual %s); "
             "best iterate written",
             bf::fmt17(rep.objective_final.value_or(0.0)).c_str(),
             bf::fmt17(rep.constraint_residual_max.value_or(0.0)).c_str());
    return 2;
  }
  bf::logf(bf::LogLevel::info, "waveforms: %s objective %s in %d inner iterations",
           objective.c_str(), bf::fmt17(*rep.objective_final).c_str(), *rep.inner_iterations);
  return 0;
}

// ---------------------------------------------------------------------------

std::string csv_header_of(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw bf::input_error("cannot open '" + path + "' for reading");
  std::string header;
  std::getline(f, header);
  while (!header.empty() && (header.back() == '\r' || header.back() == '\n')) header.pop_back();
  return header;
}

int cmd_evaluate(const bf::DesignSpecFile& s, const CliOverrides& ov,
                 const std::string& input_arg) {
  const std::string out = resolve_out_dir(s, ov);
  const std::string input = !input_arg.empty() ? input_arg : out + "/R.csv";
  const bf::VectorXd grid = bf::uniform_grid(ov.grid_n);

  const std::string header = csv_header_of(input);
  const std::string base = fs::path(input).filename().string();

  bf::PatternSamples ps;
  int M = 0;
  if (header == "index,r") {
    const bf::VectorXd r = bf::read_coeffs_csv(input);
    M = static_cast<int>(r.size());
    ps = bf::pattern_from_coeffs(r, grid);
  } else if (header == "m,n,re,im") {
    const bf::MatrixXcd X = bf::read_waveforms_csv(input);
    M = static_cast<int>(X.rows());
    ps = bf::pattern_from_matrix(bf::MatrixXcd(X * X.adjoint()), grid);
  } else if (header.rfind("re0,", 0) == 0) {
    const bf::MatrixXcd A = bf::read_complex_matrix_csv(input);
    const bool as_weights = ov.mode == "tbp" || base == "W.csv";
    M = static_cast<int>(A.rows());
    if (as_weights)
      ps = bf::pattern_from_matrix(bf::MatrixXcd(A * A.adjoint()), grid);
    else
      ps = bf::pattern_from_matrix(A, grid);
  } else {
    throw bf::input_error("evaluate: unrecognized input format in '" + input +
                          "' (expected coeffs, waveforms, or a complex matrix CSV)");
  }
  if (s.elements > 0 && M != s.elements)
    throw bf::input_error("evaluate: input dimension M = " + std::to_string(M) +
                          " does not match spec elements = " + std::to_string(s.elements));

  bf::write_pattern_csv(out + "/pattern.csv", ps);
  const bf::PatternMetrics pm = bf::metrics(ps, s.band);
  bf::write_json_file(out + "/metrics.json", bf::metrics_to_json(pm));
  bf::logf(bf::LogLevel::info, "evaluate: stopband peak %.4f dB, passband ripple %s",
           pm.stopband_peak_db, bf::fmt17(pm.passband_ripple).c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"equiripple MIMO transmit beampattern synthesis"};
  app.require_subcommand(1);

  std::string spec_path;
  std::string positional;
  CliOverrides ov;

  const auto add_common = [&](CLI::App* sub, bool wants_positional) {
    sub->add_option("--spec", spec_path, "design spec file (JSON)")->required();
    sub->add_option("--mode", ov.mode, "pipeline mode override");
    sub->add_option("--out", ov.out_dir, "output directory override");
    sub->add_option("--grid", ov.grid_n, "evaluation grid size")->check(CLI::PositiveNumber);
    auto* so = sub->add_option("--seed", ov.seed, "RNG seed override");
    auto* mo = sub->add_option("--mu", ov.mu, "RMS-bandwidth tolerance override");
    auto* io = sub->add_option("--max-iter", ov.max_iter, "iteration budget override");
    sub->callback([&ov, so, mo, io] {
      ov.has_seed = so->count() > 0;
      ov.has_mu = mo->count() > 0;
      ov.has_max_iter = io->count() > 0;
    });
    if (wants_positional) sub->add_option("input", positional, "input data file");
  };

  CLI::App* design = app.add_subcommand("design", "equiripple cosine-series coefficients");
  add_common(design, false);
  CLI::App* realize = app.add_subcommand("realize", "correlation matrix realization");
  add_common(realize, true);
  CLI::App* waveforms = app.add_subcommand("waveforms", "MTSFM waveform-set optimization");
  add_common(waveforms, true);
  CLI::App* evaluate = app.add_subcommand("evaluate", "beampattern samples and metrics");
  add_common(evaluate, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    const bf::DesignSpecFile spec = bf::read_spec_file(spec_path);
    if (design->parsed()) return cmd_design(spec, ov);
    if (realize->parsed()) return cmd_realize(spec, ov, positional);
    if (waveforms->parsed()) return cmd_waveforms(spec, ov, positional);
    if (evaluate->parsed()) return cmd_evaluate(spec, ov, positional);
    return 1;
  } catch (const bf::input_error& e) {
    bf::logf(bf::LogLevel::error, "%s", e.what());
    return 1;
  } catch (const bf::convergence_error& e) {
    bf::logf(bf::LogLevel::error, "%s", e.what());
    return 2;
  } catch (const bf::infeasible_error& e) {
    bf::logf(bf::LogLevel::error, "%s", e.what());
    return 3;
  } catch (const std::exception& e) {
    bf::logf(bf::LogLevel::error, "unexpected failure: %s", e.what());
    return 1;
  }
}
