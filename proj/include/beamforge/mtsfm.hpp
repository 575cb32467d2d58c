#pragma once

// Multi-Tone Sinusoidal Frequency Modulated (MTSFM) waveform sets:
// constant-envelope waveforms whose phase is a finite Fourier sine series,
//     x_m[n] = sqrt(E/(M*N)) * exp(j * sum_p alpha_{m,p} sin(2*pi*p*n/N)),
// plus their correlation matrices, RMS bandwidths, and the analytic
// gradients used by the constrained optimizers.

#include <cmath>
#include <complex>
#include <optional>

#include "beamforge/common.hpp"
#include "beamforge/corr_synth.hpp"

namespace beamforge {

struct MtsfmParams {
  int M = 0;           // waveform count
  int N = 0;           // samples per waveform
  int P = 0;           // harmonic count
  double E = 1.0;      // total energy across the set
  MatrixXd alpha;      // M x P phase coefficients (radians)

  void validate() const {
    if (M < 1 || N < 1 || P < 1)
      throw input_error("mtsfm: M, N, P must all be >= 1");
    if (N < 2 * P + 1)
      throw input_error("mtsfm: need N >= 2P+1 to resolve " + std::to_string(P) +
                        " harmonics on " + std::to_string(N) + " samples");
    if (!(E > 0.0)) throw input_error("mtsfm: energy must be > 0");
    if (alpha.rows() != M || alpha.cols() != P)
      throw input_error("mtsfm: alpha must be M x P");
    if (!alpha.allFinite()) throw input_error("mtsfm: alpha must be finite");
  }
};

struct WaveformSet {
  MatrixXcd samples;  // M x N
  std::optional<MtsfmParams> params;
};

// Centered second spectral moment of a single waveform over DFT bins mapped
// to (-fs/2, fs/2].  Direct O(N^2) DFT: this is the standalone oracle; the
// optimizer engine below uses a cached transform matrix instead.
template <typename Derived>
double rms_bandwidth(const Eigen::MatrixBase<Derived>& x, double sample_rate) {
  const Eigen::Index N = x.size();
  if (N < 1) throw input_error("rms_bandwidth: empty waveform");
  if (!(sample_rate > 0.0)) throw input_error("rms_bandwidth: sample_rate must be > 0");
  VectorXd pk(N), f(N);
  double etot = 0.0;
  for (Eigen::Index k = 0; k < N; ++k) {
    std::complex<double> acc(0.0, 0.0);
    for (Eigen::Index n = 0; n < N; ++n)
      acc += std::complex<double>(x[n]) * std::polar(1.0, -2.0 * pi * k * n / N);
    pk[k] = std::norm(acc);
    etot += pk[k];
    const Eigen::Index kk = 2 * k <= N ? k : k - N;  // bins in (-fs/2, fs/2]
    f[k] = sample_rate * static_cast<double>(kk) / static_cast<double>(N);
  }
  if (etot <= 0.0) throw input_error("rms_bandwidth: zero-energy waveform");
  const double fbar = pk.dot(f) / etot;
  return (pk.array() * (f.array() - fbar).square()).sum() / etot;
}

// Workspace for waveform synthesis and the two optimization objectives.
// Precomputes the sine basis S (N x P), the DFT matrix, and the bin grid.
// All frequency quantities are in "bin" units (sample_rate = N), so the
// initializer reference (P^2)/3 is dimensionless in the same convention.
class MtsfmEngine {
 public:
  MtsfmEngine(int M, int N, int P, double E) : M_(M), N_(N), P_(P), E_(E) {
    MtsfmParams chk{M, N, P, E, MatrixXd::Zero(M, P)};
    chk.validate();
    A_ = std::sqrt(E / (static_cast<double>(M) * N));
    S_.resize(N, P);
    for (int n = 0; n < N; ++n)
      for (int p = 0; p < P; ++p) S_(n, p) = std::sin(2.0 * pi * (p + 1) * n / N);
    F_.resize(N, N);
    for (int k = 0; k < N; ++k)
      for (int n = 0; n < N; ++n) F_(n, k) = std::polar(1.0, -2.0 * pi * k * static_cast<double>(n) / N);
    f_.resize(N);
    for (int k = 0; k < N; ++k) f_[k] = 2 * k <= N ? k : k - N;
  }

  int M() const { return M_; }
  int N() const { return N_; }
  int P() const { return P_; }
  double E() const { return E_; }
  double amplitude() const { return A_; }
  const MatrixXd& sine_basis() const { return S_; }

  // Unit-modulus phase factors Z = exp(j * alpha * S^T), M x N.
  MatrixXcd phase_factors(const MatrixXd& alpha) const {
    const MatrixXd phi = alpha * S_.transpose();
    MatrixXcd Z(phi.rows(), phi.cols());
    for (Eigen::Index i = 0; i < phi.rows(); ++i)
      for (Eigen::Index j = 0; j < phi.cols(); ++j) Z(i, j) = std::polar(1.0, phi(i, j));
    return Z;
  }

  MatrixXcd waveforms(const MatrixXd& alpha) const { return A_ * phase_factors(alpha); }

  MatrixXcd correlation(const MatrixXcd& X) const { return X * X.adjoint(); }

  // Per-waveform centered second spectral moments (bin units).
  VectorXd beta_sq(const MatrixXd& alpha) const {
    const MatrixXcd Xs = waveforms(alpha) * F_;
    VectorXd b2(alpha.rows());
    for (Eigen::Index m = 0; m < alpha.rows(); ++m) b2[m] = row_moment(Xs.row(m));
    return b2;
  }

  double beta_sq_row(const Eigen::RowVectorXd& alpha_row) const {
    MatrixXd a(1, P_);
    a.row(0) = alpha_row;
    const MatrixXcd Xs = (A_ * phase_factors(a)) * F_;
    return row_moment(Xs.row(0));
  }

  // beta^2 values and their gradient w.r.t. alpha.  The spectral energy is
  // constant under the phase-only parameterization, so only the numerator
  // and the centroid vary.
  void beta_sq_grad(const MatrixXd& alpha, VectorXd& b2, MatrixXd& G) const {
    const MatrixXcd X = waveforms(alpha);
    const MatrixXcd Xs = X * F_;
    const Eigen::Index M = alpha.rows();
    b2.resize(M);
    MatrixXcd WXs(M, N_);
    for (Eigen::Index m = 0; m < M; ++m) {
      double etot = 0.0, fsum = 0.0;
      for (int k = 0; k < N_; ++k) {
        const double p = std::norm(Xs(m, k));
        etot += p;
        fsum += p * f_[k];
      }
      const double fbar = fsum / etot;
      double acc = 0.0;
      for (int k = 0; k < N_; ++k) {
        const double w = (f_[k] - fbar) * (f_[k] - fbar) / etot;
        acc += std::norm(Xs(m, k)) * w;
        WXs(m, k) = w * std::conj(Xs(m, k));
      }
      b2[m] = acc;
    }
    const MatrixXcd V = WXs * F_;
    G = -2.0 * (V.cwiseProduct(X)).imag() * S_;
  }

  // Coefficient-matching objective: || diag_sums(R{alpha}) - target ||^2.
  // The trace term is structurally constant (constant envelope fixes
  // r_hat_0 = E), so it contributes a constant offset and no gradient.
  double fit_objective_grad(const MatrixXd& alpha, const VectorXd& target, MatrixXd& G) const {
    const MatrixXcd Z = phase_factors(alpha);
    const MatrixXcd R = (A_ * Z) * (A_ * Z).adjoint();
    const VectorXd rhat = diagonal_sums(R);
    const VectorXd e = rhat - target;
    MatrixXd Theta(M_, M_);
    for (int i = 0; i < M_; ++i)
      for (int j = 0; j < M_; ++j) Theta(i, j) = e[std::abs(i - j)];
    G = 2.0 * A_ * A_ * (Z.conjugate().cwiseProduct(Theta * Z)).imag() * S_;
    return e.squaredNorm();
  }

  // Orthogonality objective: (E/M) * || R{alpha} - (E/M) I ||_F^2.
  double orth_objective_grad(const MatrixXd& alpha, MatrixXd& G) const {
    const MatrixXcd Z = phase_factors(alpha);
    const MatrixXcd R = (A_ * Z) * (A_ * Z).adjoint();
    const double c = E_ / M_;
    MatrixXcd B = R;
    B.diagonal().array() -= c;
    const MatrixXcd Theta = 2.0 * c * B;
    G = 2.0 * A_ * A_ * (Z.conjugate().cwiseProduct(Theta * Z)).imag() * S_;
    return c * B.squaredNorm();
  }

 private:
  template <typename Row>
  double row_moment(const Row& xs) const {
    double etot = 0.0, fsum = 0.0;
    for (int k = 0; k < N_; ++k) {
      const double p = std::norm(xs[k]);
      etot += p;
      fsum += p * f_[k];
    }
    const double fbar = fsum / etot;
    double acc = 0.0;
    for (int k = 0; k < N_; ++k) acc += std::norm(xs[k]) * (f_[k] - fbar) * (f_[k] - fbar);
    return acc / etot;
  }

  int M_, N_, P_;
  double E_, A_;
  MatrixXd S_;
  MatrixXcd F_;
  VectorXd f_;
};

// Waveform synthesis from explicit parameters (spec-level operation).
inline WaveformSet synthesize(const MtsfmParams& params) {
  params.validate();
  MtsfmEngine eng(params.M, params.N, params.P, params.E);
  WaveformSet ws;
  ws.samples = eng.waveforms(params.alpha);
  ws.params = params;
  return ws;
}

// Correlation matrix of an arbitrary waveform set: R = X X^H.
inline MatrixXcd correlation(const WaveformSet& X) {
  if (X.samples.rows() < 1 || X.samples.cols() < 1)
    throw input_error("correlation: empty waveform set");
  return X.samples * X.samples.adjoint();
}

// Seeded initialization: alpha ~ uniform(-2/P, 2/P), then each row scaled by
// bisection so its beta^2 (bin units) matches a common reference.  The
// default reference (P^2)/3 is the variance of a uniform power spectrum
// spanning the 2P+1 occupied bins -- rows initialized this way have enough
// bandwidth for the orthogonalization problem to be feasible.
inline MatrixXd init_alpha(const MtsfmEngine& eng, std::uint64_t seed, double beta_sq_target = 0.0) {
  const int M = eng.M(), P = eng.P();
  if (beta_sq_target <= 0.0) beta_sq_target = static_cast<double>(P) * P / 3.0;
  Rng rng(seed);
  MatrixXd a(M, P);
  for (int m = 0; m < M; ++m)
    for (int p = 0; p < P; ++p) a(m, p) = rng.uniform(-2.0 / P, 2.0 / P);
  MatrixXd out(M, P);
  for (int m = 0; m < M; ++m) {
    const Eigen::RowVectorXd row = a.row(m);
    const auto b2_at = [&](double t) { return eng.beta_sq_row(t * row); };
    double lo = 0.0, hi = 1.0;
    while (b2_at(hi) < beta_sq_target && hi < 512.0) hi *= 2.0;
    if (b2_at(hi) < beta_sq_target)
      throw input_error("init_alpha: cannot reach beta^2 reference " + fmt17(beta_sq_target));
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (lo + hi);
      (b2_at(mid) < beta_sq_target ? lo : hi) = mid;
    }
    out.row(m) = 0.5 * (lo + hi) * row;
  }
  return out;
}

}  // namespace beamforge
