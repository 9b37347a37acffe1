#pragma once

#include "ihgp/kernels.hpp"
#include "ihgp/linalg.hpp"

namespace ihgp {

/// Continuous-time LTI SDE prior: df = F f dt + L dw with spectral density Qc,
/// observed through h, stationary state covariance Pinf.
struct LtiSde {
  Matrix feedback;        // F, m x m
  Matrix noise_effect;    // L, m x s
  Matrix diffusion;       // Qc, s x s
  Vector measurement;     // h, m
  Matrix stationary_cov;  // Pinf, m x m

  int dim() const { return static_cast<int>(feedback.rows()); }
  Matrix noise_cov() const {
    return noise_effect * diffusion * noise_effect.transpose();
  }
};

/// Step-invariant discrete-time model: f_i ~ N(A f_{i-1}, Q), y ~ p(y | h'f).
struct DiscreteModel {
  Matrix transition;     // A
  Matrix process_noise;  // Q
  Vector measurement;    // h
  Matrix initial_cov;    // P0 (= Pinf for stationary priors)
  double dt = 0.0;

  int dim() const { return static_cast<int>(transition.rows()); }
};

/// Matern state space. nu must be one of 1/2, 3/2, 5/2.
LtiSde build_matern(double nu, double sigma2, double ell);

/// Periodic state space: block-diagonal harmonic oscillators j = 0..J-1 at
/// frequencies 2*pi*j/period with Bessel-expansion variances normalized to
/// sum to sigma2 (the j = 0 block carries the series' constant term).
LtiSde build_periodic(double sigma2, double period, int harmonics = 6,
                      double ell = 1.0);

/// Block-diagonal concatenation (kernel sum).
LtiSde combine_sum(const LtiSde& a, const LtiSde& b);

/// Kronecker-sum state space (kernel product). The diffusion is constructed
/// so the Lyapunov identity holds for Pinf_a (x) Pinf_b.
LtiSde combine_product(const LtiSde& a, const LtiSde& b);

/// Compile a kernel specification tree into a single SDE model.
LtiSde build_sde(const KernelSpec& spec);

/// Symmetric PSD solution of F P + P F^T + L Qc L^T = 0.
Matrix stationary_covariance(const Matrix& f, const Matrix& l, const Matrix& qc);

/// A = expm(F dt), Q = Pinf - A Pinf A^T (symmetrized), P0 = Pinf.
DiscreteModel discretize(const LtiSde& sde, double dt);

}  // namespace ihgp
