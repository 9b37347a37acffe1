#pragma once

#include "ihgp/kalman.hpp"
#include "ihgp/steady.hpp"

namespace ihgp {

/// Output of one infinite-horizon inference sweep.
struct IhgpResult {
  PosteriorMarginals marginals;
  Vector site_variances;  // per-step gamma trace (inf on missing/clamped)
  int clamped_sites = 0;
  int grid_range_hits = 0;  // finite gammas clamped to [gamma_min, gamma_max]
  // Largest gap between the printed filter-variance update (Pf = Pp - k g k')
  // and the stationary form (Pf = Pp - k h'Pp), tracked as a diagnostic.
  double filt_var_form_gap = 0.0;
};

/// Infinite-horizon inference: forward pass with per-step steady-state
/// predictive covariances looked up by the previous site variance, moment
/// matching for non-Gaussian likelihoods, and a time-invariant backward pass.
/// NaN entries in y are missing (gamma = inf). All per-step work is O(m^2).
IhgpResult ihgp_infer(const DiscreteModel& model, const GammaGrid& grid,
                      const Vector& y, const Likelihood& lik);

/// Stationary Gaussian filter built on a single DARE solution: time-invariant
/// gain and innovation variance, marginal likelihood as a by-product.
struct SteadyGaussianResult {
  Matrix filt_means;  // m x n state means
  Vector gain;
  double innovation_var = 0.0;  // s = h'Pp h + sigma2
  double log_lik = 0.0;
};

SteadyGaussianResult steady_gaussian_filter(const DiscreteModel& model,
                                            const Matrix& pp, const Vector& y,
                                            double noise_sigma2);

/// Single-DARE fast path: stationary filter plus the time-invariant smoother,
/// returning latent marginals with constant variance h'Ps h.
PosteriorMarginals steady_gaussian_marginals(const DiscreteModel& model,
                                             const Vector& y,
                                             double noise_sigma2);

}  // namespace ihgp
