#pragma once

#include <vector>

#include "ihgp/likelihoods.hpp"
#include "ihgp/state_space.hpp"

namespace ihgp {

struct GaussianState {
  Vector mean;
  Matrix cov;
};

/// Per-time latent marginals and the accumulated log marginal likelihood.
struct PosteriorMarginals {
  Vector mean;
  Vector var;
  double log_lik = 0.0;
};

/// Forward-pass output. Missing observations (NaN) skip the update and leave
/// a gamma = inf site behind.
struct FilterResult {
  std::vector<Vector> pred_mean;
  std::vector<Matrix> pred_cov;
  std::vector<Vector> filt_mean;
  std::vector<Matrix> filt_cov;
  std::vector<SitePair> sites;
  std::vector<Vector> gains;  // k_i (zero vector on skipped steps)
  double log_lik = 0.0;
  int clamped_sites = 0;
};

/// Kalman filter with fixed Gaussian noise. NaN entries in y are missing.
FilterResult kalman_filter(const DiscreteModel& model, const Vector& y,
                           double noise_sigma2);

/// Single-sweep EP: moment-match each observation against the predictive
/// cavity and apply the Kalman update with the resulting (eta, gamma) site.
FilterResult adf_filter(const DiscreteModel& model, const Vector& y,
                        const Likelihood& lik);

struct SmootherResult {
  std::vector<Vector> mean;
  std::vector<Matrix> cov;
  PosteriorMarginals marginals;
};

/// Rauch-Tung-Striebel backward recursion over a stored filter pass.
SmootherResult rts_smoother(const DiscreteModel& model,
                            const FilterResult& filter);

/// Filter + smoother convenience wrapper returning latent marginals only.
PosteriorMarginals exact_marginals(const DiscreteModel& model, const Vector& y,
                                   const Likelihood& lik);

}  // namespace ihgp
