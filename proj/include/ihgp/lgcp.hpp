#pragma once

#include <vector>

#include "ihgp/kernels.hpp"
#include "ihgp/steady.hpp"

namespace ihgp {

/// Event counts over equidistant bins; intensities are per bin.
struct BinnedCounts {
  Vector centers;     // bin midpoints
  Vector counts;      // non-negative integers
  double bin_width = 0.0;
  int dropped = 0;    // events outside [t0, t1)

  int size() const { return static_cast<int>(counts.size()); }
};

/// Count sorted timestamps into right-open bins covering [t0, t1). Events
/// outside the range are dropped (reported via `dropped`).
BinnedCounts bin_events(const std::vector<double>& timestamps, double t0,
                        double t1, double bin_width);

/// Per-bin intensity posterior of lambda(t) = exp(f(t)) under the log-normal
/// map of the latent marginals. The per-time-unit rate is median / bin_width.
struct IntensityPosterior {
  Vector centers;
  Vector counts;
  Vector median;
  Vector lower95;
  Vector upper95;
  Vector latent_mean;
  Vector latent_var;
  double log_lik = 0.0;
  double bin_width = 0.0;
  bool used_ihgp = false;
};

/// Poisson-likelihood intensity inference over binned counts, through either
/// the exact state-space ADF sweep or the infinite-horizon approximation.
IntensityPosterior fit_intensity(const BinnedCounts& counts,
                                 const KernelSpec& spec, bool use_ihgp,
                                 const GridOptions& grid_opts = {},
                                 int quadrature_order = 31);

}  // namespace ihgp
