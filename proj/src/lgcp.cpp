#include "ihgp/lgcp.hpp"

#include <cmath>

#include "ihgp/errors.hpp"
#include "ihgp/infinite_horizon.hpp"
#include "ihgp/kalman.hpp"

namespace ihgp {

BinnedCounts bin_events(const std::vector<double>& timestamps, double t0,
                        double t1, double bin_width) {
  if (!(t0 < t1)) throw ParameterError("bin_events: need t0 < t1");
  if (!(bin_width > 0.0)) throw ParameterError("bin_events: bin_width <= 0");
  for (size_t i = 1; i < timestamps.size(); ++i) {
    if (timestamps[i] < timestamps[i - 1]) {
      throw InputError("bin_events: timestamps must be sorted (index " +
                       std::to_string(i) + ")");
    }
  }
  const int n = static_cast<int>(std::ceil((t1 - t0) / bin_width));
  BinnedCounts out;
  out.bin_width = bin_width;
  out.counts = Vector::Zero(n);
  out.centers.resize(n);
  for (int i = 0; i < n; ++i) out.centers(i) = t0 + (i + 0.5) * bin_width;
  for (double t : timestamps) {
    if (t < t0 || t >= t1) {
      ++out.dropped;
      continue;
    }
    const int idx = std::min(n - 1, static_cast<int>((t - t0) / bin_width));
    out.counts(idx) += 1.0;
  }
  return out;
}

IntensityPosterior fit_intensity(const BinnedCounts& counts,
                                 const KernelSpec& spec, bool use_ihgp,
                                 const GridOptions& grid_opts,
                                 int quadrature_order) {
  if (counts.size() == 0) throw ParameterError("fit_intensity: empty counts");
  const DiscreteModel model = discretize(build_sde(spec), counts.bin_width);
  const Likelihood lik = Likelihood::poisson(quadrature_order);

  PosteriorMarginals marginals;
  if (use_ihgp) {
    const GammaGrid grid(model, grid_opts);
    marginals = ihgp_infer(model, grid, counts.counts, lik).marginals;
  } else {
    marginals = exact_marginals(model, counts.counts, lik);
  }

  const int n = counts.size();
  IntensityPosterior out;
  out.centers = counts.centers;
  out.counts = counts.counts;
  out.bin_width = counts.bin_width;
  out.used_ihgp = use_ihgp;
  out.latent_mean = marginals.mean;
  out.latent_var = marginals.var;
  out.log_lik = marginals.log_lik;
  out.median.resize(n);
  out.lower95.resize(n);
  out.upper95.resize(n);
  for (int i = 0; i < n; ++i) {
    const double sd = std::sqrt(std::max(0.0, marginals.var(i)));
    out.median(i) = std::exp(marginals.mean(i));
    out.lower95(i) = std::exp(marginals.mean(i) - 1.96 * sd);
    out.upper95(i) = std::exp(marginals.mean(i) + 1.96 * sd);
  }
  return out;
}

}  // namespace ihgp
