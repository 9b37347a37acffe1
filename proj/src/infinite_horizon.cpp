#include "ihgp/infinite_horizon.hpp"

#include <cmath>
#include <limits>

#include "ihgp/errors.hpp"

namespace ihgp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

IhgpResult ihgp_infer(const DiscreteModel& model, const GammaGrid& grid,
                      const Vector& y, const Likelihood& lik) {
  if (grid.model().dim() != model.dim()) {
    throw ConfigError("ihgp_infer: grid was built for a different model");
  }
  const int n = static_cast<int>(y.size());
  if (n == 0) throw ParameterError("empty observation series");
  const int m = model.dim();
  const Matrix& a = model.transition;
  const Vector& h = model.measurement;
  const double gamma_lo = grid.options().gamma_min;
  const double gamma_hi = grid.options().gamma_max;

  IhgpResult out;
  out.site_variances.resize(n);
  out.marginals.mean.resize(n);
  out.marginals.var.resize(n);

  Matrix filt_means(m, n);
  Vector etas(n);

  // Single-entry slice caches: constant-gamma runs (Gaussian likelihood,
  // missing data) hit them every step.
  double pred_key = std::numeric_limits<double>::quiet_NaN();
  Vector pred_pph;
  double pred_hph = 0.0;
  auto predictive = [&](double gamma) {
    if (!(gamma == pred_key)) {
      grid.predictive_slice(gamma, &pred_pph, &pred_hph);
      pred_key = gamma;
    }
  };

  Vector mf = Vector::Zero(m);
  double gamma_prev = kInf;  // the first predictive covariance is Pinf
  for (int i = 0; i < n; ++i) {
    predictive(gamma_prev);
    const Vector am = a * mf;
    const double cav_mean = h.dot(am);
    const double cav_var = pred_hph;

    SitePair site;
    if (std::isnan(y(i))) {
      site.gamma = kInf;
    } else if (lik.is_gaussian()) {
      site.eta = y(i);
      site.gamma = lik.noise_sigma2;
      const double s = cav_var + site.gamma;
      site.log_z = -0.5 * (std::log(2.0 * M_PI * s) +
                           (y(i) - cav_mean) * (y(i) - cav_mean) / s);
    } else {
      site = moment_match(lik, y(i), cav_mean, cav_var);
      if (site.clamped) ++out.clamped_sites;
    }
    if (!std::isnan(y(i))) out.marginals.log_lik += site.log_z;

    if (std::isinf(site.gamma)) {
      mf = am;
    } else {
      if (site.gamma < gamma_lo || site.gamma > gamma_hi) ++out.grid_range_hits;
      const double s = cav_var + site.gamma;
      const Vector k = pred_pph / s;
      mf = am + k * (site.eta - cav_mean);
      // Filter-variance diagnostic: printed update vs stationary identity.
      const double hk = cav_var / s;
      const double printed = cav_var - site.gamma * hk * hk;
      const double stationary = cav_var * site.gamma / s;
      out.filt_var_form_gap =
          std::max(out.filt_var_form_gap, std::abs(printed - stationary));
    }
    filt_means.col(i) = mf;
    out.site_variances(i) = site.gamma;
    gamma_prev = site.gamma;
  }

  // Backward pass: means by the time-invariant recursion, covariances from
  // the local steady-state smoother.
  double smooth_key = std::numeric_limits<double>::quiet_NaN();
  Matrix smooth_g;
  double smooth_psh = 0.0;
  auto smoother = [&](double gamma) {
    if (!(gamma == smooth_key)) {
      grid.smoother_slice(gamma, &smooth_g, &smooth_psh);
      smooth_key = gamma;
    }
  };

  Vector ms = filt_means.col(n - 1);
  smoother(out.site_variances(n - 1));
  out.marginals.mean(n - 1) = h.dot(ms);
  out.marginals.var(n - 1) = smooth_psh;
  for (int i = n - 2; i >= 0; --i) {
    smoother(out.site_variances(i));
    const Vector mf_i = filt_means.col(i);
    ms = mf_i + smooth_g * (ms - a * mf_i);
    out.marginals.mean(i) = h.dot(ms);
    out.marginals.var(i) = smooth_psh;
  }
  return out;
}

SteadyGaussianResult steady_gaussian_filter(const DiscreteModel& model,
                                            const Matrix& pp, const Vector& y,
                                            double noise_sigma2) {
  const int n = static_cast<int>(y.size());
  if (n == 0) throw ParameterError("empty observation series");
  if (!(noise_sigma2 > 0.0)) {
    throw ParameterError("noise variance must be positive");
  }
  const int m = model.dim();
  const Matrix& a = model.transition;
  const Vector& h = model.measurement;

  SteadyGaussianResult out;
  out.gain = stationary_gain(pp, h, noise_sigma2);
  out.innovation_var = h.dot(pp * h) + noise_sigma2;
  out.filt_means.resize(m, n);

  const double log_s_term = std::log(2.0 * M_PI * out.innovation_var);
  Vector mf = Vector::Zero(m);
  double sum_v2 = 0.0;
  int n_obs = 0;
  for (int i = 0; i < n; ++i) {
    const Vector am = a * mf;
    if (std::isnan(y(i))) {
      mf = am;
    } else {
      const double v = y(i) - h.dot(am);
      sum_v2 += v * v;
      ++n_obs;
      mf = am + out.gain * v;
    }
    out.filt_means.col(i) = mf;
  }
  out.log_lik = -0.5 * n_obs * log_s_term - sum_v2 / (2.0 * out.innovation_var);
  return out;
}

PosteriorMarginals steady_gaussian_marginals(const DiscreteModel& model,
                                             const Vector& y,
                                             double noise_sigma2) {
  const SteadyStateSet ss = solve_steady_state(model, noise_sigma2);
  const SteadyGaussianResult fwd =
      steady_gaussian_filter(model, ss.pred_cov, y, noise_sigma2);

  const int n = static_cast<int>(y.size());
  const Matrix& a = model.transition;
  const Vector& h = model.measurement;
  const double smooth_var = std::max(0.0, h.dot(ss.smooth_cov * h));

  PosteriorMarginals out;
  out.mean.resize(n);
  out.var.setConstant(n, smooth_var);
  out.log_lik = fwd.log_lik;

  Vector ms = fwd.filt_means.col(n - 1);
  out.mean(n - 1) = h.dot(ms);
  for (int i = n - 2; i >= 0; --i) {
    const Vector mf_i = fwd.filt_means.col(i);
    ms = mf_i + ss.smoother_gain * (ms - a * mf_i);
    out.mean(i) = h.dot(ms);
  }
  return out;
}

}  // namespace ihgp
