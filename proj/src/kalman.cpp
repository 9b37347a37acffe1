#include "ihgp/kalman.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Cholesky>

#include "ihgp/errors.hpp"

namespace ihgp {

namespace {

FilterResult run_filter(const DiscreteModel& model, const Vector& y,
                        const Likelihood& lik) {
  const int n = static_cast<int>(y.size());
  if (n == 0) throw ParameterError("empty observation series");
  const int m = model.dim();
  const Matrix& a = model.transition;
  const Vector& h = model.measurement;

  FilterResult out;
  out.pred_mean.reserve(n);
  out.pred_cov.reserve(n);
  out.filt_mean.reserve(n);
  out.filt_cov.reserve(n);
  out.sites.reserve(n);
  out.gains.reserve(n);

  Vector mf = Vector::Zero(m);
  Matrix pf = model.initial_cov;
  const Matrix ident = Matrix::Identity(m, m);

  for (int i = 0; i < n; ++i) {
    Vector mp = i == 0 ? Vector::Zero(m) : Vector(a * mf);
    Matrix pp = i == 0 ? model.initial_cov
                       : symmetrized(a * pf * a.transpose() + model.process_noise);

    const double cav_mean = h.dot(mp);
    const double cav_var = std::max(0.0, h.dot(pp * h));

    SitePair site;
    if (std::isnan(y(i))) {
      site.eta = 0.0;
      site.gamma = std::numeric_limits<double>::infinity();
      site.log_z = 0.0;
    } else {
      site = moment_match(lik, y(i), cav_mean, cav_var);
      if (site.clamped) ++out.clamped_sites;
      out.log_lik += site.log_z;
    }

    if (std::isinf(site.gamma)) {
      mf = mp;
      pf = pp;
      out.gains.push_back(Vector::Zero(m));
    } else {
      const double s = cav_var + site.gamma;
      if (!(s > 0.0)) {
        throw NumericalError("kalman update: innovation variance <= 0 at step " +
                             std::to_string(i));
      }
      const Vector k = (pp * h) / s;
      mf = mp + k * (site.eta - cav_mean);
      // Joseph form keeps the covariance PSD over long recursions.
      const Matrix j = ident - k * h.transpose();
      pf = symmetrized(j * pp * j.transpose() +
                       site.gamma * k * k.transpose());
      out.gains.push_back(k);
    }

    out.pred_mean.push_back(std::move(mp));
    out.pred_cov.push_back(std::move(pp));
    out.filt_mean.push_back(mf);
    out.filt_cov.push_back(pf);
    out.sites.push_back(site);
  }
  return out;
}

}  // namespace

FilterResult kalman_filter(const DiscreteModel& model, const Vector& y,
                           double noise_sigma2) {
  return run_filter(model, y, Likelihood::gaussian(noise_sigma2));
}

FilterResult adf_filter(const DiscreteModel& model, const Vector& y,
                        const Likelihood& lik) {
  return run_filter(model, y, lik);
}

SmootherResult rts_smoother(const DiscreteModel& model,
                            const FilterResult& filter) {
  const int n = static_cast<int>(filter.filt_mean.size());
  if (n == 0) throw ParameterError("rts_smoother: empty filter output");
  const Matrix& a = model.transition;
  const Vector& h = model.measurement;

  SmootherResult out;
  out.mean.resize(n);
  out.cov.resize(n);
  out.marginals.mean.resize(n);
  out.marginals.var.resize(n);
  out.marginals.log_lik = filter.log_lik;

  out.mean[n - 1] = filter.filt_mean[n - 1];
  out.cov[n - 1] = filter.filt_cov[n - 1];

  for (int i = n - 2; i >= 0; --i) {
    const Matrix& pp_next = filter.pred_cov[i + 1];
    Eigen::LDLT<Matrix> ldlt(pp_next);
    if (ldlt.info() != Eigen::Success ||
        (ldlt.vectorD().array() <= 0.0).any()) {
      throw ConditioningError(
          "rts_smoother: predictive covariance not positive definite at step " +
          std::to_string(i + 1));
    }
    // G = P^f A^T (P^p)^{-1}, computed by solving against P^p.
    const Matrix g = ldlt.solve(a * filter.filt_cov[i]).transpose();
    out.mean[i] = filter.filt_mean[i] +
                  g * (out.mean[i + 1] - filter.pred_mean[i + 1]);
    out.cov[i] = symmetrized(filter.filt_cov[i] +
                             g * (out.cov[i + 1] - pp_next) * g.transpose());
  }

  for (int i = 0; i < n; ++i) {
    out.marginals.mean(i) = h.dot(out.mean[i]);
    out.marginals.var(i) = std::max(0.0, h.dot(out.cov[i] * h));
  }
  return out;
}

PosteriorMarginals exact_marginals(const DiscreteModel& model, const Vector& y,
                                   const Likelihood& lik) {
  return rts_smoother(model, adf_filter(model, y, lik)).marginals;
}

}  // namespace ihgp
