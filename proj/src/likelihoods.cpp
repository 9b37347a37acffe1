#include "ihgp/likelihoods.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "ihgp/errors.hpp"

namespace ihgp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTauMin = 1e-10;
constexpr double kLog2Pi = 1.8378770664093454836;

void check_label(double y, const char* name) {
  if (y != 1.0 && y != -1.0) {
    throw ParameterError(std::string(name) + " labels must be -1 or +1");
  }
}

/// Convert matched posterior moments to a site (eta, gamma).
SitePair site_from_moments(double mu, double s2, double post_mean,
                           double post_var, double log_z) {
  const double tau = 1.0 / post_var - 1.0 / s2;
  if (!(tau > kTauMin)) {
    SitePair site;
    site.eta = 0.0;
    site.gamma = kInf;
    site.log_z = log_z;
    site.clamped = true;
    return site;
  }
  const double nu = post_mean / post_var - mu / s2;
  SitePair site;
  site.eta = nu / tau;
  site.gamma = 1.0 / tau;
  site.log_z = log_z;
  return site;
}

}  // namespace

Likelihood Likelihood::gaussian(double sigma2) {
  if (!(sigma2 > 0.0)) throw ParameterError("noise variance must be positive");
  Likelihood lik;
  lik.kind = LikelihoodKind::Gaussian;
  lik.noise_sigma2 = sigma2;
  return lik;
}

Likelihood Likelihood::poisson(int quadrature_order) {
  Likelihood lik;
  lik.kind = LikelihoodKind::Poisson;
  lik.quadrature_order = quadrature_order;
  return lik;
}

Likelihood Likelihood::bernoulli_logit(int quadrature_order) {
  Likelihood lik;
  lik.kind = LikelihoodKind::BernoulliLogit;
  lik.quadrature_order = quadrature_order;
  return lik;
}

Likelihood Likelihood::bernoulli_probit(int quadrature_order) {
  Likelihood lik;
  lik.kind = LikelihoodKind::BernoulliProbit;
  lik.quadrature_order = quadrature_order;
  return lik;
}

Likelihood Likelihood::from_json(const nlohmann::json& doc) {
  const std::string name = doc.value("name", "gaussian");
  const int order = doc.value("quadrature_order", 31);
  if (name == "gaussian") return gaussian(doc.value("sigma2", 0.1));
  if (name == "poisson") return poisson(order);
  if (name == "logit") return bernoulli_logit(order);
  if (name == "probit") return bernoulli_probit(order);
  throw ConfigError("unknown likelihood '" + name + "'");
}

nlohmann::json Likelihood::to_json() const {
  switch (kind) {
    case LikelihoodKind::Gaussian:
      return {{"name", "gaussian"}, {"sigma2", noise_sigma2}};
    case LikelihoodKind::Poisson:
      return {{"name", "poisson"}, {"quadrature_order", quadrature_order}};
    case LikelihoodKind::BernoulliLogit:
      return {{"name", "logit"}, {"quadrature_order", quadrature_order}};
    case LikelihoodKind::BernoulliProbit:
      return {{"name", "probit"}, {"quadrature_order", quadrature_order}};
  }
  return {};
}

double log_normal_pdf(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * (kLog2Pi + std::log(var) + d * d / var);
}

double log_ndtr(double z) {
  if (z > -30.0) {
    return std::log(0.5 * std::erfc(-z / std::numbers::sqrt2));
  }
  // Asymptotic expansion of the Mills ratio for the far left tail.
  const double z2 = z * z;
  const double series =
      1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2);
  return -0.5 * z2 - 0.5 * kLog2Pi - std::log(-z) + std::log(series);
}

double eval_log_density(const Likelihood& lik, double y, double f) {
  switch (lik.kind) {
    case LikelihoodKind::Gaussian:
      return log_normal_pdf(y, f, lik.noise_sigma2);
    case LikelihoodKind::Poisson: {
      if (!(y >= 0.0) || std::abs(y - std::round(y)) > 1e-9) {
        throw ParameterError("poisson observations must be non-negative counts");
      }
      return y * f - std::exp(f) - std::lgamma(y + 1.0);
    }
    case LikelihoodKind::BernoulliLogit: {
      check_label(y, "logit");
      const double margin = y * f;
      if (margin < -33.0) return margin;
      return -std::log1p(std::exp(-margin));
    }
    case LikelihoodKind::BernoulliProbit: {
      check_label(y, "probit");
      return log_ndtr(y * f);
    }
  }
  throw ParameterError("unknown likelihood");
}

GaussHermite::GaussHermite(int order) {
  if (order < 11 || order % 2 == 0) {
    throw ParameterError("quadrature order must be odd and >= 11");
  }
  // Golub-Welsch on the Jacobi matrix of the (physicists') Hermite recurrence.
  Matrix jac = Matrix::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    jac(k, k - 1) = jac(k - 1, k) = std::sqrt(0.5 * k);
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(jac);
  nodes_ = es.eigenvalues();
  const double mu0 = std::sqrt(std::numbers::pi);
  weights_ = mu0 * es.eigenvectors().row(0).transpose().array().square();
}

std::shared_ptr<const GaussHermite> GaussHermite::table(int order) {
  static std::mutex mutex;
  static std::map<int, std::shared_ptr<const GaussHermite>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(order);
  if (it == cache.end()) {
    it = cache.emplace(order, std::make_shared<GaussHermite>(order)).first;
  }
  return it->second;
}

SitePair moment_match_quadrature(const Likelihood& lik, double y, double mu,
                                 double s2) {
  if (!(s2 > 0.0)) throw ParameterError("cavity variance must be positive");
  const auto gh = GaussHermite::table(lik.quadrature_order);
  const int q = gh->order();
  const double s = std::sqrt(s2);

  Vector f(q), lw(q);
  double lw_max = -kInf;
  for (int i = 0; i < q; ++i) {
    f(i) = mu + std::numbers::sqrt2 * s * gh->nodes()(i);
    lw(i) = std::log(gh->weights()(i)) + eval_log_density(lik, y, f(i));
    lw_max = std::max(lw_max, lw(i));
  }
  if (!std::isfinite(lw_max)) {
    throw NumericalError("moment matching: tilted density vanished everywhere");
  }
  double z_core = 0.0;
  for (int i = 0; i < q; ++i) z_core += std::exp(lw(i) - lw_max);
  const double log_z_core = lw_max + std::log(z_core);
  const double log_z = log_z_core - 0.5 * std::log(std::numbers::pi);

  double post_mean = 0.0;
  for (int i = 0; i < q; ++i) {
    post_mean += std::exp(lw(i) - log_z_core) * f(i);
  }
  double post_var = 0.0;
  for (int i = 0; i < q; ++i) {
    const double d = f(i) - post_mean;
    post_var += std::exp(lw(i) - log_z_core) * d * d;
  }
  return site_from_moments(mu, s2, post_mean, post_var, log_z);
}

SitePair moment_match(const Likelihood& lik, double y, double mu, double s2) {
  if (!(s2 > 0.0)) throw ParameterError("cavity variance must be positive");
  switch (lik.kind) {
    case LikelihoodKind::Gaussian: {
      // Exact conjugate site; cavity enters only the normalizer.
      SitePair site;
      site.eta = y;
      site.gamma = lik.noise_sigma2;
      site.log_z = log_normal_pdf(y, mu, s2 + lik.noise_sigma2);
      return site;
    }
    case LikelihoodKind::BernoulliProbit: {
      check_label(y, "probit");
      const double denom = std::sqrt(1.0 + s2);
      const double z = y * mu / denom;
      const double log_z = log_ndtr(z);
      const double ratio = std::exp(log_normal_pdf(z, 0.0, 1.0) - log_z);
      const double post_mean = mu + y * s2 * ratio / denom;
      const double post_var =
          s2 - s2 * s2 * ratio / (1.0 + s2) * (z + ratio);
      return site_from_moments(mu, s2, post_mean, post_var, log_z);
    }
    default:
      return moment_match_quadrature(lik, y, mu, s2);
  }
}

}  // namespace ihgp
