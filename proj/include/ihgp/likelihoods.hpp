#pragma once

#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "ihgp/linalg.hpp"

namespace ihgp {

enum class LikelihoodKind { Gaussian, Poisson, BernoulliLogit, BernoulliProbit };

struct Likelihood {
  LikelihoodKind kind = LikelihoodKind::Gaussian;
  double noise_sigma2 = 1.0;   // Gaussian only
  int quadrature_order = 31;   // odd, >= 11

  static Likelihood gaussian(double sigma2);
  static Likelihood poisson(int quadrature_order = 31);
  static Likelihood bernoulli_logit(int quadrature_order = 31);
  static Likelihood bernoulli_probit(int quadrature_order = 31);
  static Likelihood from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;

  bool is_gaussian() const { return kind == LikelihoodKind::Gaussian; }
};

/// Gaussian pseudo-observation (eta) with pseudo-variance (gamma) produced by
/// moment matching, plus the tilted normalizer for the marginal likelihood.
/// gamma is +inf when the site precision was clamped (or the value missing).
struct SitePair {
  double eta = 0.0;
  double gamma = 0.0;
  double log_z = 0.0;
  bool clamped = false;
};

/// log p(y | f). Throws ParameterError for y outside the support.
double eval_log_density(const Likelihood& lik, double y, double f);

/// Match the first two moments of p(y|f) N(f | mu, s2) and convert to site
/// parameters. Closed form for Gaussian and probit, Gauss-Hermite otherwise.
SitePair moment_match(const Likelihood& lik, double y, double mu, double s2);

/// Quadrature route regardless of closed forms (validation path).
SitePair moment_match_quadrature(const Likelihood& lik, double y, double mu,
                                 double s2);

/// Gauss-Hermite rule for weight exp(-x^2): sum w_i g(x_i) ~ integral.
class GaussHermite {
 public:
  explicit GaussHermite(int order);
  const Vector& nodes() const { return nodes_; }
  const Vector& weights() const { return weights_; }
  int order() const { return static_cast<int>(nodes_.size()); }

  /// Shared read-only table for the given order.
  static std::shared_ptr<const GaussHermite> table(int order);

 private:
  Vector nodes_;
  Vector weights_;
};

/// log N(x | mean, var)
double log_normal_pdf(double x, double mean, double var);

/// log Phi(z), stable for large negative z.
double log_ndtr(double z);

}  // namespace ihgp
