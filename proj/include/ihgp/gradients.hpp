#pragma once

#include <string>
#include <vector>

#include "ihgp/infinite_horizon.hpp"
#include "ihgp/kernels.hpp"
#include "ihgp/steady.hpp"

namespace ihgp {

/// Log-domain hyperparameter vector with a name map into the kernel tree.
/// The Gaussian noise variance is appended last when optimize_noise is set.
struct HyperParams {
  KernelSpec kernel;
  double noise_sigma2 = 0.1;
  bool optimize_noise = true;
  std::vector<ParamAddress> kernel_addrs;

  static HyperParams make(KernelSpec spec, double noise_sigma2,
                          bool optimize_noise = true);

  int size() const;
  Vector log_values() const;
  HyperParams with_log_values(const Vector& theta) const;
  std::vector<std::string> names() const;
};

/// Per-parameter derivatives of the discrete model matrices.
struct ModelSensitivity {
  Matrix d_transition;     // dA
  Matrix d_process_noise;  // dQ
  double d_noise_sigma2 = 0.0;
};

struct SensitivitySet {
  DiscreteModel model;
  double noise_sigma2 = 0.0;
  std::vector<ModelSensitivity> params;  // aligned with HyperParams order
  std::vector<std::string> names;
};

/// Analytic dA, dQ, dsigma2_n per log-domain hyperparameter. dA comes from
/// the block matrix-exponential identity applied to (F, dF).
SensitivitySet model_sensitivities(const HyperParams& hp, double dt);

/// Derivative of the stationary predictive covariance: the linear fixed point
///   dPp = (A - B h') dPp (A - B h')' + C,  B = A Pp h / (h'Pp h + gamma).
Matrix solve_derivative_dare(const DiscreteModel& model,
                             const ModelSensitivity& sens, const Matrix& pp,
                             double gamma);

struct NllResult {
  double nll = 0.0;
  Vector grad;  // d nll / d log-theta
};

/// Steady-state negative log likelihood and its exact gradient (exact for the
/// stationary objective). skip_prefix observations at the start are filtered
/// through but excluded from the objective (warm start for embedded windows).
NllResult nll_gradient(const SensitivitySet& set, const Vector& y,
                       int skip_prefix = 0);

/// Objective value only (used by line searches).
double steady_nll(const HyperParams& hp, const Vector& y, double dt);

struct OnlineStepResult {
  HyperParams theta;
  double window_nll = 0.0;
  Vector grad;
  bool accepted = false;
};

/// One incremental ascent step on the window's steady-state log likelihood:
/// theta_j = theta_{j-1} + eta (.) grad log p(window | theta_{j-1}).
/// Non-finite gradients reject the step and leave theta unchanged.
OnlineStepResult online_step(const HyperParams& hp, const Vector& window,
                             double dt, const Vector& learning_rates);
OnlineStepResult online_step(const HyperParams& hp, const Vector& window,
                             double dt, double learning_rate);

struct FitOptions {
  int max_iters = 200;
  double grad_tol = 1e-4;   // stop on ||grad||_inf
  double armijo_c1 = 1e-4;
  double min_step = 1e-12;
};

struct FitResult {
  HyperParams theta;
  double nll = 0.0;
  double grad_inf_norm = 0.0;
  int iterations = 0;
  std::vector<double> trace;
};

/// Batch optimization of the steady-state NLL: gradient descent in log-theta
/// with Armijo backtracking.
FitResult fit_batch(const HyperParams& hp0, const Vector& y, double dt,
                    const FitOptions& opts = {});

}  // namespace ihgp
