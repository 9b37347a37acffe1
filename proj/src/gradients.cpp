#include "ihgp/gradients.hpp"

#include <cmath>

#include "ihgp/errors.hpp"

namespace ihgp {

namespace {

struct SdeSens {
  LtiSde sde;
  std::vector<Matrix> d_feedback;
  std::vector<Matrix> d_stationary;
};

SdeSens leaf_sens(const KernelSpec& spec) {
  SdeSens out;
  out.sde = build_sde(spec);
  const int m = out.sde.dim();
  const Matrix zero = Matrix::Zero(m, m);
  // Parameter order per leaf matches free_kernel_params: sigma2 then ell,
  // derivatives taken w.r.t. the log-domain values.
  switch (spec.kind) {
    case KernelKind::Matern12: {
      out.d_feedback = {zero, Matrix::Constant(1, 1, 1.0 / spec.ell)};
      out.d_stationary = {out.sde.stationary_cov, zero};
      break;
    }
    case KernelKind::Matern32: {
      const double lam = std::sqrt(3.0) / spec.ell;
      Matrix df = zero;
      df(1, 0) = 2.0 * lam * lam;
      df(1, 1) = 2.0 * lam;
      Matrix dp = zero;
      dp(1, 1) = -2.0 * lam * lam * spec.sigma2;
      out.d_feedback = {zero, df};
      out.d_stationary = {out.sde.stationary_cov, dp};
      break;
    }
    case KernelKind::Matern52: {
      const double lam = std::sqrt(5.0) / spec.ell;
      const double lam2 = lam * lam;
      Matrix df = zero;
      df(2, 0) = 3.0 * lam2 * lam;
      df(2, 1) = 6.0 * lam2;
      df(2, 2) = 3.0 * lam;
      const double kappa = spec.sigma2 * lam2 / 3.0;
      Matrix dp = zero;
      dp(0, 2) = dp(2, 0) = 2.0 * kappa;
      dp(1, 1) = -2.0 * kappa;
      dp(2, 2) = -4.0 * spec.sigma2 * lam2 * lam2;
      out.d_feedback = {zero, df};
      out.d_stationary = {out.sde.stationary_cov, dp};
      break;
    }
    case KernelKind::Periodic: {
      // d/dlog(ell) of the normalized Bessel weights; the frequencies do not
      // depend on ell, so dF = 0.
      const int harmonics = spec.harmonics;
      const double z = 1.0 / (spec.ell * spec.ell);
      const double damp = std::exp(-z);
      Vector w(harmonics), dw(harmonics);
      for (int j = 0; j < harmonics; ++j) {
        const double c = (j == 0 ? 1.0 : 2.0);
        const double ij = std::cyl_bessel_i(j, z);
        const double ijm = std::cyl_bessel_i(std::abs(j - 1), z);
        const double ijp = std::cyl_bessel_i(j + 1, z);
        w(j) = c * ij * damp;
        dw(j) = c * damp * (0.5 * (ijm + ijp) - ij);
      }
      const double wsum = w.sum();
      const double dwsum = dw.sum();
      Matrix dp = zero;
      for (int j = 0; j < harmonics; ++j) {
        const double dq = spec.sigma2 * (dw(j) * wsum - w(j) * dwsum) /
                          (wsum * wsum) * (-2.0 * z);
        dp(2 * j, 2 * j) = dq;
        dp(2 * j + 1, 2 * j + 1) = dq;
      }
      out.d_feedback = {zero, zero};
      out.d_stationary = {out.sde.stationary_cov, dp};
      break;
    }
    default:
      throw ParameterError("leaf_sens: not a leaf node");
  }
  return out;
}

SdeSens combine_sum_sens(const SdeSens& a, const SdeSens& b) {
  SdeSens out;
  out.sde = combine_sum(a.sde, b.sde);
  const int ma = a.sde.dim(), mb = b.sde.dim();
  const int m = ma + mb;
  auto embed_a = [&](const Matrix& d) {
    Matrix full = Matrix::Zero(m, m);
    full.topLeftCorner(ma, ma) = d;
    return full;
  };
  auto embed_b = [&](const Matrix& d) {
    Matrix full = Matrix::Zero(m, m);
    full.bottomRightCorner(mb, mb) = d;
    return full;
  };
  for (size_t j = 0; j < a.d_feedback.size(); ++j) {
    out.d_feedback.push_back(embed_a(a.d_feedback[j]));
    out.d_stationary.push_back(embed_a(a.d_stationary[j]));
  }
  for (size_t j = 0; j < b.d_feedback.size(); ++j) {
    out.d_feedback.push_back(embed_b(b.d_feedback[j]));
    out.d_stationary.push_back(embed_b(b.d_stationary[j]));
  }
  return out;
}

SdeSens combine_product_sens(const SdeSens& a, const SdeSens& b) {
  SdeSens out;
  out.sde = combine_product(a.sde, b.sde);
  const Matrix ia = Matrix::Identity(a.sde.dim(), a.sde.dim());
  const Matrix ib = Matrix::Identity(b.sde.dim(), b.sde.dim());
  for (size_t j = 0; j < a.d_feedback.size(); ++j) {
    out.d_feedback.push_back(kron(a.d_feedback[j], ib));
    out.d_stationary.push_back(kron(a.d_stationary[j], b.sde.stationary_cov));
  }
  for (size_t j = 0; j < b.d_feedback.size(); ++j) {
    out.d_feedback.push_back(kron(ia, b.d_feedback[j]));
    out.d_stationary.push_back(kron(a.sde.stationary_cov, b.d_stationary[j]));
  }
  return out;
}

SdeSens build_sde_sens(const KernelSpec& spec) {
  if (spec.is_leaf()) return leaf_sens(spec);
  SdeSens acc = build_sde_sens(spec.children[0]);
  for (size_t i = 1; i < spec.children.size(); ++i) {
    const SdeSens next = build_sde_sens(spec.children[i]);
    acc = spec.kind == KernelKind::Sum ? combine_sum_sens(acc, next)
                                       : combine_product_sens(acc, next);
  }
  return acc;
}

/// Top-right block of expm([[F, dF], [0, F]] dt) is the derivative of
/// A = expm(F dt) in the direction dF.
Matrix transition_derivative(const Matrix& f, const Matrix& df, double dt) {
  const int m = static_cast<int>(f.rows());
  Matrix block = Matrix::Zero(2 * m, 2 * m);
  block.topLeftCorner(m, m) = f;
  block.topRightCorner(m, m) = df;
  block.bottomRightCorner(m, m) = f;
  return expm(block * dt).topRightCorner(m, m);
}

}  // namespace

HyperParams HyperParams::make(KernelSpec spec, double noise_sigma2,
                              bool optimize_noise) {
  spec.validate();
  HyperParams hp;
  hp.kernel = std::move(spec);
  hp.noise_sigma2 = noise_sigma2;
  hp.optimize_noise = optimize_noise;
  hp.kernel_addrs = free_kernel_params(hp.kernel);
  return hp;
}

int HyperParams::size() const {
  return static_cast<int>(kernel_addrs.size()) + (optimize_noise ? 1 : 0);
}

Vector HyperParams::log_values() const {
  Vector theta(size());
  for (size_t j = 0; j < kernel_addrs.size(); ++j) {
    theta(j) = std::log(get_kernel_param(kernel, kernel_addrs[j]));
  }
  if (optimize_noise) theta(size() - 1) = std::log(noise_sigma2);
  return theta;
}

HyperParams HyperParams::with_log_values(const Vector& theta) const {
  if (theta.size() != size()) {
    throw ParameterError("hyperparameter vector has wrong length");
  }
  if (!theta.allFinite()) {
    throw ParameterError("hyperparameter vector must be finite");
  }
  HyperParams out = *this;
  for (size_t j = 0; j < kernel_addrs.size(); ++j) {
    set_kernel_param(out.kernel, kernel_addrs[j], std::exp(theta(j)));
  }
  if (optimize_noise) out.noise_sigma2 = std::exp(theta(size() - 1));
  return out;
}

std::vector<std::string> HyperParams::names() const {
  std::vector<std::string> out;
  for (const auto& addr : kernel_addrs) out.push_back(addr.name);
  if (optimize_noise) out.push_back("noise.sigma2");
  return out;
}

SensitivitySet model_sensitivities(const HyperParams& hp, double dt) {
  const SdeSens sens = build_sde_sens(hp.kernel);
  SensitivitySet out;
  out.model = discretize(sens.sde, dt);
  out.noise_sigma2 = hp.noise_sigma2;
  out.names = hp.names();

  const Matrix& a = out.model.transition;
  const Matrix& pinf = sens.sde.stationary_cov;
  const int m = out.model.dim();
  for (size_t j = 0; j < sens.d_feedback.size(); ++j) {
    ModelSensitivity ms;
    ms.d_transition = transition_derivative(sens.sde.feedback,
                                            sens.d_feedback[j], dt);
    const Matrix& dp = sens.d_stationary[j];
    ms.d_process_noise = symmetrized(
        dp - ms.d_transition * pinf * a.transpose() -
        a * dp * a.transpose() - a * pinf * ms.d_transition.transpose());
    out.params.push_back(std::move(ms));
  }
  if (hp.optimize_noise) {
    ModelSensitivity ms;
    ms.d_transition = Matrix::Zero(m, m);
    ms.d_process_noise = Matrix::Zero(m, m);
    ms.d_noise_sigma2 = hp.noise_sigma2;  // d sigma2 / d log sigma2
    out.params.push_back(std::move(ms));
  }
  return out;
}

Matrix solve_derivative_dare(const DiscreteModel& model,
                             const ModelSensitivity& sens, const Matrix& pp,
                             double gamma) {
  const Matrix& a = model.transition;
  const Vector& h = model.measurement;
  const Vector pph = pp * h;
  const double s = h.dot(pph) + gamma;
  const Vector b = (a * pph) / s;
  const Matrix acl = a - b * h.transpose();
  const double rho = spectral_radius(acl);
  if (rho >= 1.0) {
    throw StabilityError("solve_derivative_dare: closed loop has rho = " +
                         std::to_string(rho));
  }
  const Matrix& da = sens.d_transition;
  const Vector da_pph = da * pph;
  const Matrix c = symmetrized(
      da * pp * a.transpose() + a * pp * da.transpose() -
      da_pph * b.transpose() - b * da_pph.transpose() +
      sens.d_noise_sigma2 * b * b.transpose() + sens.d_process_noise);
  const Matrix dpp = solve_discrete_lyapunov(acl, c);
  const double res = (acl * dpp * acl.transpose() + c - dpp).norm();
  if (res > 1e-10 * std::max(1.0, dpp.norm())) {
    throw ConvergenceError("solve_derivative_dare: residual " +
                           std::to_string(res));
  }
  return dpp;
}

NllResult nll_gradient(const SensitivitySet& set, const Vector& y,
                       int skip_prefix) {
  const DiscreteModel& model = set.model;
  const int n = static_cast<int>(y.size());
  if (n == 0) throw ParameterError("empty observation series");
  const int m = model.dim();
  const int p = static_cast<int>(set.params.size());
  const Matrix& a = model.transition;
  const Vector& h = model.measurement;
  const double gamma = set.noise_sigma2;

  const Matrix pp = solve_pp_dare(model, gamma);
  const Vector pph = pp * h;
  const double s = h.dot(pph) + gamma;
  const Vector k = pph / s;

  Vector ds(p);
  std::vector<Vector> dk(p);
  for (int j = 0; j < p; ++j) {
    const Matrix dpp = solve_derivative_dare(model, set.params[j], pp, gamma);
    ds(j) = h.dot(dpp * h) + set.params[j].d_noise_sigma2;
    dk[j] = (dpp * h - k * ds(j)) / s;
  }

  Vector mf = Vector::Zero(m);
  Matrix dmf = Matrix::Zero(m, p);
  double sum_v2 = 0.0;
  Vector sum_vdv = Vector::Zero(p);
  int n_obs = 0;

  for (int i = 0; i < n; ++i) {
    const Vector am = a * mf;
    Matrix dam(m, p);
    for (int j = 0; j < p; ++j) {
      dam.col(j) = set.params[j].d_transition * mf + a * dmf.col(j);
    }
    if (std::isnan(y(i))) {
      mf = am;
      dmf = dam;
      continue;
    }
    const double v = y(i) - h.dot(am);
    const Vector dv = -(dam.transpose() * h);
    if (i >= skip_prefix) {
      sum_v2 += v * v;
      sum_vdv += v * dv;
      ++n_obs;
    }
    mf = am + k * v;
    for (int j = 0; j < p; ++j) {
      dmf.col(j) = dam.col(j) + dk[j] * v + k * dv(j);
    }
  }

  NllResult out;
  const double log_lik =
      -0.5 * n_obs * std::log(2.0 * M_PI * s) - sum_v2 / (2.0 * s);
  const Vector dll = -(0.5 * n_obs / s) * ds - sum_vdv / s +
                     (sum_v2 / (2.0 * s * s)) * ds;
  out.nll = -log_lik;
  out.grad = -dll;
  return out;
}

double steady_nll(const HyperParams& hp, const Vector& y, double dt) {
  const DiscreteModel model = discretize(build_sde(hp.kernel), dt);
  const Matrix pp = solve_pp_dare(model, hp.noise_sigma2);
  return -steady_gaussian_filter(model, pp, y, hp.noise_sigma2).log_lik;
}

OnlineStepResult online_step(const HyperParams& hp, const Vector& window,
                             double dt, const Vector& learning_rates) {
  if (learning_rates.size() != hp.size()) {
    throw ParameterError("learning-rate vector length must match theta");
  }
  if ((learning_rates.array() < 0.0).any()) {
    throw ParameterError("learning rates must be non-negative");
  }
  OnlineStepResult out;
  out.theta = hp;
  const SensitivitySet set = model_sensitivities(hp, dt);
  const NllResult res = nll_gradient(set, window);
  out.window_nll = res.nll;
  out.grad = res.grad;
  if (!res.grad.allFinite() || !std::isfinite(res.nll)) {
    out.accepted = false;  // step rejected, theta unchanged
    return out;
  }
  // Ascent on the window log likelihood = descent on its NLL.
  const Vector theta =
      hp.log_values() - learning_rates.cwiseProduct(res.grad);
  out.theta = hp.with_log_values(theta);
  out.accepted = true;
  return out;
}

OnlineStepResult online_step(const HyperParams& hp, const Vector& window,
                             double dt, double learning_rate) {
  return online_step(hp, window, dt,
                     Vector::Constant(hp.size(), learning_rate));
}

FitResult fit_batch(const HyperParams& hp0, const Vector& y, double dt,
                    const FitOptions& opts) {
  FitResult out;
  out.theta = hp0;
  Vector x = hp0.log_values();
  const int p = static_cast<int>(x.size());

  auto nll_at = [&](const Vector& z) {
    try {
      return steady_nll(hp0.with_log_values(z), y, dt);
    } catch (const std::runtime_error&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  SensitivitySet set = model_sensitivities(out.theta, dt);
  NllResult cur = nll_gradient(set, y);
  out.trace.push_back(cur.nll);

  // BFGS on the inverse Hessian with Armijo backtracking; resets to the
  // gradient direction whenever the approximation loses descent.
  Matrix hinv = Matrix::Identity(p, p);
  for (int iter = 0; iter < opts.max_iters; ++iter) {
    out.grad_inf_norm = cur.grad.cwiseAbs().maxCoeff();
    if (out.grad_inf_norm <= opts.grad_tol) break;

    Vector dir = -(hinv * cur.grad);
    double slope = dir.dot(cur.grad);
    if (!(slope < 0.0)) {
      hinv = Matrix::Identity(p, p);
      dir = -cur.grad;
      slope = -cur.grad.squaredNorm();
    }

    double step = 1.0;
    double nll_try = std::numeric_limits<double>::infinity();
    Vector x_try;
    bool accepted = false;
    while (step >= opts.min_step) {
      x_try = x + step * dir;
      nll_try = nll_at(x_try);
      if (std::isfinite(nll_try) &&
          nll_try <= cur.nll + opts.armijo_c1 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;

    out.theta = hp0.with_log_values(x_try);
    set = model_sensitivities(out.theta, dt);
    const NllResult next = nll_gradient(set, y);

    const Vector s = x_try - x;
    const Vector yv = next.grad - cur.grad;
    const double sy = s.dot(yv);
    if (sy > 1e-12 * s.norm() * yv.norm()) {
      const Matrix outer = s * yv.transpose() / sy;
      hinv = (Matrix::Identity(p, p) - outer) * hinv *
                 (Matrix::Identity(p, p) - outer.transpose()) +
             s * s.transpose() / sy;
    }

    x = x_try;
    cur = next;
    out.trace.push_back(cur.nll);
    out.iterations = iter + 1;
  }
  out.nll = cur.nll;
  out.grad_inf_norm = cur.grad.cwiseAbs().maxCoeff();
  return out;
}

}  // namespace ihgp
