#include "ihgp/state_space.hpp"

#include <cmath>
#include <numbers>

#include "ihgp/errors.hpp"

namespace ihgp {

LtiSde build_matern(double nu, double sigma2, double ell) {
  if (!(sigma2 > 0.0) || !(ell > 0.0)) {
    throw ParameterError("matern hyperparameters must be positive");
  }
  LtiSde sde;
  if (nu == 0.5) {
    sde.feedback = Matrix::Constant(1, 1, -1.0 / ell);
    sde.noise_effect = Matrix::Constant(1, 1, 1.0);
    sde.diffusion = Matrix::Constant(1, 1, 2.0 * sigma2 / ell);
    sde.measurement = Vector::Constant(1, 1.0);
    sde.stationary_cov = Matrix::Constant(1, 1, sigma2);
  } else if (nu == 1.5) {
    const double lam = std::sqrt(3.0) / ell;
    sde.feedback.resize(2, 2);
    sde.feedback << 0.0, 1.0, -lam * lam, -2.0 * lam;
    sde.noise_effect = Matrix::Zero(2, 1);
    sde.noise_effect(1, 0) = 1.0;
    sde.diffusion = Matrix::Constant(1, 1, 4.0 * lam * lam * lam * sigma2);
    sde.measurement = Vector::Zero(2);
    sde.measurement(0) = 1.0;
    sde.stationary_cov = Matrix::Zero(2, 2);
    sde.stationary_cov(0, 0) = sigma2;
    sde.stationary_cov(1, 1) = lam * lam * sigma2;
  } else if (nu == 2.5) {
    const double lam = std::sqrt(5.0) / ell;
    const double lam2 = lam * lam;
    sde.feedback.resize(3, 3);
    sde.feedback << 0.0, 1.0, 0.0,
                    0.0, 0.0, 1.0,
                    -lam2 * lam, -3.0 * lam2, -3.0 * lam;
    sde.noise_effect = Matrix::Zero(3, 1);
    sde.noise_effect(2, 0) = 1.0;
    sde.diffusion =
        Matrix::Constant(1, 1, 16.0 / 3.0 * sigma2 * lam2 * lam2 * lam);
    sde.measurement = Vector::Zero(3);
    sde.measurement(0) = 1.0;
    // Stationary covariance of (f, f', f'').
    const double kappa = sigma2 * lam2 / 3.0;
    sde.stationary_cov.resize(3, 3);
    sde.stationary_cov << sigma2, 0.0, -kappa,
                          0.0, kappa, 0.0,
                          -kappa, 0.0, sigma2 * lam2 * lam2;
  } else {
    throw ParameterError("matern smoothness must be one of 0.5, 1.5, 2.5");
  }
  return sde;
}

LtiSde build_periodic(double sigma2, double period, int harmonics, double ell) {
  if (!(sigma2 > 0.0) || !(period > 0.0)) {
    throw ParameterError("periodic hyperparameters must be positive");
  }
  if (harmonics < 1) throw ParameterError("harmonic count must be >= 1");
  const Vector q2 = periodic_weights(harmonics, ell, sigma2);
  const double w0 = 2.0 * std::numbers::pi / period;
  const int m = 2 * harmonics;

  LtiSde sde;
  sde.feedback = Matrix::Zero(m, m);
  sde.noise_effect = Matrix::Zero(m, 1);
  sde.diffusion = Matrix::Zero(1, 1);
  sde.measurement = Vector::Zero(m);
  sde.stationary_cov = Matrix::Zero(m, m);
  for (int j = 0; j < harmonics; ++j) {
    const int r = 2 * j;
    const double wj = w0 * j;
    sde.feedback(r, r + 1) = -wj;
    sde.feedback(r + 1, r) = wj;
    sde.measurement(r) = 1.0;
    sde.stationary_cov(r, r) = q2(j);
    sde.stationary_cov(r + 1, r + 1) = q2(j);
  }
  return sde;
}

LtiSde combine_sum(const LtiSde& a, const LtiSde& b) {
  const int ma = a.dim(), mb = b.dim();
  const int sa = static_cast<int>(a.noise_effect.cols());
  const int sb = static_cast<int>(b.noise_effect.cols());

  LtiSde sde;
  sde.feedback = Matrix::Zero(ma + mb, ma + mb);
  sde.feedback.topLeftCorner(ma, ma) = a.feedback;
  sde.feedback.bottomRightCorner(mb, mb) = b.feedback;

  sde.noise_effect = Matrix::Zero(ma + mb, sa + sb);
  sde.noise_effect.topLeftCorner(ma, sa) = a.noise_effect;
  sde.noise_effect.bottomRightCorner(mb, sb) = b.noise_effect;

  sde.diffusion = Matrix::Zero(sa + sb, sa + sb);
  sde.diffusion.topLeftCorner(sa, sa) = a.diffusion;
  sde.diffusion.bottomRightCorner(sb, sb) = b.diffusion;

  sde.measurement.resize(ma + mb);
  sde.measurement << a.measurement, b.measurement;

  sde.stationary_cov = Matrix::Zero(ma + mb, ma + mb);
  sde.stationary_cov.topLeftCorner(ma, ma) = a.stationary_cov;
  sde.stationary_cov.bottomRightCorner(mb, mb) = b.stationary_cov;
  return sde;
}

LtiSde combine_product(const LtiSde& a, const LtiSde& b) {
  const int ma = a.dim(), mb = b.dim();
  const Matrix ia = Matrix::Identity(ma, ma);
  const Matrix ib = Matrix::Identity(mb, mb);

  LtiSde sde;
  sde.feedback = kron(a.feedback, ib) + kron(ia, b.feedback);
  sde.measurement = kron(a.measurement, b.measurement);
  sde.stationary_cov = kron(a.stationary_cov, b.stationary_cov);
  // Diffusion chosen so F Pinf + Pinf F^T + W = 0 holds for the Kronecker
  // product; only W = L Qc L^T is consumed downstream.
  const Matrix w = kron(a.noise_cov(), b.stationary_cov) +
                   kron(a.stationary_cov, b.noise_cov());
  sde.noise_effect = Matrix::Identity(ma * mb, ma * mb);
  sde.diffusion = symmetrized(w);
  return sde;
}

LtiSde build_sde(const KernelSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case KernelKind::Matern12:
      return build_matern(0.5, spec.sigma2, spec.ell);
    case KernelKind::Matern32:
      return build_matern(1.5, spec.sigma2, spec.ell);
    case KernelKind::Matern52:
      return build_matern(2.5, spec.sigma2, spec.ell);
    case KernelKind::Periodic:
      return build_periodic(spec.sigma2, spec.period, spec.harmonics, spec.ell);
    case KernelKind::Sum: {
      LtiSde acc = build_sde(spec.children[0]);
      for (size_t i = 1; i < spec.children.size(); ++i) {
        acc = combine_sum(acc, build_sde(spec.children[i]));
      }
      return acc;
    }
    case KernelKind::Product: {
      LtiSde acc = build_sde(spec.children[0]);
      for (size_t i = 1; i < spec.children.size(); ++i) {
        acc = combine_product(acc, build_sde(spec.children[i]));
      }
      return acc;
    }
  }
  throw ParameterError("unknown kernel node");
}

Matrix stationary_covariance(const Matrix& f, const Matrix& l,
                             const Matrix& qc) {
  return solve_lyapunov(f, l * qc * l.transpose());
}

DiscreteModel discretize(const LtiSde& sde, double dt) {
  if (!(dt > 0.0)) throw ParameterError("dt must be positive");
  DiscreteModel model;
  model.transition = expm(sde.feedback * dt);
  model.process_noise = symmetrized(
      sde.stationary_cov -
      model.transition * sde.stationary_cov * model.transition.transpose());
  model.measurement = sde.measurement;
  model.initial_cov = sde.stationary_cov;
  model.dt = dt;
  return model;
}

}  // namespace ihgp
