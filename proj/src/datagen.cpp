#include "ihgp/datagen.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>

#include "ihgp/errors.hpp"

namespace ihgp {

namespace {

/// Symmetric square root with clipped negative eigenvalues (sampling only).
Matrix sqrt_psd(const Matrix& p) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(p));
  const Vector d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

TimeSeries gen_sinc(int n, std::uint64_t seed, const SincOptions& opts) {
  if (n < 1) throw ParameterError("gen_sinc: n must be >= 1");
  TimeSeries out;
  out.t.resize(n);
  out.y.resize(n);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, std::sqrt(opts.noise_var));
  const double span = 12.0;
  for (int i = 0; i < n; ++i) {
    const double x = span * (i + 0.5) / n;
    out.t(i) = x;
    const double f = sinc(x - 6.0);
    switch (opts.mode) {
      case SincMode::Regression:
        out.y(i) = f + gauss(rng);
        break;
      case SincMode::Classification:
        // Threshold the noisy observation; separable (noise-free) labels
        // leave the class-magnitude unidentified.
        out.y(i) = (f + gauss(rng)) >= 0.0 ? 1.0 : -1.0;
        break;
      case SincMode::Poisson: {
        const double rate =
            opts.poisson_base_rate * std::exp(opts.poisson_amplitude * f);
        std::poisson_distribution<long> pois(rate);
        out.y(i) = static_cast<double>(pois(rng));
        break;
      }
    }
  }
  return out;
}

Simulation simulate_gaussian(const DiscreteModel& model, int n,
                             std::uint64_t seed, double noise_var) {
  if (n < 1) throw ParameterError("simulate_gaussian: n must be >= 1");
  const int m = model.dim();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto draw = [&](int dim) {
    Vector z(dim);
    for (int i = 0; i < dim; ++i) z(i) = gauss(rng);
    return z;
  };

  const Matrix p0_sqrt = sqrt_psd(model.initial_cov);
  const Matrix q_sqrt = sqrt_psd(model.process_noise);
  const double noise_sd = std::sqrt(noise_var);

  Simulation out;
  out.t.resize(n);
  out.latent.resize(n);
  out.y.resize(n);
  Vector f = p0_sqrt * draw(m);
  for (int i = 0; i < n; ++i) {
    if (i > 0) f = model.transition * f + q_sqrt * draw(m);
    out.t(i) = i * model.dt;
    out.latent(i) = model.measurement.dot(f);
    out.y(i) = out.latent(i) + noise_sd * gauss(rng);
  }
  return out;
}

std::vector<double> simulate_poisson_events(
    double t0, double t1, const std::function<double(double)>& log_rate,
    double rate_bound, std::uint64_t seed) {
  if (!(t0 < t1)) throw ParameterError("simulate_poisson_events: t0 >= t1");
  if (!(rate_bound > 0.0)) {
    throw ParameterError("simulate_poisson_events: rate_bound <= 0");
  }
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> gap(rate_bound);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> events;
  double t = t0;
  while (true) {
    t += gap(rng);
    if (t >= t1) break;
    const double rate = std::exp(log_rate(t));
    if (rate > rate_bound) {
      throw ParameterError("simulate_poisson_events: rate exceeds bound");
    }
    if (unif(rng) * rate_bound <= rate) events.push_back(t);
  }
  return events;
}

}  // namespace ihgp
