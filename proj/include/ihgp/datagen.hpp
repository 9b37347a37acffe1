#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "ihgp/io.hpp"
#include "ihgp/state_space.hpp"

namespace ihgp {

/// sin(pi x) / (pi x) with sinc(0) = 1.
double sinc(double x);

enum class SincMode { Regression, Classification, Poisson };

struct SincOptions {
  SincMode mode = SincMode::Regression;
  double noise_var = 0.1;        // regression
  double poisson_base_rate = 12.0;
  double poisson_amplitude = 1.0;
};

/// Benchmark data on x in [0, 12] around a sinc bump at x = 6. Regression
/// adds N(0, noise_var); classification emits sign labels of the noiseless
/// sinc; poisson draws counts with rate base * exp(amplitude * sinc(x - 6)).
TimeSeries gen_sinc(int n, std::uint64_t seed, const SincOptions& opts = {});

struct Simulation {
  Vector t;
  Vector latent;  // h'f_i
  Vector y;       // latent + Gaussian noise
};

/// Draw a trajectory from the discrete prior and observe it with Gaussian
/// noise. Deterministic under the seed.
Simulation simulate_gaussian(const DiscreteModel& model, int n,
                             std::uint64_t seed, double noise_var);

/// Inhomogeneous Poisson event times on [t0, t1) by thinning. log_rate is
/// evaluated pointwise; rate_bound must dominate exp(log_rate).
std::vector<double> simulate_poisson_events(double t0, double t1,
                                            const std::function<double(double)>& log_rate,
                                            double rate_bound,
                                            std::uint64_t seed);

}  // namespace ihgp
