#pragma once

#include <functional>

#include "ihgp/linalg.hpp"

namespace ihgp {

struct NelderMeadOptions {
  int max_iters = 500;
  double f_tol = 1e-8;
  double init_step = 0.3;
};

struct NelderMeadResult {
  Vector x;
  double f = 0.0;
  int iterations = 0;
};

/// Derivative-free simplex minimization (used where the objective has no
/// analytic gradient, e.g. exact-model or ADF marginal likelihoods).
NelderMeadResult nelder_mead(const std::function<double(const Vector&)>& fn,
                             const Vector& x0, const NelderMeadOptions& opts = {});

}  // namespace ihgp
