#include "ihgp/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace ihgp {

NelderMeadResult nelder_mead(const std::function<double(const Vector&)>& fn,
                             const Vector& x0, const NelderMeadOptions& opts) {
  const int d = static_cast<int>(x0.size());
  auto safe_fn = [&](const Vector& x) {
    const double f = fn(x);
    return std::isfinite(f) ? f : std::numeric_limits<double>::max();
  };

  std::vector<Vector> xs(d + 1, x0);
  std::vector<double> fs(d + 1);
  for (int i = 0; i < d; ++i) xs[i + 1](i) += opts.init_step;
  for (int i = 0; i <= d; ++i) fs[i] = safe_fn(xs[i]);

  std::vector<int> order(d + 1);
  NelderMeadResult out;
  for (int iter = 0; iter < opts.max_iters; ++iter) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return fs[a] < fs[b]; });
    const int best = order[0], worst = order[d], second = order[d - 1];
    out.iterations = iter;
    if (std::abs(fs[worst] - fs[best]) <=
        opts.f_tol * (1.0 + std::abs(fs[best]))) {
      break;
    }

    Vector centroid = Vector::Zero(d);
    for (int i = 0; i <= d; ++i) {
      if (i != worst) centroid += xs[i];
    }
    centroid /= d;

    const Vector reflected = centroid + (centroid - xs[worst]);
    const double f_reflected = safe_fn(reflected);
    if (f_reflected < fs[best]) {
      const Vector expanded = centroid + 2.0 * (centroid - xs[worst]);
      const double f_expanded = safe_fn(expanded);
      if (f_expanded < f_reflected) {
        xs[worst] = expanded;
        fs[worst] = f_expanded;
      } else {
        xs[worst] = reflected;
        fs[worst] = f_reflected;
      }
    } else if (f_reflected < fs[second]) {
      xs[worst] = reflected;
      fs[worst] = f_reflected;
    } else {
      const Vector contracted = centroid + 0.5 * (xs[worst] - centroid);
      const double f_contracted = safe_fn(contracted);
      if (f_contracted < fs[worst]) {
        xs[worst] = contracted;
        fs[worst] = f_contracted;
      } else {
        for (int i = 0; i <= d; ++i) {
          if (i == best) continue;
          xs[i] = xs[best] + 0.5 * (xs[i] - xs[best]);
          fs[i] = safe_fn(xs[i]);
        }
      }
    }
  }

  const auto it = std::min_element(fs.begin(), fs.end());
  out.x = xs[std::distance(fs.begin(), it)];
  out.f = *it;
  return out;
}

}  // namespace ihgp
