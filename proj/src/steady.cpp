#include "ihgp/steady.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <future>
#include <limits>
#include <thread>

#include "ihgp/errors.hpp"

namespace ihgp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxDareIters = 10000;
constexpr double kDareTol = 1e-12;

int grid_threads() {
  if (const char* env = std::getenv("IHGP_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace

Matrix solve_pp_dare(const DiscreteModel& model, double gamma) {
  if (std::isinf(gamma)) return model.initial_cov;
  if (!(gamma > 0.0)) throw ParameterError("gamma must be positive");
  const int m = model.dim();
  const Vector& h = model.measurement;

  // Doubling iteration on the transposed (control-form) system.
  Matrix ak = model.transition.transpose();
  Matrix gk = (h * h.transpose()) / gamma;
  Matrix hk = model.process_noise;
  const Matrix ident = Matrix::Identity(m, m);

  for (int it = 0; it < kMaxDareIters; ++it) {
    const auto lu = (ident + gk * hk).partialPivLu();
    const Matrix w_a = lu.solve(ak);      // (I + G H)^{-1} A
    const Matrix w_g = lu.solve(gk);      // (I + G H)^{-1} G
    const Matrix a_next = ak * w_a;
    const Matrix g_next = symmetrized(gk + ak * w_g * ak.transpose());
    const Matrix h_next = symmetrized(hk + ak.transpose() * hk * w_a);
    const double change = (h_next - hk).norm();
    ak = a_next;
    gk = g_next;
    hk = h_next;
    if (!hk.allFinite()) {
      throw ConvergenceError("solve_pp_dare: iteration diverged");
    }
    if (change <= kDareTol * std::max(1.0, hk.norm())) {
      const double res = dare_residual(model, gamma, hk);
      if (res > 1e-9) {
        throw ConvergenceError("solve_pp_dare: residual " + std::to_string(res) +
                               " exceeds tolerance at gamma=" +
                               std::to_string(gamma));
      }
      return hk;
    }
  }
  throw ConvergenceError("solve_pp_dare: no convergence at gamma=" +
                         std::to_string(gamma));
}

double dare_residual(const DiscreteModel& model, double gamma,
                     const Matrix& pp) {
  const Matrix& a = model.transition;
  const Vector& h = model.measurement;
  const Vector ph = pp * h;
  const double s = h.dot(ph) + gamma;
  const Matrix next = a * pp * a.transpose() -
                      (a * ph) * (a * ph).transpose() / s + model.process_noise;
  return (next - pp).norm() / std::max(1e-300, pp.norm());
}

Vector stationary_gain(const Matrix& pp, const Vector& h, double gamma) {
  if (std::isinf(gamma)) return Vector::Zero(h.size());
  const Vector ph = pp * h;
  const double s = h.dot(ph) + gamma;
  if (!(s > 0.0)) throw NumericalError("stationary_gain: h'Pp h + gamma <= 0");
  return ph / s;
}

std::pair<Matrix, Matrix> solve_smoother_pair(const DiscreteModel& model,
                                              const Matrix& pf) {
  const Matrix& a = model.transition;
  const Matrix pp_next =
      symmetrized(a * pf * a.transpose() + model.process_noise);
  Eigen::LDLT<Matrix> ldlt(pp_next);
  if (ldlt.info() != Eigen::Success || (ldlt.vectorD().array() <= 0.0).any()) {
    throw ConditioningError("solve_smoother_pair: A Pf A' + Q is singular");
  }
  const Matrix g = ldlt.solve(a * pf).transpose();  // Pf A' (A Pf A' + Q)^{-1}
  const Matrix c = symmetrized(pf - g * pp_next * g.transpose());
  const Matrix ps = solve_discrete_lyapunov(g, c);
  return {g, ps};
}

SteadyStateSet solve_steady_state(const DiscreteModel& model, double gamma) {
  SteadyStateSet set;
  set.gamma = gamma;
  set.pred_cov = solve_pp_dare(model, gamma);
  set.gain = stationary_gain(set.pred_cov, model.measurement, gamma);
  set.filt_cov = symmetrized(set.pred_cov -
                             set.gain * (set.pred_cov * model.measurement).transpose());
  auto [g, ps] = solve_smoother_pair(model, set.filt_cov);
  set.smoother_gain = std::move(g);
  set.smooth_cov = std::move(ps);
  return set;
}

GammaGrid::GammaGrid(DiscreteModel model, GridOptions opts)
    : model_(std::move(model)), opts_(opts) {
  if (opts_.nodes < 4) throw ParameterError("grid needs at least 4 nodes");
  if (!(opts_.gamma_min > 0.0) || !(opts_.gamma_max > opts_.gamma_min)) {
    throw ParameterError("grid range must satisfy 0 < gamma_min < gamma_max");
  }
  log_min_ = std::log(opts_.gamma_min);
  log_step_ = (std::log(opts_.gamma_max) - log_min_) / (opts_.nodes - 1);

  nodes_.resize(opts_.nodes);
  const int threads = std::min(grid_threads(), opts_.nodes);
  if (threads <= 1) {
    for (int i = 0; i < opts_.nodes; ++i) {
      nodes_[i] = solve_steady_state(model_, std::exp(log_min_ + i * log_step_));
    }
  } else {
    std::vector<std::future<void>> jobs;
    std::atomic<int> next{0};
    for (int t = 0; t < threads; ++t) {
      jobs.push_back(std::async(std::launch::async, [&] {
        for (int i = next.fetch_add(1); i < opts_.nodes; i = next.fetch_add(1)) {
          nodes_[i] =
              solve_steady_state(model_, std::exp(log_min_ + i * log_step_));
        }
      }));
    }
    for (auto& job : jobs) job.get();
  }
  inf_ = solve_steady_state(model_, kInf);

  const Vector& h = model_.measurement;
  node_pp_h_.resize(opts_.nodes);
  node_hph_.resize(opts_.nodes);
  node_psh_.resize(opts_.nodes);
  for (int i = 0; i < opts_.nodes; ++i) {
    node_pp_h_[i] = nodes_[i].pred_cov * h;
    node_hph_[i] = h.dot(node_pp_h_[i]);
    node_psh_[i] = h.dot(nodes_[i].smooth_cov * h);
  }
}

GammaGrid::Weights GammaGrid::keys_weights(double gamma) const {
  Weights w;
  const int k = node_count();
  // Stored nodes answer bit-identically (log/exp round-trips are inexact).
  for (int i = 0; i < k; ++i) {
    if (nodes_[i].gamma == gamma) {
      w.exact = i;
      return w;
    }
  }
  const double x = std::log(gamma);
  double u = (x - log_min_) / log_step_;
  if (u <= 0.0) {
    w.exact = 0;
    return w;
  }
  if (u >= k - 1) {
    w.exact = k - 1;
    return w;
  }
  int j = static_cast<int>(std::floor(u));
  double s = u - j;
  if (s == 0.0) {
    w.exact = j;
    return w;
  }
  // Keys cubic convolution kernel, a = -1/2.
  w.base = j;
  const double s2 = s * s, s3 = s2 * s;
  w.w[0] = -0.5 * s3 + s2 - 0.5 * s;
  w.w[1] = 1.5 * s3 - 2.5 * s2 + 1.0;
  w.w[2] = -1.5 * s3 + 2.0 * s2 + 0.5 * s;
  w.w[3] = 0.5 * s3 - 0.5 * s2;
  return w;
}

namespace {

/// Weighted 4-node combination with quadratic extension past each boundary.
template <typename T, typename Fetch>
T blend_nodes(int count, int base, const double (&wts)[4], Fetch fetch) {
  auto value = [&](int idx) -> T {
    if (idx >= 0 && idx < count) return fetch(idx);
    if (idx < 0) return 3.0 * fetch(0) - 3.0 * fetch(1) + fetch(2);
    return 3.0 * fetch(count - 1) - 3.0 * fetch(count - 2) + fetch(count - 3);
  };
  return wts[0] * value(base - 1) + wts[1] * value(base) +
         wts[2] * value(base + 1) + wts[3] * value(base + 2);
}

}  // namespace

SteadyStateSet GammaGrid::at(double gamma) const {
  if (std::isinf(gamma)) return inf_;
  if (!(gamma > 0.0)) throw ParameterError("gamma must be positive");
  if (auto it = exact_.find(gamma); it != exact_.end()) return it->second;

  const Weights w = keys_weights(gamma);
  if (w.exact >= 0) return nodes_[w.exact];

  const int k = node_count();
  SteadyStateSet out;
  out.gamma = gamma;
  out.pred_cov = symmetrized(blend_nodes<Matrix>(
      k, w.base, w.w, [&](int i) { return nodes_[i].pred_cov; }));
  out.smooth_cov = symmetrized(blend_nodes<Matrix>(
      k, w.base, w.w, [&](int i) { return nodes_[i].smooth_cov; }));
  out.smoother_gain = blend_nodes<Matrix>(
      k, w.base, w.w, [&](int i) { return nodes_[i].smoother_gain; });

  // Interpolation between PSD matrices is not PSD-closed; repair on the rare
  // detected violation (cheap necessary checks first, O(m^2)).
  const Vector& h = model_.measurement;
  if (out.pred_cov.diagonal().minCoeff() < 0.0 ||
      h.dot(out.pred_cov * h) < 0.0) {
    out.pred_cov = project_psd(out.pred_cov);
  }
  if (out.smooth_cov.diagonal().minCoeff() < 0.0 ||
      h.dot(out.smooth_cov * h) < 0.0) {
    out.smooth_cov = project_psd(out.smooth_cov);
  }

  // Gains derive from the interpolated Pp so k = Pp h / (h'Pp h + gamma)
  // holds exactly.
  out.gain = stationary_gain(out.pred_cov, h, gamma);
  out.filt_cov = symmetrized(
      out.pred_cov - out.gain * (out.pred_cov * h).transpose());
  return out;
}

void GammaGrid::insert_exact(double gamma) {
  if (std::isinf(gamma)) return;
  if (exact_.count(gamma)) return;
  exact_.emplace(gamma, solve_steady_state(model_, gamma));
}

bool GammaGrid::has_exact(double gamma) const {
  return exact_.count(gamma) > 0;
}

void GammaGrid::predictive_slice(double gamma, Vector* pp_h,
                                 double* h_pp_h) const {
  if (std::isinf(gamma)) {
    *pp_h = inf_.pred_cov * model_.measurement;
    *h_pp_h = std::max(0.0, model_.measurement.dot(*pp_h));
    return;
  }
  if (auto it = exact_.find(gamma); it != exact_.end()) {
    *pp_h = it->second.pred_cov * model_.measurement;
    *h_pp_h = std::max(0.0, model_.measurement.dot(*pp_h));
    return;
  }
  const Weights w = keys_weights(gamma);
  if (w.exact >= 0) {
    *pp_h = node_pp_h_[w.exact];
    *h_pp_h = std::max(0.0, node_hph_[w.exact]);
    return;
  }
  *pp_h = blend_nodes<Vector>(node_count(), w.base, w.w,
                              [&](int i) { return node_pp_h_[i]; });
  *h_pp_h = std::max(0.0, model_.measurement.dot(*pp_h));
}

void GammaGrid::smoother_slice(double gamma, Matrix* g, double* h_ps_h) const {
  const Vector& h = model_.measurement;
  if (std::isinf(gamma)) {
    *g = inf_.smoother_gain;
    *h_ps_h = std::max(0.0, h.dot(inf_.smooth_cov * h));
    return;
  }
  if (auto it = exact_.find(gamma); it != exact_.end()) {
    *g = it->second.smoother_gain;
    *h_ps_h = std::max(0.0, h.dot(it->second.smooth_cov * h));
    return;
  }
  const Weights w = keys_weights(gamma);
  if (w.exact >= 0) {
    *g = nodes_[w.exact].smoother_gain;
    *h_ps_h = std::max(0.0, node_psh_[w.exact]);
    return;
  }
  *g = blend_nodes<Matrix>(node_count(), w.base, w.w,
                           [&](int i) { return nodes_[i].smoother_gain; });
  *h_ps_h = std::max(
      0.0, blend_nodes<double>(node_count(), w.base, w.w,
                               [&](int i) { return node_psh_[i]; }));
}

GammaGrid build_grid(const DiscreteModel& model, GridOptions opts) {
  return GammaGrid(model, opts);
}

}  // namespace ihgp
