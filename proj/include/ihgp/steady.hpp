#pragma once

#include <map>
#include <vector>

#include "ihgp/state_space.hpp"

namespace ihgp {

/// Steady-state matrices of the time-invariant filter/smoother at one
/// likelihood variance gamma (gamma = +inf is the no-measurement endpoint).
struct SteadyStateSet {
  double gamma = 0.0;
  Matrix pred_cov;       // Pp: stabilizing DARE solution
  Vector gain;           // k = Pp h / (h'Pp h + gamma)
  Matrix filt_cov;       // Pf = Pp - k h'Pp
  Matrix smoother_gain;  // G
  Matrix smooth_cov;     // Ps: fixed point of the stationary smoother
};

/// Stabilizing PSD solution of
///   P = A P A' - A P h (h'P h + gamma)^{-1} h'P A' + Q
/// by the structure-preserving doubling algorithm.
Matrix solve_pp_dare(const DiscreteModel& model, double gamma);

/// Relative Frobenius residual of a candidate DARE solution.
double dare_residual(const DiscreteModel& model, double gamma, const Matrix& pp);

Vector stationary_gain(const Matrix& pp, const Vector& h, double gamma);

/// G = Pf A' [A Pf A' + Q]^{-1} and the fixed point
/// Ps = G Ps G' + Pf - G (A Pf A' + Q) G'.
std::pair<Matrix, Matrix> solve_smoother_pair(const DiscreteModel& model,
                                              const Matrix& pf);

/// All steady-state quantities at one gamma (inf allowed).
SteadyStateSet solve_steady_state(const DiscreteModel& model, double gamma);

struct GridOptions {
  int nodes = 32;
  double gamma_min = 1e-2;
  double gamma_max = 1e3;
};

/// K log-spaced gamma nodes with precomputed steady-state sets, a dedicated
/// gamma = inf endpoint, and cubic convolutional (Keys) interpolation over
/// log gamma. Queries outside [gamma_min, gamma_max] clamp to the endpoints.
/// Immutable once built; interpolation is pure and reentrant.
class GammaGrid {
 public:
  GammaGrid(DiscreteModel model, GridOptions opts = {});

  const DiscreteModel& model() const { return model_; }
  const GridOptions& options() const { return opts_; }
  int node_count() const { return static_cast<int>(nodes_.size()); }
  double node_gamma(int i) const { return nodes_[i].gamma; }
  const SteadyStateSet& node(int i) const { return nodes_[i]; }
  const SteadyStateSet& infinity() const { return inf_; }

  /// Interpolated steady-state set; bit-identical at stored nodes.
  SteadyStateSet at(double gamma) const;

  /// Add an exactly solved off-grid node (looked up before interpolating).
  void insert_exact(double gamma);
  bool has_exact(double gamma) const;

  /// Interpolation slices used by the O(m^2)-per-step recursions.
  void predictive_slice(double gamma, Vector* pp_h, double* h_pp_h) const;
  void smoother_slice(double gamma, Matrix* g, double* h_ps_h) const;

 private:
  struct Weights {
    int base = 0;       // index of the left node of the bracketing interval
    double w[4] = {0};  // weights for nodes base-1 .. base+2 (virtual at edges)
    int exact = -1;     // >= 0: query hit this node exactly
  };
  Weights keys_weights(double gamma) const;

  DiscreteModel model_;
  GridOptions opts_;
  double log_min_ = 0.0;
  double log_step_ = 0.0;
  std::vector<SteadyStateSet> nodes_;
  std::vector<Vector> node_pp_h_;   // per-node Pp h
  std::vector<double> node_hph_;    // per-node h'Pp h
  std::vector<double> node_psh_;    // per-node h'Ps h
  SteadyStateSet inf_;
  std::map<double, SteadyStateSet> exact_;
};

GammaGrid build_grid(const DiscreteModel& model, GridOptions opts = {});

}  // namespace ihgp
