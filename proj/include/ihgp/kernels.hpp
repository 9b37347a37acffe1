#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ihgp/linalg.hpp"

namespace ihgp {

enum class KernelKind { Matern12, Matern32, Matern52, Periodic, Sum, Product };

/// Covariance-function specification: a tree of primitives combined by
/// Sum and Product nodes. Leaf hyperparameters are stored in natural scale.
struct KernelSpec {
  KernelKind kind = KernelKind::Matern32;
  double sigma2 = 1.0;
  double ell = 1.0;      // length-scale (Matern) or roughness scale (Periodic)
  double period = 1.0;   // Periodic only
  int harmonics = 6;     // Periodic only: number of oscillator blocks
  std::vector<KernelSpec> children;

  static KernelSpec matern(double nu, double sigma2, double ell);
  static KernelSpec periodic(double sigma2, double period, int harmonics = 6,
                             double ell = 1.0);
  static KernelSpec sum(std::vector<KernelSpec> parts);
  static KernelSpec product(std::vector<KernelSpec> parts);

  /// Parse from the JSON schema, e.g.
  ///   {"sum":[{"matern":{"nu":1.5,"sigma2":1.0,"ell":1.0}},
  ///           {"product":[{"periodic":{...}},{"matern":{...}}]}]}
  static KernelSpec from_json(const nlohmann::json& doc);
  static KernelSpec parse(const std::string& text);
  nlohmann::json to_json() const;

  bool is_leaf() const { return children.empty(); }
  int state_dim() const;
  void validate() const;
};

/// Covariance value at lag tau of the process the spec realizes. Matern
/// classes are exact; Periodic is its truncated harmonic series.
double kernel_value(const KernelSpec& spec, double tau);

/// Longest characteristic time scale in the prior (burn-in heuristics).
double longest_length_scale(const KernelSpec& spec);

/// Normalized harmonic variances q_j^2, j = 0..harmonics-1, summing to sigma2.
Vector periodic_weights(int harmonics, double ell, double sigma2);

// --- hyperparameter addressing -------------------------------------------

enum class ParamField { Magnitude, LengthScale };

/// Location of one free scalar hyperparameter inside a KernelSpec tree.
struct ParamAddress {
  std::vector<int> path;  // child indices from the root
  ParamField field = ParamField::Magnitude;
  std::string name;
};

/// Free parameters in pre-order. Periods are fixed by convention.
std::vector<ParamAddress> free_kernel_params(const KernelSpec& spec);

double get_kernel_param(const KernelSpec& spec, const ParamAddress& addr);
void set_kernel_param(KernelSpec& spec, const ParamAddress& addr, double value);

}  // namespace ihgp
