#include "ihgp/kernels.hpp"

#include <cmath>
#include <numbers>

#include "ihgp/errors.hpp"

namespace ihgp {

namespace {

void require_positive(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw ParameterError(std::string(what) + " must be positive and finite");
  }
}

const KernelSpec* walk(const KernelSpec* node, const std::vector<int>& path) {
  for (int idx : path) {
    if (idx < 0 || idx >= static_cast<int>(node->children.size())) {
      throw ParameterError("parameter address does not match the kernel tree");
    }
    node = &node->children[idx];
  }
  return node;
}

const char* leaf_tag(KernelKind kind) {
  switch (kind) {
    case KernelKind::Matern12: return "matern12";
    case KernelKind::Matern32: return "matern32";
    case KernelKind::Matern52: return "matern52";
    case KernelKind::Periodic: return "periodic";
    default: return "node";
  }
}

void collect_params(const KernelSpec& node, std::vector<int>& path,
                    std::vector<ParamAddress>& out) {
  if (node.is_leaf()) {
    const std::string base = leaf_tag(node.kind);
    out.push_back({path, ParamField::Magnitude, base + ".sigma2"});
    out.push_back({path, ParamField::LengthScale, base + ".ell"});
    return;
  }
  for (int i = 0; i < static_cast<int>(node.children.size()); ++i) {
    path.push_back(i);
    collect_params(node.children[i], path, out);
    path.pop_back();
  }
}

}  // namespace

KernelSpec KernelSpec::matern(double nu, double sigma2, double ell) {
  KernelSpec spec;
  if (nu == 0.5) {
    spec.kind = KernelKind::Matern12;
  } else if (nu == 1.5) {
    spec.kind = KernelKind::Matern32;
  } else if (nu == 2.5) {
    spec.kind = KernelKind::Matern52;
  } else {
    throw ParameterError("matern smoothness must be one of 0.5, 1.5, 2.5");
  }
  spec.sigma2 = sigma2;
  spec.ell = ell;
  spec.validate();
  return spec;
}

KernelSpec KernelSpec::periodic(double sigma2, double period, int harmonics,
                                double ell) {
  KernelSpec spec;
  spec.kind = KernelKind::Periodic;
  spec.sigma2 = sigma2;
  spec.period = period;
  spec.harmonics = harmonics;
  spec.ell = ell;
  spec.validate();
  return spec;
}

KernelSpec KernelSpec::sum(std::vector<KernelSpec> parts) {
  if (parts.size() < 2) throw ParameterError("sum needs at least two children");
  KernelSpec spec;
  spec.kind = KernelKind::Sum;
  spec.children = std::move(parts);
  return spec;
}

KernelSpec KernelSpec::product(std::vector<KernelSpec> parts) {
  if (parts.size() < 2) {
    throw ParameterError("product needs at least two children");
  }
  KernelSpec spec;
  spec.kind = KernelKind::Product;
  spec.children = std::move(parts);
  return spec;
}

void KernelSpec::validate() const {
  switch (kind) {
    case KernelKind::Matern12:
    case KernelKind::Matern32:
    case KernelKind::Matern52:
      require_positive(sigma2, "sigma2");
      require_positive(ell, "ell");
      break;
    case KernelKind::Periodic:
      require_positive(sigma2, "sigma2");
      require_positive(ell, "ell");
      require_positive(period, "period");
      if (harmonics < 1) throw ParameterError("harmonic count must be >= 1");
      break;
    case KernelKind::Sum:
    case KernelKind::Product:
      if (children.size() < 2) {
        throw ParameterError("composite node needs at least two children");
      }
      for (const auto& child : children) child.validate();
      break;
  }
}

int KernelSpec::state_dim() const {
  switch (kind) {
    case KernelKind::Matern12: return 1;
    case KernelKind::Matern32: return 2;
    case KernelKind::Matern52: return 3;
    case KernelKind::Periodic: return 2 * harmonics;
    case KernelKind::Sum: {
      int m = 0;
      for (const auto& child : children) m += child.state_dim();
      return m;
    }
    case KernelKind::Product: {
      int m = 1;
      for (const auto& child : children) m *= child.state_dim();
      return m;
    }
  }
  return 0;
}

KernelSpec KernelSpec::from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || doc.size() != 1) {
    throw InputError("kernel node must be an object with a single key");
  }
  const auto it = doc.begin();
  const std::string& key = it.key();
  const nlohmann::json& value = it.value();
  if (key == "sum" || key == "product") {
    if (!value.is_array() || value.size() < 2) {
      throw InputError("'" + key + "' expects an array of >= 2 kernels");
    }
    std::vector<KernelSpec> parts;
    for (const auto& item : value) parts.push_back(from_json(item));
    return key == "sum" ? sum(std::move(parts)) : product(std::move(parts));
  }
  if (key == "matern") {
    return matern(value.value("nu", 1.5), value.value("sigma2", 1.0),
                  value.value("ell", 1.0));
  }
  if (key == "periodic") {
    int harmonics = value.value("harmonics", value.value("J", 6));
    return periodic(value.value("sigma2", 1.0), value.value("period", 1.0),
                    harmonics, value.value("ell", 1.0));
  }
  throw InputError("unknown kernel type '" + key + "'");
}

KernelSpec KernelSpec::parse(const std::string& text) {
  return from_json(nlohmann::json::parse(text));
}

nlohmann::json KernelSpec::to_json() const {
  nlohmann::json out;
  switch (kind) {
    case KernelKind::Matern12:
      out["matern"] = {{"nu", 0.5}, {"sigma2", sigma2}, {"ell", ell}};
      break;
    case KernelKind::Matern32:
      out["matern"] = {{"nu", 1.5}, {"sigma2", sigma2}, {"ell", ell}};
      break;
    case KernelKind::Matern52:
      out["matern"] = {{"nu", 2.5}, {"sigma2", sigma2}, {"ell", ell}};
      break;
    case KernelKind::Periodic:
      out["periodic"] = {{"sigma2", sigma2},
                         {"period", period},
                         {"harmonics", harmonics},
                         {"ell", ell}};
      break;
    case KernelKind::Sum:
    case KernelKind::Product: {
      nlohmann::json parts = nlohmann::json::array();
      for (const auto& child : children) parts.push_back(child.to_json());
      out[kind == KernelKind::Sum ? "sum" : "product"] = parts;
      break;
    }
  }
  return out;
}

Vector periodic_weights(int harmonics, double ell, double sigma2) {
  if (harmonics < 1) throw ParameterError("harmonic count must be >= 1");
  require_positive(ell, "ell");
  const double z = 1.0 / (ell * ell);
  if (z > 600.0) {
    throw ParameterError("periodic ell too small: Bessel weights overflow");
  }
  Vector w(harmonics);
  const double damp = std::exp(-z);
  for (int j = 0; j < harmonics; ++j) {
    w(j) = (j == 0 ? 1.0 : 2.0) * std::cyl_bessel_i(j, z) * damp;
  }
  return sigma2 * w / w.sum();
}

double kernel_value(const KernelSpec& spec, double tau) {
  const double r = std::abs(tau);
  switch (spec.kind) {
    case KernelKind::Matern12:
      return spec.sigma2 * std::exp(-r / spec.ell);
    case KernelKind::Matern32: {
      const double lr = std::sqrt(3.0) / spec.ell * r;
      return spec.sigma2 * (1.0 + lr) * std::exp(-lr);
    }
    case KernelKind::Matern52: {
      const double lr = std::sqrt(5.0) / spec.ell * r;
      return spec.sigma2 * (1.0 + lr + lr * lr / 3.0) * std::exp(-lr);
    }
    case KernelKind::Periodic: {
      const Vector q2 = periodic_weights(spec.harmonics, spec.ell, spec.sigma2);
      const double w0 = 2.0 * std::numbers::pi / spec.period;
      double acc = 0.0;
      for (int j = 0; j < spec.harmonics; ++j) acc += q2(j) * std::cos(w0 * j * r);
      return acc;
    }
    case KernelKind::Sum: {
      double acc = 0.0;
      for (const auto& child : spec.children) acc += kernel_value(child, tau);
      return acc;
    }
    case KernelKind::Product: {
      double acc = 1.0;
      for (const auto& child : spec.children) acc *= kernel_value(child, tau);
      return acc;
    }
  }
  return 0.0;
}

double longest_length_scale(const KernelSpec& spec) {
  switch (spec.kind) {
    case KernelKind::Matern12:
    case KernelKind::Matern32:
    case KernelKind::Matern52:
      return spec.ell;
    case KernelKind::Periodic:
      return spec.period;
    case KernelKind::Sum:
    case KernelKind::Product: {
      double best = 0.0;
      for (const auto& child : spec.children) {
        best = std::max(best, longest_length_scale(child));
      }
      return best;
    }
  }
  return 0.0;
}

std::vector<ParamAddress> free_kernel_params(const KernelSpec& spec) {
  std::vector<ParamAddress> out;
  std::vector<int> path;
  collect_params(spec, path, out);
  // Disambiguate repeated leaf tags with the path.
  for (auto& addr : out) {
    std::string prefix;
    for (int idx : addr.path) prefix += std::to_string(idx) + ".";
    addr.name = prefix + addr.name;
  }
  return out;
}

double get_kernel_param(const KernelSpec& spec, const ParamAddress& addr) {
  const KernelSpec* leaf = walk(&spec, addr.path);
  return addr.field == ParamField::Magnitude ? leaf->sigma2 : leaf->ell;
}

void set_kernel_param(KernelSpec& spec, const ParamAddress& addr, double value) {
  KernelSpec* leaf = const_cast<KernelSpec*>(walk(&spec, addr.path));
  require_positive(value, "kernel parameter");
  if (addr.field == ParamField::Magnitude) {
    leaf->sigma2 = value;
  } else {
    leaf->ell = value;
  }
}

}  // namespace ihgp
