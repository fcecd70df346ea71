#include "lecam/model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace lecam {

double DriftSpec::value(double x) const {
  switch (family) {
    case DriftFamily::Zero:
      return 0.0;
    case DriftFamily::Constant:
      return scale;
    case DriftFamily::Tanh:
      return scale * std::tanh(rate * x);
    case DriftFamily::Sine:
      return scale * std::sin(rate * x);
  }
  return 0.0;
}

double DriftSpec::deriv(double x) const {
  switch (family) {
    case DriftFamily::Zero:
    case DriftFamily::Constant:
      return 0.0;
    case DriftFamily::Tanh: {
      const double c = std::cosh(rate * x);
      return scale * rate / (c * c);
    }
    case DriftFamily::Sine:
      return scale * rate * std::cos(rate * x);
  }
  return 0.0;
}

double DriftSpec::sup_abs() const {
  switch (family) {
    case DriftFamily::Zero:
      return 0.0;
    default:
      return std::abs(scale);
  }
}

double DriftSpec::sup_abs_deriv() const {
  switch (family) {
    case DriftFamily::Zero:
    case DriftFamily::Constant:
      return 0.0;
    default:
      return std::abs(scale * rate);
  }
}

double DiffusionSpec::value(double x) const {
  return family == DiffusionFamily::Constant ? base : base + amp * std::cos(x);
}

double DiffusionSpec::deriv(double x) const {
  return family == DiffusionFamily::Constant ? 0.0 : -amp * std::sin(x);
}

double DiffusionSpec::deriv2(double x) const {
  return family == DiffusionFamily::Constant ? 0.0 : -amp * std::cos(x);
}

double DiffusionSpec::min_sq() const {
  const double s = family == DiffusionFamily::Constant ? base : base - amp;
  return s * s;
}

double DiffusionSpec::max_sq() const {
  const double s = family == DiffusionFamily::Constant ? base : base + amp;
  return s * s;
}

double DiffusionSpec::reg_bound() const {
  // sup_x (|sin x| + |cos x|) = sqrt(2)
  return family == DiffusionFamily::Constant ? 0.0 : amp * std::numbers::sqrt2;
}

ModelSpec make_model(const DriftSpec& drift, const DiffusionSpec& diffusion,
                     const InitialLaw& initial) {
  if (diffusion.family == DiffusionFamily::Cosine &&
      !(diffusion.amp >= 0.0 && diffusion.base > diffusion.amp)) {
    throw std::invalid_argument(
        "diffusion must satisfy base > amp >= 0 so that sigma0^2 > 0");
  }
  if (diffusion.family == DiffusionFamily::Constant && !(diffusion.base > 0.0)) {
    throw std::invalid_argument("diffusion must be positive: sigma0^2 > 0 required");
  }
  if (initial.kind == InitialLaw::Kind::Gaussian && !(initial.stddev > 0.0)) {
    throw std::invalid_argument("gaussian initial law needs a positive stddev");
  }
  ModelSpec m;
  m.drift = drift;
  m.diffusion = diffusion;
  m.initial = initial;
  m.drift_bound = drift.sup_abs() + drift.sup_abs_deriv();
  m.sigma_reg_bound = diffusion.reg_bound();
  m.sigma0_sq = diffusion.min_sq();
  m.sigma1_sq = diffusion.max_sq();
  return m;
}

std::string drift_family_name(DriftFamily f) {
  switch (f) {
    case DriftFamily::Zero:
      return "zero";
    case DriftFamily::Constant:
      return "constant";
    case DriftFamily::Tanh:
      return "tanh";
    case DriftFamily::Sine:
      return "sine";
  }
  return "zero";
}

std::string diffusion_family_name(DiffusionFamily f) {
  return f == DiffusionFamily::Constant ? "constant" : "cosine";
}

DriftFamily drift_family_from_name(const std::string& name) {
  if (name == "zero") return DriftFamily::Zero;
  if (name == "constant") return DriftFamily::Constant;
  if (name == "tanh") return DriftFamily::Tanh;
  if (name == "sine") return DriftFamily::Sine;
  throw std::invalid_argument("unknown drift family '" + name + "'");
}

DiffusionFamily diffusion_family_from_name(const std::string& name) {
  if (name == "constant") return DiffusionFamily::Constant;
  if (name == "cosine") return DiffusionFamily::Cosine;
  throw std::invalid_argument("unknown diffusion family '" + name + "'");
}

bool probe_model_bounds(const ModelSpec& model, const std::vector<double>& probe,
                        std::string* detail) {
  const double tol = 1e-12;
  for (double x : probe) {
    const double b = std::abs(model.drift.value(x));
    const double bp = std::abs(model.drift.deriv(x));
    if (b + bp > model.drift_bound + tol) {
      if (detail) *detail = "drift bound violated at x=" + std::to_string(x);
      return false;
    }
    const double s2 = model.diffusion.sq(x);
    if (s2 < model.sigma0_sq - tol || s2 > model.sigma1_sq + tol) {
      if (detail) *detail = "sigma^2 range violated at x=" + std::to_string(x);
      return false;
    }
    const double reg =
        std::abs(model.diffusion.deriv(x)) + std::abs(model.diffusion.deriv2(x));
    if (reg > model.sigma_reg_bound + tol) {
      if (detail) *detail = "sigma regularity bound violated at x=" + std::to_string(x);
      return false;
    }
  }
  return true;
}

}  // namespace lecam
