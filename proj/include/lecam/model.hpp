#pragma once

#include <string>
#include <vector>

#include "lecam/rng.hpp"

namespace lecam {

// Drift families with closed-form derivatives. Each family certifies its
// own sup-norm constants so the standing assumptions (bounded b and b')
// are checked rather than trusted.
enum class DriftFamily { Zero, Constant, Tanh, Sine };

struct DriftSpec {
  DriftFamily family = DriftFamily::Zero;
  double scale = 0.0;  // A in A*tanh(rate*x) / A*sin(rate*x), or the constant level
  double rate = 1.0;

  double value(double x) const;
  double deriv(double x) const;
  double sup_abs() const;
  double sup_abs_deriv() const;
};

enum class DiffusionFamily { Constant, Cosine };

struct DiffusionSpec {
  DiffusionFamily family = DiffusionFamily::Constant;
  double base = 1.0;  // sigma(x) = base, or base + amp*cos(x) with base > amp >= 0
  double amp = 0.0;

  double value(double x) const;
  double deriv(double x) const;
  double deriv2(double x) const;
  double sq(double x) const {
    const double s = value(x);
    return s * s;
  }
  double min_sq() const;
  double max_sq() const;
  double reg_bound() const;  // sup(|sigma'| + |sigma''|)
};

struct InitialLaw {
  enum class Kind { Point, Gaussian };
  Kind kind = Kind::Point;
  double location = 0.0;
  double stddev = 0.0;

  static InitialLaw point(double x) { return {Kind::Point, x, 0.0}; }
  static InitialLaw gaussian(double mean, double sd) {
    return {Kind::Gaussian, mean, sd};
  }
  double sample(RngStream& rng) const {
    return kind == Kind::Point ? location : location + stddev * rng.next_gaussian();
  }
};

// dX = b(X) dt + sigma(X) dW with certified constants
//   |b(x)| + |b'(x)|          <= drift_bound,
//   |sigma'(x)| + |sigma''(x)| <= sigma_reg_bound,
//   0 < sigma0_sq <= sigma^2(x) <= sigma1_sq.
struct ModelSpec {
  DriftSpec drift;
  DiffusionSpec diffusion;
  InitialLaw initial;
  double drift_bound = 0.0;
  double sigma_reg_bound = 0.0;
  double sigma0_sq = 0.0;
  double sigma1_sq = 0.0;
};

// Certifies the constants from the family parameters; throws
// std::invalid_argument when the diffusion is not bounded away from zero.
ModelSpec make_model(const DriftSpec& drift, const DiffusionSpec& diffusion,
                     const InitialLaw& initial = InitialLaw::point(0.0));

std::string drift_family_name(DriftFamily f);
std::string diffusion_family_name(DiffusionFamily f);
DriftFamily drift_family_from_name(const std::string& name);          // throws on unknown
DiffusionFamily diffusion_family_from_name(const std::string& name);  // throws on unknown

// Spot-check of the certified bounds over probe points. Returns false and
// fills detail on the first violation.
bool probe_model_bounds(const ModelSpec& model, const std::vector<double>& probe,
                        std::string* detail = nullptr);

}  // namespace lecam
