#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "lecam/grid_path.hpp"
#include "lecam/model.hpp"
#include "lecam/stats.hpp"

namespace lecam {

// Drift of the unit-diffusion image, f(x) = b(x) / sigma^2(x), with its
// certified constants: |f| <= drift_bound / sigma0^2 and f Lipschitz with
// constant L = (K / sigma0^2) (1 + 2 K_sigma sigma1 / sigma0^2).
struct DriftRatio {
  ModelSpec model;
  double lipschitz = 0.0;
  double sup_abs = 0.0;

  double operator()(double x) const {
    return model.drift.value(x) / model.diffusion.sq(x);
  }
};

DriftRatio drift_ratio(const ModelSpec& model);

// Step function frozen at its knots: value on [knots[i], knots[i+1]) is
// level[i] (right-continuous lookup; the final knot takes the last level).
struct PiecewiseDrift {
  std::vector<double> knots;  // u_0 = 0 < u_1 < ... < u_m
  std::vector<double> level;  // one value per interval

  double operator()(double u) const;
};

// Predictable Euler drift of a unit-time path: on each reconstructed-clock
// cell (abar_{t_{i-1}}, abar_{t_i}] the drift is frozen at f(y(abar_{t_{i-1}})).
PiecewiseDrift euler_unit_drift(const DriftRatio& f, const GridPath& y, double h,
                                std::size_t n);

// A (possibly path-dependent) drift evaluated along a unit-diffusion path.
using PathDrift = std::function<double(double u, const GridPath& y)>;

inline PathDrift state_drift(std::function<double(double)> g) {
  return [g = std::move(g)](double u, const GridPath& y) { return g(y.value_at(u)); };
}
inline PathDrift frozen_drift(PiecewiseDrift pd) {
  return [pd = std::move(pd)](double u, const GridPath&) { return pd(u); };
}
inline PathDrift constant_drift(double c) {
  return [c](double, const GridPath&) { return c; };
}

// log dP/dQ along one observed path for unit-diffusion laws with drifts p, q:
//   int_0^T (p - q) dY  -  1/2 int_0^T (p^2 - q^2) du,
// both integrals on the path grid with left-endpoint evaluation, clipped at
// the horizon. Swapping p and q negates the value exactly.
struct LogLikelihoodRatio {
  double value = 0.0;
  double integral_term = 0.0;  // int (p - q) dY
  double energy_term = 0.0;    // 1/2 int (p^2 - q^2) du
  double horizon = 0.0;
};

LogLikelihoodRatio log_likelihood_ratio(const PathDrift& p, const PathDrift& q,
                                        const GridPath& y, double horizon);

// K(P, Q) = 1/2 E_P int_0^T (p - q)^2 du, estimated by averaging the exact
// path functional over replicate paths drawn under P. Needs >= 2 paths.
MeanEstimate kl_divergence(const PathDrift& p, const PathDrift& q,
                           std::span<const GridPath> paths, double horizon);

// 1/2 int_0^T (p - q)^2 du along a single path.
double squared_drift_gap(const PathDrift& p, const PathDrift& q, const GridPath& y,
                         double horizon);

// ||P - Q||_TV <= sqrt(K(P,Q) / 2); throws on a negative argument.
double pinsker_tv_bound(double kl);

// Plug-in total variation 1/2 E_Q |dP/dQ - 1| from log-likelihood-ratio
// samples drawn under Q. Needs >= 2 samples.
MeanEstimate tv_plugin_estimate(std::span<const double> log_lr_samples);

}  // namespace lecam
