#include "lecam/sde.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace lecam {

std::size_t knot_index(const std::vector<double>& times, double t) {
  const auto it = std::lower_bound(times.begin(), times.end(), t);
  std::size_t k = static_cast<std::size_t>(it - times.begin());
  if (k == times.size() || (k > 0 && t - times[k - 1] < times[k] - t)) {
    --k;
  }
  const double tol = 1e-9 * std::max(1.0, std::abs(t));
  if (std::abs(times[k] - t) > tol) {
    throw std::invalid_argument("grid mismatch: time " + std::to_string(t) +
                                " is not a grid point of the path");
  }
  return k;
}

BrownianPath sample_brownian(const std::vector<double>& grid, std::uint64_t seed,
                             std::uint64_t stream) {
  BrownianPath w;
  w.seed = seed;
  w.stream = stream;
  w.path.times = grid;
  w.path.values.assign(grid.size(), 0.0);
  w.path.validate();
  RngStream rng(seed, stream);
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double dt = grid[k] - grid[k - 1];
    w.path.values[k] = w.path.values[k - 1] + std::sqrt(dt) * rng.next_gaussian();
  }
  return w;
}

GridPath simulate_diffusion(const ModelSpec& model, const BrownianPath& w, double x0) {
  const GridPath& wp = w.path;
  wp.validate();
  GridPath x;
  x.times = wp.times;
  x.values.assign(wp.times.size(), 0.0);
  x.values[0] = x0;
  bool violated = false;
  const double tol = 1e-9 * std::max(1.0, model.sigma1_sq);
  for (std::size_t k = 1; k < wp.times.size(); ++k) {
    const double xk = x.values[k - 1];
    const double dt = wp.times[k] - wp.times[k - 1];
    const double dw = wp.values[k] - wp.values[k - 1];
    const double s = model.diffusion.value(xk);
    // dX = b(X) dt + sigma(X) dW
    x.values[k] = xk + model.drift.value(xk) * dt + s * dw;
    const double s2 = s * s;
    if (s2 < model.sigma0_sq - tol || s2 > model.sigma1_sq + tol ||
        std::abs(model.drift.value(xk)) > model.drift_bound + tol) {
      violated = true;
    }
  }
  if (violated) {
    std::fprintf(stderr,
                 "model-violation warning: certified bounds exceeded on the "
                 "traversed range\n");
  }
  return x;
}

EulerTrajectory simulate_euler(const ModelSpec& model, double h, std::size_t n,
                               double z0, RngStream& rng) {
  if (!(h > 0.0)) {
    throw std::invalid_argument("invalid grid: step h must be positive");
  }
  EulerTrajectory traj;
  traj.model = model;
  traj.step = h;
  traj.states.reserve(n + 1);
  traj.innovations.reserve(n);
  traj.states.push_back(z0);
  const double sqh = std::sqrt(h);
  for (std::size_t i = 0; i < n; ++i) {
    const double z = traj.states.back();
    const double eps = rng.next_gaussian();
    traj.states.push_back(z + h * model.drift.value(z) +
                          sqh * model.diffusion.value(z) * eps);
    traj.innovations.push_back(eps);
  }
  return traj;
}

EulerTrajectory euler_from_brownian(const ModelSpec& model, const BrownianPath& w,
                                    double h, std::size_t n, double z0) {
  if (!(h > 0.0)) {
    throw std::invalid_argument("invalid grid: step h must be positive");
  }
  const GridPath& wp = w.path;
  wp.validate();
  EulerTrajectory traj;
  traj.model = model;
  traj.step = h;
  traj.states.reserve(n + 1);
  traj.innovations.reserve(n);
  traj.states.push_back(z0);
  const double sqh = std::sqrt(h);
  std::size_t prev = knot_index(wp.times, 0.0);
  for (std::size_t i = 1; i <= n; ++i) {
    const std::size_t cur = knot_index(wp.times, static_cast<double>(i) * h);
    // eps_i = (W(t_i) - W(t_{i-1})) / sqrt(h)
    const double eps = (wp.values[cur] - wp.values[prev]) / sqh;
    const double z = traj.states.back();
    traj.states.push_back(z + h * model.drift.value(z) +
                          sqh * model.diffusion.value(z) * eps);
    traj.innovations.push_back(eps);
    prev = cur;
  }
  return traj;
}

GridPath simulate_unit_sde(const std::function<double(double)>& drift, double x0,
                           double horizon, double step, RngStream& rng) {
  if (!(step > 0.0) || !(horizon > 0.0)) {
    throw std::invalid_argument("invalid grid: horizon and step must be positive");
  }
  const std::size_t cells =
      static_cast<std::size_t>(std::ceil(horizon / step - 1e-12));
  GridPath x;
  x.times = uniform_grid(step, cells);
  x.values.assign(cells + 1, 0.0);
  x.values[0] = x0;
  const double sq = std::sqrt(step);
  for (std::size_t k = 1; k <= cells; ++k) {
    const double xk = x.values[k - 1];
    x.values[k] = xk + drift(xk) * step + sq * rng.next_gaussian();
  }
  return x;
}

}  // namespace lecam
