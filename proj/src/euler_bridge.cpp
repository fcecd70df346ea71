#include "lecam/euler_bridge.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace lecam {

GridPath bridge_infill(const EulerTrajectory& traj, RngStream& rng,
                       std::size_t points_per_cell) {
  if (points_per_cell < 2) {
    throw std::invalid_argument("bridge infill needs at least 2 points per cell");
  }
  const std::size_t n = traj.cells();
  const double h = traj.step;
  const double sub = h / static_cast<double>(points_per_cell);
  const double sqsub = std::sqrt(sub);
  GridPath out;
  out.times = uniform_grid(sub, n * points_per_cell);
  out.values.assign(out.times.size(), 0.0);
  out.values[0] = traj.states[0];
  std::vector<double> walk(points_per_cell + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double z0 = traj.states[i];
    const double z1 = traj.states[i + 1];
    const double s = traj.model.diffusion.value(z0);
    walk[0] = 0.0;
    for (std::size_t j = 1; j <= points_per_cell; ++j) {
      walk[j] = walk[j - 1] + sqsub * rng.next_gaussian();
    }
    const double wend = walk[points_per_cell];
    for (std::size_t j = 1; j < points_per_cell; ++j) {
      const double frac = static_cast<double>(j) / static_cast<double>(points_per_cell);
      // bridge from a fresh walk: B(t) = W'(t) - frac * W'(cell end)
      const double bridge = walk[j] - frac * wend;
      out.values[i * points_per_cell + j] = z0 + frac * (z1 - z0) + s * bridge;
    }
    out.values[(i + 1) * points_per_cell] = z1;  // knots are pinned exactly
  }
  return out;
}

GridPath bridge_infill_from_brownian(const EulerTrajectory& traj, const BrownianPath& w) {
  const GridPath& wp = w.path;
  wp.validate();
  const std::size_t n = traj.cells();
  const double h = traj.step;
  // locate the knots t_i on the grid of w
  std::vector<std::size_t> knot(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    knot[i] = knot_index(wp.times, static_cast<double>(i) * h);
  }
  GridPath out;
  out.times.assign(wp.times.begin(), wp.times.begin() + static_cast<std::ptrdiff_t>(knot[n] + 1));
  out.values.assign(knot[n] + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double z0 = traj.states[i];
    const double z1 = traj.states[i + 1];
    const double s = traj.model.diffusion.value(z0);
    const double t0 = wp.times[knot[i]];
    const double t1 = wp.times[knot[i + 1]];
    const double w0 = wp.values[knot[i]];
    const double dw = wp.values[knot[i + 1]] - w0;
    out.values[knot[i]] = z0;
    for (std::size_t k = knot[i] + 1; k < knot[i + 1]; ++k) {
      const double frac = (wp.times[k] - t0) / (t1 - t0);
      const double bridge = wp.values[k] - w0 - frac * dw;
      out.values[k] = z0 + frac * (z1 - z0) + s * bridge;
    }
  }
  out.values[knot[n]] = traj.states[n];
  return out;
}

std::vector<double> euler_marginals(const GridPath& x, double h, std::size_t n) {
  x.validate();
  if (!(h > 0.0)) {
    throw std::invalid_argument("invalid grid: step h must be positive");
  }
  std::vector<double> z(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    z[i] = x.values[knot_index(x.times, static_cast<double>(i) * h)];
  }
  return z;
}

TimeChangedEuler build_timechanged_euler(const ModelSpec& model, const BrownianPath& driver,
                                         double z0, double h) {
  const GridPath& b = driver.path;
  b.validate();
  if (!(h > 0.0)) {
    throw std::invalid_argument("invalid grid: step h must be positive");
  }
  const double a = b.horizon();
  if (a < model.sigma1_sq * h) {
    throw std::invalid_argument(
        "driver horizon shorter than one time-changed cell (need a >= sigma1^2 h)");
  }
  TimeChangedEuler tce;
  tce.model = model;
  tce.step = h;
  tce.driver_horizon = a;
  tce.cell_clock.push_back(0.0);
  tce.path.times.push_back(0.0);
  tce.path.values.push_back(z0);

  const double sqh = std::sqrt(h);
  double t_prev = 0.0;
  double z_prev = z0;
  double b_prev = b.values[0];
  for (;;) {
    const double s = model.diffusion.value(z_prev);
    const double dT = s * s * h;
    const double t_next = t_prev + dT;
    if (t_next > a) {
      break;  // a partial final cell is discarded
    }
    const double f = model.drift.value(z_prev) / (s * s);
    // interior fine points keep the drift-plus-driver form
    auto lo = std::upper_bound(b.times.begin(), b.times.end(), t_prev);
    auto hi = std::lower_bound(lo, b.times.end(), t_next);
    for (auto it = lo; it != hi; ++it) {
      const std::size_t k = static_cast<std::size_t>(it - b.times.begin());
      const double u = b.times[k];
      tce.path.times.push_back(u);
      tce.path.values.push_back(z_prev + f * (u - t_prev) + (b.values[k] - b_prev));
    }
    // cell end: innovation from the driver increment, state by the Euler recursion
    const double b_next = b.value_at(t_next);
    const double eps = (b_next - b_prev) / std::sqrt(dT);
    const double z_next = z_prev + h * model.drift.value(z_prev) + sqh * s * eps;
    tce.path.times.push_back(t_next);
    tce.path.values.push_back(z_next);
    tce.cell_clock.push_back(t_next);
    tce.innovations.push_back(eps);
    t_prev = t_next;
    z_prev = z_next;
    b_prev = b_next;
  }
  tce.path.validate();
  return tce;
}

std::vector<double> extract_innovations(const TimeChangedEuler& tce) {
  if (tce.cells() == 0) {
    throw std::invalid_argument("no completed cells: nothing to extract");
  }
  return tce.innovations;
}

GridPath reverse_map(const TimeChangedEuler& tce, std::size_t points_per_cell) {
  if (points_per_cell < 1) {
    throw std::invalid_argument("reverse map needs at least 1 point per cell");
  }
  const std::size_t m = tce.cells();
  if (m == 0) {
    throw std::invalid_argument("no completed cells: nothing to map back");
  }
  const double h = tce.step;
  const double sub = h / static_cast<double>(points_per_cell);
  GridPath out;
  out.times = uniform_grid(sub, m * points_per_cell);
  out.values.assign(out.times.size(), 0.0);
  out.values[0] = tce.path.values[0];
  for (std::size_t i = 0; i < m; ++i) {
    const double Ti = tce.cell_clock[i];
    // abar_t = T_i + (t - t_i) sigma^2(path(T_i)) on (t_i, t_{i+1}]
    const double knot_value = tce.path.value_at(Ti);
    const double s2 = tce.model.diffusion.sq(knot_value);
    for (std::size_t j = 1; j < points_per_cell; ++j) {
      const double u = Ti + static_cast<double>(j) * sub * s2;
      out.values[i * points_per_cell + j] = tce.path.value_at(u);
    }
    // the cell end lands exactly on T_{i+1}
    out.values[(i + 1) * points_per_cell] = tce.path.value_at(tce.cell_clock[i + 1]);
  }
  return out;
}

}  // namespace lecam
