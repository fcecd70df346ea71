#pragma once

#include <cstdint>
#include <functional>

#include "lecam/grid_path.hpp"
#include "lecam/model.hpp"
#include "lecam/rng.hpp"

namespace lecam {

// Discrete Euler scheme
//   Z_i = Z_{i-1} + h b(Z_{i-1}) + sqrt(h) sigma(Z_{i-1}) eps_i,  eps_i iid N(0,1),
// sampled at t_i = i h.
struct EulerTrajectory {
  ModelSpec model;
  double step = 0.0;                // h
  std::vector<double> states;       // Z_0..Z_n
  std::vector<double> innovations;  // eps_1..eps_n

  std::size_t cells() const { return innovations.size(); }
  double knot_time(std::size_t i) const { return static_cast<double>(i) * step; }
};

// Brownian path on the given grid: W(0) = 0, independent N(0, dt) increments.
BrownianPath sample_brownian(const std::vector<double>& grid, std::uint64_t seed,
                             std::uint64_t stream = 0);

// Euler-Maruyama surrogate for the diffusion, driven by the increments of w.
// w should live on a grid much finer than any sampling step used downstream.
GridPath simulate_diffusion(const ModelSpec& model, const BrownianPath& w, double x0);

EulerTrajectory simulate_euler(const ModelSpec& model, double h, std::size_t n,
                               double z0, RngStream& rng);

// Euler scheme built from a stored Brownian path (its grid must contain every
// t_i = i h); couples the scheme to a diffusion driven by the same w.
EulerTrajectory euler_from_brownian(const ModelSpec& model, const BrownianPath& w,
                                    double h, std::size_t n, double z0);

// dX = drift(X) du + dB on a uniform grid of the given step.
GridPath simulate_unit_sde(const std::function<double(double)>& drift, double x0,
                           double horizon, double step, RngStream& rng);

// Index of t in a strictly increasing grid, matched within a relative
// tolerance; throws std::invalid_argument when t is not a grid point.
std::size_t knot_index(const std::vector<double>& times, double t);

}  // namespace lecam
