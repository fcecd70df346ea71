#pragma once

#include <cstddef>
#include <vector>

#include "lecam/grid_path.hpp"
#include "lecam/model.hpp"
#include "lecam/rng.hpp"
#include "lecam/sde.hpp"

namespace lecam {

// Randomized infill of a discrete Euler trajectory: on each cell
// [t_i, t_{i+1}] the output is
//   linear interpolation of (t_i, Z_i)  +  sigma(Z_i) * B_i(t)
// with independent Brownian bridges B_i vanishing at both cell ends. The
// knots reproduce Z_i exactly; the result has the law of the continuous-time
// Euler scheme when the Z_i came from the discrete one.
GridPath bridge_infill(const EulerTrajectory& traj, RngStream& rng,
                       std::size_t points_per_cell = 32);

// Same infill with the bridges read off a stored driving path,
//   B_i(t) = W(t) - W(t_i) - (t - t_i)/(t_{i+1} - t_i) * (W(t_{i+1}) - W(t_i)),
// which couples the output to the w that generated traj. The grid of w must
// contain every knot t_i.
GridPath bridge_infill_from_brownian(const EulerTrajectory& traj, const BrownianPath& w);

// Values of x at the sampling times i h, i = 0..n; throws when some i h is
// not a grid point of x.
std::vector<double> euler_marginals(const GridPath& x, double h, std::size_t n);

// Unit-diffusion image of the continuous-time Euler scheme, built forward
// from a driving Brownian path on [0, a]:
//   T_0 = 0,  T_i = T_{i-1} + sigma^2(state_{i-1}) h,
//   path(u) = state_{i-1} + f(state_{i-1}) (u - T_{i-1}) + B(u) - B(T_{i-1})
// on (T_{i-1}, T_i], with f = b / sigma^2. Cells that would end past a are
// discarded.
struct TimeChangedEuler {
  ModelSpec model;
  double step = 0.0;            // h
  double driver_horizon = 0.0;  // a
  std::vector<double> cell_clock;   // T_0..T_m
  std::vector<double> innovations;  // eps_1..eps_m per cell, from driver increments
  GridPath path;                    // values on the driver grid plus every T_i

  std::size_t cells() const { return innovations.size(); }
};

TimeChangedEuler build_timechanged_euler(const ModelSpec& model, const BrownianPath& driver,
                                         double z0, double h);

// Innovations eps_i = (B(T_i) - B(T_{i-1})) / sqrt(T_i - T_{i-1}); the states
// at the T_i satisfy the discrete Euler recursion in these exactly.
std::vector<double> extract_innovations(const TimeChangedEuler& tce);

// Maps the unit-diffusion image back to the original time axis through the
// reconstructed clock: output(t) = path(abar_t(path)), tabulated on
// points_per_cell points per Euler cell with the knots pinned exactly.
GridPath reverse_map(const TimeChangedEuler& tce, std::size_t points_per_cell = 32);

}  // namespace lecam
