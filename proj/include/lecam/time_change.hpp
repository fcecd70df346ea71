#pragma once

#include <cstddef>
#include <vector>

#include "lecam/grid_path.hpp"
#include "lecam/model.hpp"

namespace lecam {

// Strictly increasing piecewise-linear bijection between original time t
// and transformed time u, anchored at (0,0). forward and inverse evaluate
// the same polyline from either axis, so they invert each other exactly at
// breakpoints.
class TimeChangeMap {
 public:
  TimeChangeMap(std::vector<double> t, std::vector<double> u);

  double forward(double t) const;  // t -> u
  double inverse(double u) const;  // u -> t
  double t_final() const { return t_.back(); }
  double u_final() const { return u_.back(); }
  const std::vector<double>& t_grid() const { return t_; }
  const std::vector<double>& u_grid() const { return u_; }

 private:
  std::vector<double> t_;
  std::vector<double> u_;
};

// Variance clock rho_t(x) = int_0^t sigma^2(x(s)) ds, left-endpoint rule on
// the path grid; inverse(u) is tau_u(x) = inf{t : rho_t(x) >= u}. Slopes lie
// in [sigma0^2, sigma1^2], so u/sigma1^2 <= tau_u <= u/sigma0^2.
TimeChangeMap variance_clock(const ModelSpec& model, const GridPath& x);

// Image-side clock: forward(t) = A_t(y) = inf{u : T_u(y) >= t} with
// T_u(y) = int_0^u dv / sigma^2(y(v)), built on the grid of y.
TimeChangeMap inverse_variance_clock(const ModelSpec& model, const GridPath& y);

// Euler-frozen clock: sigma^2 held at the last sampling time t_i = i h, so
// the clock is piecewise linear with breakpoints at the t_i (plus the path
// horizon when it is not cell-aligned). The path grid must contain the t_i.
TimeChangeMap euler_variance_clock(const ModelSpec& model, const GridPath& x, double h);

// Image-side reconstruction of the Euler-frozen clock from the warped path
// alone:
//   abar_0 = 0,
//   abar_t = abar_{t_{i-1}} + sigma^2(y(abar_{t_{i-1}})) (t - t_{i-1}),
//            t in (t_{i-1}, t_i].
double euler_clock_at(const ModelSpec& model, const GridPath& y, double t, double h);
// Same recursion tabulated at t_i, i = 0..n, as a map (forward = abar).
TimeChangeMap euler_clock_from_path(const ModelSpec& model, const GridPath& y,
                                    double h, std::size_t n);

// y(u) = x(tau_u(x)): unit-diffusion reparametrization. Values are kept,
// times are mapped through the variance clock of x.
GridPath forward_time_change(const ModelSpec& model, const GridPath& x);

// x(t) = y(A_t(y)): inverse reparametrization of a unit-time path.
GridPath inverse_time_change(const ModelSpec& model, const GridPath& y);

// y(u) = x(taubar_u(x)): reparametrization through the Euler-frozen clock.
GridPath euler_forward_time_change(const ModelSpec& model, const GridPath& x, double h);

}  // namespace lecam
