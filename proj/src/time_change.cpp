#include "lecam/time_change.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "lecam/sde.hpp"

namespace lecam {

namespace {

// Piecewise-linear evaluation of the polyline (xs, ys) at q, with a small
// slop beyond the ends to absorb roundoff.
double polyline_at(const std::vector<double>& xs, const std::vector<double>& ys, double q,
                   const char* what) {
  const double lo = xs.front();
  const double hi = xs.back();
  const double slop = 1e-9 * std::max(1.0, std::abs(hi));
  if (q <= lo) {
    if (lo - q > slop) {
      throw std::out_of_range(std::string(what) + " evaluated before 0: " +
                              std::to_string(q));
    }
    return ys.front();
  }
  if (q >= hi) {
    if (q - hi > slop) {
      throw std::out_of_range(std::string(what) + " evaluated beyond its horizon: " +
                              std::to_string(q) + " > " + std::to_string(hi));
    }
    return ys.back();
  }
  const auto it = std::upper_bound(xs.begin(), xs.end(), q);
  const std::size_t k = static_cast<std::size_t>(it - xs.begin()) - 1;
  const double w = (q - xs[k]) / (xs[k + 1] - xs[k]);
  return ys[k] + w * (ys[k + 1] - ys[k]);
}

}  // namespace

TimeChangeMap::TimeChangeMap(std::vector<double> t, std::vector<double> u)
    : t_(std::move(t)), u_(std::move(u)) {
  if (t_.empty() || t_.size() != u_.size()) {
    throw std::invalid_argument("time-change map needs equal, nonzero breakpoint counts");
  }
  if (t_.front() != 0.0 || u_.front() != 0.0) {
    throw std::invalid_argument("time-change map must be anchored at (0,0)");
  }
  for (std::size_t k = 1; k < t_.size(); ++k) {
    if (!(t_[k] > t_[k - 1]) || !(u_[k] > u_[k - 1])) {
      throw std::invalid_argument(
          "time-change map breakpoints must be strictly increasing in both coordinates");
    }
  }
}

double TimeChangeMap::forward(double t) const { return polyline_at(t_, u_, t, "clock"); }

double TimeChangeMap::inverse(double u) const {
  return polyline_at(u_, t_, u, "inverse clock");
}

TimeChangeMap variance_clock(const ModelSpec& model, const GridPath& x) {
  x.validate();
  std::vector<double> u(x.times.size());
  u[0] = 0.0;
  for (std::size_t k = 1; k < x.times.size(); ++k) {
    // rho_t = int sigma^2(x(s)) ds, sigma^2 frozen at the left grid point
    u[k] = u[k - 1] + model.diffusion.sq(x.values[k - 1]) * (x.times[k] - x.times[k - 1]);
  }
  return TimeChangeMap(x.times, std::move(u));
}

TimeChangeMap inverse_variance_clock(const ModelSpec& model, const GridPath& y) {
  y.validate();
  std::vector<double> t(y.times.size());
  t[0] = 0.0;
  for (std::size_t k = 1; k < y.times.size(); ++k) {
    // T_u = int dv / sigma^2(y(v)), frozen at the left grid point
    t[k] = t[k - 1] + (y.times[k] - y.times[k - 1]) / model.diffusion.sq(y.values[k - 1]);
  }
  return TimeChangeMap(std::move(t), y.times);
}

TimeChangeMap euler_variance_clock(const ModelSpec& model, const GridPath& x, double h) {
  x.validate();
  if (!(h > 0.0)) {
    throw std::invalid_argument("invalid grid: step h must be positive");
  }
  const double horizon = x.horizon();
  const std::size_t n = static_cast<std::size_t>(
      std::floor(horizon / h + 1e-9));
  std::vector<double> t;
  std::vector<double> u;
  t.reserve(n + 2);
  u.reserve(n + 2);
  t.push_back(0.0);
  u.push_back(0.0);
  double frozen = model.diffusion.sq(x.values[knot_index(x.times, 0.0)]);
  for (std::size_t i = 1; i <= n; ++i) {
    const std::size_t k = knot_index(x.times, static_cast<double>(i) * h);
    const double ti = x.times[k];
    u.push_back(u.back() + frozen * (ti - t.back()));
    t.push_back(ti);
    frozen = model.diffusion.sq(x.values[k]);
  }
  if (horizon - t.back() > 1e-9 * std::max(1.0, horizon)) {
    u.push_back(u.back() + frozen * (horizon - t.back()));
    t.push_back(horizon);
  }
  return TimeChangeMap(std::move(t), std::move(u));
}

double euler_clock_at(const ModelSpec& model, const GridPath& y, double t, double h) {
  if (!(h > 0.0)) {
    throw std::invalid_argument("invalid grid: step h must be positive");
  }
  if (t < 0.0) {
    throw std::out_of_range("clock evaluated before 0");
  }
  double a = 0.0;
  double left = 0.0;
  std::size_t i = 1;
  while (static_cast<double>(i) * h < t - 1e-12 * std::max(1.0, t)) {
    const double ti = static_cast<double>(i) * h;
    a += model.diffusion.sq(y.value_at(a)) * (ti - left);
    left = ti;
    ++i;
  }
  if (t > left) {
    a += model.diffusion.sq(y.value_at(a)) * (t - left);
  }
  return a;
}

TimeChangeMap euler_clock_from_path(const ModelSpec& model, const GridPath& y,
                                    double h, std::size_t n) {
  if (!(h > 0.0)) {
    throw std::invalid_argument("invalid grid: step h must be positive");
  }
  std::vector<double> t(n + 1);
  std::vector<double> u(n + 1);
  t[0] = 0.0;
  u[0] = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    t[i] = static_cast<double>(i) * h;
    u[i] = u[i - 1] + model.diffusion.sq(y.value_at(u[i - 1])) * (t[i] - t[i - 1]);
  }
  return TimeChangeMap(std::move(t), std::move(u));
}

GridPath forward_time_change(const ModelSpec& model, const GridPath& x) {
  const TimeChangeMap clock = variance_clock(model, x);
  GridPath y;
  y.times = clock.u_grid();  // u_k = rho(t_k), so y(u_k) = x(t_k)
  y.values = x.values;
  return y;
}

GridPath inverse_time_change(const ModelSpec& model, const GridPath& y) {
  const TimeChangeMap clock = inverse_variance_clock(model, y);
  GridPath x;
  x.times = clock.t_grid();  // t_k = T_{u_k}(y), so x(t_k) = y(u_k)
  x.values = y.values;
  return x;
}

GridPath euler_forward_time_change(const ModelSpec& model, const GridPath& x, double h) {
  const TimeChangeMap clock = euler_variance_clock(model, x, h);
  GridPath y;
  y.times.resize(x.times.size());
  for (std::size_t k = 0; k < x.times.size(); ++k) {
    y.times[k] = clock.forward(x.times[k]);
  }
  y.values = x.values;
  y.validate();
  return y;
}

}  // namespace lecam
