#include "lecam/girsanov.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lecam/time_change.hpp"

namespace lecam {

DriftRatio drift_ratio(const ModelSpec& model) {
  DriftRatio f;
  f.model = model;
  const double s0sq = model.sigma0_sq;
  const double s1 = std::sqrt(model.sigma1_sq);
  // L = (K / sigma0^2) (1 + 2 K_sigma sigma1 / sigma0^2)
  f.lipschitz = (model.drift_bound / s0sq) *
                (1.0 + 2.0 * model.sigma_reg_bound * s1 / s0sq);
  f.sup_abs = model.drift_bound / s0sq;
  return f;
}

double PiecewiseDrift::operator()(double u) const {
  const double hi = knots.back();
  const double slop = 1e-9 * std::max(1.0, std::abs(hi));
  if (u < knots.front() - slop || u > hi + slop) {
    throw std::out_of_range("piecewise drift evaluated outside its knot span");
  }
  if (u >= hi) {
    return level.back();
  }
  const auto it = std::upper_bound(knots.begin(), knots.end(), u);
  std::size_t k = static_cast<std::size_t>(it - knots.begin());
  if (k > 0) --k;
  return level[std::min(k, level.size() - 1)];
}

PiecewiseDrift euler_unit_drift(const DriftRatio& f, const GridPath& y, double h,
                                std::size_t n) {
  const TimeChangeMap clock = euler_clock_from_path(f.model, y, h, n);
  PiecewiseDrift pd;
  pd.knots = clock.u_grid();
  pd.level.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    pd.level[i] = f(y.value_at(pd.knots[i]));
  }
  return pd;
}

namespace {

// Walks the cells of y clipped to [0, horizon], calling
// visit(left_value_index, du, dy_or_zero).
template <typename Visit>
void sweep_cells(const GridPath& y, double horizon, bool need_dy, Visit visit) {
  y.validate();
  if (horizon < 0.0) {
    throw std::invalid_argument("horizon must be nonnegative");
  }
  const double slop = 1e-9 * std::max(1.0, std::abs(y.horizon()));
  if (horizon > y.horizon() + slop) {
    throw std::out_of_range("horizon exceeds the path horizon");
  }
  for (std::size_t k = 0; k + 1 < y.times.size(); ++k) {
    const double u0 = y.times[k];
    if (u0 >= horizon) break;
    const bool clipped = y.times[k + 1] > horizon;
    const double u1 = clipped ? horizon : y.times[k + 1];
    const double du = u1 - u0;
    if (du <= 0.0) break;
    double dy = 0.0;
    if (need_dy) {
      const double yv = clipped ? y.value_at(u1) : y.values[k + 1];
      dy = yv - y.values[k];
    }
    visit(k, du, dy);
  }
}

}  // namespace

LogLikelihoodRatio log_likelihood_ratio(const PathDrift& p, const PathDrift& q,
                                        const GridPath& y, double horizon) {
  LogLikelihoodRatio out;
  out.horizon = horizon;
  sweep_cells(y, horizon, true, [&](std::size_t k, double du, double dy) {
    const double pk = p(y.times[k], y);
    const double qk = q(y.times[k], y);
    out.integral_term += (pk - qk) * dy;
    out.energy_term += 0.5 * (pk * pk - qk * qk) * du;
  });
  out.value = out.integral_term - out.energy_term;
  return out;
}

double squared_drift_gap(const PathDrift& p, const PathDrift& q, const GridPath& y,
                         double horizon) {
  double acc = 0.0;
  sweep_cells(y, horizon, false, [&](std::size_t k, double du, double) {
    const double d = p(y.times[k], y) - q(y.times[k], y);
    acc += 0.5 * d * d * du;
  });
  return acc;
}

MeanEstimate kl_divergence(const PathDrift& p, const PathDrift& q,
                           std::span<const GridPath> paths, double horizon) {
  if (paths.size() < 2) {
    throw std::invalid_argument("kl estimate needs at least 2 replicate paths");
  }
  RunningStat stat;
  for (const GridPath& y : paths) {
    stat.add(squared_drift_gap(p, q, y, horizon));
  }
  return {stat.mean, stat.std_error(), stat.n};
}

double pinsker_tv_bound(double kl) {
  if (kl < 0.0) {
    throw std::domain_error("kl divergence cannot be negative");
  }
  return std::sqrt(kl / 2.0);
}

MeanEstimate tv_plugin_estimate(std::span<const double> log_lr_samples) {
  if (log_lr_samples.size() < 2) {
    throw std::invalid_argument("tv estimate needs at least 2 samples");
  }
  RunningStat stat;
  for (double s : log_lr_samples) {
    stat.add(0.5 * std::abs(std::exp(s) - 1.0));
  }
  return {stat.mean, stat.std_error(), stat.n};
}

}  // namespace lecam
