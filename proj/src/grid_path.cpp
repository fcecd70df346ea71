#include "lecam/grid_path.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace lecam {

namespace {

double end_slop(double horizon) {
  return 1e-9 * std::max(1.0, std::abs(horizon));
}

}  // namespace

void GridPath::validate() const {
  if (times.empty() || times.size() != values.size()) {
    throw std::invalid_argument("invalid grid: need equal, nonzero time/value counts");
  }
  if (times.front() != 0.0) {
    throw std::invalid_argument("invalid grid: times must start at 0");
  }
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (!(times[k] > times[k - 1])) {
      throw std::invalid_argument("invalid grid: times must be strictly increasing");
    }
  }
}

double GridPath::value_at(double t) const {
  const double lo = times.front();
  const double hi = times.back();
  const double slop = end_slop(hi);
  if (t <= lo) {
    if (lo - t > slop) {
      throw std::out_of_range("path evaluated before its start: t=" + std::to_string(t));
    }
    return values.front();
  }
  if (t >= hi) {
    if (t - hi > slop) {
      throw std::out_of_range("path evaluated beyond its horizon: t=" + std::to_string(t) +
                              ", horizon=" + std::to_string(hi));
    }
    return values.back();
  }
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const std::size_t k = static_cast<std::size_t>(it - times.begin()) - 1;
  const double w = (t - times[k]) / (times[k + 1] - times[k]);
  return values[k] + w * (values[k + 1] - values[k]);
}

std::vector<double> uniform_grid(double step, std::size_t cells) {
  if (!(step > 0.0)) {
    throw std::invalid_argument("invalid grid: step must be positive");
  }
  std::vector<double> grid(cells + 1);
  for (std::size_t k = 0; k <= cells; ++k) {
    grid[k] = static_cast<double>(k) * step;
  }
  return grid;
}

}  // namespace lecam
