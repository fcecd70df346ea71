#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace lecam {

// A continuous path stored on a finite grid. Evaluation between grid
// points is piecewise-linear; queries outside [times.front(), times.back()]
// throw (a small relative slop absorbs roundoff at the ends). times must
// be strictly increasing and start at 0.
struct GridPath {
  std::vector<double> times;
  std::vector<double> values;

  std::size_t size() const { return times.size(); }
  double horizon() const { return times.back(); }
  double value_at(double t) const;
  void validate() const;  // throws std::invalid_argument on a bad grid
};

// Brownian sample path on a grid, tagged with the stream that produced it
// so a run can be reproduced from (seed, stream) alone.
struct BrownianPath {
  GridPath path;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

// {0, step, 2*step, ..., cells*step}
std::vector<double> uniform_grid(double step, std::size_t cells);

}  // namespace lecam
