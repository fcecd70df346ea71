#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "lecam/sde.hpp"
#include "lecam/stats.hpp"

using namespace lecam;

namespace {

ModelSpec tanh_cosine_model() {
  return make_model({DriftFamily::Tanh, 0.5, 1.0}, {DiffusionFamily::Cosine, 2.0, 1.0},
                    InitialLaw::point(0.3));
}

ModelSpec sine_cosine_model() {
  return make_model({DriftFamily::Sine, 1.0, 1.0}, {DiffusionFamily::Cosine, 2.0, 1.0},
                    InitialLaw::point(0.1));
}

ModelSpec zero_unit_model() {
  return make_model({DriftFamily::Zero, 0.0, 1.0}, {DiffusionFamily::Constant, 1.0, 0.0});
}

BrownianPath subsample(const BrownianPath& w, std::size_t stride) {
  BrownianPath out;
  out.seed = w.seed;
  out.stream = w.stream;
  for (std::size_t k = 0; k < w.path.times.size(); k += stride) {
    out.path.times.push_back(w.path.times[k]);
    out.path.values.push_back(w.path.values[k]);
  }
  return out;
}

}  // namespace

TEST_CASE("knot_index matches grid points and rejects off-grid times") {
  const std::vector<double> times = uniform_grid(0.25, 8);
  for (std::size_t i = 0; i <= 8; ++i) {
    CHECK(knot_index(times, 0.25 * static_cast<double>(i)) == i);
  }
  CHECK_THROWS_AS(knot_index(times, 0.3), std::invalid_argument);
}

TEST_CASE("brownian sampling starts at zero and validates its grid") {
  const BrownianPath w = sample_brownian(uniform_grid(0.5, 4), 1, 0);
  CHECK(w.path.values[0] == 0.0);
  CHECK(w.path.size() == 5);

  const std::vector<double> shifted = {1.0, 2.0};
  CHECK_THROWS_AS(sample_brownian(shifted, 1, 0), std::invalid_argument);
  const std::vector<double> unsorted = {0.0, 2.0, 1.0};
  CHECK_THROWS_AS(sample_brownian(unsorted, 1, 0), std::invalid_argument);
}

TEST_CASE("brownian endpoint has variance t") {
  const std::vector<double> grid = uniform_grid(1.0 / 64, 64);
  RunningStat stat;
  for (std::uint64_t rep = 0; rep < 10000; ++rep) {
    stat.add(sample_brownian(grid, 77, rep).path.values.back());
  }
  CHECK(std::abs(stat.mean) < 0.04);              // se = 1/sqrt(1e4) = 0.01
  CHECK(std::abs(stat.variance() - 1.0) < 0.06);  // se ~ sqrt(2/1e4) ~ 0.014
}

TEST_CASE("zero drift and unit diffusion reproduce the driving path") {
  const ModelSpec m = zero_unit_model();
  const BrownianPath w = sample_brownian(uniform_grid(1.0 / 4096, 4096), 3, 1);
  const GridPath x = simulate_diffusion(m, w, 0.0);
  double dev = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    dev = std::max(dev, std::abs(x.values[k] - w.path.values[k]));
  }
  CHECK(dev < 5e-12);
}

TEST_CASE("diffusion surrogate self-converges at strong order 1/2") {
  // successive-refinement RMS differences shrink by sqrt(2) per halving
  const ModelSpec m = sine_cosine_model();
  const std::size_t fine_cells = 1 << 14;
  const std::vector<double> grid = uniform_grid(1.0 / static_cast<double>(fine_cells),
                                                fine_cells);
  RunningStat d1sq, d2sq;
  for (std::uint64_t rep = 0; rep < 800; ++rep) {
    const BrownianPath w14 = sample_brownian(grid, 99, rep);
    const BrownianPath w13 = subsample(w14, 2);
    const BrownianPath w12 = subsample(w14, 4);
    const double x12 = simulate_diffusion(m, w12, 0.1).values.back();
    const double x13 = simulate_diffusion(m, w13, 0.1).values.back();
    const double x14 = simulate_diffusion(m, w14, 0.1).values.back();
    d1sq.add((x12 - x13) * (x12 - x13));
    d2sq.add((x13 - x14) * (x13 - x14));
  }
  const double ratio = std::sqrt(d1sq.mean / d2sq.mean);
  CHECK(ratio > 1.2);
  CHECK(ratio < 1.7);
}

TEST_CASE("euler states satisfy the defining recursion in the innovations") {
  const ModelSpec m = tanh_cosine_model();
  RngStream rng(5, 0);
  const double h = 0.1;
  const EulerTrajectory traj = simulate_euler(m, h, 50, 0.3, rng);
  REQUIRE(traj.cells() == 50);
  const double sqh = std::sqrt(h);
  double z = 0.3;
  for (std::size_t i = 0; i < traj.cells(); ++i) {
    z = z + h * m.drift.value(z) + sqh * m.diffusion.value(z) * traj.innovations[i];
    CHECK(traj.states[i + 1] == z);
  }
  RngStream rng2(5, 1);
  CHECK_THROWS_AS(simulate_euler(m, 0.0, 4, 0.0, rng2), std::invalid_argument);
}

TEST_CASE("euler with a silent driver integrates the drift alone") {
  const ModelSpec m = make_model({DriftFamily::Constant, 1.0, 1.0},
                                 {DiffusionFamily::Constant, 1.0, 0.0});
  const double h = 0.0078125;  // 2^-7, so the partial sums are exact
  BrownianPath w;
  w.path.times = uniform_grid(h, 100);
  w.path.values.assign(101, 0.0);
  const EulerTrajectory traj = euler_from_brownian(m, w, h, 100, 0.0);
  for (std::size_t i = 0; i <= 100; ++i) {
    CHECK(traj.states[i] == static_cast<double>(i) * h);
  }
}

TEST_CASE("drift-free unit euler marginal has variance n h") {
  const ModelSpec m = zero_unit_model();
  RunningStat stat;
  RngStream rng(31, 0);
  for (int rep = 0; rep < 10000; ++rep) {
    stat.add(simulate_euler(m, 0.01, 100, 0.0, rng).states.back());
  }
  CHECK(std::abs(stat.mean) < 0.04);
  CHECK(std::abs(stat.variance() - 1.0) < 0.06);
}

TEST_CASE("euler driven by a stored brownian path tracks its knots") {
  const ModelSpec m = zero_unit_model();
  const double h = 1.0 / 16;
  const BrownianPath w = sample_brownian(uniform_grid(h / 64, 16 * 64), 13, 2);
  const EulerTrajectory traj = euler_from_brownian(m, w, h, 16, 0.0);
  for (std::size_t i = 0; i <= 16; ++i) {
    const double wt = w.path.values[knot_index(w.path.times, static_cast<double>(i) * h)];
    CHECK(std::abs(traj.states[i] - wt) < 1e-10);
  }

  // sampling step incommensurate with the stored grid
  const BrownianPath wc = sample_brownian(uniform_grid(0.25, 4), 13, 3);
  CHECK_THROWS_AS(euler_from_brownian(m, wc, 0.3, 3, 0.0), std::invalid_argument);
}

TEST_CASE("unit-diffusion simulation drifts at the prescribed mean rate") {
  RngStream rng(17, 0);
  const auto drift = [](double) { return 0.7; };
  RunningStat stat;
  for (int rep = 0; rep < 2000; ++rep) {
    const GridPath y = simulate_unit_sde(drift, 0.0, 1.0, 1.0 / 128, rng);
    CHECK(y.size() == 129);
    stat.add(y.values.back());
  }
  CHECK(std::abs(stat.mean - 0.7) < 0.1);  // se = 1/sqrt(2000) ~ 0.022

  RngStream rng2(17, 1);
  CHECK_THROWS_AS(simulate_unit_sde(drift, 0.0, 1.0, 0.0, rng2), std::invalid_argument);
  CHECK_THROWS_AS(simulate_unit_sde(drift, 0.0, -1.0, 0.1, rng2), std::invalid_argument);
}
