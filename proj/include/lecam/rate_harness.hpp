#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "lecam/model.hpp"
#include "lecam/stats.hpp"

namespace lecam {

struct ScanCell {
  std::size_t n = 0;  // sampling cells
  double h = 0.0;     // sampling step
};

// Two arms: a fixed-horizon arm (T = n h constant, h halving) and a decay
// arm along which n h^2 -> 0 while T = n h grows.
struct ScanConfig {
  ModelSpec model;
  std::vector<ScanCell> fixed_horizon;
  std::vector<ScanCell> decay;
  std::size_t replicates = 1000;
  std::size_t fine_ratio = 64;  // fine simulation step = h / fine_ratio; power of two
  std::uint64_t master_seed = 1;
  int jobs = 1;
};

// Default grid: T = 1 with h in {2^-3..2^-6}, plus n in {2^4..2^7} with
// h = n^(-3/4) so that n h^2 = n^(-1/2).
ScanConfig default_scan_config(const ModelSpec& model);

struct RateScanRecord {
  std::string quantity;  // gap | stopped_kl | stopped_tv | kl | kl_tv
  std::size_t n = 0;
  double h = 0.0;
  double nh2 = 0.0;
  double estimate = 0.0;
  double std_error = 0.0;
  double bound = 0.0;
  std::string bound_type;  // closed_form | fitted
  std::uint64_t seed = 0;
  std::string arm;  // fixed_T | decay (not serialized)
};

// Clock discrepancy E|A_n - abar_n| between the variance clock of a finely
// simulated diffusion and the Euler-frozen clock reconstructed from its
// unit-time image. Closed-form bound assembled from the certified constants
// via the generator/martingale split of the discrepancy.
std::vector<RateScanRecord> gap_scan(const ScanConfig& cfg);

// KL between the unit-diffusion law with Markov drift f and the one with the
// predictable Euler-frozen drift, by the exact formula
//   1/2 E int_0^{abar_n} (f(Y_v) - fbar(v, Y))^2 dv,
// plus its Pinsker total-variation proxy. Closed-form bound
//   2 L^2 ( K^2/(3 sigma0^4) n (sigma1^2 h)^3 + n (sigma1^2 h)^2 / 2 ).
std::vector<RateScanRecord> kl_scan(const ScanConfig& cfg);

// Randomly-stopped-experiment proxy E int_{S_n}^{A_n} f^2/2 du with
// S_n = min(A_n, abar_n), which is dominated pathwise by
// K^2/(2 sigma0^4) |A_n - abar_n|; records the proxy, the chained bound and
// the Pinsker TV of both.
std::vector<RateScanRecord> stopped_scan(const ScanConfig& cfg);

// gap + stopped (shared simulations) + kl, in one pass.
std::vector<RateScanRecord> full_scan(const ScanConfig& cfg);

enum class Predictor { StepSize, DriftTime, Cells };  // h, n h^2, n

// Log-log OLS of estimate against the predictor. Non-positive estimates are
// dropped with a warning; fewer than 3 usable records is an error.
LineFit fit_rate(const std::vector<RateScanRecord>& records, Predictor predictor);

// Declared acceptance windows for the fitted rates.
inline constexpr double kGapSlopeMin = 0.5;
inline constexpr double kGapSlopeMax = 1.5;
inline constexpr double kTvSlopeMin = 0.35;
inline constexpr double kTvSlopeMax = 0.65;

struct ScanCheck {
  std::string name;
  bool pass = false;
  bool applicable = true;
  std::string detail;
};

struct ScanFit {
  std::string quantity;
  std::string predictor;
  std::string arm;
  LineFit fit;
};

struct ScanReport {
  std::vector<ScanCheck> checks;
  std::vector<ScanFit> fits;
  // Fitted constants: max over records of estimate / rate(n, h).
  double gap_over_nh2 = 0.0;
  double stopped_tv_over_sqrt_nh2 = 0.0;
  double kl_tv_over_sqrt_nh2 = 0.0;
  bool pass = false;
};

// Bound dominance on every record, gap monotonicity and rate window on the
// fixed-horizon arm, TV rate window on the decay arm, and TV decrease along
// both n h^2 -> 0 trajectories.
ScanReport analyze_scan(const std::vector<RateScanRecord>& records);

}  // namespace lecam
