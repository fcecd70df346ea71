#include "lecam/rate_harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "lecam/girsanov.hpp"
#include "lecam/grid_path.hpp"

namespace lecam {

namespace {

constexpr std::uint64_t kGapTag = 1;
constexpr std::uint64_t kKlTag = 2;

// One stream per (experiment, arm, replicate): every cell of an arm replays
// the same gaussian sequence, so cross-cell comparisons (monotonicity, rate
// fits) run on common random numbers.
std::uint64_t stream_id(std::uint64_t tag, std::uint64_t arm, std::size_t replicate) {
  return ((tag * 4096 + arm) << 32) | static_cast<std::uint64_t>(replicate);
}

struct TaggedCell {
  ScanCell cell;
  std::string arm;
  std::uint64_t arm_id = 0;  // 0 fixed_T, 1 decay
};

std::vector<TaggedCell> all_cells(const ScanConfig& cfg) {
  std::vector<TaggedCell> cells;
  for (const ScanCell& c : cfg.fixed_horizon) {
    cells.push_back({c, "fixed_T", 0});
  }
  for (const ScanCell& c : cfg.decay) {
    cells.push_back({c, "decay", 1});
  }
  for (const TaggedCell& tc : cells) {
    if (tc.cell.n == 0 || !(tc.cell.h > 0.0)) {
      throw std::invalid_argument("scan cells need n >= 1 and h > 0");
    }
  }
  return cells;
}

void validate_config(const ScanConfig& cfg) {
  if (cfg.replicates < 2) {
    throw std::invalid_argument("insufficient replicates: need at least 2 per cell");
  }
  if (cfg.fine_ratio < 2 || (cfg.fine_ratio & (cfg.fine_ratio - 1)) != 0) {
    throw std::invalid_argument("fine ratio must be a power of two, at least 2");
  }
}

// In-place pairwise reduction. For a power-of-two count of equal summands
// every partial sum is exact, which the gap computation relies on.
double pairwise_sum(double* v, std::size_t count) {
  for (std::size_t width = 1; width < count; width <<= 1) {
    for (std::size_t j = 0; j + width < count; j += 2 * width) {
      v[j] += v[j + width];
    }
  }
  return v[0];
}

// Runs body(replicate) for every replicate, optionally across threads.
// Results must be written into preallocated slots so the aggregation order
// is independent of the schedule.
void run_replicates(std::size_t count, int jobs,
                    const std::function<void(std::size_t)>& body) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers =
      std::min<std::size_t>(jobs <= 1 ? 1 : std::min<std::size_t>(jobs, hw), count);
  if (workers <= 1) {
    for (std::size_t r = 0; r < count; ++r) body(r);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t r = next.fetch_add(1);
      if (r >= count || failed.load()) return;
      try {
        body(r);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

// E|A_n - abar_n| closed-form bound from the generator/martingale split:
// the drift part of each cell contributes at most sup|L sigma^2| h^2 / 2 and
// the martingale part has second moment at most sup((sigma^2)' sigma)^2 n h^3 / 3.
double gap_bound_closed_form(const ModelSpec& m, std::size_t n, double h) {
  const double s1 = std::sqrt(m.sigma1_sq);
  const double ks = m.sigma_reg_bound;
  const double sup_d1 = 2.0 * s1 * ks;              // sup |(sigma^2)'|
  const double sup_d2 = 2.0 * (ks * ks + s1 * ks);  // sup |(sigma^2)''|
  const double gen = 0.5 * m.sigma1_sq * sup_d2 + m.drift_bound * sup_d1;
  const double mart_sq = (sup_d1 * s1) * (sup_d1 * s1);
  const double nn = static_cast<double>(n);
  return 0.5 * nn * gen * h * h + std::sqrt(mart_sq * nn * h * h * h / 3.0);
}

// KL bound 2 L^2 ( K^2/(3 sigma0^4) n (sigma1^2 h)^3 + n (sigma1^2 h)^2 / 2 ).
double kl_bound_closed_form(const ModelSpec& m, std::size_t n, double h) {
  const DriftRatio f = drift_ratio(m);
  const double cell = m.sigma1_sq * h;
  const double nn = static_cast<double>(n);
  const double k_over_s0sq = m.drift_bound / m.sigma0_sq;
  return 2.0 * f.lipschitz * f.lipschitz *
         (k_over_s0sq * k_over_s0sq * nn * cell * cell * cell / 3.0 +
          nn * cell * cell / 2.0);
}

struct GapCellOut {
  MeanEstimate gap;
  MeanEstimate stopped;
  double gap_bound = 0.0;
  double chain = 0.0;  // K^2/(2 sigma0^4) * gap estimate
};

GapCellOut run_gap_cell(const ScanConfig& cfg, const TaggedCell& tc) {
  const ModelSpec& m = cfg.model;
  const std::size_t n = tc.cell.n;
  const double h = tc.cell.h;
  const std::size_t ratio = cfg.fine_ratio;
  const double delta = h / static_cast<double>(ratio);
  const double sqd = std::sqrt(delta);
  // the clock recursion queries the warped path up to sigma1^2 n h, so the
  // fine simulation runs past n h by the variance ratio
  const std::size_t steps_T = n * ratio;
  const double extend = std::max(1.0, m.sigma1_sq / m.sigma0_sq);
  const std::size_t steps =
      static_cast<std::size_t>(std::ceil(static_cast<double>(steps_T) * extend)) + ratio;
  std::vector<double> gaps(cfg.replicates);
  std::vector<double> stopped(cfg.replicates);
  run_replicates(cfg.replicates, cfg.jobs, [&](std::size_t rep) {
    RngStream rng(cfg.master_seed, stream_id(kGapTag, tc.arm_id, rep));
    GridPath y;  // forward time change of the fine diffusion, built on the fly
    y.times.resize(steps + 1);
    y.values.resize(steps + 1);
    std::vector<double> inc(steps_T);  // variance-clock increments over [0, n h]
    y.times[0] = 0.0;
    y.values[0] = m.initial.sample(rng);
    for (std::size_t k = 0; k < steps; ++k) {
      const double x = y.values[k];
      const double s = m.diffusion.value(x);
      const double dv = s * s * delta;
      y.times[k + 1] = y.times[k] + dv;
      if (k < steps_T) inc[k] = dv;
      y.values[k + 1] = x + m.drift.value(x) * delta + s * sqd * rng.next_gaussian();
    }
    // A_n - abar_n accumulated cell by cell as (quadrature block - frozen
    // term). The block is a pairwise sum, so a constant sigma^2 gives
    // block == sigma^2 h bitwise and the gap is exactly zero for any h.
    double abar = 0.0;
    double diff = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double frozen = m.diffusion.sq(y.value_at(abar)) * h;
      const double block = pairwise_sum(inc.data() + i * ratio, ratio);
      diff += block - frozen;
      abar += frozen;
    }
    gaps[rep] = std::abs(diff);
    // 1/2 int_{S}^{A_n} f(y)^2 du with S = min(A_n, abar); empty unless the
    // quadrature clock overshoots the frozen one
    double acc = 0.0;
    if (diff > 0.0) {
      const double lo = abar;
      const double hi = abar + diff;
      auto it = std::upper_bound(y.times.begin(), y.times.end(), lo);
      std::size_t k = static_cast<std::size_t>(it - y.times.begin());
      if (k > 0) --k;
      for (; k < steps && y.times[k] < hi; ++k) {
        const double du = std::min(y.times[k + 1], hi) - std::max(y.times[k], lo);
        if (du <= 0.0) continue;
        const double f = m.drift.value(y.values[k]) / m.diffusion.sq(y.values[k]);
        acc += 0.5 * f * f * du;
      }
    }
    stopped[rep] = acc;
  });
  GapCellOut out;
  out.gap = summarize(gaps);
  out.stopped = summarize(stopped);
  out.gap_bound = gap_bound_closed_form(m, n, h);
  out.chain = m.drift_bound * m.drift_bound /
              (2.0 * m.sigma0_sq * m.sigma0_sq) * out.gap.estimate;
  return out;
}

struct KlCellOut {
  MeanEstimate kl;
  double bound = 0.0;
};

KlCellOut run_kl_cell(const ScanConfig& cfg, const TaggedCell& tc) {
  const ModelSpec& m = cfg.model;
  const std::size_t n = tc.cell.n;
  const double h = tc.cell.h;
  const double du = h / static_cast<double>(cfg.fine_ratio);
  const double squ = std::sqrt(du);
  const double horizon = m.sigma1_sq * static_cast<double>(n) * h;
  const std::size_t steps =
      static_cast<std::size_t>(std::ceil(horizon / du - 1e-12)) + 1;
  std::vector<double> kls(cfg.replicates);
  run_replicates(cfg.replicates, cfg.jobs, [&](std::size_t rep) {
    RngStream rng(cfg.master_seed, stream_id(kKlTag, tc.arm_id, rep));
    GridPath y;  // unit diffusion dY = f(Y) du + dB
    y.times.resize(steps + 1);
    y.values.resize(steps + 1);
    y.times[0] = 0.0;
    y.values[0] = m.initial.sample(rng);
    for (std::size_t k = 0; k < steps; ++k) {
      const double x = y.values[k];
      const double f = m.drift.value(x) / m.diffusion.sq(x);
      y.times[k + 1] = y.times[k] + du;
      y.values[k + 1] = x + f * du + squ * rng.next_gaussian();
    }
    // reconstructed clock knots and the frozen drift levels
    std::vector<double> T(n + 1);
    std::vector<double> level(n + 1, 0.0);
    T[0] = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
      const double state = y.value_at(T[i - 1]);
      T[i] = T[i - 1] + m.diffusion.sq(state) * h;
      level[i] = m.drift.value(state) / m.diffusion.sq(state);
    }
    // 1/2 int_0^{T_n} (f(Y_v) - fbar(v, Y))^2 dv, left-endpoint rule
    double acc = 0.0;
    std::size_t cell = 1;
    for (std::size_t k = 0; k < steps; ++k) {
      const double u = y.times[k];
      if (u >= T[n]) break;
      while (cell < n && u >= T[cell]) ++cell;
      const double x = y.values[k];
      const double d = m.drift.value(x) / m.diffusion.sq(x) - level[cell];
      const double w = std::min(y.times[k + 1], T[n]) - u;
      acc += 0.5 * d * d * w;
    }
    kls[rep] = acc;
  });
  KlCellOut out;
  out.kl = summarize(kls);
  out.bound = kl_bound_closed_form(m, n, h);
  return out;
}

RateScanRecord make_record(const std::string& quantity, const TaggedCell& tc,
                           const MeanEstimate& e, double bound,
                           const ScanConfig& cfg) {
  RateScanRecord rec;
  rec.quantity = quantity;
  rec.n = tc.cell.n;
  rec.h = tc.cell.h;
  rec.nh2 = static_cast<double>(tc.cell.n) * tc.cell.h * tc.cell.h;
  rec.estimate = e.estimate;
  rec.std_error = e.std_error;
  rec.bound = bound;
  rec.bound_type = "closed_form";
  rec.seed = cfg.master_seed;
  rec.arm = tc.arm;
  return rec;
}

// sqrt(kl/2) with a delta-method standard error
MeanEstimate pinsker_of(const MeanEstimate& kl) {
  MeanEstimate tv;
  tv.count = kl.count;
  tv.estimate = std::sqrt(std::max(kl.estimate, 0.0) / 2.0);
  tv.std_error =
      kl.estimate > 0.0 ? kl.std_error / (2.0 * std::sqrt(2.0 * kl.estimate)) : 0.0;
  return tv;
}

void append_gap_family(std::vector<RateScanRecord>& out, const ScanConfig& cfg,
                       const std::vector<TaggedCell>& cells,
                       const std::vector<GapCellOut>& results, bool gap_rows,
                       bool stopped_rows) {
  if (gap_rows) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      out.push_back(make_record("gap", cells[c], results[c].gap, results[c].gap_bound, cfg));
    }
  }
  if (stopped_rows) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      out.push_back(
          make_record("stopped_kl", cells[c], results[c].stopped, results[c].chain, cfg));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      RateScanRecord rec = make_record("stopped_tv", cells[c],
                                       pinsker_of(results[c].stopped),
                                       std::sqrt(results[c].chain / 2.0), cfg);
      out.push_back(rec);
    }
  }
}

void append_kl_family(std::vector<RateScanRecord>& out, const ScanConfig& cfg,
                      const std::vector<TaggedCell>& cells,
                      const std::vector<KlCellOut>& results) {
  for (std::size_t c = 0; c < cells.size(); ++c) {
    out.push_back(make_record("kl", cells[c], results[c].kl, results[c].bound, cfg));
  }
  for (std::size_t c = 0; c < cells.size(); ++c) {
    out.push_back(make_record("kl_tv", cells[c], pinsker_of(results[c].kl),
                              std::sqrt(results[c].bound / 2.0), cfg));
  }
}

}  // namespace

ScanConfig default_scan_config(const ModelSpec& model) {
  ScanConfig cfg;
  cfg.model = model;
  cfg.fixed_horizon = {{8, 1.0 / 8}, {16, 1.0 / 16}, {32, 1.0 / 32}, {64, 1.0 / 64}};
  for (std::size_t n : {16, 32, 64, 128}) {
    cfg.decay.push_back({n, std::pow(static_cast<double>(n), -0.75)});
  }
  return cfg;
}

std::vector<RateScanRecord> gap_scan(const ScanConfig& cfg) {
  validate_config(cfg);
  const std::vector<TaggedCell> cells = all_cells(cfg);
  std::vector<GapCellOut> results;
  results.reserve(cells.size());
  for (const TaggedCell& tc : cells) results.push_back(run_gap_cell(cfg, tc));
  std::vector<RateScanRecord> out;
  append_gap_family(out, cfg, cells, results, true, false);
  return out;
}

std::vector<RateScanRecord> stopped_scan(const ScanConfig& cfg) {
  validate_config(cfg);
  const std::vector<TaggedCell> cells = all_cells(cfg);
  std::vector<GapCellOut> results;
  results.reserve(cells.size());
  for (const TaggedCell& tc : cells) results.push_back(run_gap_cell(cfg, tc));
  std::vector<RateScanRecord> out;
  append_gap_family(out, cfg, cells, results, false, true);
  return out;
}

std::vector<RateScanRecord> kl_scan(const ScanConfig& cfg) {
  validate_config(cfg);
  const std::vector<TaggedCell> cells = all_cells(cfg);
  std::vector<KlCellOut> results;
  results.reserve(cells.size());
  for (const TaggedCell& tc : cells) results.push_back(run_kl_cell(cfg, tc));
  std::vector<RateScanRecord> out;
  append_kl_family(out, cfg, cells, results);
  return out;
}

std::vector<RateScanRecord> full_scan(const ScanConfig& cfg) {
  validate_config(cfg);
  const std::vector<TaggedCell> cells = all_cells(cfg);
  std::vector<GapCellOut> gap_results;
  std::vector<KlCellOut> kl_results;
  gap_results.reserve(cells.size());
  kl_results.reserve(cells.size());
  for (const TaggedCell& tc : cells) {
    gap_results.push_back(run_gap_cell(cfg, tc));
    kl_results.push_back(run_kl_cell(cfg, tc));
  }
  std::vector<RateScanRecord> out;
  append_gap_family(out, cfg, cells, gap_results, true, true);
  append_kl_family(out, cfg, cells, kl_results);
  return out;
}

LineFit fit_rate(const std::vector<RateScanRecord>& records, Predictor predictor) {
  std::vector<double> lx, ly;
  for (const RateScanRecord& r : records) {
    double p = 0.0;
    switch (predictor) {
      case Predictor::StepSize:
        p = r.h;
        break;
      case Predictor::DriftTime:
        p = r.nh2;
        break;
      case Predictor::Cells:
        p = static_cast<double>(r.n);
        break;
    }
    if (!(r.estimate > 0.0)) {
      std::fprintf(stderr, "fit_rate warning: dropping non-positive estimate (%s n=%zu)\n",
                   r.quantity.c_str(), r.n);
      continue;
    }
    lx.push_back(std::log(p));
    ly.push_back(std::log(r.estimate));
  }
  if (lx.size() < 3) {
    throw std::invalid_argument("insufficient records: rate fit needs at least 3 points");
  }
  return ols_line(lx, ly);
}

namespace {

std::vector<RateScanRecord> select(const std::vector<RateScanRecord>& records,
                                   const std::string& quantity, const std::string& arm) {
  std::vector<RateScanRecord> out;
  for (const RateScanRecord& r : records) {
    if (r.quantity == quantity && (arm.empty() || r.arm == arm)) out.push_back(r);
  }
  return out;
}

bool decreasing_along_nh2(std::vector<RateScanRecord> rs, std::string* detail) {
  std::sort(rs.begin(), rs.end(),
            [](const RateScanRecord& a, const RateScanRecord& b) { return a.nh2 > b.nh2; });
  for (std::size_t i = 1; i < rs.size(); ++i) {
    const bool both_zero = rs[i].estimate == 0.0 && rs[i - 1].estimate == 0.0;
    if (!both_zero && !(rs[i].estimate < rs[i - 1].estimate)) {
      if (detail) {
        *detail = "not decreasing between nh2=" + std::to_string(rs[i - 1].nh2) +
                  " and nh2=" + std::to_string(rs[i].nh2);
      }
      return false;
    }
  }
  return true;
}

std::size_t positive_count(const std::vector<RateScanRecord>& rs) {
  std::size_t c = 0;
  for (const RateScanRecord& r : rs) {
    if (r.estimate > 0.0) ++c;
  }
  return c;
}

}  // namespace

ScanReport analyze_scan(const std::vector<RateScanRecord>& records) {
  ScanReport report;

  ScanCheck bounds{"bound_dominance", true, true, ""};
  for (const RateScanRecord& r : records) {
    if (r.estimate > r.bound + 3.0 * r.std_error) {
      bounds.pass = false;
      bounds.detail = r.quantity + " n=" + std::to_string(r.n) +
                      " estimate exceeds bound + 3 stderr";
      break;
    }
  }
  report.checks.push_back(bounds);

  const auto gap_fixed = select(records, "gap", "fixed_T");
  ScanCheck gap_mono{"gap_monotone_fixed_T", true, gap_fixed.size() >= 2, ""};
  if (gap_mono.applicable) {
    std::vector<RateScanRecord> sorted = gap_fixed;
    std::sort(sorted.begin(), sorted.end(),
              [](const RateScanRecord& a, const RateScanRecord& b) { return a.h > b.h; });
    for (std::size_t i = 1; i < sorted.size(); ++i) {
      const bool both_zero = sorted[i].estimate == 0.0 && sorted[i - 1].estimate == 0.0;
      if (!both_zero && !(sorted[i].estimate < sorted[i - 1].estimate)) {
        gap_mono.pass = false;
        gap_mono.detail = "gap not decreasing from h=" + std::to_string(sorted[i - 1].h) +
                          " to h=" + std::to_string(sorted[i].h);
        break;
      }
    }
  }
  report.checks.push_back(gap_mono);

  ScanCheck gap_rate{"gap_rate_fixed_T", true, positive_count(gap_fixed) >= 3, ""};
  if (gap_rate.applicable) {
    const LineFit fit = fit_rate(gap_fixed, Predictor::StepSize);
    report.fits.push_back({"gap", "h", "fixed_T", fit});
    gap_rate.pass = fit.slope >= kGapSlopeMin && fit.slope <= kGapSlopeMax;
    gap_rate.detail = "slope " + std::to_string(fit.slope);
  }
  report.checks.push_back(gap_rate);

  const auto kl_tv_decay = select(records, "kl_tv", "decay");
  ScanCheck tv_rate{"kl_tv_rate_decay", true, positive_count(kl_tv_decay) >= 3, ""};
  if (tv_rate.applicable) {
    const LineFit fit = fit_rate(kl_tv_decay, Predictor::DriftTime);
    report.fits.push_back({"kl_tv", "nh2", "decay", fit});
    tv_rate.pass = fit.slope >= kTvSlopeMin && fit.slope <= kTvSlopeMax;
    tv_rate.detail = "slope " + std::to_string(fit.slope);
  }
  report.checks.push_back(tv_rate);

  const auto stopped_fixed = select(records, "stopped_tv", "fixed_T");
  const auto stopped_decay = select(records, "stopped_tv", "decay");
  ScanCheck stopped_mono{"stopped_tv_decreasing", true,
                         stopped_fixed.size() >= 2 || stopped_decay.size() >= 2, ""};
  if (stopped_mono.applicable) {
    std::string detail;
    if (stopped_fixed.size() >= 2 && !decreasing_along_nh2(stopped_fixed, &detail)) {
      stopped_mono.pass = false;
      stopped_mono.detail = "fixed_T arm: " + detail;
    }
    if (stopped_mono.pass && stopped_decay.size() >= 2 &&
        !decreasing_along_nh2(stopped_decay, &detail)) {
      stopped_mono.pass = false;
      stopped_mono.detail = "decay arm: " + detail;
    }
  }
  report.checks.push_back(stopped_mono);

  for (const RateScanRecord& r : records) {
    if (r.quantity == "gap" && r.nh2 > 0.0) {
      report.gap_over_nh2 = std::max(report.gap_over_nh2, r.estimate / r.nh2);
    }
    if (r.quantity == "stopped_tv" && r.nh2 > 0.0) {
      report.stopped_tv_over_sqrt_nh2 =
          std::max(report.stopped_tv_over_sqrt_nh2, r.estimate / std::sqrt(r.nh2));
    }
    if (r.quantity == "kl_tv" && r.nh2 > 0.0) {
      report.kl_tv_over_sqrt_nh2 =
          std::max(report.kl_tv_over_sqrt_nh2, r.estimate / std::sqrt(r.nh2));
    }
  }

  report.pass = true;
  for (const ScanCheck& c : report.checks) {
    if (c.applicable && !c.pass) report.pass = false;
  }
  return report;
}

}  // namespace lecam
