// Acceptance run: one line per criterion, exit 0 only if all pass.
#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "lecam/euler_bridge.hpp"
#include "lecam/girsanov.hpp"
#include "lecam/io.hpp"
#include "lecam/rate_harness.hpp"
#include "lecam/sde.hpp"
#include "lecam/stats.hpp"
#include "lecam/time_change.hpp"

using namespace lecam;
namespace fs = std::filesystem;

namespace {

// pinned tolerances and budgets
constexpr double kRelIdentityTol = 1e-10;   // reconstruction identities
constexpr double kClosedFormTol = 1e-12;    // constant-drift likelihood ratio
constexpr double kMeanWindow = 0.04;        // innovation mean
constexpr double kVarWindow = 0.06;         // innovation variance
constexpr double kLagWindow = 0.04;         // innovation lag-1 autocovariance
constexpr double kKsAlpha = 0.01;           // marginal-law comparison level
constexpr double kInnovationBudget = 60.0;  // seconds
constexpr double kGapBudget = 60.0;         // seconds
constexpr double kScanBudget = 120.0;       // seconds

struct Outcome {
  bool pass = true;
  std::string detail;
};

void fail(Outcome& o, const std::string& why) {
  if (o.pass) {
    o.pass = false;
    o.detail = why;
  }
}

ModelSpec tanh_cosine_model() {
  return make_model({DriftFamily::Tanh, 0.5, 1.0}, {DiffusionFamily::Cosine, 2.0, 1.0},
                    InitialLaw::point(0.3));
}

ModelSpec sine_gaussian_model() {
  return make_model({DriftFamily::Sine, 0.5, 1.0}, {DiffusionFamily::Cosine, 2.0, 1.0},
                    InitialLaw::gaussian(0.3, 4.0));
}

ModelSpec zero_unit_model() {
  return make_model({DriftFamily::Zero, 0.0, 1.0}, {DiffusionFamily::Constant, 1.0, 0.0});
}

int scan_jobs() {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  return static_cast<int>(std::min(4u, hw));
}

// [1] forward/inverse clock evaluation inverts exactly at every breakpoint
Outcome clock_inversion() {
  Outcome o;
  const ModelSpec m = tanh_cosine_model();
  for (std::uint64_t rep = 0; rep < 100 && o.pass; ++rep) {
    const BrownianPath w = sample_brownian(uniform_grid(1.0 / 512, 512), 101, rep);
    const GridPath x = simulate_diffusion(m, w, 0.3);
    const TimeChangeMap rho = variance_clock(m, x);
    const GridPath y = forward_time_change(m, x);
    const TimeChangeMap amap = inverse_variance_clock(m, y);
    for (const TimeChangeMap* map : {&rho, &amap}) {
      const auto& t = map->t_grid();
      const auto& u = map->u_grid();
      for (std::size_t k = 0; k < t.size(); ++k) {
        if (map->forward(t[k]) != u[k] || map->inverse(u[k]) != t[k] ||
            map->inverse(map->forward(t[k])) != t[k] ||
            map->forward(map->inverse(u[k])) != u[k]) {
          fail(o, "breakpoint " + std::to_string(k) + " not inverted exactly");
          break;
        }
      }
      if (!o.pass) break;
    }
  }
  return o;
}

// [2] the warped path alone reconstructs the frozen clock of its source
Outcome clock_reconstruction() {
  Outcome o;
  const ModelSpec m = tanh_cosine_model();
  const double h = 0.125;
  const std::size_t n = 8;
  for (std::uint64_t rep = 0; rep < 100 && o.pass; ++rep) {
    const BrownianPath w = sample_brownian(uniform_grid(h / 64, n * 64), 202, rep);
    const GridPath x = simulate_diffusion(m, w, 0.3);
    const TimeChangeMap rhobar = euler_variance_clock(m, x, h);
    const GridPath y = euler_forward_time_change(m, x, h);
    for (std::size_t i = 1; i <= n; ++i) {
      const double t = static_cast<double>(i) * h;
      const double abar = euler_clock_at(m, y, t, h);
      const double rb = rhobar.forward(t);
      if (std::abs(abar - rb) > kRelIdentityTol * std::max(1.0, std::abs(rb))) {
        fail(o, "clock mismatch at cell " + std::to_string(i));
        break;
      }
    }
  }
  return o;
}

// [3] bridge infill pins the discrete states and, coupled to its driver in
// the driftless unit case, replays the driver
Outcome bridge_pinning() {
  Outcome o;
  const ModelSpec m = tanh_cosine_model();
  const ModelSpec unit = zero_unit_model();
  const double h = 0.125;
  const std::size_t n = 8;
  RngStream rng(303, 0);
  for (std::uint64_t rep = 0; rep < 100 && o.pass; ++rep) {
    const EulerTrajectory traj = simulate_euler(m, h, n, 0.3, rng);
    const GridPath fill = bridge_infill(traj, rng, 16);
    for (std::size_t i = 0; i <= n; ++i) {
      if (fill.values[i * 16] != traj.states[i]) {
        fail(o, "knot " + std::to_string(i) + " not pinned");
        break;
      }
    }
    if (!o.pass) break;
    const BrownianPath w = sample_brownian(uniform_grid(h / 32, n * 32), 304, rep);
    const EulerTrajectory utraj = euler_from_brownian(unit, w, h, n, 0.0);
    const GridPath ufill = bridge_infill_from_brownian(utraj, w);
    for (std::size_t k = 0; k < ufill.size(); ++k) {
      if (std::abs(ufill.values[k] - w.path.values[k]) > kRelIdentityTol) {
        fail(o, "driver not replayed at grid point " + std::to_string(k));
        break;
      }
    }
  }
  return o;
}

// [4] innovations extracted from the unit-diffusion image are iid standard
// gaussians, the image knots satisfy the euler recursion exactly, and the
// first reverse-mapped marginal matches the direct euler law
Outcome innovation_extraction(double elapsed_limit, double* spent) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const ModelSpec m = tanh_cosine_model();
  const double h = 0.05;
  const double z0 = 0.3;
  const std::size_t reps = 10000;
  RunningStat stat;
  double lag_sum = 0.0;
  std::size_t lag_pairs = 0;
  std::vector<double> mapped, direct;
  mapped.reserve(reps);
  direct.reserve(reps);
  RngStream direct_rng(404, 0);
  const double bh = h * m.drift.value(z0);
  const double sh = std::sqrt(h) * m.diffusion.value(z0);
  for (std::uint64_t rep = 0; rep < reps; ++rep) {
    const std::size_t cells = static_cast<std::size_t>(std::ceil(1.0 / (h / 64)));
    const BrownianPath w = sample_brownian(uniform_grid(h / 64, cells), 405, rep);
    const TimeChangedEuler tce = build_timechanged_euler(m, w, z0, h);
    const std::vector<double> eps = extract_innovations(tce);
    double z = z0;
    for (std::size_t i = 0; i < eps.size(); ++i) {
      z = z + h * m.drift.value(z) + std::sqrt(h) * m.diffusion.value(z) * eps[i];
      if (tce.path.value_at(tce.cell_clock[i + 1]) != z) {
        fail(o, "euler recursion broken at cell " + std::to_string(i));
      }
      stat.add(eps[i]);
      if (i + 1 < eps.size()) {
        lag_sum += eps[i] * eps[i + 1];
        ++lag_pairs;
      }
    }
    mapped.push_back(tce.path.value_at(tce.cell_clock[1]));
    direct.push_back(z0 + bh + sh * direct_rng.next_gaussian());
  }
  if (std::abs(stat.mean) > kMeanWindow) {
    fail(o, "innovation mean " + format_double(stat.mean));
  }
  if (std::abs(stat.variance() - 1.0) > kVarWindow) {
    fail(o, "innovation variance " + format_double(stat.variance()));
  }
  const double lag1 = lag_sum / static_cast<double>(lag_pairs);
  if (std::abs(lag1) > kLagWindow) {
    fail(o, "lag-1 autocovariance " + format_double(lag1));
  }
  const double ks = ks_statistic(mapped, direct);
  const double crit = ks_critical(kKsAlpha, mapped.size(), direct.size());
  if (ks >= crit) {
    fail(o, "first-marginal KS " + format_double(ks) + " >= " + format_double(crit));
  }
  *spent = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (*spent > elapsed_limit) {
    fail(o, "exceeded " + format_double(elapsed_limit) + " s budget");
  }
  return o;
}

// [5] the log-likelihood ratio is exactly antisymmetric, closed-form for
// constant drifts, and its exponential is mean-one under the reference law
Outcome likelihood_ratio_laws() {
  Outcome o;
  const DriftRatio f = drift_ratio(tanh_cosine_model());
  const PathDrift p = state_drift([f](double x) { return f(x); });
  const PathDrift q = constant_drift(0.2);
  const PathDrift zero = constant_drift(0.0);
  const double c = 0.8;
  for (std::uint64_t rep = 0; rep < 100 && o.pass; ++rep) {
    const GridPath y = sample_brownian(uniform_grid(1.0 / 256, 256), 505, rep).path;
    const LogLikelihoodRatio pq = log_likelihood_ratio(p, q, y, 1.0);
    const LogLikelihoodRatio qp = log_likelihood_ratio(q, p, y, 1.0);
    if (pq.value != -qp.value || pq.integral_term != -qp.integral_term ||
        pq.energy_term != -qp.energy_term) {
      fail(o, "antisymmetry broken on path " + std::to_string(rep));
    }
    const LogLikelihoodRatio cr =
        log_likelihood_ratio(constant_drift(c), zero, y, 1.0);
    const double closed = c * (y.values.back() - y.values.front()) - 0.5 * c * c;
    if (std::abs(cr.value - closed) > kClosedFormTol) {
      fail(o, "constant-drift ratio off by " + format_double(cr.value - closed));
    }
  }
  if (!o.pass) return o;
  RunningStat mart;
  for (std::uint64_t rep = 0; rep < 10000; ++rep) {
    const GridPath y = sample_brownian(uniform_grid(1.0 / 256, 256), 506, rep).path;
    mart.add(std::exp(log_likelihood_ratio(p, zero, y, 1.0).value));
  }
  if (std::abs(mart.mean - 1.0) > 3.0 * mart.std_error()) {
    fail(o, "E[dP/dQ] = " + format_double(mart.mean) + " +- " +
                format_double(mart.std_error()));
  }
  return o;
}

// [6] the clock gap shrinks monotonically on the fixed-horizon arm with a
// log-log rate inside [0.5, 1.5]
Outcome gap_rate(double elapsed_limit, double* spent) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  ScanConfig cfg;
  cfg.model = tanh_cosine_model();
  cfg.fixed_horizon = {{8, 1.0 / 8}, {16, 1.0 / 16}, {32, 1.0 / 32}, {64, 1.0 / 64}};
  cfg.replicates = 1000;
  cfg.fine_ratio = 64;
  cfg.master_seed = 1;
  cfg.jobs = scan_jobs();
  const std::vector<RateScanRecord> recs = gap_scan(cfg);
  std::vector<RateScanRecord> sorted = recs;
  std::sort(sorted.begin(), sorted.end(),
            [](const RateScanRecord& a, const RateScanRecord& b) { return a.h > b.h; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (!(sorted[i].estimate < sorted[i - 1].estimate)) {
      fail(o, "gap not decreasing from h=" + format_double(sorted[i - 1].h));
    }
  }
  const LineFit fit = fit_rate(recs, Predictor::StepSize);
  char slope_text[40];
  std::snprintf(slope_text, sizeof(slope_text), "slope %.6f", fit.slope);
  if (!(fit.slope >= kGapSlopeMin && fit.slope <= kGapSlopeMax)) {
    fail(o, std::string(slope_text) + " outside window");
  }
  o.detail = slope_text;
  *spent = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (*spent > elapsed_limit) {
    fail(o, "exceeded " + format_double(elapsed_limit) + " s budget");
  }
  return o;
}

// [7] every estimate sits below its closed-form bound within 3 stderr and
// the pinsker TV rate on the decay arm lies in [0.35, 0.65]
Outcome bound_dominance(std::vector<RateScanRecord>* records_out, double elapsed_limit,
                        double* spent) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  ScanConfig cfg = default_scan_config(sine_gaussian_model());
  cfg.replicates = 1000;
  cfg.fine_ratio = 64;
  cfg.master_seed = 1;
  cfg.jobs = scan_jobs();
  *records_out = full_scan(cfg);
  const ScanReport report = analyze_scan(*records_out);
  for (const ScanCheck& c : report.checks) {
    if (c.name == "bound_dominance" && !c.pass) {
      fail(o, c.detail);
    }
    if (c.name == "kl_tv_rate_decay") {
      if (!c.applicable) {
        fail(o, "tv rate fit not applicable");
      } else if (!c.pass) {
        fail(o, c.detail);
      } else if (o.detail.empty()) {
        o.detail = c.detail;
      }
    }
  }
  *spent = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (*spent > elapsed_limit) {
    fail(o, "exceeded " + format_double(elapsed_limit) + " s budget");
  }
  return o;
}

// [8] the stopped-experiment proxy stays below its chained gap bound on
// every cell and decreases along both n h^2 -> 0 trajectories
Outcome stopped_chain(const std::vector<RateScanRecord>& records) {
  Outcome o;
  std::size_t seen = 0;
  for (const RateScanRecord& r : records) {
    if (r.quantity != "stopped_kl") continue;
    ++seen;
    if (r.estimate > r.bound + 1e-12 * std::max(1.0, r.bound)) {
      fail(o, "stopped estimate exceeds its chained bound at n=" + std::to_string(r.n));
    }
  }
  if (seen == 0) {
    fail(o, "no stopped-experiment records found");
  }
  const ScanReport report = analyze_scan(records);
  for (const ScanCheck& c : report.checks) {
    if (c.name == "stopped_tv_decreasing") {
      if (!c.applicable) {
        fail(o, "stopped TV trend not applicable");
      } else if (!c.pass) {
        fail(o, c.detail);
      }
    }
  }
  return o;
}

// [9] two verification runs of the command-line tool replay byte-identical
// scan tables
Outcome cli_determinism() {
  Outcome o;
  const fs::path dir = fs::temp_directory_path() / "lecam_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const nlohmann::json cfg = {
      {"model", model_to_json(sine_gaussian_model())},
      {"replicates", 150},
      {"seed", 2},
      {"fine_ratio", 16},
      {"fixed_T", {{"T", 1.0}, {"h", {0.125, 0.0625, 0.03125}}}},
      {"decay", {{"n", {16, 32, 64}}, {"h_exponent", 0.75}}}};
  {
    std::ofstream out(dir / "cfg.json");
    out << cfg.dump(2) << "\n";
  }
  const std::string base = std::string("\"") + LECAM_CLI_PATH + "\" verify --config \"" +
                           (dir / "cfg.json").string() + "\"";
  const auto run = [&](const std::string& sub, int jobs) {
    const std::string cmd = base + " --out \"" + (dir / sub).string() + "\" --jobs " +
                            std::to_string(jobs) + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return (rc != -1 && WIFEXITED(rc)) ? WEXITSTATUS(rc) : -1;
  };
  const int rc1 = run("a", 2);
  const int rc2 = run("b", 4);
  if (rc1 < 0 || rc2 < 0 || rc1 > 1 || rc2 > 1) {
    fail(o, "verification run failed to execute (exit " + std::to_string(rc1) + ", " +
                std::to_string(rc2) + ")");
  } else if (rc1 != rc2) {
    fail(o, "verdicts differ between runs");
  } else {
    const auto slurp = [](const fs::path& file) {
      std::ifstream in(file, std::ios::binary);
      return std::string((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
    };
    const std::string a = slurp(dir / "a" / "scan.csv");
    const std::string b = slurp(dir / "b" / "scan.csv");
    if (a.empty() || a != b) {
      fail(o, "scan tables differ between runs");
    }
  }
  fs::remove_all(dir);
  return o;
}

int report(int id, const char* text, const Outcome& o, double seconds) {
  if (o.pass) {
    std::printf("[%d] PASS %s%s%s (%.1f s)\n", id, text, o.detail.empty() ? "" : ": ",
                o.detail.c_str(), seconds);
    return 0;
  }
  std::printf("[%d] FAIL %s: %s (%.1f s)\n", id, text, o.detail.c_str(), seconds);
  return 1;
}

}  // namespace

int main() {
  int failures = 0;
  const auto timed = [&](int id, const char* text, auto&& body) {
    const auto t0 = std::chrono::steady_clock::now();
    const Outcome o = body();
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += report(id, text, o, secs);
  };

  timed(1, "variance clocks invert exactly at their breakpoints", clock_inversion);
  timed(2, "warped paths reconstruct the frozen clock of their source",
        clock_reconstruction);
  timed(3, "bridge infill pins the euler knots and replays its driver", bridge_pinning);

  {
    double spent = 0.0;
    const auto t0 = std::chrono::steady_clock::now();
    const Outcome o = innovation_extraction(kInnovationBudget, &spent);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += report(4, "extracted innovations are iid standard gaussian with the euler law",
                       o, secs);
  }

  timed(5, "likelihood ratios are antisymmetric, closed-form and mean-one",
        likelihood_ratio_laws);

  {
    double spent = 0.0;
    const auto t0 = std::chrono::steady_clock::now();
    const Outcome o = gap_rate(kGapBudget, &spent);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += report(6, "clock gap shrinks with h at a rate inside [0.5, 1.5]", o, secs);
  }

  std::vector<RateScanRecord> scan_records;
  {
    double spent = 0.0;
    const auto t0 = std::chrono::steady_clock::now();
    const Outcome o = bound_dominance(&scan_records, kScanBudget, &spent);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += report(
        7, "closed-form bounds dominate and the decay TV rate lies in [0.35, 0.65]", o,
        secs);
  }

  timed(8, "stopped-experiment proxy is chained below the gap bound and shrinks",
        [&] { return stopped_chain(scan_records); });
  timed(9, "verification runs replay byte-identical scan tables", cli_determinism);

  if (failures == 0) {
    std::printf("acceptance: 9/9 criteria passed\n");
    return 0;
  }
  std::printf("acceptance: %d criteria failed\n", failures);
  return 1;
}
