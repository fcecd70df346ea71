// Command-line front end: simulate (coupled diffusion / Euler outputs),
// timechange (variance-clock reparametrization of a stored path), verify
// (Monte Carlo rate scan against the closed-form bounds).

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lecam/euler_bridge.hpp"
#include "lecam/io.hpp"
#include "lecam/rate_harness.hpp"
#include "lecam/sde.hpp"
#include "lecam/time_change.hpp"

namespace {

using nlohmann::json;

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

std::string slurp(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) {
    throw lecam::ConfigError("cannot open config file " + file.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json parse_config(const std::string& raw, const std::filesystem::path& file) {
  try {
    return json::parse(raw);
  } catch (const json::exception& e) {
    throw lecam::ConfigError("invalid JSON in " + file.string() + ": " + e.what());
  }
}

std::uint64_t parse_u64(const std::string& text, const std::string& what) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(text, &pos);
    if (pos != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw lecam::ConfigError(what + " is not an unsigned integer: '" + text + "'");
  }
}

// Precedence: --seed flag, then LECAM_SEED, then the config, then 1.
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, const json& cfg) {
  if (flag) return *flag;
  if (const char* env = std::getenv("LECAM_SEED")) return parse_u64(env, "LECAM_SEED");
  if (const auto it = cfg.find("seed"); it != cfg.end()) {
    if (!it->is_number_integer() || it->get<long long>() < 0) {
      throw lecam::ConfigError("config key 'seed' must be a nonnegative integer");
    }
    return it->get<std::uint64_t>();
  }
  return 1;
}

std::size_t resolve_fine_ratio(const std::optional<std::size_t>& flag, const json& cfg) {
  std::size_t r = 64;
  if (const auto it = cfg.find("fine_ratio"); it != cfg.end()) {
    if (!it->is_number_integer() || it->get<long long>() < 2) {
      throw lecam::ConfigError("config key 'fine_ratio' must be an integer >= 2");
    }
    r = it->get<std::size_t>();
  }
  if (flag) r = *flag;
  if (r < 2 || (r & (r - 1)) != 0) {
    throw lecam::ConfigError("fine ratio must be a power of two, at least 2");
  }
  return r;
}

void write_manifest(const std::filesystem::path& out_dir, const std::string& command,
                    const std::string& config_bytes, std::uint64_t seed,
                    std::vector<std::string> outputs, double wall_seconds) {
  json manifest{{"command", command},
                {"config_digest", lecam::content_digest(config_bytes)},
                {"master_seed", seed},
                {"tool_version", lecam::kToolVersion},
                {"wall_time_seconds", wall_seconds},
                {"outputs", outputs}};
  lecam::atomic_write(out_dir / "manifest.json", manifest.dump(2) + "\n");
}

void write_euler_csv(const std::filesystem::path& file, const lecam::EulerTrajectory& traj) {
  std::string out = "i,t,z,eps\n";
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    out += std::to_string(i);
    out += ',';
    out += lecam::format_double(traj.knot_time(i));
    out += ',';
    out += lecam::format_double(traj.states[i]);
    out += ',';
    out += lecam::format_double(i == 0 ? 0.0 : traj.innovations[i - 1]);
    out += '\n';
  }
  lecam::atomic_write(file, out);
}

int run_simulate(const std::filesystem::path& config_file,
                 const std::filesystem::path& out_dir,
                 const std::optional<std::uint64_t>& seed_flag,
                 const std::optional<std::size_t>& ratio_flag) {
  const Timer timer;
  const std::string raw = slurp(config_file);
  const json cfg = parse_config(raw, config_file);
  lecam::require_keys(cfg, {"model", "n", "h", "seed", "fine_ratio"}, "simulate config");
  if (!cfg.contains("model") || !cfg.contains("n") || !cfg.contains("h")) {
    throw lecam::ConfigError("simulate config needs 'model', 'n' and 'h'");
  }
  const lecam::ModelSpec model = lecam::model_from_json(cfg.at("model"));
  if (!cfg.at("n").is_number_integer() || cfg.at("n").get<long long>() < 1) {
    throw lecam::ConfigError("config key 'n' must be a positive integer");
  }
  const auto n = cfg.at("n").get<std::size_t>();
  const double h = cfg.at("h").get<double>();
  if (!(h > 0.0)) throw lecam::ConfigError("config key 'h' must be positive");
  const std::uint64_t seed = resolve_seed(seed_flag, cfg);
  const std::size_t ratio = resolve_fine_ratio(ratio_flag, cfg);

  const auto grid = lecam::uniform_grid(h / static_cast<double>(ratio), n * ratio);
  const lecam::BrownianPath w = lecam::sample_brownian(grid, seed, 0);
  lecam::RngStream init_rng(seed, 1);
  const double z0 = model.initial.sample(init_rng);

  const lecam::GridPath x = lecam::simulate_diffusion(model, w, z0);
  const lecam::EulerTrajectory traj = lecam::euler_from_brownian(model, w, h, n, z0);
  const lecam::GridPath cont = lecam::bridge_infill_from_brownian(traj, w);

  std::filesystem::create_directories(out_dir);
  lecam::write_path_csv(out_dir / "diffusion_path.csv", x);
  write_euler_csv(out_dir / "euler_trajectory.csv", traj);
  lecam::write_path_csv(out_dir / "continuous_euler_path.csv", cont);
  write_manifest(out_dir, "simulate", raw, seed,
                 {"continuous_euler_path.csv", "diffusion_path.csv", "euler_trajectory.csv"},
                 timer.seconds());

  std::cout << "simulate: " << n << " cells, step " << h << ", horizon "
            << lecam::format_double(static_cast<double>(n) * h) << ", seed " << seed
            << "\n"
            << "wrote diffusion_path.csv, euler_trajectory.csv, "
               "continuous_euler_path.csv, manifest.json to "
            << out_dir.string() << "\n";
  return 0;
}

int run_timechange(const std::filesystem::path& config_file,
                   const std::filesystem::path& out_dir) {
  const Timer timer;
  const std::string raw = slurp(config_file);
  const json cfg = parse_config(raw, config_file);
  lecam::require_keys(cfg, {"model", "input", "direction"}, "timechange config");
  if (!cfg.contains("model") || !cfg.contains("input") || !cfg.contains("direction")) {
    throw lecam::ConfigError("timechange config needs 'model', 'input' and 'direction'");
  }
  const lecam::ModelSpec model = lecam::model_from_json(cfg.at("model"));
  const auto input = cfg.at("input").get<std::string>();
  const auto direction = cfg.at("direction").get<std::string>();
  if (direction != "forward" && direction != "inverse") {
    throw lecam::ConfigError("direction must be 'forward' or 'inverse'");
  }

  lecam::GridPath in_path;
  try {
    in_path = lecam::read_path_csv(input);
  } catch (const std::exception& e) {
    throw lecam::ConfigError(e.what());
  }

  lecam::TimeChangeMap map = direction == "forward"
                                 ? lecam::variance_clock(model, in_path)
                                 : lecam::inverse_variance_clock(model, in_path);
  lecam::GridPath out_path = direction == "forward"
                                 ? lecam::forward_time_change(model, in_path)
                                 : lecam::inverse_time_change(model, in_path);
  lecam::GridPath back = direction == "forward"
                             ? lecam::inverse_time_change(model, out_path)
                             : lecam::forward_time_change(model, out_path);
  double roundtrip = 0.0;
  for (std::size_t k = 0; k < in_path.size(); ++k) {
    roundtrip = std::max(roundtrip, std::abs(back.times[k] - in_path.times[k]));
    roundtrip = std::max(roundtrip, std::abs(back.values[k] - in_path.values[k]));
  }

  std::filesystem::create_directories(out_dir);
  lecam::write_clock_csv(out_dir / "clock.csv", map);
  lecam::write_path_csv(out_dir / "transformed_path.csv", out_path);
  write_manifest(out_dir, "timechange", raw, 0, {"clock.csv", "transformed_path.csv"},
                 timer.seconds());

  std::cout << "timechange " << direction << ": " << in_path.size() << " points, horizon "
            << lecam::format_double(in_path.horizon()) << " -> "
            << lecam::format_double(out_path.horizon()) << "\n"
            << "roundtrip max deviation: " << lecam::format_double(roundtrip) << "\n"
            << "wrote clock.csv, transformed_path.csv, manifest.json to "
            << out_dir.string() << "\n";
  return 0;
}

std::vector<lecam::ScanCell> parse_fixed_arm(const json& spec) {
  lecam::require_keys(spec, {"T", "h"}, "fixed_T");
  if (!spec.contains("T") || !spec.contains("h")) {
    throw lecam::ConfigError("fixed_T needs 'T' and an array 'h'");
  }
  const double horizon = spec.at("T").get<double>();
  if (!(horizon > 0.0)) throw lecam::ConfigError("fixed_T horizon must be positive");
  if (!spec.at("h").is_array() || spec.at("h").empty()) {
    throw lecam::ConfigError("fixed_T key 'h' must be a nonempty array");
  }
  std::vector<lecam::ScanCell> cells;
  for (const json& hj : spec.at("h")) {
    const double h = hj.get<double>();
    if (!(h > 0.0)) throw lecam::ConfigError("fixed_T steps must be positive");
    const auto n = static_cast<std::size_t>(std::llround(horizon / h));
    if (n < 1 || std::abs(static_cast<double>(n) * h - horizon) > 1e-9 * horizon) {
      throw lecam::ConfigError("fixed_T step " + lecam::format_double(h) +
                               " does not divide the horizon");
    }
    cells.push_back({n, h});
  }
  return cells;
}

std::vector<lecam::ScanCell> parse_decay_arm(const json& spec) {
  lecam::require_keys(spec, {"n", "h_exponent"}, "decay");
  if (!spec.contains("n") || !spec.contains("h_exponent")) {
    throw lecam::ConfigError("decay needs an array 'n' and 'h_exponent'");
  }
  const double exponent = spec.at("h_exponent").get<double>();
  if (!(exponent > 0.5) || !(exponent < 1.0)) {
    throw lecam::ConfigError("decay h_exponent must lie in (0.5, 1) so that n h^2 -> 0");
  }
  if (!spec.at("n").is_array() || spec.at("n").empty()) {
    throw lecam::ConfigError("decay key 'n' must be a nonempty array");
  }
  std::vector<lecam::ScanCell> cells;
  for (const json& nj : spec.at("n")) {
    if (!nj.is_number_integer() || nj.get<long long>() < 1) {
      throw lecam::ConfigError("decay cell counts must be positive integers");
    }
    const auto n = nj.get<std::size_t>();
    cells.push_back({n, std::pow(static_cast<double>(n), -exponent)});
  }
  return cells;
}

json fit_to_json(const lecam::ScanFit& f) {
  return json{{"quantity", f.quantity},   {"predictor", f.predictor},
              {"arm", f.arm},             {"slope", f.fit.slope},
              {"ci_lo", f.fit.slope_lo},  {"ci_hi", f.fit.slope_hi},
              {"n_points", f.fit.n_points}};
}

int run_verify(const std::filesystem::path& config_file, const std::filesystem::path& out_dir,
               const std::optional<std::uint64_t>& seed_flag,
               const std::optional<std::size_t>& ratio_flag, int jobs) {
  const Timer timer;
  const std::string raw = slurp(config_file);
  const json cfg = parse_config(raw, config_file);
  lecam::require_keys(cfg, {"model", "replicates", "fixed_T", "decay", "seed", "fine_ratio"},
                      "verify config");
  if (!cfg.contains("model")) throw lecam::ConfigError("verify config needs 'model'");
  const lecam::ModelSpec model = lecam::model_from_json(cfg.at("model"));

  lecam::ScanConfig scan = lecam::default_scan_config(model);
  if (const auto it = cfg.find("replicates"); it != cfg.end()) {
    if (!it->is_number_integer() || it->get<long long>() < 2) {
      throw lecam::ConfigError("insufficient replicates: need at least 2 per cell");
    }
    scan.replicates = it->get<std::size_t>();
  }
  if (cfg.contains("fixed_T") || cfg.contains("decay")) {
    scan.fixed_horizon.clear();
    scan.decay.clear();
  }
  if (const auto it = cfg.find("fixed_T"); it != cfg.end()) {
    scan.fixed_horizon = parse_fixed_arm(*it);
  }
  if (const auto it = cfg.find("decay"); it != cfg.end()) {
    scan.decay = parse_decay_arm(*it);
  }
  scan.master_seed = resolve_seed(seed_flag, cfg);
  scan.fine_ratio = resolve_fine_ratio(ratio_flag, cfg);
  scan.jobs = jobs;

  const std::vector<lecam::RateScanRecord> records = lecam::full_scan(scan);
  const lecam::ScanReport report = lecam::analyze_scan(records);

  std::filesystem::create_directories(out_dir);
  lecam::write_records_csv(out_dir / "scan.csv", records);

  json rates;
  rates["fits"] = json::array();
  for (const lecam::ScanFit& f : report.fits) rates["fits"].push_back(fit_to_json(f));
  rates["constants"] = {{"gap_over_nh2", report.gap_over_nh2},
                        {"stopped_tv_over_sqrt_nh2", report.stopped_tv_over_sqrt_nh2},
                        {"kl_tv_over_sqrt_nh2", report.kl_tv_over_sqrt_nh2}};
  rates["checks"] = json::array();
  for (const lecam::ScanCheck& c : report.checks) {
    rates["checks"].push_back(json{
        {"name", c.name}, {"pass", c.pass}, {"applicable", c.applicable}, {"detail", c.detail}});
  }
  rates["pass"] = report.pass;
  lecam::atomic_write(out_dir / "rates.json", rates.dump(2) + "\n");
  write_manifest(out_dir, "verify", raw, scan.master_seed, {"rates.json", "scan.csv"},
                 timer.seconds());

  for (const lecam::ScanCheck& c : report.checks) {
    if (!c.applicable) {
      std::cout << "check " << c.name << ": skipped (" << c.detail << ")\n";
    } else {
      std::cout << "check " << c.name << ": " << (c.pass ? "pass" : "FAIL");
      if (!c.detail.empty()) std::cout << " (" << c.detail << ")";
      std::cout << "\n";
    }
  }
  std::cout << "verification: " << (report.pass ? "PASS" : "FAIL") << " ("
            << records.size() << " records, " << lecam::format_double(timer.seconds())
            << " s)\n";
  return report.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random time changes, bridge-randomized Euler schemes and "
               "likelihood-ratio rate scans for scalar diffusions"};
  app.require_subcommand(1);

  struct SubArgs {
    std::string config;
    std::string out;
    std::uint64_t seed = 0;
    std::size_t fine_ratio = 0;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* ratio_opt = nullptr;
  };

  const int default_jobs =
      std::max(1, std::min(4, static_cast<int>(std::thread::hardware_concurrency())));
  int jobs = default_jobs;

  SubArgs sim, tc, ver;
  auto add_common = [](CLI::App* cmd, SubArgs& args, bool with_seed) {
    cmd->add_option("--config", args.config, "JSON config file")->required();
    cmd->add_option("--out", args.out, "output directory")->required();
    if (with_seed) {
      args.seed_opt = cmd->add_option("--seed", args.seed, "master seed (overrides config)");
      args.ratio_opt =
          cmd->add_option("--fine-ratio", args.fine_ratio, "fine steps per sampling cell")
              ->check(CLI::Range(static_cast<std::size_t>(2), static_cast<std::size_t>(1) << 20));
    }
  };

  CLI::App* sim_cmd = app.add_subcommand(
      "simulate", "sample a coupled diffusion / Euler pair and its bridge infill");
  add_common(sim_cmd, sim, true);
  CLI::App* tc_cmd = app.add_subcommand(
      "timechange", "reparametrize a stored path through its variance clock");
  add_common(tc_cmd, tc, false);
  CLI::App* ver_cmd = app.add_subcommand(
      "verify", "run the rate scan and check the closed-form bounds");
  add_common(ver_cmd, ver, true);
  ver_cmd->add_option("--jobs", jobs, "worker threads")->check(CLI::Range(1, 256));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  auto seed_of = [](const SubArgs& a) {
    return a.seed_opt != nullptr && a.seed_opt->count() > 0
               ? std::optional<std::uint64_t>(a.seed)
               : std::nullopt;
  };
  auto ratio_of = [](const SubArgs& a) {
    return a.ratio_opt != nullptr && a.ratio_opt->count() > 0
               ? std::optional<std::size_t>(a.fine_ratio)
               : std::nullopt;
  };

  try {
    if (sim_cmd->parsed()) {
      return run_simulate(sim.config, sim.out, seed_of(sim), ratio_of(sim));
    }
    if (tc_cmd->parsed()) {
      return run_timechange(tc.config, tc.out);
    }
    return run_verify(ver.config, ver.out, seed_of(ver), ratio_of(ver), jobs);
  } catch (const lecam::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
