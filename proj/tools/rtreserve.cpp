// rtreserve: experiments and verification reports for online reserve-price learners.

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "rtreserve/config.hpp"
#include "rtreserve/io.hpp"
#include "rtreserve/simulator.hpp"
#include "rtreserve/verification.hpp"

namespace fs = std::filesystem;
using namespace rtreserve;

namespace {

constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed_base;
  std::optional<std::uint64_t> seeds;
  std::string out_dir;
  unsigned jobs = 0;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("-c,--config", opts.config_path, "Experiment config file");
  cmd->add_option("--set", opts.overrides, "Override a config entry, key=value (repeatable)");
  cmd->add_option("--seed-base", opts.seed_base, "First seed when seeds is a count");
  cmd->add_option("--seeds", opts.seeds, "Number of consecutive seeds");
  cmd->add_option("-o,--out-dir", opts.out_dir,
                  "Output directory (default $RTRESERVE_OUT_DIR, then ./out)");
  cmd->add_option("-j,--jobs", opts.jobs, "Worker threads (default: hardware concurrency)");
}

ConfigMap effective_config(const CommonOptions& opts) {
  ConfigMap config = opts.config_path.empty() ? ConfigMap{} : load_config(opts.config_path);
  for (const auto& o : opts.overrides) apply_override(config, o);
  if (opts.seed_base) apply_override(config, "seed_base=" + std::to_string(*opts.seed_base));
  if (opts.seeds) apply_override(config, "seeds=" + std::to_string(*opts.seeds));
  return config;
}

fs::path output_dir(const CommonOptions& opts) {
  fs::path dir = opts.out_dir;
  if (dir.empty()) {
    const char* env = std::getenv("RTRESERVE_OUT_DIR");
    dir = env && *env ? fs::path(env) : fs::path("out");
  }
  fs::create_directories(dir);
  return dir;
}

unsigned job_count(const CommonOptions& opts) {
  if (opts.jobs > 0) return opts.jobs;
  return std::max(1u, std::thread::hardware_concurrency());
}

void echo_config(const fs::path& dir, const ConfigMap& config) {
  write_file_atomic(dir / "effective_config.txt", render_config(config));
}

void warn_step_condition(const RunSettings& settings) {
  if (!settings.constants) return;
  if (auto msg = step_condition_warning(settings.experiment.learner.step, *settings.constants)) {
    std::cerr << "warning: " << *msg << "\n";
  }
}

void warn_negative_gaps(const ExperimentResult& result) {
  for (const auto& run : result.runs) {
    for (const auto& r : run.records) {
      if (r.expected_gap < -1e-9) {
        std::cerr << "warning: seed " << run.seed << " step " << r.t
                  << " has expected_gap " << r.expected_gap << " below -1e-9\n";
        return;
      }
    }
  }
}

void write_runs(const fs::path& dir, const ExperimentResult& result) {
  for (const auto& run : result.runs) {
    write_file_atomic(dir / ("trajectory_seed" + std::to_string(run.seed) + ".csv"),
                      trajectory_csv(std::span(&run, 1)));
  }
  write_file_atomic(dir / "aggregate.csv", aggregate_csv(aggregate(result.runs)));
}

void print_slopes(const ExperimentResult& result, const RunSettings& settings) {
  const Aggregate agg = aggregate(result.runs);
  const double hi = std::min(settings.fit_t_hi,
                             static_cast<double>(settings.experiment.stream.horizon()));
  for (std::string_view metric : {"sq_error", "expected_gap"}) {
    try {
      const double slope = fit_slope(agg, metric, settings.fit_t_lo, hi);
      std::cout << metric << " log-log slope over [" << settings.fit_t_lo << ", " << hi
                << "]: " << std::setprecision(6) << slope << "\n";
    } catch (const std::invalid_argument& e) {
      std::cout << metric << " slope unavailable: " << e.what() << "\n";
    }
  }
}

int run_stationary(const CommonOptions& opts) {
  const ConfigMap config = effective_config(opts);
  const RunSettings settings = build_settings(config);
  if (settings.experiment.stream.phases.size() != 1) {
    std::cerr << "error: run-stationary needs a single phase; use run-tracking for "
              << settings.experiment.stream.phases.size() << " phases\n";
    return kExitUsage;
  }
  warn_step_condition(settings);
  const fs::path dir = output_dir(opts);
  echo_config(dir, config);
  const ExperimentResult result = run_experiment(settings.experiment, job_count(opts));
  warn_negative_gaps(result);
  write_runs(dir, result);
  std::cout << "r* = " << result.optima[0].reserve << ", Pi(r*) = " << result.optima[0].revenue
            << ", seeds = " << result.runs.size()
            << ", T = " << settings.experiment.stream.horizon() << "\n";
  print_slopes(result, settings);
  return 0;
}

int run_tracking(const CommonOptions& opts) {
  const ConfigMap config = effective_config(opts);
  const RunSettings settings = build_settings(config);
  const auto& exp = settings.experiment;
  if (exp.stream.phases.size() < 2) {
    std::cerr << "error: run-tracking needs at least two phases\n";
    return kExitUsage;
  }
  if (exp.learner.kind == LearnerKind::v_conv_oga && exp.learner.kernel.alpha_sigma > 0.0) {
    if (!settings.allow_decaying_kernel) {
      std::cerr << "error: tracking keeps the smoothing constant; set kernel.alpha_sigma = 0 "
                   "or allow_decaying_kernel = true\n";
      return kExitUsage;
    }
    std::cerr << "warning: decaying kernel in tracking mode\n";
  }
  warn_step_condition(settings);
  const fs::path dir = output_dir(opts);
  echo_config(dir, config);
  const ExperimentResult result = run_experiment(exp, job_count(opts));
  warn_negative_gaps(result);
  write_runs(dir, result);

  std::string regret = "seed,dynamic_regret";
  for (std::size_t p = 0; p < exp.stream.phases.size(); ++p) {
    regret += ",phase" + std::to_string(p + 1);
  }
  regret += '\n';
  double sum = 0.0;
  double sum_sq = 0.0;
  for (const auto& run : result.runs) {
    regret += std::to_string(run.seed) + ',' + format_double(run.dynamic_regret);
    for (double r : run.phase_regret) regret += ',' + format_double(r);
    regret += '\n';
    sum += run.dynamic_regret;
    sum_sq += run.dynamic_regret * run.dynamic_regret;
  }
  write_file_atomic(dir / "regret.csv", regret);

  const double n = static_cast<double>(result.runs.size());
  const double mean = sum / n;
  const double var = n > 1 ? std::max(0.0, (sum_sq - n * mean * mean) / (n - 1)) : 0.0;
  for (std::size_t p = 0; p < result.optima.size(); ++p) {
    std::cout << "phase " << p + 1 << ": " << exp.stream.phases[p].dist.describe()
              << ", r* = " << result.optima[p].reserve << "\n";
  }
  std::cout << "R(T) = " << std::setprecision(8) << mean << " (std error "
            << std::sqrt(var / n) << ", T = " << exp.stream.horizon() << ", seeds = "
            << result.runs.size() << ")\n";
  return 0;
}

std::vector<BidDistribution> config_phases(const ConfigMap& config) {
  std::vector<BidDistribution> out;
  const std::size_t n = phase_count(config);
  for (std::size_t i = 1; i <= n; ++i) out.push_back(phase_distribution(config, i));
  return out;
}

std::string phase_file(std::string_view stem, std::size_t index) {
  return std::string(stem) + "_phase" + std::to_string(index) + ".csv";
}

int verify_bounds(const CommonOptions& opts, const std::vector<double>& sigmas) {
  const ConfigMap config = effective_config(opts);
  const auto phases = config_phases(config);
  const fs::path dir = output_dir(opts);
  echo_config(dir, config);
  bool ok = true;
  for (std::size_t i = 0; i < phases.size(); ++i) {
    const auto rows = bound_sweep(phases[i], sigmas);
    write_file_atomic(dir / phase_file("bounds", i + 1), bound_csv(rows));
    std::cout << phases[i].describe() << "\n";
    for (const auto& row : rows) {
      std::cout << "  sigma " << row.sigma << ": B_k " << row.bias << " <= " << row.bias_bound
                << ", V_k " << row.second_moment << " <= " << row.second_moment_bound << "  "
                << (row.pass ? "ok" : "FAILED") << "\n";
      ok = ok && row.pass;
    }
  }
  return ok ? 0 : kExitCheckFailed;
}

int verify_gradients(const CommonOptions& opts, const std::vector<double>& sigmas,
                     double mc_sigma, std::size_t samples, std::size_t triples) {
  const ConfigMap config = effective_config(opts);
  const auto phases = config_phases(config);
  const fs::path dir = output_dir(opts);
  echo_config(dir, config);
  const std::uint64_t seed =
      config.contains("seed_base") ? build_settings(config).experiment.seeds.front() : 1;

  const FiniteDifferenceReport fd = finite_difference_check(triples, seed);
  write_file_atomic(dir / "finite_difference.csv",
                    "triples,max_error,pass\n" + std::to_string(fd.triples) + ',' +
                        format_double(fd.max_error) + (fd.pass ? ",true\n" : ",false\n"));
  std::cout << "finite differences on " << fd.triples << " triples: max error " << fd.max_error
            << "  " << (fd.pass ? "ok" : "FAILED") << "\n";
  bool ok = fd.pass;

  for (std::size_t i = 0; i < phases.size(); ++i) {
    const auto& dist = phases[i];
    std::cout << dist.describe() << "\n";
    std::vector<double> reserves;
    for (int k = 0; k < 10; ++k) reserves.push_back(dist.support_max() * (0.05 + 0.1 * k));
    const auto mc = unbiasedness_check(dist, mc_sigma, reserves, samples, seed);
    std::string csv = "reserve,mc_mean,std_error,reference,z,pass\n";
    bool mc_ok = true;
    for (const auto& row : mc) {
      for (double v : {row.reserve, row.mc_mean, row.std_error, row.reference, row.z}) {
        csv += format_double(v) + ',';
      }
      csv += row.pass ? "true\n" : "false\n";
      mc_ok = mc_ok && row.pass;
    }
    write_file_atomic(dir / phase_file("unbiasedness", i + 1), csv);
    std::cout << "  unbiasedness at sigma " << mc_sigma << " on " << samples << " bids: "
              << (mc_ok ? "ok" : "FAILED") << "\n";

    const auto signs = sign_change_check(dist, sigmas);
    csv = "sigma,sign_changes,pass\n";
    bool sign_ok = true;
    for (const auto& row : signs) {
      csv += format_double(row.sigma) + ',' + std::to_string(row.sign_changes) +
             (row.pass ? ",true\n" : ",false\n");
      sign_ok = sign_ok && row.pass;
    }
    write_file_atomic(dir / phase_file("sign_changes", i + 1), csv);
    std::cout << "  single sign change of grad Pi_k: " << (sign_ok ? "ok" : "FAILED") << "\n";
    ok = ok && mc_ok && sign_ok;
  }
  return ok ? 0 : kExitCheckFailed;
}

int bench_update(const CommonOptions& opts, bool all_learners) {
  const ConfigMap config = effective_config(opts);
  const RunSettings settings = build_settings(config);
  const fs::path dir = output_dir(opts);
  echo_config(dir, config);
  const double support = settings.experiment.stream.support_max();

  std::vector<LearnerConfig> learners{settings.experiment.learner};
  if (all_learners) {
    learners.clear();
    for (LearnerKind kind : {LearnerKind::conv_oga, LearnerKind::v_conv_oga, LearnerKind::erm,
                             LearnerKind::discrete_erm}) {
      LearnerConfig lc = settings.experiment.learner;
      lc.kind = kind;
      if (kind == LearnerKind::conv_oga) lc.kernel.alpha_sigma = 0.0;
      learners.push_back(lc);
    }
  }
  std::vector<BenchRow> rows;
  bool ok = true;
  for (const auto& lc : learners) {
    const auto bench = update_cost_bench(lc, support);
    const auto& first = bench.front();
    const auto& last = bench.back();
    const double time_ratio = last.ns_per_update / first.ns_per_update;
    const double size_ratio =
        static_cast<double>(last.state_bytes) / static_cast<double>(first.state_bytes);
    std::cout << to_string(lc.kind) << ": " << first.ns_per_update << " ns at t = " << first.t
              << ", " << last.ns_per_update << " ns at t = " << last.t << " (ratio "
              << time_ratio << "), state " << first.state_bytes << " -> " << last.state_bytes
              << " bytes (ratio " << size_ratio << ")";
    if (lc.kind == LearnerKind::conv_oga || lc.kind == LearnerKind::v_conv_oga) {
      const bool pass = last.state_bytes == first.state_bytes && time_ratio <= 2.0;
      std::cout << "  " << (pass ? "ok" : "FAILED");
      ok = ok && pass;
    }
    std::cout << "\n";
    rows.insert(rows.end(), bench.begin(), bench.end());
  }
  write_file_atomic(dir / "bench.csv", bench_csv(rows));
  return ok ? 0 : kExitCheckFailed;
}

int oracle(const CommonOptions& opts) {
  const ConfigMap config = effective_config(opts);
  const auto phases = config_phases(config);
  std::optional<ProblemConstants> constants;
  if (config.contains("constants.mu") || config.contains("constants.c")) {
    constants = build_settings(config).constants;
  }
  bool ok = true;
  std::cout << std::setprecision(10);
  for (std::size_t i = 0; i < phases.size(); ++i) {
    const auto& dist = phases[i];
    const MonopolyPrice best = monopoly_price_oracle(dist);
    const AssumptionReport assumptions = check_assumptions(dist);
    std::cout << "phase " << i + 1 << ": " << dist.describe() << "\n"
              << "  r* = " << best.reserve << "\n"
              << "  Pi(r*) = " << best.revenue << "\n"
              << "  positive density: " << (assumptions.positive_density ? "yes" : "no")
              << ", regular: " << (assumptions.regular ? "yes" : "no")
              << ", hazard modulus mu: " << assumptions.mhr_modulus << "\n";
    if (constants) {
      const ConstantsReport report = validate_constants(dist, *constants);
      std::cout << "  constants mu = " << constants->mu << ", c = " << constants->c << " on ["
                << constants->lo << ", " << constants->hi << "]: "
                << (report.ok() ? "valid" : "INVALID") << " (estimated mu "
                << report.estimated_mu << ", min revenue " << report.min_revenue << ")\n";
      ok = ok && report.ok();
    }
  }
  return ok ? 0 : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online reserve-price learning: experiments and verification"};
  app.require_subcommand(1);

  CommonOptions opts;
  std::vector<double> sigmas{1.0, 0.3, 0.1, 0.03};
  double mc_sigma = 0.1;
  std::size_t samples = 1000000;
  std::size_t triples = 1000;
  bool all_learners = false;

  auto* stationary = app.add_subcommand("run-stationary", "Single-phase convergence run");
  auto* tracking = app.add_subcommand("run-tracking", "Multi-phase tracking run with regret");
  auto* bounds = app.add_subcommand("verify-bounds", "Bias and second-moment bound report");
  auto* gradients =
      app.add_subcommand("verify-gradients", "Finite-difference, unbiasedness and sign checks");
  auto* bench = app.add_subcommand("bench-update", "Per-update cost and state size");
  auto* orc = app.add_subcommand("oracle", "Monopoly price and constants for each phase");
  for (auto* cmd : {stationary, tracking, bounds, gradients, bench, orc}) add_common(cmd, opts);

  bounds->add_option("--sigmas", sigmas, "Gaussian widths")->delimiter(',');
  gradients->add_option("--sigmas", sigmas, "Gaussian widths for the sign check")
      ->delimiter(',');
  gradients->add_option("--mc-sigma", mc_sigma, "Gaussian width for the Monte Carlo check");
  gradients->add_option("--samples", samples, "Bids in the Monte Carlo check");
  gradients->add_option("--triples", triples, "Random (r, b, sigma) finite-difference triples");
  bench->add_flag("--all", all_learners, "Bench every learner kind with the config settings");

  CLI11_PARSE(app, argc, argv);

  try {
    if (stationary->parsed()) return run_stationary(opts);
    if (tracking->parsed()) return run_tracking(opts);
    if (bounds->parsed()) return verify_bounds(opts, sigmas);
    if (gradients->parsed()) return verify_gradients(opts, sigmas, mc_sigma, samples, triples);
    if (bench->parsed()) return bench_update(opts, all_learners);
    if (orc->parsed()) return oracle(opts);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCheckFailed;
  }
  return kExitUsage;
}
