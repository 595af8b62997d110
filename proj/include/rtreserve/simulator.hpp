#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rtreserve/distributions.hpp"
#include "rtreserve/learners.hpp"

namespace rtreserve {

struct Phase {
  BidDistribution dist;
  std::uint64_t length = 0;
};

/// Piecewise-stationary bid stream: phases played back to back.
struct StreamSpec {
  std::vector<Phase> phases;

  std::uint64_t horizon() const;
  std::size_t switches() const { return phases.empty() ? 0 : phases.size() - 1; }
  double support_max() const;
  /// Throws std::invalid_argument when the stream is empty, a phase has zero
  /// length, or a phase law fails the positivity / regularity / hazard checks.
  void validate() const;
};

/// Which steps are written out. stride = 0 keeps every step up to
/// dense_until and roughly per_decade log-spaced steps afterwards; stride = k
/// keeps t = 1, every multiple of k, and the horizon.
struct RecordPolicy {
  std::uint64_t stride = 0;
  std::uint64_t dense_until = 1000;
  unsigned per_decade = 100;

  std::vector<std::uint64_t> steps(std::uint64_t horizon) const;
};

struct ExperimentConfig {
  StreamSpec stream;
  LearnerConfig learner;
  std::vector<std::uint64_t> seeds;
  RecordPolicy record;

  /// Throws std::invalid_argument before any simulation starts.
  void validate() const;
};

struct TrajectoryRecord {
  std::uint64_t t = 0;
  std::uint32_t phase_id = 0;
  double reserve = 0.0;
  double bid = 0.0;
  double instant_revenue = 0.0;
  double expected_gap = 0.0;  // Π^{F_t}(r*_t) - Π^{F_t}(r_t)
  double sq_error = 0.0;      // (r_t - r*_t)²
};

struct SeedRun {
  std::uint64_t seed = 0;
  std::vector<TrajectoryRecord> records;
  /// Σ_t expected_gap over every step, recorded or not.
  double dynamic_regret = 0.0;
  std::vector<double> phase_regret;
};

struct ExperimentResult {
  std::vector<MonopolyPrice> optima;  // one per phase
  std::vector<SeedRun> runs;          // in the order of config.seeds
};

/// Simulates every seed. The reserve at step t is read before b_t is drawn
/// into the learner. Seeds are spread over `jobs` threads; the result does
/// not depend on the thread count.
ExperimentResult run_experiment(const ExperimentConfig& config, unsigned jobs = 1);

/// Plays a fixed bid sequence and returns the reserve posted before each bid.
std::vector<double> reserve_path(Learner& learner, std::span<const double> bids);

/// Revenue of reserve r against F, zero beyond the support.
double expected_revenue(const BidDistribution& dist, double r);

/// Sum of expected gaps over complete records t = 1..T. Throws
/// std::invalid_argument when a step is missing or out of order.
double dynamic_regret(std::span<const TrajectoryRecord> records, const StreamSpec& stream);

inline constexpr std::string_view kTrajectoryMetrics[] = {"reserve", "instant_revenue",
                                                         "expected_gap", "sq_error"};

struct MetricCurve {
  std::string metric;
  std::vector<double> mean;
  std::vector<double> q10;
  std::vector<double> q90;
};

struct Aggregate {
  std::vector<std::uint64_t> t;
  std::vector<MetricCurve> curves;

  const MetricCurve& curve(std::string_view metric) const;
};

/// Pointwise mean and 10%/90% quantiles across seeds at each recorded step.
/// Throws std::invalid_argument when the runs recorded different steps.
Aggregate aggregate(std::span<const SeedRun> runs);

/// Log-log least-squares slope of the mean curve of `metric` over [t_lo, t_hi].
double fit_slope(const Aggregate& agg, std::string_view metric, double t_lo, double t_hi);

struct BenchRow {
  std::string learner;
  std::uint64_t t = 0;
  double ns_per_update = 0.0;
  std::size_t state_bytes = 0;
};

struct BenchOptions {
  std::vector<std::uint64_t> targets{1000, 1000000};
  std::size_t batch = 10000;
  /// Upper bound on batch * t for learners whose update cost grows with t.
  double work_budget = 1e8;
  unsigned repetitions = 15;
  std::uint64_t seed = 1;
};

/// Warms a learner up to each target step on uniform bids, then times a
/// batch of further updates (best of several repetitions) and records the
/// serialized state size at the target step.
std::vector<BenchRow> update_cost_bench(const LearnerConfig& config, double support_max,
                                        const BenchOptions& options = {});

}  // namespace rtreserve
