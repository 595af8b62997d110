#include "rtreserve/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "rtreserve/numerics.hpp"
#include "rtreserve/surrogate.hpp"

namespace rtreserve {

std::uint64_t StreamSpec::horizon() const {
  std::uint64_t total = 0;
  for (const auto& p : phases) total += p.length;
  return total;
}

double StreamSpec::support_max() const {
  double upper = 0.0;
  for (const auto& p : phases) upper = std::max(upper, p.dist.support_max());
  return upper;
}

void StreamSpec::validate() const {
  if (phases.empty()) throw std::invalid_argument("stream has no phases");
  for (std::size_t i = 0; i < phases.size(); ++i) {
    const auto& p = phases[i];
    std::ostringstream where;
    where << "phase " << i + 1 << " (" << p.dist.describe() << ")";
    if (p.length == 0) throw std::invalid_argument(where.str() + " has zero length");
    const AssumptionReport report = check_assumptions(p.dist);
    if (!report.positive_density) {
      throw std::invalid_argument(where.str() + " has a vanishing density inside its support");
    }
    if (!report.regular) {
      throw std::invalid_argument(where.str() + " has a non-increasing virtual value");
    }
    if (!report.increasing_hazard()) {
      throw std::invalid_argument(where.str() + " has a decreasing hazard rate");
    }
  }
  // At most one switch between consecutive phases, so tau = #phases <= T holds
  // whenever every phase is non-empty.
}

std::vector<std::uint64_t> RecordPolicy::steps(std::uint64_t horizon) const {
  std::vector<std::uint64_t> out;
  if (horizon == 0) return out;
  if (stride > 0) {
    out.push_back(1);
    for (std::uint64_t t = stride; t <= horizon; t += stride) {
      if (t != 1) out.push_back(t);
    }
    if (out.back() != horizon) out.push_back(horizon);
    return out;
  }
  const std::uint64_t dense = std::min(dense_until, horizon);
  for (std::uint64_t t = 1; t <= dense; ++t) out.push_back(t);
  if (dense < horizon) {
    const double base = static_cast<double>(std::max<std::uint64_t>(dense_until, 1));
    for (unsigned k = 1;; ++k) {
      const double x = base * std::pow(10.0, static_cast<double>(k) / per_decade);
      const auto t = static_cast<std::uint64_t>(std::ceil(x - 1e-9));
      if (t >= horizon) break;
      if (t > out.back()) out.push_back(t);
    }
    out.push_back(horizon);
  }
  return out;
}

void ExperimentConfig::validate() const {
  stream.validate();
  if (seeds.empty()) throw std::invalid_argument("at least one seed is required");
  std::set<std::uint64_t> unique(seeds.begin(), seeds.end());
  if (unique.size() != seeds.size()) throw std::invalid_argument("seeds must be distinct");
  const Interval set = projection_for(learner, stream.support_max());
  if (set.lo < 0.0) throw std::invalid_argument("projection set must lie in [0, b̄]");
  // Constructing a learner surfaces every learner-level inconsistency.
  (void)make_learner(learner, stream.support_max());
}

double expected_revenue(const BidDistribution& dist, double r) {
  if (r <= 0.0 || r >= dist.support_max()) return 0.0;
  return r * dist.survival(r);
}

namespace {

SeedRun simulate_seed(const ExperimentConfig& config, const std::vector<MonopolyPrice>& optima,
                      const std::vector<std::uint64_t>& record_steps, std::uint64_t seed) {
  SeedRun run;
  run.seed = seed;
  run.phase_regret.assign(config.stream.phases.size(), 0.0);
  run.records.reserve(record_steps.size());

  Rng rng(seed);
  auto learner = make_learner(config.learner, config.stream.support_max());
  auto next_record = record_steps.begin();
  std::uint64_t t = 0;
  for (std::size_t p = 0; p < config.stream.phases.size(); ++p) {
    const Phase& phase = config.stream.phases[p];
    const MonopolyPrice& best = optima[p];
    double phase_sum = 0.0;
    for (std::uint64_t i = 0; i < phase.length; ++i) {
      ++t;
      const double r = learner->reserve();
      const double bid = phase.dist.sample(rng);
      const double gap = best.revenue - expected_revenue(phase.dist, r);
      phase_sum += gap;
      if (next_record != record_steps.end() && *next_record == t) {
        const double err = r - best.reserve;
        run.records.push_back({.t = t,
                               .phase_id = static_cast<std::uint32_t>(p),
                               .reserve = r,
                               .bid = bid,
                               .instant_revenue = instantaneous_revenue(r, bid),
                               .expected_gap = gap,
                               .sq_error = err * err});
        ++next_record;
      }
      learner->observe(bid);
    }
    run.phase_regret[p] = phase_sum;
    run.dynamic_regret += phase_sum;
  }
  return run;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, unsigned jobs) {
  config.validate();
  ExperimentResult result;
  for (const auto& phase : config.stream.phases) {
    result.optima.push_back(monopoly_price_oracle(phase.dist));
  }
  const auto record_steps = config.record.steps(config.stream.horizon());
  result.runs.resize(config.seeds.size());

  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(config.seeds.size())));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto worker = [&] {
    for (std::size_t i = next++; i < config.seeds.size(); i = next++) {
      try {
        result.runs[i] = simulate_seed(config, result.optima, record_steps, config.seeds[i]);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return result;
}

std::vector<double> reserve_path(Learner& learner, std::span<const double> bids) {
  std::vector<double> out;
  out.reserve(bids.size());
  for (double b : bids) {
    out.push_back(learner.reserve());
    learner.observe(b);
  }
  return out;
}

double dynamic_regret(std::span<const TrajectoryRecord> records, const StreamSpec& stream) {
  const std::uint64_t horizon = stream.horizon();
  if (records.size() != horizon) {
    std::ostringstream msg;
    msg << "dynamic regret needs all " << horizon << " steps, got " << records.size();
    throw std::invalid_argument(msg.str());
  }
  double total = 0.0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].t != i + 1) {
      std::ostringstream msg;
      msg << "missing step " << i + 1 << " in trajectory";
      throw std::invalid_argument(msg.str());
    }
    total += records[i].expected_gap;
  }
  return total;
}

const MetricCurve& Aggregate::curve(std::string_view metric) const {
  for (const auto& c : curves) {
    if (c.metric == metric) return c;
  }
  throw std::invalid_argument("no aggregate curve for metric '" + std::string(metric) + "'");
}

Aggregate aggregate(std::span<const SeedRun> runs) {
  if (runs.empty()) throw std::invalid_argument("aggregate needs at least one seed");
  Aggregate out;
  const auto& first = runs.front().records;
  for (const auto& r : first) out.t.push_back(r.t);
  for (const auto& run : runs) {
    bool same = run.records.size() == first.size();
    for (std::size_t i = 0; same && i < first.size(); ++i) same = run.records[i].t == first[i].t;
    if (!same) {
      throw std::invalid_argument("seed runs were recorded at different steps");
    }
  }

  const auto field = [](const TrajectoryRecord& r, std::string_view metric) {
    if (metric == "reserve") return r.reserve;
    if (metric == "instant_revenue") return r.instant_revenue;
    if (metric == "expected_gap") return r.expected_gap;
    return r.sq_error;
  };
  std::vector<double> column(runs.size());
  for (std::string_view metric : kTrajectoryMetrics) {
    MetricCurve curve{.metric = std::string(metric), .mean = {}, .q10 = {}, .q90 = {}};
    for (std::size_t i = 0; i < out.t.size(); ++i) {
      double sum = 0.0;
      for (std::size_t s = 0; s < runs.size(); ++s) {
        column[s] = field(runs[s].records[i], metric);
        sum += column[s];
      }
      curve.mean.push_back(sum / static_cast<double>(runs.size()));
      curve.q10.push_back(quantile(column, 0.1));
      curve.q90.push_back(quantile(column, 0.9));
    }
    out.curves.push_back(std::move(curve));
  }
  return out;
}

double fit_slope(const Aggregate& agg, std::string_view metric, double t_lo, double t_hi) {
  std::vector<double> x(agg.t.begin(), agg.t.end());
  return loglog_slope(x, agg.curve(metric).mean, t_lo, t_hi);
}

std::vector<BenchRow> update_cost_bench(const LearnerConfig& config, double support_max,
                                        const BenchOptions& options) {
  using Clock = std::chrono::steady_clock;
  const bool growing =
      config.kind == LearnerKind::erm || config.kind == LearnerKind::discrete_erm;
  const BidDistribution uniform = BidDistribution::uniform(support_max);
  Rng rng(options.seed);

  std::vector<BenchRow> rows;
  auto learner = make_learner(config, support_max);
  std::vector<double> bids;
  for (std::uint64_t target : options.targets) {
    if (target < learner->step()) {
      throw std::invalid_argument("bench targets must be increasing");
    }
    bids.resize(target - learner->step());
    for (double& b : bids) b = uniform.sample(rng);
    learner->observe_all(bids);

    std::size_t batch = options.batch;
    unsigned reps = options.repetitions;
    if (growing) {
      batch = std::clamp<std::size_t>(
          static_cast<std::size_t>(options.work_budget / static_cast<double>(target)), 10,
          options.batch);
      reps = std::min(reps, 3u);
    }
    std::vector<double> extra(batch);
    for (double& b : extra) b = uniform.sample(rng);

    double best_ns = std::numeric_limits<double>::infinity();
    for (unsigned rep = 0; rep < reps; ++rep) {
      auto copy = learner->clone();
      const auto start = Clock::now();
      for (double b : extra) copy->observe(b);
      const auto stop = Clock::now();
      const double ns = std::chrono::duration<double, std::nano>(stop - start).count();
      best_ns = std::min(best_ns, ns / static_cast<double>(batch));
    }
    rows.push_back({.learner = std::string(to_string(config.kind)),
                    .t = target,
                    .ns_per_update = best_ns,
                    .state_bytes = learner->serialize().size()});
  }
  return rows;
}

}  // namespace rtreserve
