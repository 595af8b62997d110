#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "rtreserve/distributions.hpp"
#include "rtreserve/io.hpp"
#include "rtreserve/learners.hpp"
#include "rtreserve/random.hpp"
#include "rtreserve/simulator.hpp"

using namespace rtreserve;

namespace {

ExperimentConfig frozen_at(double r0, std::vector<Phase> phases) {
  ExperimentConfig cfg;
  cfg.stream.phases = std::move(phases);
  cfg.learner.kind = LearnerKind::conv_oga;
  cfg.learner.kernel = {0.1, 0.0};
  cfg.learner.step = {0.0, 0.0};
  cfg.learner.r0 = r0;
  cfg.seeds = {1, 2};
  cfg.record.stride = 1;
  return cfg;
}

ExperimentConfig moving(std::vector<Phase> phases, std::vector<std::uint64_t> seeds) {
  ExperimentConfig cfg;
  cfg.stream.phases = std::move(phases);
  cfg.learner.kind = LearnerKind::conv_oga;
  cfg.learner.kernel = {0.05, 0.0};
  cfg.learner.step = {0.02, 0.0};
  cfg.seeds = std::move(seeds);
  cfg.record.stride = 1;
  return cfg;
}

SeedRun constant_run(std::uint64_t seed, double value, std::size_t n) {
  SeedRun run;
  run.seed = seed;
  for (std::size_t i = 0; i < n; ++i) {
    run.records.push_back({.t = i + 1, .phase_id = 0, .reserve = value, .bid = value,
                           .instant_revenue = value, .expected_gap = value, .sq_error = value});
  }
  return run;
}

const auto kuma04 = BidDistribution::kumaraswamy(1.0, 0.4);
const auto kuma4 = BidDistribution::kumaraswamy(1.0, 4.0);
const auto uni = BidDistribution::uniform();

}  // namespace

TEST_CASE("stream spec") {
  StreamSpec s{{{kuma4, 10}, {kuma04, 20}, {uni, 5}}};
  CHECK(s.horizon() == 35);
  CHECK(s.switches() == 2);
  CHECK(s.support_max() == 1.0);
  CHECK_NOTHROW(s.validate());
  CHECK_THROWS_AS(StreamSpec{}.validate(), std::invalid_argument);
  CHECK_THROWS_AS((StreamSpec{{{uni, 0}}}.validate()), std::invalid_argument);
  // Decreasing hazard near zero.
  CHECK_THROWS_AS((StreamSpec{{{BidDistribution::kumaraswamy(0.5, 1.0), 10}}}.validate()),
                  std::invalid_argument);
}

TEST_CASE("experiment validation") {
  auto cfg = frozen_at(0.5, {{uni, 10}});
  CHECK_NOTHROW(cfg.validate());
  cfg.seeds = {};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.seeds = {3, 3};
  CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);
  cfg.seeds = {3};
  cfg.learner.projection = Interval{-0.5, 1.0};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.learner.projection.reset();
  cfg.learner.r0 = 2.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("record policy") {
  CHECK(RecordPolicy{.stride = 3}.steps(10) == std::vector<std::uint64_t>{1, 3, 6, 9, 10});
  CHECK(RecordPolicy{.stride = 1}.steps(4) == std::vector<std::uint64_t>{1, 2, 3, 4});
  CHECK(RecordPolicy{.stride = 5}.steps(10) == std::vector<std::uint64_t>{1, 5, 10});
  CHECK(RecordPolicy{}.steps(0).empty());

  const auto short_run = RecordPolicy{}.steps(500);
  CHECK(short_run.size() == 500);

  const auto steps = RecordPolicy{}.steps(100000);
  CHECK(steps.front() == 1);
  CHECK(steps.back() == 100000);
  CHECK(steps[999] == 1000);
  CHECK(std::is_sorted(steps.begin(), steps.end()));
  CHECK(std::adjacent_find(steps.begin(), steps.end()) == steps.end());
  // Roughly 100 per decade over two decades after the dense part.
  CHECK(steps.size() > 1000 + 150);
  CHECK(steps.size() < 1000 + 210);
}

TEST_CASE("frozen learner keeps its reserve") {
  const auto result = run_experiment(frozen_at(0.3, {{kuma04, 500}}));
  for (const auto& run : result.runs) {
    REQUIRE(run.records.size() == 500);
    for (const auto& r : run.records) REQUIRE(r.reserve == 0.3);
  }
}

TEST_CASE("regret of pinned play") {
  SUBCASE("at the monopoly price") {
    const double r_star = monopoly_price_oracle(kuma04).reserve;
    const auto result = run_experiment(frozen_at(r_star, {{kuma04, 300}}));
    for (const auto& run : result.runs) CHECK(run.dynamic_regret == 0.0);
  }
  SUBCASE("at zero") {
    const std::vector<Phase> phases{{kuma4, 100}, {kuma04, 200}, {uni, 50}};
    const auto result = run_experiment(frozen_at(0.0, phases));
    double expected = 0.0;
    for (std::size_t p = 0; p < phases.size(); ++p) {
      expected += static_cast<double>(phases[p].length) * result.optima[p].revenue;
    }
    CHECK(result.optima[0].revenue == doctest::Approx(0.08192).epsilon(1e-9));
    CHECK(result.optima[2].revenue == doctest::Approx(0.25).epsilon(1e-9));
    for (const auto& run : result.runs) {
      CHECK(run.dynamic_regret == doctest::Approx(expected).epsilon(1e-12));
      CHECK(dynamic_regret(run.records, StreamSpec{phases}) ==
            doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("regret adds up over phases") {
  const std::vector<Phase> phases{{kuma4, 400}, {kuma04, 400}, {uni, 400}};
  const auto result = run_experiment(moving(phases, {5, 6, 7}));
  for (const auto& run : result.runs) {
    double sum = 0.0;
    for (double p : run.phase_regret) sum += p;
    CHECK(run.dynamic_regret == doctest::Approx(sum).epsilon(1e-12));
    CHECK(dynamic_regret(run.records, StreamSpec{phases}) ==
          doctest::Approx(run.dynamic_regret).epsilon(1e-12));
    for (const auto& r : run.records) {
      REQUIRE(r.expected_gap >= -1e-9);
      REQUIRE(r.sq_error >= 0.0);
    }
    CHECK(run.records[399].phase_id == 0);
    CHECK(run.records[400].phase_id == 1);
    CHECK(run.records[1199].phase_id == 2);
  }
}

TEST_CASE("a repeated phase is not a switch") {
  const auto twice = run_experiment(moving({{kuma04, 700}, {kuma04, 700}}, {9}));
  const auto once = run_experiment(moving({{kuma04, 1400}}, {9}));
  // Same draws and reserves; only the summation order differs.
  CHECK(twice.runs[0].dynamic_regret ==
        doctest::Approx(once.runs[0].dynamic_regret).epsilon(1e-12));
  for (std::size_t i = 0; i < 1400; ++i) {
    REQUIRE(twice.runs[0].records[i].reserve == once.runs[0].records[i].reserve);
  }
}

TEST_CASE("dynamic regret needs every step") {
  const StreamSpec s{{{uni, 3}}};
  auto run = constant_run(1, 0.1, 3);
  CHECK(dynamic_regret(run.records, s) == doctest::Approx(0.3));
  run.records.pop_back();
  CHECK_THROWS_AS(dynamic_regret(run.records, s), std::invalid_argument);
  run = constant_run(1, 0.1, 3);
  run.records[1].t = 5;
  CHECK_THROWS_AS(dynamic_regret(run.records, s), std::invalid_argument);
}

TEST_CASE("reserve is posted before the bid is seen") {
  Rng rng(21);
  std::vector<double> bids(200);
  for (auto& b : bids) b = kuma04.sample(rng);
  for (auto kind : {LearnerKind::conv_oga, LearnerKind::v_conv_oga, LearnerKind::erm,
                    LearnerKind::discrete_erm}) {
    LearnerConfig cfg;
    cfg.kind = kind;
    if (kind == LearnerKind::conv_oga) cfg.kernel.alpha_sigma = 0.0;
    auto a = make_learner(cfg, 1.0);
    const auto path = reserve_path(*a, bids);
    for (std::size_t k : {0u, 1u, 50u, 199u}) {
      // Change b_k and everything after it; reserves up to step k stay put.
      auto other = bids;
      for (std::size_t i = k; i < other.size(); ++i) other[i] = 1.0 - other[i];
      auto b = make_learner(cfg, 1.0);
      const auto alt = reserve_path(*b, other);
      for (std::size_t i = 0; i <= k; ++i) REQUIRE(alt[i] == path[i]);
    }
  }

  // The simulator records the same pre-bid reserves.
  auto cfg = moving({{kuma04, 300}}, {4});
  const auto result = run_experiment(cfg);
  std::vector<double> recorded_bids;
  for (const auto& r : result.runs[0].records) recorded_bids.push_back(r.bid);
  auto learner = make_learner(cfg.learner, 1.0);
  const auto path = reserve_path(*learner, recorded_bids);
  for (std::size_t i = 0; i < path.size(); ++i) {
    REQUIRE(result.runs[0].records[i].reserve == path[i]);
    REQUIRE(result.runs[0].records[i].instant_revenue ==
            (path[i] <= recorded_bids[i] ? path[i] : 0.0));
  }
}

TEST_CASE("results do not depend on the thread count") {
  auto cfg = moving({{kuma4, 300}, {kuma04, 300}}, {1, 2, 3, 4, 5});
  const auto serial = run_experiment(cfg, 1);
  const auto parallel = run_experiment(cfg, 3);
  CHECK(trajectory_csv(serial.runs) == trajectory_csv(parallel.runs));
  CHECK(aggregate_csv(aggregate(serial.runs)) == aggregate_csv(aggregate(parallel.runs)));
}

TEST_CASE("tracking re-converges after each switch") {
  const std::uint64_t len = 4000;
  std::vector<Phase> phases{{kuma4, len}, {kuma04, len}, {uni, len}};
  auto cfg = moving(phases, {1, 2, 3, 4, 5, 6, 7, 8});
  cfg.learner.step.nu = 0.03;
  const auto result = run_experiment(cfg);
  const auto agg = aggregate(result.runs);
  const auto& r = agg.curve("reserve").mean;
  for (std::size_t p = 0; p < phases.size(); ++p) {
    double tail = 0.0;
    for (std::size_t i = (p + 1) * len - 1000; i < (p + 1) * len; ++i) tail += r[i];
    tail /= 1000.0;
    INFO("phase ", p + 1, " tail mean ", tail);
    CHECK(std::abs(tail - result.optima[p].reserve) < 0.05);
  }
}

TEST_CASE("expected revenue") {
  CHECK(expected_revenue(kuma04, 0.0) == 0.0);
  CHECK(expected_revenue(kuma04, 1.0) == 0.0);
  CHECK(expected_revenue(kuma04, 1.5) == 0.0);
  CHECK(expected_revenue(kuma04, -0.5) == 0.0);
  CHECK(expected_revenue(kuma04, 0.5) == doctest::Approx(0.3789291416275995).epsilon(1e-14));
}

TEST_CASE("aggregation") {
  SUBCASE("single seed is the identity") {
    std::vector<SeedRun> runs{constant_run(1, 0.0, 0)};
    for (std::size_t i = 0; i < 5; ++i) {
      const double v = 0.1 * static_cast<double>(i);
      runs[0].records.push_back({.t = i + 1, .phase_id = 0, .reserve = v, .bid = 0.0,
                                 .instant_revenue = 0.0, .expected_gap = v, .sq_error = v * v});
    }
    const auto agg = aggregate(runs);
    for (std::size_t i = 0; i < 5; ++i) {
      CHECK(agg.curve("reserve").mean[i] == runs[0].records[i].reserve);
      CHECK(agg.curve("reserve").q10[i] == runs[0].records[i].reserve);
      CHECK(agg.curve("sq_error").q90[i] == runs[0].records[i].sq_error);
    }
  }
  SUBCASE("two constant seeds") {
    const std::vector<SeedRun> runs{constant_run(1, 0.2, 4), constant_run(2, 0.4, 4)};
    const auto agg = aggregate(runs);
    for (double m : agg.curve("expected_gap").mean) CHECK(m == doctest::Approx(0.3));
    CHECK(agg.curve("reserve").q10[0] == doctest::Approx(0.22));
    CHECK(agg.curve("reserve").q90[0] == doctest::Approx(0.38));
    CHECK_THROWS_AS(agg.curve("median"), std::invalid_argument);
  }
  SUBCASE("mismatched steps") {
    auto b = constant_run(2, 0.4, 4);
    b.records[2].t = 7;
    const std::vector<SeedRun> runs{constant_run(1, 0.2, 4), b};
    CHECK_THROWS_AS(aggregate(runs), std::invalid_argument);
    CHECK_THROWS_AS(aggregate(std::vector<SeedRun>{}), std::invalid_argument);
  }
  SUBCASE("slope of an exact power law") {
    Aggregate agg;
    MetricCurve curve{.metric = "sq_error", .mean = {}, .q10 = {}, .q90 = {}};
    for (int i = 0; i < 100; ++i) {
      const double t = std::pow(10.0, 1.0 + 4.0 * i / 99.0);
      agg.t.push_back(static_cast<std::uint64_t>(std::llround(t)));
    }
    for (auto t : agg.t) curve.mean.push_back(3.0 * std::pow(static_cast<double>(t), -0.5));
    curve.q10 = curve.q90 = curve.mean;
    agg.curves.push_back(curve);
    CHECK(std::abs(fit_slope(agg, "sq_error", 1.0, 1e6) + 0.5) < 1e-10);
  }
}

TEST_CASE("csv output") {
  const auto result = run_experiment(moving({{uni, 3}}, {42}));
  const auto csv = trajectory_csv(result.runs);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == kTrajectoryHeader);
  int rows = 0;
  while (std::getline(in, line)) {
    CHECK(line.rfind("42,", 0) == 0);
    CHECK(std::count(line.begin(), line.end(), ',') == 7);
    ++rows;
  }
  CHECK(rows == 3);
  const auto agg = aggregate_csv(aggregate(result.runs));
  CHECK(agg.rfind(std::string(kAggregateHeader) + "\n", 0) == 0);
  // Three steps times four metrics plus the header.
  CHECK(std::count(agg.begin(), agg.end(), '\n') == 13);

  const std::vector<BenchRow> rows_in{{"erm", 1000, 12.5, 8040}};
  CHECK(bench_csv(rows_in) == std::string(kBenchHeader) + "\nerm,1000,12.5,8040\n");

  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0}) {
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.25) == "0.25");

  const auto dir = std::filesystem::temp_directory_path() / "rtreserve_io_test";
  std::filesystem::create_directories(dir);
  const auto file = dir / "out.csv";
  write_file_atomic(file, "a,b\n1,2\n");
  write_file_atomic(file, "a,b\n3,4\n");
  std::ifstream back(file);
  std::stringstream content;
  content << back.rdbuf();
  CHECK(content.str() == "a,b\n3,4\n");
  CHECK_FALSE(std::filesystem::exists(dir / "out.csv.tmp"));
  std::filesystem::remove_all(dir);
  CHECK_THROWS(write_file_atomic(dir / "missing" / "x.csv", "x"));
}

TEST_CASE("update cost bench") {
  BenchOptions opts;
  opts.targets = {100, 2000};
  opts.batch = 200;
  opts.repetitions = 3;
  LearnerConfig oga;
  oga.kind = LearnerKind::v_conv_oga;
  const auto rows = update_cost_bench(oga, 1.0, opts);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].learner == "v_conv_oga");
  CHECK(rows[0].t == 100);
  CHECK(rows[1].t == 2000);
  CHECK(rows[0].state_bytes == rows[1].state_bytes);
  CHECK(rows[0].ns_per_update > 0.0);

  LearnerConfig erm;
  erm.kind = LearnerKind::erm;
  const auto grown = update_cost_bench(erm, 1.0, opts);
  REQUIRE(grown.size() == 2);
  const double ratio =
      static_cast<double>(grown[1].state_bytes) / static_cast<double>(grown[0].state_bytes);
  CHECK(ratio > 15.0);
  CHECK(ratio < 21.0);
}
