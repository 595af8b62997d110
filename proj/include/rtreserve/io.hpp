#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include "rtreserve/simulator.hpp"

namespace rtreserve {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

/// Writes to a sibling temporary file and renames it over `path`, so readers
/// never observe a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

inline constexpr std::string_view kTrajectoryHeader =
    "seed,t,phase_id,reserve,bid,instant_revenue,expected_gap,sq_error";
inline constexpr std::string_view kAggregateHeader = "t,metric,mean,q10,q90";
inline constexpr std::string_view kBenchHeader = "learner,t,ns_per_update,state_bytes";

std::string trajectory_csv(std::span<const SeedRun> runs);
std::string aggregate_csv(const Aggregate& agg);
std::string bench_csv(std::span<const BenchRow> rows);

}  // namespace rtreserve
