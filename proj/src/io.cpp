#include "rtreserve/io.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>
#include <system_error>

namespace rtreserve {

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  if (res.ec != std::errc{}) throw std::runtime_error("failed to format a double");
  return std::string(buf, res.ptr);
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw std::runtime_error("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot move " + tmp.string() + " to " + path.string() + ": " +
                             ec.message());
  }
}

std::string trajectory_csv(std::span<const SeedRun> runs) {
  std::string out(kTrajectoryHeader);
  out += '\n';
  for (const auto& run : runs) {
    const std::string seed = std::to_string(run.seed);
    for (const auto& r : run.records) {
      out += seed;
      out += ',';
      out += std::to_string(r.t);
      out += ',';
      out += std::to_string(r.phase_id);
      for (double v : {r.reserve, r.bid, r.instant_revenue, r.expected_gap, r.sq_error}) {
        out += ',';
        out += format_double(v);
      }
      out += '\n';
    }
  }
  return out;
}

std::string aggregate_csv(const Aggregate& agg) {
  std::string out(kAggregateHeader);
  out += '\n';
  for (const auto& curve : agg.curves) {
    for (std::size_t i = 0; i < agg.t.size(); ++i) {
      out += std::to_string(agg.t[i]);
      out += ',';
      out += curve.metric;
      for (double v : {curve.mean[i], curve.q10[i], curve.q90[i]}) {
        out += ',';
        out += format_double(v);
      }
      out += '\n';
    }
  }
  return out;
}

std::string bench_csv(std::span<const BenchRow> rows) {
  std::string out(kBenchHeader);
  out += '\n';
  for (const auto& row : rows) {
    out += row.learner + ',' + std::to_string(row.t) + ',' + format_double(row.ns_per_update) +
           ',' + std::to_string(row.state_bytes) + '\n';
  }
  return out;
}

}  // namespace rtreserve
