#include "rtreserve/verification.hpp"

#include <algorithm>
#include <cmath>

#include "rtreserve/io.hpp"
#include "rtreserve/kernels.hpp"
#include "rtreserve/random.hpp"
#include "rtreserve/surrogate.hpp"

namespace rtreserve {

std::vector<BoundRow> bound_sweep(const BidDistribution& dist, std::span<const double> sigmas,
                                  std::size_t moment_grid) {
  const double grad_norm = grad_revenue_sup_norm(dist);
  const auto grid = linspace(0.0, dist.support_max(), moment_grid);
  std::vector<BoundRow> rows;
  for (double sigma : sigmas) {
    const GaussianKernel kernel(sigma);
    const SurrogateBias bias = surrogate_bias(dist, kernel, grad_norm);
    const SecondMoment moment = gradient_second_moment(dist, kernel, grid, grad_norm);
    rows.push_back({.sigma = sigma,
                    .bias = bias.bias,
                    .bias_bound = bias.bound,
                    .second_moment = moment.value,
                    .second_moment_bound = moment.bound,
                    .pass = bias.within_bound() && moment.within_bound() && moment.value >= 0.0});
  }
  return rows;
}

std::string bound_csv(std::span<const BoundRow> rows) {
  std::string out(kBoundHeader);
  out += '\n';
  for (const auto& row : rows) {
    for (double v : {row.sigma, row.bias, row.bias_bound, row.second_moment}) {
      out += format_double(v);
      out += ',';
    }
    out += format_double(row.second_moment_bound);
    out += row.pass ? ",true\n" : ",false\n";
  }
  return out;
}

FiniteDifferenceReport finite_difference_check(std::size_t triples, std::uint64_t seed,
                                               double tol) {
  Rng rng(seed);
  FiniteDifferenceReport report{.triples = triples};
  for (std::size_t i = 0; i < triples; ++i) {
    const double r = -0.5 + 2.0 * rng.uniform();
    const double b = rng.uniform();
    const double sigma = 0.01 * std::pow(100.0, rng.uniform());
    const GaussianKernel kernel(sigma);
    const double h = 1e-4 * sigma;
    const double fd =
        (convolved_payoff(kernel, r + h, b) - convolved_payoff(kernel, r - h, b)) / (2.0 * h);
    report.max_error = std::max(report.max_error, std::abs(fd - convolved_gradient(kernel, r, b)));
  }
  report.pass = report.max_error < tol;
  return report;
}

std::vector<UnbiasednessRow> unbiasedness_check(const BidDistribution& dist, double sigma,
                                                std::span<const double> reserves,
                                                std::size_t samples, std::uint64_t seed,
                                                double max_z) {
  Rng rng(seed);
  std::vector<double> bids(samples);
  for (double& b : bids) b = dist.sample(rng);
  const GaussianKernel kernel(sigma);
  const double h = 1e-3 * sigma;

  std::vector<UnbiasednessRow> rows;
  for (double r : reserves) {
    double mean = 0.0;
    double m2 = 0.0;
    std::size_t n = 0;
    for (double b : bids) {
      const double g = convolved_gradient(kernel, r, b);
      ++n;
      const double delta = g - mean;
      mean += delta / static_cast<double>(n);
      m2 += delta * (g - mean);
    }
    const double var = n > 1 ? m2 / static_cast<double>(n - 1) : 0.0;
    const double se = std::sqrt(var / static_cast<double>(n));
    const double reference = (convolved_expected_revenue(dist, kernel, r + h) -
                              convolved_expected_revenue(dist, kernel, r - h)) /
                             (2.0 * h);
    const double z = se > 0.0 ? (mean - reference) / se : 0.0;
    rows.push_back({.reserve = r,
                    .mc_mean = mean,
                    .std_error = se,
                    .reference = reference,
                    .z = z,
                    .pass = std::abs(z) <= max_z});
  }
  return rows;
}

std::vector<SignChangeRow> sign_change_check(const BidDistribution& dist,
                                             std::span<const double> sigmas,
                                             std::size_t grid_points) {
  const auto grid = linspace(-0.5, dist.support_max() + 0.5, grid_points);
  std::vector<SignChangeRow> rows;
  for (double sigma : sigmas) {
    const GaussianKernel kernel(sigma);
    const auto grad = numerical_surrogate_gradient(dist, kernel, grid, 1e-3 * sigma);
    const std::size_t flips = count_sign_changes(grad);
    rows.push_back({.sigma = sigma, .sign_changes = flips, .pass = flips == 1});
  }
  return rows;
}

}  // namespace rtreserve
