#include "rtreserve/surrogate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "rtreserve/numerics.hpp"

namespace rtreserve {

namespace {

constexpr QuadratureOptions kOracleQuadrature{
    .rel_tol = 1e-12, .abs_tol = 1e-15, .max_depth = 15, .rule = QuadratureRule::tanh_sinh};
// Expectations over bids feed Monte Carlo and bound checks only.
constexpr QuadratureOptions kMomentQuadrature{
    .rel_tol = 1e-10, .abs_tol = 1e-15, .max_depth = 15, .rule = QuadratureRule::tanh_sinh};

// Breakpoints around a kernel centred at `centre`, where the integrand bends.
std::vector<double> kernel_breaks(double centre, double scale) {
  std::vector<double> out;
  for (double j : {-10.0, -5.0, -3.0, -1.5, -0.5, 0.0, 0.5, 1.5, 3.0, 5.0, 10.0}) {
    out.push_back(centre + j * scale);
  }
  return out;
}

// ∫ g(s) ds over the kernel offset s = r - τ for τ in [0, upper]. Working in s
// keeps the kernel argument exact when the kernel is much narrower than r.
template <class Integrand>
double offset_integral(double r, double upper, double scale, Integrand&& g) {
  return integrate(g, r - upper, r, kernel_breaks(0.0, scale), kOracleQuadrature).value;
}

double revenue_on_line(const BidDistribution& dist, double tau) {
  if (tau <= 0.0 || tau >= dist.support_max()) return 0.0;
  return tau * dist.survival(tau);
}

bool density_bounded_at(const BidDistribution& dist, double x) {
  try {
    return std::isfinite(dist.pdf(x));
  } catch (const std::domain_error&) {
    return false;
  }
}

// E g(b), split at the median. A half whose end has a bounded density is
// integrated against the density in b, where the kernel breakpoints apply
// directly. Near an unbounded end the quantile is flat instead, so that half
// runs in u = F(b) or v = 1 - F(b).
template <class Integrand>
double quantile_expectation(const BidDistribution& dist, const Kernel& kernel, double r,
                            Integrand&& g) {
  const auto breaks = kernel_breaks(r, kernel.scale());
  const double median = dist.quantile(0.5);
  const double top = dist.support_max();
  const auto weighted = [&](double x) { return g(x) * dist.pdf(x); };

  double below = 0.0;
  if (density_bounded_at(dist, 0.0)) {
    below = integrate(weighted, 0.0, median, breaks, kMomentQuadrature).value;
  } else {
    std::vector<double> levels;
    for (double x : breaks) levels.push_back(dist.cdf(x));
    below = integrate([&](double u) { return g(dist.quantile(u)); }, 0.0, 0.5, levels,
                      kMomentQuadrature)
                .value;
  }

  double above = 0.0;
  if (density_bounded_at(dist, top)) {
    above = integrate(weighted, median, top, breaks, kMomentQuadrature).value;
  } else {
    std::vector<double> levels;
    for (double x : breaks) levels.push_back(dist.survival(x));
    above = integrate([&](double v) { return g(dist.upper_quantile(v)); }, 0.0, 0.5, levels,
                      kMomentQuadrature)
                .value;
  }
  return below + above;
}

}  // namespace

double convolved_payoff_quadrature(const Kernel& kernel, double r, double b) {
  if (b <= 0.0) return 0.0;
  return offset_integral(r, b, kernel.scale(),
                         [&](double s) { return (r - s) * kernel.density(s); });
}

double convolved_payoff(const Kernel& kernel, double r, double b) {
  if (b <= 0.0) return 0.0;
  if (const auto* gauss = dynamic_cast<const GaussianKernel*>(&kernel)) {
    // With s = r - τ: ∫ (r - s) k(s) ds over [r - b, r], and ∫ s k(s) ds = -σ² k(s).
    const double sigma = gauss->sigma();
    const double shifted = r - b;
    return r * gauss->mass_between(shifted, r) -
           sigma * sigma * (gauss->density(shifted) - gauss->density(r));
  }
  return convolved_payoff_quadrature(kernel, r, b);
}

SurrogateEval evaluate_surrogate(const Kernel& kernel, double r, double b) {
  return {convolved_payoff(kernel, r, b), convolved_gradient(kernel, r, b)};
}

double convolved_expected_revenue(const BidDistribution& dist, const Kernel& kernel, double r) {
  return offset_integral(r, dist.support_max(), kernel.scale(), [&](double s) {
    return revenue_on_line(dist, r - s) * kernel.density(s);
  });
}

double convolved_expected_revenue_gradient(const BidDistribution& dist, const Kernel& kernel,
                                           double r) {
  return offset_integral(r, dist.support_max(), kernel.scale(), [&](double s) {
    return revenue_on_line(dist, r - s) * kernel.density_derivative(s);
  });
}

double expected_convolved_payoff(const BidDistribution& dist, const Kernel& kernel, double r) {
  return quantile_expectation(dist, kernel, r,
                              [&](double b) { return convolved_payoff(kernel, r, b); });
}

double expected_convolved_gradient(const BidDistribution& dist, const Kernel& kernel, double r) {
  return quantile_expectation(dist, kernel, r,
                              [&](double b) { return convolved_gradient(kernel, r, b); });
}

double expected_squared_gradient(const BidDistribution& dist, const Kernel& kernel, double r) {
  return quantile_expectation(dist, kernel, r, [&](double b) {
    const double g = convolved_gradient(kernel, r, b);
    return g * g;
  });
}

SurrogateBias surrogate_bias(const BidDistribution& dist, const Kernel& kernel,
                             std::optional<double> grad_sup_norm) {
  SurrogateBias out;
  const MonopolyPrice optimum = monopoly_price_oracle(dist);
  out.monopoly_reserve = optimum.reserve;
  // ∇Π_k > 0 left of the support and < 0 right of it, so r*_k lies in [0, b̄].
  const Maximum smoothed = maximize_on_interval(
      [&](double r) { return convolved_expected_revenue(dist, kernel, r); }, 0.0,
      dist.support_max(), 2001, 1e-9);
  out.surrogate_reserve = smoothed.argmax;
  out.bias = std::abs(optimum.revenue - monopoly_revenue(dist, smoothed.argmax));
  out.grad_sup_norm = grad_sup_norm.value_or(grad_revenue_sup_norm(dist));
  out.bound = 2.0 * out.grad_sup_norm * kernel.l1_to_heaviside();
  return out;
}

SecondMoment gradient_second_moment(const BidDistribution& dist, const Kernel& kernel,
                                    std::span<const double> r_grid,
                                    std::optional<double> grad_sup_norm) {
  SecondMoment out;
  for (double r : r_grid) {
    const double m = expected_squared_gradient(dist, kernel, r);
    if (m > out.value) {
      out.value = m;
      out.argmax = r;
    }
  }
  out.grad_sup_norm = grad_sup_norm.value_or(grad_revenue_sup_norm(dist));
  out.bound = 1.0 + dist.support_max() * (1.0 + out.grad_sup_norm) * kernel.sup_norm();
  return out;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) out[i] = lo + step * static_cast<double>(i);
  out.back() = hi;
  return out;
}

std::vector<double> numerical_surrogate_gradient(const BidDistribution& dist,
                                                 const Kernel& kernel,
                                                 std::span<const double> grid, double h) {
  std::vector<double> out;
  out.reserve(grid.size());
  for (double r : grid) {
    out.push_back((convolved_expected_revenue(dist, kernel, r + h) -
                   convolved_expected_revenue(dist, kernel, r - h)) /
                  (2.0 * h));
  }
  return out;
}

std::size_t count_sign_changes(std::span<const double> values) {
  std::size_t changes = 0;
  int last = 0;
  for (double v : values) {
    const int sign = (v > 0.0) - (v < 0.0);
    if (sign == 0) continue;
    if (last != 0 && sign != last) ++changes;
    last = sign;
  }
  return changes;
}

}  // namespace rtreserve
