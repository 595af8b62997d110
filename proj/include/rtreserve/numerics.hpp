#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rtreserve {

/// Raised when a quadrature or root/maximum search cannot reach its tolerance.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kInvSqrt2Pi = 0.3989422804014326779399460599343818684758586311649;

inline double standard_normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

// erfc keeps full relative precision in the lower tail, where 1 + erf(x) would cancel.
inline double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

struct Integral {
  double value = 0.0;
  double error = 0.0;  // summed error estimate over all pieces
  double l1 = 0.0;     // integral of |f|
};

enum class QuadratureRule {
  gauss_kronrod,
  // Double exponential; copes with endpoint singularities and sharp peaks.
  tanh_sinh,
};

struct QuadratureOptions {
  double rel_tol = 1e-12;
  double abs_tol = 0.0;
  unsigned max_depth = 18;
  /// Rule tried first on every piece; the other one is the fallback.
  QuadratureRule rule = QuadratureRule::gauss_kronrod;
};

/// Adaptive quadrature of f over [a, b], split at every breakpoint that falls
/// strictly inside the interval. A piece that misses its tolerance under
/// options.rule is retried with the other rule; NumericalError is thrown when
/// the summed error estimate stays far above tolerance.
Integral integrate(const std::function<double(double)>& f, double a, double b,
                   std::span<const double> breakpoints = {}, const QuadratureOptions& options = {});

struct Maximum {
  double argmax = 0.0;
  double value = 0.0;
};

/// Grid search over grid_points equally spaced nodes of [lo, hi], then
/// golden-section refinement inside the bracket around the best node.
/// Ties on the grid go to the smaller abscissa. Assumes f is unimodal near
/// its grid maximum.
Maximum maximize_on_interval(const std::function<double(double)>& f, double lo, double hi,
                             std::size_t grid_points, double tol);

/// Golden-section search for the maximum of a unimodal f on [lo, hi].
Maximum golden_section_maximize(const std::function<double(double)>& f, double lo, double hi,
                                double tol);

/// Least-squares slope of log(y) against log(x), restricted to x in [x_lo, x_hi].
/// Points with non-positive y are rejected with std::invalid_argument.
double loglog_slope(std::span<const double> x, std::span<const double> y, double x_lo,
                    double x_hi);

/// Linear-interpolation sample quantile (Hyndman-Fan type 7). Reorders values.
double quantile(std::vector<double>& values, double p);

}  // namespace rtreserve
