#include "rtreserve/numerics.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <limits>
#include <sstream>

namespace rtreserve {

Integral integrate(const std::function<double(double)>& f, double a, double b,
                   std::span<const double> breakpoints, const QuadratureOptions& options) {
  using Rule = boost::math::quadrature::gauss_kronrod<double, 31>;
  Integral total;
  if (!(a < b)) {
    return total;
  }

  std::vector<double> nodes{a};
  for (double p : breakpoints) {
    if (p > a && p < b) nodes.push_back(p);
  }
  nodes.push_back(b);
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());

  thread_local boost::math::quadrature::tanh_sinh<double> endpoint_rule;
  const auto run = [&](QuadratureRule rule, double lo, double hi, Integral& out) {
    if (rule == QuadratureRule::tanh_sinh) {
      out.value = endpoint_rule.integrate(f, lo, hi, options.rel_tol, &out.error, &out.l1);
    } else {
      out.value =
          Rule::integrate(f, lo, hi, options.max_depth, options.rel_tol, &out.error, &out.l1);
    }
  };
  const QuadratureRule fallback = options.rule == QuadratureRule::tanh_sinh
                                      ? QuadratureRule::gauss_kronrod
                                      : QuadratureRule::tanh_sinh;

  std::vector<Integral> pieces(nodes.size() - 1);
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    run(options.rule, nodes[i], nodes[i + 1], pieces[i]);
    if (!std::isfinite(pieces[i].value)) {
      std::ostringstream msg;
      msg << "quadrature produced a non-finite value on [" << nodes[i] << ", " << nodes[i + 1]
          << "]";
      throw NumericalError(msg.str());
    }
  }
  const auto sum = [&] {
    Integral s;
    for (const auto& p : pieces) {
      s.value += p.value;
      s.error += p.error;
      s.l1 += p.l1;
    }
    return s;
  };
  // The error estimates are pessimistic; only a gross miss signals trouble.
  const auto budget = [&](const Integral& s) {
    return std::max(1e3 * options.rel_tol * s.l1, options.abs_tol);
  };

  total = sum();
  if (total.error > budget(total)) {
    // Worst pieces first, until the total fits.
    std::vector<std::size_t> order(pieces.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return pieces[x].error > pieces[y].error; });
    for (std::size_t i : order) {
      Integral alt;
      run(fallback, nodes[i], nodes[i + 1], alt);
      if (std::isfinite(alt.value) && alt.error < pieces[i].error) pieces[i] = alt;
      total = sum();
      if (total.error <= budget(total)) break;
    }
  }
  if (total.error > budget(total)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "quadrature did not converge on [" << a << ", " << b << "]: estimate " << total.value
        << ", error " << total.error << ", L1 " << total.l1 << ", rel_tol " << options.rel_tol
        << ", depth " << options.max_depth;
    throw NumericalError(msg.str());
  }
  return total;
}

Maximum golden_section_maximize(const std::function<double(double)>& f, double lo, double hi,
                                double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  const double x = 0.5 * (a + b);
  return {x, f(x)};
}

Maximum maximize_on_interval(const std::function<double(double)>& f, double lo, double hi,
                             std::size_t grid_points, double tol) {
  if (grid_points < 3) grid_points = 3;
  const double step = (hi - lo) / static_cast<double>(grid_points - 1);
  std::size_t best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid_points; ++i) {
    const double x = i + 1 == grid_points ? hi : lo + step * static_cast<double>(i);
    const double v = f(x);
    if (v > best_value) {
      best_value = v;
      best = i;
    }
  }
  const double grid_x = best + 1 == grid_points ? hi : lo + step * static_cast<double>(best);
  const double a = best == 0 ? lo : lo + step * static_cast<double>(best - 1);
  const double b = best + 1 >= grid_points ? hi : lo + step * static_cast<double>(best + 1);
  Maximum refined = golden_section_maximize(f, a, b, tol);
  if (refined.value < best_value) {
    return {grid_x, best_value};
  }
  return refined;
}

double loglog_slope(std::span<const double> x, std::span<const double> y, double x_lo,
                    double x_hi) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("loglog_slope: x and y differ in length");
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < x_lo || x[i] > x_hi) continue;
    if (!(y[i] > 0.0) || !(x[i] > 0.0)) {
      throw std::invalid_argument("loglog_slope: non-positive value inside the fit window");
    }
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) {
    throw std::invalid_argument("loglog_slope: fewer than two points inside the fit window");
  }
  const double dn = static_cast<double>(n);
  const double denom = dn * sxx - sx * sx;
  if (denom <= 0.0) {
    throw std::invalid_argument("loglog_slope: degenerate abscissae");
  }
  return (dn * sxy - sx * sy) / denom;
}

double quantile(std::vector<double>& values, double p) {
  if (values.empty()) {
    throw std::invalid_argument("quantile of an empty sample");
  }
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

}  // namespace rtreserve
