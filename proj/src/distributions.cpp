#include "rtreserve/distributions.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "rtreserve/numerics.hpp"

namespace rtreserve {

namespace {

void require_positive(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    std::ostringstream msg;
    msg << what << " must be positive and finite, got " << value;
    throw std::invalid_argument(msg.str());
  }
}

[[noreturn]] void edge_error(const char* what, double x) {
  std::ostringstream msg;
  msg << what << " is undefined at x = " << x;
  throw std::domain_error(msg.str());
}

}  // namespace

BidDistribution BidDistribution::kumaraswamy(double a, double b) {
  require_positive(a, "kumaraswamy shape a");
  require_positive(b, "kumaraswamy shape b");
  return BidDistribution(Family::kumaraswamy, a, b, 1.0);
}

BidDistribution BidDistribution::truncated_exponential(double rate, double upper) {
  require_positive(rate, "truncated exponential rate");
  require_positive(upper, "truncated exponential upper bound");
  BidDistribution d(Family::truncated_exponential, rate, 0.0, upper);
  d.exp_mass_ = -std::expm1(-rate * upper);
  return d;
}

BidDistribution BidDistribution::uniform(double upper) {
  require_positive(upper, "uniform upper bound");
  return BidDistribution(Family::uniform, 0.0, 0.0, upper);
}

double BidDistribution::cdf(double x) const {
  if (x <= 0.0) return 0.0;
  if (x >= upper_) return 1.0;
  switch (family_) {
    case Family::kumaraswamy:
      return -std::expm1(b_ * std::log1p(-std::pow(x, a_)));
    case Family::truncated_exponential:
      return -std::expm1(-a_ * x) / exp_mass_;
    case Family::uniform:
      return x / upper_;
  }
  return 0.0;
}

double BidDistribution::survival(double x) const {
  if (x <= 0.0) return 1.0;
  if (x >= upper_) return 0.0;
  switch (family_) {
    case Family::kumaraswamy:
      return std::pow(1.0 - std::pow(x, a_), b_);
    case Family::truncated_exponential:
      // (e^{-rate x} - e^{-rate upper}) / (1 - e^{-rate upper})
      return std::exp(-a_ * x) * -std::expm1(-a_ * (upper_ - x)) / exp_mass_;
    case Family::uniform:
      return 1.0 - x / upper_;
  }
  return 0.0;
}

double BidDistribution::pdf(double x) const {
  if (x < 0.0 || x > upper_) return 0.0;
  switch (family_) {
    case Family::kumaraswamy: {
      if (x == 0.0) {
        if (a_ < 1.0) edge_error("kumaraswamy pdf", x);
        return a_ == 1.0 ? a_ * b_ : 0.0;
      }
      if (x == upper_) {
        if (b_ < 1.0) edge_error("kumaraswamy pdf", x);
        return b_ == 1.0 ? a_ : 0.0;
      }
      const double xa = std::pow(x, a_);
      return a_ * b_ * (xa / x) * std::pow(1.0 - xa, b_ - 1.0);
    }
    case Family::truncated_exponential:
      return a_ * std::exp(-a_ * x) / exp_mass_;
    case Family::uniform:
      return 1.0 / upper_;
  }
  return 0.0;
}

double BidDistribution::quantile(double u) const {
  if (!(u >= 0.0 && u <= 1.0)) {
    throw std::domain_error("quantile level must lie in [0, 1]");
  }
  switch (family_) {
    case Family::kumaraswamy:
      // x = (1 - (1 - u)^{1/b})^{1/a}
      return std::pow(-std::expm1(std::log1p(-u) / b_), 1.0 / a_);
    case Family::truncated_exponential:
      return std::min(upper_, -std::log1p(-u * exp_mass_) / a_);
    case Family::uniform:
      return u * upper_;
  }
  return 0.0;
}

double BidDistribution::upper_quantile(double v) const {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw std::domain_error("survival level must lie in [0, 1]");
  }
  switch (family_) {
    case Family::kumaraswamy:
      return std::pow(-std::expm1(std::log(v) / b_), 1.0 / a_);
    case Family::truncated_exponential:
      return std::max(0.0, upper_ - std::log1p(v * exp_mass_ * std::exp(a_ * upper_)) / a_);
    case Family::uniform:
      return (1.0 - v) * upper_;
  }
  return 0.0;
}

std::string BidDistribution::describe() const {
  const auto num = [](double v) {
    char buf[32];
    return std::string(buf, std::to_chars(buf, buf + sizeof(buf), v).ptr);
  };
  switch (family_) {
    case Family::kumaraswamy:
      return "kumaraswamy(a=" + num(a_) + ", b=" + num(b_) + ")";
    case Family::truncated_exponential:
      return "truncated_exponential(rate=" + num(a_) + ", upper=" + num(upper_) + ")";
    case Family::uniform:
      return "uniform(upper=" + num(upper_) + ")";
  }
  return "unknown";
}

double monopoly_revenue(const BidDistribution& dist, double r) {
  if (!(r >= 0.0 && r <= dist.support_max())) {
    std::ostringstream msg;
    msg << "reserve " << r << " lies outside [0, " << dist.support_max() << "]";
    throw std::domain_error(msg.str());
  }
  return r * dist.survival(r);
}

double grad_monopoly_revenue(const BidDistribution& dist, double r) {
  if (!(r >= 0.0 && r <= dist.support_max())) {
    throw std::domain_error("revenue gradient requested off the support");
  }
  return dist.survival(r) - r * dist.pdf(r);
}

double virtual_value(const BidDistribution& dist, double x) {
  if (!(x >= 0.0 && x <= dist.support_max())) {
    throw std::domain_error("virtual value requested off the support");
  }
  const double f = dist.pdf(x);
  if (!(f > 0.0)) edge_error("virtual value (zero density)", x);
  return x - dist.survival(x) / f;
}

double hazard_rate(const BidDistribution& dist, double x) {
  if (x < 0.0) edge_error("hazard rate", x);
  const double s = dist.survival(x);
  if (!(s > 0.0)) edge_error("hazard rate (F = 1)", x);
  return dist.pdf(x) / s;
}

MonopolyPrice monopoly_price_oracle(const BidDistribution& dist, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("oracle tolerance must be positive");
  const auto revenue = [&](double r) { return monopoly_revenue(dist, r); };
  const Maximum best =
      maximize_on_interval(revenue, 0.0, dist.support_max(), kOracleGridPoints, tol);
  return {best.argmax, best.value};
}

double grad_revenue_sup_norm(const BidDistribution& dist, std::size_t grid_points) {
  const double width = dist.support_max() / static_cast<double>(grid_points);
  double best = 0.0;
  for (std::size_t i = 0; i < grid_points; ++i) {
    const double r = (static_cast<double>(i) + 0.5) * width;
    best = std::max(best, std::abs(grad_monopoly_revenue(dist, r)));
  }
  return best;
}

double hessian_revenue_sup_norm(const BidDistribution& dist, std::size_t grid_points) {
  const double width = dist.support_max() / static_cast<double>(grid_points);
  const double h = 0.25 * width;
  double best = 0.0;
  for (std::size_t i = 0; i < grid_points; ++i) {
    const double r = (static_cast<double>(i) + 0.5) * width;
    const double d2 = (grad_monopoly_revenue(dist, r + h) - grad_monopoly_revenue(dist, r - h)) /
                      (2.0 * h);
    best = std::max(best, std::abs(d2));
  }
  return best;
}

AssumptionReport check_assumptions(const BidDistribution& dist, std::size_t grid_points) {
  AssumptionReport report;
  report.positive_density = true;
  report.regular = true;
  report.mhr_modulus = std::numeric_limits<double>::infinity();
  const double step = dist.support_max() / static_cast<double>(grid_points + 1);
  double prev_x = step;
  double prev_psi = virtual_value(dist, prev_x);
  double prev_lambda = hazard_rate(dist, prev_x);
  if (!(dist.pdf(prev_x) > 0.0)) report.positive_density = false;
  for (std::size_t i = 2; i <= grid_points; ++i) {
    const double x = step * static_cast<double>(i);
    if (!(dist.pdf(x) > 0.0)) {
      report.positive_density = false;
      continue;
    }
    const double psi = virtual_value(dist, x);
    const double lambda = hazard_rate(dist, x);
    if (!(psi > prev_psi)) report.regular = false;
    report.mhr_modulus = std::min(report.mhr_modulus, (lambda - prev_lambda) / (x - prev_x));
    prev_x = x;
    prev_psi = psi;
    prev_lambda = lambda;
  }
  return report;
}

ConstantsReport validate_constants(const BidDistribution& dist, const ProblemConstants& constants,
                                   std::size_t grid_points) {
  ConstantsReport report;
  report.interval_ok =
      constants.lo >= 0.0 && constants.lo < constants.hi && constants.hi <= dist.support_max();
  report.estimated_mu = check_assumptions(dist, grid_points).mhr_modulus;
  report.mu_ok = constants.mu >= 0.0 && constants.mu <= report.estimated_mu;
  report.monopoly_price = monopoly_price_oracle(dist).reserve;
  if (!report.interval_ok) return report;

  report.contains_optimum =
      report.monopoly_price >= constants.lo && report.monopoly_price <= constants.hi;
  report.min_revenue = std::numeric_limits<double>::infinity();
  const double step = (constants.hi - constants.lo) / static_cast<double>(grid_points - 1);
  for (std::size_t i = 0; i < grid_points; ++i) {
    const double r = i + 1 == grid_points ? constants.hi : constants.lo + step * static_cast<double>(i);
    report.min_revenue = std::min(report.min_revenue, monopoly_revenue(dist, r));
  }
  report.floor_ok = constants.c > 0.0 && report.min_revenue >= constants.c;
  return report;
}

}  // namespace rtreserve
