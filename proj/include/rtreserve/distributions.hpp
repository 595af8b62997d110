#pragma once

#include <cstddef>
#include <string>

#include "rtreserve/random.hpp"

namespace rtreserve {

enum class Family { kumaraswamy, truncated_exponential, uniform };

/// A bid law F on [0, support_max] with analytic cdf, pdf and inverse cdf.
/// Immutable once built; the factories reject invalid parameters.
class BidDistribution {
 public:
  /// cdf 1 - (1 - x^a)^b on [0, 1].
  static BidDistribution kumaraswamy(double a, double b);
  /// Exponential(rate) conditioned on [0, upper].
  static BidDistribution truncated_exponential(double rate, double upper);
  static BidDistribution uniform(double upper = 1.0);

  Family family() const { return family_; }
  double support_max() const { return upper_; }
  /// First shape parameter (Kumaraswamy a, exponential rate; unused for uniform).
  double shape_a() const { return a_; }
  /// Second shape parameter (Kumaraswamy b; unused otherwise).
  double shape_b() const { return b_; }

  /// Clamped outside the support: 0 below, 1 above.
  double cdf(double x) const;
  /// 1 - cdf(x), evaluated without cancellation.
  double survival(double x) const;
  /// Density; zero outside [0, b̄]. Throws std::domain_error at a support
  /// edge where the density is unbounded.
  double pdf(double x) const;
  /// Inverse cdf for u in [0, 1].
  double quantile(double u) const;
  /// The x with survival(x) = v, accurate for v near 0.
  double upper_quantile(double v) const;
  double sample(Rng& rng) const { return quantile(rng.uniform()); }

  std::string describe() const;

  friend bool operator==(const BidDistribution&, const BidDistribution&) = default;

 private:
  BidDistribution(Family family, double a, double b, double upper)
      : family_(family), a_(a), b_(b), upper_(upper) {}

  Family family_;
  double a_;
  double b_;
  double upper_;
  // Precomputed 1 - exp(-rate * upper) for the truncated exponential.
  double exp_mass_ = 1.0;
};

/// Π(r) = r (1 - F(r)); std::domain_error outside [0, b̄].
double monopoly_revenue(const BidDistribution& dist, double r);

/// Π'(r) = 1 - F(r) - r f(r).
double grad_monopoly_revenue(const BidDistribution& dist, double r);

/// ψ(x) = x - (1 - F(x)) / f(x); std::domain_error when f(x) = 0 or x is off the support.
double virtual_value(const BidDistribution& dist, double x);

/// λ(x) = f(x) / (1 - F(x)); std::domain_error when F(x) = 1 or x < 0.
double hazard_rate(const BidDistribution& dist, double x);

struct MonopolyPrice {
  double reserve = 0.0;
  double revenue = 0.0;
};

inline constexpr std::size_t kOracleGridPoints = 100001;

/// Ground-truth monopoly price: grid search then golden-section refinement to tol.
MonopolyPrice monopoly_price_oracle(const BidDistribution& dist, double tol = 1e-7);

/// Max of |Π'| over grid_points cell midpoints of (0, b̄).
double grad_revenue_sup_norm(const BidDistribution& dist, std::size_t grid_points = 100000);

/// Max of |Π''| over cell midpoints of (0, b̄), by central differences of Π'.
double hessian_revenue_sup_norm(const BidDistribution& dist, std::size_t grid_points = 100000);

struct AssumptionReport {
  bool positive_density = false;   // f > 0 on the open support
  bool regular = false;            // ψ increasing on the grid
  double mhr_modulus = 0.0;        // smallest hazard-rate slope seen on the grid
  bool increasing_hazard() const { return mhr_modulus >= 0.0; }
};

/// Checks positivity of f, monotone virtual value and hazard-rate growth on
/// grid_points interior points.
AssumptionReport check_assumptions(const BidDistribution& dist, std::size_t grid_points = 10000);

/// Seller-side prior knowledge: strong-MHR modulus, revenue floor, and the
/// compact projection set [lo, hi].
struct ProblemConstants {
  double mu = 0.0;
  double c = 0.0;
  double lo = 0.0;
  double hi = 1.0;
};

struct ConstantsReport {
  bool interval_ok = false;
  bool floor_ok = false;     // Π >= c on the grid over [lo, hi]
  bool contains_optimum = false;
  bool mu_ok = false;        // mu <= estimated modulus
  double min_revenue = 0.0;
  double estimated_mu = 0.0;
  double monopoly_price = 0.0;
  bool ok() const { return interval_ok && floor_ok && contains_optimum && mu_ok; }
};

ConstantsReport validate_constants(const BidDistribution& dist, const ProblemConstants& constants,
                                   std::size_t grid_points = 10000);

}  // namespace rtreserve
