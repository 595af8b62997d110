#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "rtreserve/distributions.hpp"
#include "rtreserve/kernels.hpp"

namespace rtreserve {

/// p(r, b) = r 1{r <= b}.
inline double instantaneous_revenue(double r, double b) { return r <= b ? r : 0.0; }

/// ∇p_k(r, b) = K(r) - K(r - b) - b k(r - b). Constant cost; this is the
/// only surrogate quantity the learners evaluate.
template <class KernelT>
double convolved_gradient(const KernelT& kernel, double r, double b) {
  const double shifted = r - b;
  return kernel.mass_between(shifted, r) - b * kernel.density(shifted);
}

struct SurrogateEval {
  double value = 0.0;
  double gradient = 0.0;
};

/// p_k(r, b) = ∫₀ᵇ τ k(r - τ) dτ. Closed form for Gaussian kernels,
/// adaptive quadrature otherwise.
double convolved_payoff(const Kernel& kernel, double r, double b);

/// The quadrature route for p_k, regardless of kernel family.
double convolved_payoff_quadrature(const Kernel& kernel, double r, double b);

SurrogateEval evaluate_surrogate(const Kernel& kernel, double r, double b);

/// Π_k(r) = ∫₀^b̄ Π(τ) k(r - τ) dτ by adaptive quadrature (Π is zero off the support).
double convolved_expected_revenue(const BidDistribution& dist, const Kernel& kernel, double r);

/// ∇Π_k(r) = ∫₀^b̄ Π(τ) k'(r - τ) dτ by adaptive quadrature.
double convolved_expected_revenue_gradient(const BidDistribution& dist, const Kernel& kernel,
                                           double r);

/// E_F[p_k(r, B)]. Each half of the support is integrated against the
/// density, or in quantile space when the density is unbounded at that end.
double expected_convolved_payoff(const BidDistribution& dist, const Kernel& kernel, double r);

/// E_F[∇p_k(r, B)], integrated as above.
double expected_convolved_gradient(const BidDistribution& dist, const Kernel& kernel, double r);

/// E_F[∇p_k(r, B)²], integrated as above.
double expected_squared_gradient(const BidDistribution& dist, const Kernel& kernel, double r);

struct SurrogateBias {
  double monopoly_reserve = 0.0;   // r*
  double surrogate_reserve = 0.0;  // r*_k, the maximiser of Π_k
  double bias = 0.0;               // |Π(r*) - Π(r*_k)|
  double bound = 0.0;              // 2 ‖∇Π‖_∞ ‖K - 1‖₁
  double grad_sup_norm = 0.0;
  bool within_bound() const { return bias <= bound; }
};

/// Maximises Π_k over [0, b̄] and compares revenues at r* and r*_k.
/// grad_sup_norm defaults to the grid estimate of ‖∇Π‖_∞.
SurrogateBias surrogate_bias(const BidDistribution& dist, const Kernel& kernel,
                             std::optional<double> grad_sup_norm = std::nullopt);

struct SecondMoment {
  double value = 0.0;   // max over the grid of E[∇p_k²]
  double argmax = 0.0;
  double bound = 0.0;   // 1 + b̄ (1 + ‖∇Π‖_∞) ‖k‖_∞
  double grad_sup_norm = 0.0;
  bool within_bound() const { return value <= bound; }
};

SecondMoment gradient_second_moment(const BidDistribution& dist, const Kernel& kernel,
                                    std::span<const double> r_grid,
                                    std::optional<double> grad_sup_norm = std::nullopt);

/// Evenly spaced grid of n points over [lo, hi], both ends included.
std::vector<double> linspace(double lo, double hi, std::size_t n);

/// Central-difference gradient of Π_k at every grid point, with step h.
std::vector<double> numerical_surrogate_gradient(const BidDistribution& dist,
                                                 const Kernel& kernel,
                                                 std::span<const double> grid, double h);

/// Number of strict sign flips in a sequence; exact zeros are skipped.
std::size_t count_sign_changes(std::span<const double> values);

}  // namespace rtreserve
