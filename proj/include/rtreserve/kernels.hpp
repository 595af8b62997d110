#pragma once

#include <cmath>
#include <cstdint>

#include "rtreserve/numerics.hpp"

namespace rtreserve {

/// A smoothing kernel k: strictly positive, normalised, continuously
/// differentiable, with cdf K. Implementations are immutable values.
class Kernel {
 public:
  virtual ~Kernel() = default;

  virtual double density(double x) const = 0;
  virtual double density_derivative(double x) const = 0;
  virtual double cdf(double x) const = 0;
  /// K(hi) - K(lo); kernels may override to avoid cancellation in the tails.
  virtual double mass_between(double lo, double hi) const { return cdf(hi) - cdf(lo); }
  /// ‖k‖_∞
  virtual double sup_norm() const = 0;
  /// ‖K - 1_{ℝ⁺}‖₁ in closed form.
  virtual double l1_to_heaviside() const = 0;
  /// Length scale; quadrature truncates the real line at ±10 scale().
  virtual double scale() const = 0;
};

/// Zero-mean Gaussian density with standard deviation sigma.
class GaussianKernel final : public Kernel {
 public:
  explicit GaussianKernel(double sigma);

  double sigma() const { return sigma_; }

  double density(double x) const override {
    return inv_sigma_ * standard_normal_pdf(x * inv_sigma_);
  }
  double density_derivative(double x) const override {
    return -x * inv_sigma_ * inv_sigma_ * density(x);
  }
  double cdf(double x) const override { return standard_normal_cdf(x * inv_sigma_); }
  double mass_between(double lo, double hi) const override {
    if (lo > 0.0) {
      return 0.5 * (std::erfc(lo * inv_sigma_ * kInvSqrt2) - std::erfc(hi * inv_sigma_ * kInvSqrt2));
    }
    return cdf(hi) - cdf(lo);
  }
  double sup_norm() const override;
  double l1_to_heaviside() const override;
  double scale() const override { return sigma_; }

 private:
  static constexpr double kInvSqrt2 = 0.70710678118654752440084436210484903928483593768847;
  double sigma_;
  double inv_sigma_;
};

inline GaussianKernel gaussian_kernel(double sigma) { return GaussianKernel(sigma); }

/// Both quadrature forms of the Heaviside distance.
struct HeavisideDistance {
  double step_form = 0.0;    // ∫ |K(r) - 1{r >= 0}| dr
  double moment_form = 0.0;  // ∫ |r| k(r) dr
};

/// Adaptive quadrature over [-10 scale, 10 scale] at tolerance 1e-10.
/// Throws NumericalError when a piece fails to converge.
HeavisideDistance heaviside_distance_forms(const Kernel& kernel);

/// ∫ |K(r) - 1{r >= 0}| dr by quadrature.
inline double l1_distance_to_heaviside(const Kernel& kernel) {
  return heaviside_distance_forms(kernel).step_form;
}

/// ∫ k by quadrature over the same truncated domain.
double kernel_mass(const Kernel& kernel);

/// Power-law rates of a decaying kernel sequence:
/// ‖K_t - 1‖₁ <= nu_l1 t^{-alpha_l1} and ‖k_t‖_∞ <= nu_sup t^{alpha_sup}.
struct ScheduleExponents {
  double alpha_l1 = 0.0;
  double nu_l1 = 0.0;
  double alpha_sup = 0.0;
  double nu_sup = 0.0;
};

/// Gaussian widths sigma_t = sigma0 t^{-alpha_sigma}; alpha_sigma = 0 keeps the kernel fixed.
struct KernelSchedule {
  double sigma0 = 1.0;
  double alpha_sigma = 0.5;

  double sigma_at(std::uint64_t t) const;
  GaussianKernel at(std::uint64_t t) const { return GaussianKernel(sigma_at(t)); }
  ScheduleExponents exponents() const;
};

/// Almost-sure convergence conditions for steps nu t^{-alpha}:
/// alpha <= 1, alpha + alpha_l1 > 1 and 2 alpha - alpha_sup > 1.
bool satisfies_convergence_conditions(double step_alpha, const ScheduleExponents& rates);

}  // namespace rtreserve
