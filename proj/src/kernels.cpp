#include "rtreserve/kernels.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "rtreserve/numerics.hpp"

namespace rtreserve {

namespace {
constexpr double kSqrt2OverPi = 0.79788456080286535587989211986876373695171726232986;
constexpr double kTruncation = 10.0;
constexpr QuadratureOptions kKernelQuadrature{.rel_tol = 1e-10, .abs_tol = 0.0, .max_depth = 20};
}  // namespace

GaussianKernel::GaussianKernel(double sigma) : sigma_(sigma), inv_sigma_(1.0 / sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    std::ostringstream msg;
    msg << "gaussian kernel width must be positive, got " << sigma;
    throw std::invalid_argument(msg.str());
  }
}

double GaussianKernel::sup_norm() const { return kInvSqrt2Pi * inv_sigma_; }

double GaussianKernel::l1_to_heaviside() const { return sigma_ * kSqrt2OverPi; }

HeavisideDistance heaviside_distance_forms(const Kernel& kernel) {
  const double s = kernel.scale();
  const std::array<double, 5> breaks{-3.0 * s, -s, 0.0, s, 3.0 * s};
  const auto step_gap = [&](double r) { 
    return r < 0.0 ? kernel.cdf(r) : kernel.mass_between(r, std::numeric_limits<double>::infinity());
  };
  const auto abs_moment = [&](double r) { return std::abs(r) * kernel.density(r); };
  HeavisideDistance out;
  out.step_form =
      integrate(step_gap, -kTruncation * s, kTruncation * s, breaks, kKernelQuadrature).value;
  out.moment_form =
      integrate(abs_moment, -kTruncation * s, kTruncation * s, breaks, kKernelQuadrature).value;
  return out;
}

double kernel_mass(const Kernel& kernel) {
  const double s = kernel.scale();
  const std::array<double, 5> breaks{-3.0 * s, -s, 0.0, s, 3.0 * s};
  return integrate([&](double r) { return kernel.density(r); }, -kTruncation * s,
                   kTruncation * s, breaks, kKernelQuadrature)
      .value;
}

double KernelSchedule::sigma_at(std::uint64_t t) const {
  if (t == 0) throw std::invalid_argument("kernel schedule is indexed from t = 1");
  if (alpha_sigma == 0.0) return sigma0;
  return sigma0 * std::pow(static_cast<double>(t), -alpha_sigma);
}

ScheduleExponents KernelSchedule::exponents() const {
  return {.alpha_l1 = alpha_sigma,
          .nu_l1 = sigma0 * kSqrt2OverPi,
          .alpha_sup = alpha_sigma,
          .nu_sup = kInvSqrt2Pi / sigma0};
}

bool satisfies_convergence_conditions(double step_alpha, const ScheduleExponents& rates) {
  return step_alpha <= 1.0 && step_alpha + rates.alpha_l1 > 1.0 &&
         2.0 * step_alpha - rates.alpha_sup > 1.0;
}

}  // namespace rtreserve
