#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rtreserve/distributions.hpp"
#include "rtreserve/kernels.hpp"

namespace rtreserve {

/// γ_t = nu t^{-alpha}; alpha = 0 gives a constant step.
struct StepSchedule {
  double nu = 1.0;
  double alpha = 1.0;

  double at(std::uint64_t t) const;
};

/// Compact projection set 𝒞 = [lo, hi].
struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  double midpoint() const { return 0.5 * (lo + hi); }
};

/// Euclidean projection onto [lo, hi].
inline double project(double r, double lo, double hi) { return r < lo ? lo : (r > hi ? hi : r); }
inline double project(double r, const Interval& set) { return project(r, set.lo, set.hi); }

/// Returns a message when nu exceeds 1 / (2 c mu), the step bound under which
/// the finite-time rates hold. Violations are allowed; callers decide whether to warn.
std::optional<std::string> step_condition_warning(const StepSchedule& steps,
                                                  const ProblemConstants& constants);

enum class LearnerKind { conv_oga, v_conv_oga, erm, discrete_erm };

std::string_view to_string(LearnerKind kind);
LearnerKind parse_learner_kind(std::string_view name);

/// Online reserve-price learner. reserve() is the price posted before the
/// next bid is seen; observe() consumes that bid and moves to the next price.
class Learner {
 public:
  virtual ~Learner() = default;

  virtual LearnerKind kind() const = 0;
  virtual double reserve() const = 0;
  /// Number of bids observed so far.
  virtual std::uint64_t step() const = 0;
  virtual void observe(double bid) = 0;
  /// Equivalent to observing each bid in order.
  virtual void observe_all(std::span<const double> bids) {
    for (double b : bids) observe(b);
  }
  /// Binary snapshot of the complete learner state.
  virtual std::string serialize() const = 0;
  virtual std::unique_ptr<Learner> clone() const = 0;
};

/// Projected online gradient ascent on a fixed Gaussian surrogate.
class ConvOga final : public Learner {
 public:
  ConvOga(GaussianKernel kernel, StepSchedule steps, Interval projection, double r0);

  LearnerKind kind() const override { return LearnerKind::conv_oga; }
  double reserve() const override { return reserve_; }
  std::uint64_t step() const override { return t_; }
  void observe(double bid) override;
  std::string serialize() const override;
  std::unique_ptr<Learner> clone() const override { return std::make_unique<ConvOga>(*this); }

  const GaussianKernel& kernel() const { return kernel_; }

 private:
  GaussianKernel kernel_;
  StepSchedule steps_;
  Interval projection_;
  double reserve_;
  std::uint64_t t_ = 0;
};

/// Conv-OGA whose kernel width and step both decay with t.
class VConvOga final : public Learner {
 public:
  VConvOga(KernelSchedule kernels, StepSchedule steps, Interval projection, double r0);

  LearnerKind kind() const override { return LearnerKind::v_conv_oga; }
  double reserve() const override { return reserve_; }
  std::uint64_t step() const override { return t_; }
  void observe(double bid) override;
  std::string serialize() const override;
  std::unique_ptr<Learner> clone() const override { return std::make_unique<VConvOga>(*this); }

 private:
  KernelSchedule kernels_;
  StepSchedule steps_;
  Interval projection_;
  double reserve_;
  std::uint64_t t_ = 0;
};

/// Empirical revenue maximisation over the full sorted bid history.
/// Ties go to the smaller reserve.
class Erm final : public Learner {
 public:
  Erm(Interval projection, double r0);

  LearnerKind kind() const override { return LearnerKind::erm; }
  double reserve() const override { return reserve_; }
  std::uint64_t step() const override { return sorted_bids_.size(); }
  void observe(double bid) override;
  void observe_all(std::span<const double> bids) override;
  std::string serialize() const override;
  std::unique_ptr<Learner> clone() const override { return std::make_unique<Erm>(*this); }

  std::span<const double> sorted_bids() const { return sorted_bids_; }

 private:
  void refit();

  Interval projection_;
  double reserve_;
  std::vector<double> sorted_bids_;
};

/// Empirical revenue maximisation on a regular grid over [0, b̄] whose cell
/// count is raised to ceil(sqrt(t)) at every t = 2^j. Existing counts are
/// split across the finer cells in proportion to overlap.
class DiscreteErm final : public Learner {
 public:
  DiscreteErm(double support_max, Interval projection, double r0, std::size_t initial_cells = 1);

  LearnerKind kind() const override { return LearnerKind::discrete_erm; }
  double reserve() const override { return reserve_; }
  std::uint64_t step() const override { return t_; }
  void observe(double bid) override;
  std::string serialize() const override;
  std::unique_ptr<Learner> clone() const override { return std::make_unique<DiscreteErm>(*this); }

  std::size_t cells() const { return counts_.size(); }
  double cell_width() const { return support_max_ / static_cast<double>(counts_.size()); }

 private:
  void regrid(std::size_t cells);
  void refit();

  double support_max_;
  Interval projection_;
  double reserve_;
  std::uint64_t t_ = 0;
  std::vector<double> counts_;
};

struct LearnerConfig {
  LearnerKind kind = LearnerKind::v_conv_oga;
  StepSchedule step{};
  KernelSchedule kernel{};
  /// Defaults to [0, b̄].
  std::optional<Interval> projection;
  /// Defaults to the midpoint of the projection set.
  std::optional<double> r0;
  std::size_t discrete_initial_cells = 1;
};

/// Throws std::invalid_argument for inconsistent settings, such as a
/// decaying kernel on the fixed-kernel learner or r0 outside the projection set.
std::unique_ptr<Learner> make_learner(const LearnerConfig& config, double support_max);

/// Resolved projection set for a config.
Interval projection_for(const LearnerConfig& config, double support_max);

}  // namespace rtreserve
