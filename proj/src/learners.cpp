#include "rtreserve/learners.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <sstream>
#include <stdexcept>

#include "rtreserve/surrogate.hpp"

namespace rtreserve {

namespace {

class ByteWriter {
 public:
  template <class T>
  ByteWriter& put(const T& value) {
    static_assert(std::is_trivially_copyable_v<T>);
    const auto* p = reinterpret_cast<const char*>(&value);
    out_.append(p, sizeof(T));
    return *this;
  }
  ByteWriter& put_doubles(std::span<const double> values) {
    put(static_cast<std::uint64_t>(values.size()));
    out_.append(reinterpret_cast<const char*>(values.data()), values.size_bytes());
    return *this;
  }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

void check_projection(const Interval& set) {
  if (!(set.lo <= set.hi)) {
    throw std::invalid_argument("projection set requires lo <= hi");
  }
}

}  // namespace

double StepSchedule::at(std::uint64_t t) const {
  if (alpha == 0.0) return nu;
  return nu * std::pow(static_cast<double>(t), -alpha);
}

std::optional<std::string> step_condition_warning(const StepSchedule& steps,
                                                  const ProblemConstants& constants) {
  if (!(constants.c > 0.0 && constants.mu > 0.0)) return std::nullopt;
  const double limit = 1.0 / (2.0 * constants.c * constants.mu);
  if (steps.nu <= limit) return std::nullopt;
  std::ostringstream msg;
  msg << "step prefactor nu = " << steps.nu << " exceeds 1/(2 c mu) = " << limit
      << "; finite-time rate guarantees do not apply";
  return msg.str();
}

std::string_view to_string(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::conv_oga:
      return "conv_oga";
    case LearnerKind::v_conv_oga:
      return "v_conv_oga";
    case LearnerKind::erm:
      return "erm";
    case LearnerKind::discrete_erm:
      return "discrete_erm";
  }
  return "unknown";
}

LearnerKind parse_learner_kind(std::string_view name) {
  for (auto kind : {LearnerKind::conv_oga, LearnerKind::v_conv_oga, LearnerKind::erm,
                    LearnerKind::discrete_erm}) {
    if (to_string(kind) == name) return kind;
  }
  throw std::invalid_argument("unknown learner '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------

ConvOga::ConvOga(GaussianKernel kernel, StepSchedule steps, Interval projection, double r0)
    : kernel_(kernel), steps_(steps), projection_(projection), reserve_(r0) {
  check_projection(projection_);
}

void ConvOga::observe(double bid) {
  ++t_;
  const double gamma = steps_.at(t_);
  reserve_ = project(reserve_ + gamma * convolved_gradient(kernel_, reserve_, bid), projection_);
}

std::string ConvOga::serialize() const {
  return ByteWriter{}
      .put(static_cast<std::uint8_t>(kind()))
      .put(reserve_)
      .put(t_)
      .put(kernel_.sigma())
      .put(steps_.nu)
      .put(steps_.alpha)
      .put(projection_.lo)
      .put(projection_.hi)
      .take();
}

VConvOga::VConvOga(KernelSchedule kernels, StepSchedule steps, Interval projection, double r0)
    : kernels_(kernels), steps_(steps), projection_(projection), reserve_(r0) {
  check_projection(projection_);
  if (!(kernels_.sigma0 > 0.0)) throw std::invalid_argument("kernel.sigma0 must be positive");
}

void VConvOga::observe(double bid) {
  ++t_;
  const GaussianKernel kernel = kernels_.at(t_);
  const double gamma = steps_.at(t_);
  reserve_ = project(reserve_ + gamma * convolved_gradient(kernel, reserve_, bid), projection_);
}

std::string VConvOga::serialize() const {
  return ByteWriter{}
      .put(static_cast<std::uint8_t>(kind()))
      .put(reserve_)
      .put(t_)
      .put(kernels_.sigma0)
      .put(kernels_.alpha_sigma)
      .put(steps_.nu)
      .put(steps_.alpha)
      .put(projection_.lo)
      .put(projection_.hi)
      .take();
}

// ---------------------------------------------------------------------------

Erm::Erm(Interval projection, double r0) : projection_(projection), reserve_(r0) {
  check_projection(projection_);
}

void Erm::observe(double bid) {
  sorted_bids_.insert(std::upper_bound(sorted_bids_.begin(), sorted_bids_.end(), bid), bid);
  refit();
}

void Erm::observe_all(std::span<const double> bids) {
  if (bids.empty()) return;
  sorted_bids_.insert(sorted_bids_.end(), bids.begin(), bids.end());
  std::sort(sorted_bids_.begin(), sorted_bids_.end());
  refit();
}

void Erm::refit() {
  // Π̂ increases between consecutive bids, so over [lo, hi] its maximum is
  // attained at lo, at a bid inside the set, or at hi.
  const auto n = sorted_bids_.size();
  const auto begin = sorted_bids_.begin();
  const auto count_at_least = [&](double r) {
    return static_cast<double>(n - static_cast<std::size_t>(
                                       std::lower_bound(begin, sorted_bids_.end(), r) - begin));
  };
  double best = projection_.lo;
  double best_value = projection_.lo * count_at_least(projection_.lo);
  // Repeated bids score lower after their first copy, so a plain scan with a
  // strict comparison keeps the first (largest-count) occurrence.
  const auto first = static_cast<std::size_t>(
      std::lower_bound(begin, sorted_bids_.end(), projection_.lo) - begin);
  const double* bids = sorted_bids_.data();
  for (std::size_t i = first; i < n && bids[i] <= projection_.hi; ++i) {
    const double value = bids[i] * static_cast<double>(n - i);
    if (value > best_value) {
      best_value = value;
      best = bids[i];
    }
  }
  const double top_value = projection_.hi * count_at_least(projection_.hi);
  if (top_value > best_value) best = projection_.hi;
  reserve_ = best;
}

std::string Erm::serialize() const {
  return ByteWriter{}
      .put(static_cast<std::uint8_t>(kind()))
      .put(reserve_)
      .put(projection_.lo)
      .put(projection_.hi)
      .put_doubles(sorted_bids_)
      .take();
}

// ---------------------------------------------------------------------------

DiscreteErm::DiscreteErm(double support_max, Interval projection, double r0,
                         std::size_t initial_cells)
    : support_max_(support_max),
      projection_(projection),
      reserve_(r0),
      counts_(std::max<std::size_t>(initial_cells, 1), 0.0) {
  check_projection(projection_);
  if (!(support_max > 0.0)) throw std::invalid_argument("support_max must be positive");
}

void DiscreteErm::observe(double bid) {
  const double width = cell_width();
  const auto m = counts_.size();
  auto cell = bid <= 0.0 ? std::size_t{0} : static_cast<std::size_t>(bid / width);
  counts_[std::min(cell, m - 1)] += 1.0;
  ++t_;
  if (std::has_single_bit(t_)) {
    const auto target =
        static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(t_))));
    if (target > counts_.size()) regrid(target);
  }
  refit();
}

void DiscreteErm::regrid(std::size_t cells) {
  const double old_width = cell_width();
  const double new_width = support_max_ / static_cast<double>(cells);
  std::vector<double> fresh(cells, 0.0);
  std::size_t j = 0;
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    const double a = old_width * static_cast<double>(i);
    const double b = old_width * static_cast<double>(i + 1);
    if (counts_[i] == 0.0) continue;
    while (j + 1 < cells && new_width * static_cast<double>(j + 1) <= a) ++j;
    for (std::size_t k = j; k < cells; ++k) {
      const double lo = std::max(a, new_width * static_cast<double>(k));
      const double hi = std::min(b, new_width * static_cast<double>(k + 1));
      if (hi <= lo) {
        if (new_width * static_cast<double>(k) >= b) break;
        continue;
      }
      fresh[k] += counts_[i] * (hi - lo) / old_width;
    }
  }
  counts_ = std::move(fresh);
}

void DiscreteErm::refit() {
  // Grid point j sits at j * width; the mass at or above it is the sum of cells j..m-1.
  // Walking downward with >= keeps the smallest maximiser.
  const auto m = counts_.size();
  const double width = cell_width();
  double above = 0.0;
  double best = 0.0;
  double best_value = -1.0;
  double fallback = 0.0;
  double fallback_value = -1.0;
  for (std::size_t j = m + 1; j-- > 0;) {
    if (j < m) above += counts_[j];
    const double g = j == m ? support_max_ : width * static_cast<double>(j);
    const double value = g * above;
    if (value >= fallback_value) {
      fallback_value = value;
      fallback = g;
    }
    if (g < projection_.lo || g > projection_.hi) continue;
    if (value >= best_value) {
      best_value = value;
      best = g;
    }
  }
  reserve_ = best_value >= 0.0 ? best : project(fallback, projection_);
}

std::string DiscreteErm::serialize() const {
  return ByteWriter{}
      .put(static_cast<std::uint8_t>(kind()))
      .put(reserve_)
      .put(t_)
      .put(support_max_)
      .put(projection_.lo)
      .put(projection_.hi)
      .put_doubles(counts_)
      .take();
}

// ---------------------------------------------------------------------------

Interval projection_for(const LearnerConfig& config, double support_max) {
  return config.projection.value_or(Interval{0.0, support_max});
}

std::unique_ptr<Learner> make_learner(const LearnerConfig& config, double support_max) {
  const Interval set = projection_for(config, support_max);
  check_projection(set);
  const double r0 = config.r0.value_or(set.midpoint());
  if (r0 < set.lo || r0 > set.hi) {
    throw std::invalid_argument("r0 must lie inside the projection set");
  }
  if (!(config.step.nu >= 0.0) || config.step.alpha < 0.0 || config.step.alpha > 1.0) {
    throw std::invalid_argument("step schedule requires nu >= 0 and alpha in [0, 1]");
  }
  switch (config.kind) {
    case LearnerKind::conv_oga:
      if (config.kernel.alpha_sigma != 0.0) {
        throw std::invalid_argument(
            "conv_oga uses a fixed kernel; set kernel.alpha_sigma = 0 or choose v_conv_oga");
      }
      return std::make_unique<ConvOga>(GaussianKernel(config.kernel.sigma0), config.step, set,
                                       r0);
    case LearnerKind::v_conv_oga:
      return std::make_unique<VConvOga>(config.kernel, config.step, set, r0);
    case LearnerKind::erm:
      return std::make_unique<Erm>(set, r0);
    case LearnerKind::discrete_erm:
      return std::make_unique<DiscreteErm>(support_max, set, r0, config.discrete_initial_cells);
  }
  throw std::invalid_argument("unhandled learner kind");
}

}  // namespace rtreserve
