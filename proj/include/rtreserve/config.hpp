#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "rtreserve/distributions.hpp"
#include "rtreserve/simulator.hpp"

namespace rtreserve {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat view of a sectioned key-value config: `[kernel]` followed by
/// `sigma0 = 1.0` is stored as `kernel.sigma0`. Values keep their source
/// text (quotes and brackets included) so the map renders back losslessly.
///
///   learner = "v_conv_oga"
///   projection = [0.0, 1.0]
///   [phase.1]
///   family = "kumaraswamy", a = 1.0, b = 0.4
///   length = 100000
///
/// Several assignments may share a line when separated by commas outside brackets.
using ConfigMap = std::map<std::string, std::string, std::less<>>;

ConfigMap parse_config(std::string_view text);
ConfigMap load_config(const std::string& path);

/// Applies one `key=value` override; the key must already be known or be a
/// valid phase key.
void apply_override(ConfigMap& config, std::string_view assignment);

/// One `key = value` line per entry in key order; parse_config(render_config(m)) == m.
std::string render_config(const ConfigMap& config);

/// Everything a CLI run needs beyond the experiment itself.
struct RunSettings {
  ExperimentConfig experiment;
  std::optional<ProblemConstants> constants;
  bool allow_decaying_kernel = false;
  double fit_t_lo = 1e3;
  double fit_t_hi = 1e5;
};

/// Builds run settings, rejecting unknown keys, missing phase fields and
/// malformed values with ConfigError.
RunSettings build_settings(const ConfigMap& config);

/// Parses a `family = ..., a = ..., b = ...` group for phase number `index`.
BidDistribution phase_distribution(const ConfigMap& config, std::size_t index);

/// Number of [phase.N] groups; throws ConfigError unless they are numbered 1..N.
std::size_t phase_count(const ConfigMap& config);

}  // namespace rtreserve
