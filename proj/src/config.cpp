#include "rtreserve/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

namespace rtreserve {

namespace {

constexpr std::string_view kTopLevelKeys[] = {
    "learner",     "r0",           "projection",      "record_stride",    "seed_base",
    "seeds",       "step.nu",      "step.alpha",      "kernel.sigma0",    "kernel.alpha_sigma",
    "constants.mu", "constants.c", "fit.t_lo",        "fit.t_hi",         "discrete.initial_cells",
    "allow_decaying_kernel"};

constexpr std::string_view kPhaseFields[] = {"family", "a", "b", "rate", "upper", "length"};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Splits "phase.3.family" into (3, "family").
std::optional<std::pair<std::size_t, std::string_view>> split_phase_key(std::string_view key) {
  constexpr std::string_view prefix = "phase.";
  if (!key.starts_with(prefix)) return std::nullopt;
  key.remove_prefix(prefix.size());
  const auto dot = key.find('.');
  if (dot == std::string_view::npos || dot == 0) return std::nullopt;
  std::size_t index = 0;
  const auto digits = key.substr(0, dot);
  const auto res = std::from_chars(digits.data(), digits.data() + digits.size(), index);
  if (res.ec != std::errc{} || res.ptr != digits.data() + digits.size() || index == 0) {
    return std::nullopt;
  }
  return std::make_pair(index, key.substr(dot + 1));
}

bool is_known_key(std::string_view key) {
  if (std::find(std::begin(kTopLevelKeys), std::end(kTopLevelKeys), key) !=
      std::end(kTopLevelKeys)) {
    return true;
  }
  if (auto phase = split_phase_key(key)) {
    return std::find(std::begin(kPhaseFields), std::end(kPhaseFields), phase->second) !=
           std::end(kPhaseFields);
  }
  return false;
}

std::string strip_comment(std::string_view line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return std::string(line.substr(0, i));
  }
  return std::string(line);
}

std::vector<std::string_view> split_assignments(std::string_view line) {
  std::vector<std::string_view> out;
  int depth = 0;
  bool quoted = false;
  std::size_t start = 0;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (c == '"') quoted = !quoted;
    if (quoted) continue;
    if (c == '[') ++depth;
    if (c == ']') --depth;
    if (c == ',' && depth == 0) {
      out.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  out.push_back(line.substr(start));
  return out;
}

std::string unquote(std::string_view value) {
  value = trim(value);
  if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
    value = value.substr(1, value.size() - 2);
  }
  return std::string(value);
}

double to_double(std::string_view key, std::string_view text) {
  text = trim(text);
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw ConfigError("'" + std::string(key) + "' expects a number, got '" + std::string(text) +
                      "'");
  }
  return value;
}

std::uint64_t to_uint(std::string_view key, std::string_view text) {
  text = trim(text);
  std::uint64_t value = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw ConfigError("'" + std::string(key) + "' expects a non-negative integer, got '" +
                      std::string(text) + "'");
  }
  return value;
}

std::vector<std::string_view> list_items(std::string_view key, std::string_view text) {
  text = trim(text);
  if (text.size() < 2 || text.front() != '[' || text.back() != ']') {
    throw ConfigError("'" + std::string(key) + "' expects a [..] list, got '" +
                      std::string(text) + "'");
  }
  std::vector<std::string_view> items;
  auto inner = text.substr(1, text.size() - 2);
  if (trim(inner).empty()) return items;
  for (auto item : split_assignments(inner)) items.push_back(trim(item));
  return items;
}

bool to_bool(std::string_view key, std::string_view text) {
  const auto v = unquote(text);
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError("'" + std::string(key) + "' expects true or false");
}

class Reader {
 public:
  explicit Reader(const ConfigMap& config) : config_(config) {}

  const std::string* raw(std::string_view key) const {
    const auto it = config_.find(key);
    return it == config_.end() ? nullptr : &it->second;
  }
  double number(std::string_view key, double fallback) const {
    const auto* v = raw(key);
    return v ? to_double(key, *v) : fallback;
  }
  std::optional<double> maybe_number(std::string_view key) const {
    const auto* v = raw(key);
    if (!v) return std::nullopt;
    return to_double(key, *v);
  }
  double required_number(std::string_view key) const {
    const auto* v = raw(key);
    if (!v) throw ConfigError("missing required key '" + std::string(key) + "'");
    return to_double(key, *v);
  }

 private:
  const ConfigMap& config_;
};

}  // namespace

ConfigMap parse_config(std::string_view text) {
  ConfigMap out;
  std::string section;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw_line;
  while (std::getline(in, raw_line)) {
    ++line_no;
    const std::string stripped = strip_comment(raw_line);
    const std::string_view line = trim(stripped);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']' && line.find('=') == std::string_view::npos) {
      section = std::string(trim(line.substr(1, line.size() - 2)));
      continue;
    }
    for (auto piece : split_assignments(line)) {
      const auto eq = piece.find('=');
      if (eq == std::string_view::npos) {
        throw ConfigError("line " + std::to_string(line_no) + ": expected key = value, got '" +
                          std::string(trim(piece)) + "'");
      }
      const std::string_view key = trim(piece.substr(0, eq));
      const std::string_view value = trim(piece.substr(eq + 1));
      if (key.empty() || value.empty()) {
        throw ConfigError("line " + std::to_string(line_no) + ": empty key or value");
      }
      const std::string full = section.empty() ? std::string(key) : section + "." + std::string(key);
      if (!is_known_key(full)) {
        throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + full + "'");
      }
      if (!out.emplace(full, std::string(value)).second) {
        throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + full + "'");
      }
    }
  }
  return out;
}

ConfigMap load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

void apply_override(ConfigMap& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("override '" + std::string(assignment) + "' is not key=value");
  }
  const std::string key(trim(assignment.substr(0, eq)));
  const std::string value(trim(assignment.substr(eq + 1)));
  if (!is_known_key(key)) throw ConfigError("unknown override key '" + key + "'");
  if (value.empty()) throw ConfigError("override for '" + key + "' has no value");
  config[key] = value;
}

std::string render_config(const ConfigMap& config) {
  std::string out;
  for (const auto& [key, value] : config) {
    out += key + " = " + value + "\n";
  }
  return out;
}

BidDistribution phase_distribution(const ConfigMap& config, std::size_t index) {
  const std::string prefix = "phase." + std::to_string(index) + ".";
  const Reader read(config);
  const auto* family = read.raw(prefix + "family");
  if (!family) throw ConfigError("missing required key '" + prefix + "family'");
  const std::string name = unquote(*family);
  try {
    if (name == "kumaraswamy") {
      return BidDistribution::kumaraswamy(read.required_number(prefix + "a"),
                                          read.required_number(prefix + "b"));
    }
    if (name == "truncated_exponential") {
      return BidDistribution::truncated_exponential(read.required_number(prefix + "rate"),
                                                    read.number(prefix + "upper", 1.0));
    }
    if (name == "uniform") {
      return BidDistribution::uniform(read.number(prefix + "upper", 1.0));
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(prefix + "family: " + e.what());
  }
  throw ConfigError("unknown distribution family '" + name + "' in " + prefix + "family");
}

std::size_t phase_count(const ConfigMap& config) {
  std::set<std::size_t> indices;
  for (const auto& [key, value] : config) {
    if (auto phase = split_phase_key(key)) indices.insert(phase->first);
  }
  if (indices.empty()) throw ConfigError("config declares no [phase.N] sections");
  if (*indices.rbegin() != indices.size()) {
    throw ConfigError("phase sections must be numbered 1..N without gaps");
  }
  return indices.size();
}

RunSettings build_settings(const ConfigMap& config) {
  for (const auto& [key, value] : config) {
    if (!is_known_key(key)) throw ConfigError("unknown key '" + key + "'");
  }
  const Reader read(config);
  RunSettings settings;
  ExperimentConfig& exp = settings.experiment;

  const std::size_t phases = phase_count(config);
  for (std::size_t i = 1; i <= phases; ++i) {
    const std::string length_key = "phase." + std::to_string(i) + ".length";
    const auto* length = read.raw(length_key);
    if (!length) throw ConfigError("missing required key '" + length_key + "'");
    exp.stream.phases.push_back({phase_distribution(config, i), to_uint(length_key, *length)});
  }

  LearnerConfig& learner = exp.learner;
  if (const auto* name = read.raw("learner")) {
    try {
      learner.kind = parse_learner_kind(unquote(*name));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  learner.step.nu = read.number("step.nu", learner.step.nu);
  learner.step.alpha = read.number("step.alpha", learner.step.alpha);
  learner.kernel.sigma0 = read.number("kernel.sigma0", learner.kernel.sigma0);
  learner.kernel.alpha_sigma = read.number("kernel.alpha_sigma", learner.kernel.alpha_sigma);
  learner.r0 = read.maybe_number("r0");
  if (const auto* proj = read.raw("projection")) {
    const auto items = list_items("projection", *proj);
    if (items.size() != 2) throw ConfigError("'projection' expects [lo, hi]");
    learner.projection = Interval{to_double("projection", items[0]),
                                  to_double("projection", items[1])};
  }
  if (const auto* cells = read.raw("discrete.initial_cells")) {
    learner.discrete_initial_cells = to_uint("discrete.initial_cells", *cells);
  }

  const std::uint64_t seed_base =
      read.raw("seed_base") ? to_uint("seed_base", *read.raw("seed_base")) : 1;
  if (const auto* seeds = read.raw("seeds")) {
    if (trim(*seeds).starts_with("[")) {
      for (auto item : list_items("seeds", *seeds)) exp.seeds.push_back(to_uint("seeds", item));
    } else {
      const auto count = to_uint("seeds", *seeds);
      for (std::uint64_t i = 0; i < count; ++i) exp.seeds.push_back(seed_base + i);
    }
  } else {
    for (std::uint64_t i = 0; i < 10; ++i) exp.seeds.push_back(seed_base + i);
  }
  if (const auto* stride = read.raw("record_stride")) {
    exp.record.stride = to_uint("record_stride", *stride);
  }

  const auto mu = read.maybe_number("constants.mu");
  const auto c = read.maybe_number("constants.c");
  if (mu || c) {
    if (!(mu && c)) throw ConfigError("constants.mu and constants.c must be given together");
    const Interval set = projection_for(learner, exp.stream.support_max());
    settings.constants = ProblemConstants{.mu = *mu, .c = *c, .lo = set.lo, .hi = set.hi};
  }
  if (const auto* flag = read.raw("allow_decaying_kernel")) {
    settings.allow_decaying_kernel = to_bool("allow_decaying_kernel", *flag);
  }
  settings.fit_t_lo = read.number("fit.t_lo", settings.fit_t_lo);
  settings.fit_t_hi = read.number("fit.t_hi", settings.fit_t_hi);

  try {
    exp.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return settings;
}

}  // namespace rtreserve
