#ifndef POLYREG_CONFIG_HPP
#define POLYREG_CONFIG_HPP

// INI-style experiment configuration: "[section]" headers, "key = value"
// lines, '#' or ';' comments. Unknown sections or keys, duplicates and bad
// values are rejected with the offending line number.

#include <polyreg/conditions.hpp>
#include <polyreg/io.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace polyreg {

struct DomainSpec
{
  std::vector<double> lo{0.0, 0.0};
  std::vector<double> hi{1.0, 1.0};
  std::vector<int> resolution{4, 4};
  bool operator==(const DomainSpec&) const = default;
};

struct SpaceSpec
{
  int components = 1;
  double exponent = 2.0;
  bool operator==(const SpaceSpec&) const = default;
};

struct IntegrandSpec
{
  std::string id = "dirichlet";
  double exponent = 2.0;
  double mass = 0.0;
  double stiffness = 1.0;
  double gamma = 1.0;
  double target = 1.0;
  double barrier = 1.0;
  bool operator==(const IntegrandSpec&) const = default;
};

struct GrowthSpec
{
  bool configured = false;
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double exponent = 2.0;
  std::size_t samples = 10000;
  bool operator==(const GrowthSpec&) const = default;
};

struct OperatorSpec
{
  std::string id = "identity";
  double width = 0.2;
  int stride = 1;
  /// Data dimension of the zero operator; 0 means one entry per node value.
  long data_dim = 0;
  bool operator==(const OperatorSpec&) const = default;
};

/// u†_c(x) = constant_c + Σ_j linear_cj x_j + quadratic_cj x_j² + wave_cj sin(π x_j)
struct SolutionSpec
{
  std::vector<double> constant;
  std::vector<double> linear;
  std::vector<double> quadratic;
  std::vector<double> wave;
  bool operator==(const SolutionSpec&) const = default;
};

struct ConditionSpec
{
  double beta1 = 0.0;
  /// Unset means β₂ = ‖ω*‖ from the range condition.
  std::optional<double> beta2;
  double alpha_bar = 1.0;
  double rho = 10.0;
  bool operator==(const ConditionSpec&) const = default;
};

struct SamplingSpec
{
  std::size_t count = 1000;
  double t_min = 1e-3;
  double t_max = 1.0;
  std::size_t directions = 200;
  std::size_t minimality_samples = 200;
  std::vector<double> sweep_radii;
  double sweep_inner_ratio = 1e-2;
  bool operator==(const SamplingSpec&) const = default;
};

struct SolverSpec
{
  std::string method = "gradient-descent";
  std::size_t max_iters = 100000;
  double grad_tol = 1e-8;
  double armijo = 1e-4;
  std::size_t stagnation_limit = 200;
  bool trace = false;
  bool operator==(const SolverSpec&) const = default;
};

struct RateSpec
{
  std::vector<double> deltas{1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4};
  double alpha_coefficient = 1.0;
  double alpha_exponent = 1.0;
  std::optional<double> slope_min;
  std::optional<double> slope_max;
  bool operator==(const RateSpec&) const = default;
};

struct GradientSpec
{
  std::size_t pairs = 20;
  std::size_t matrices = 1000;
  std::size_t fields = 1000;
  double bias = 1e-3;
  double amplitude = 1.0;
  double offset = 0.0;
  bool operator==(const GradientSpec&) const = default;
};

struct ExperimentConfig
{
  std::uint64_t seed = 1;
  DomainSpec domain;
  SpaceSpec space;
  IntegrandSpec integrand;
  GrowthSpec growth;
  OperatorSpec op;
  SolutionSpec solution;
  ConditionSpec conditions;
  SamplingSpec sampling;
  SolverSpec solver;
  RateSpec rate;
  GradientSpec gradients;
  bool operator==(const ExperimentConfig&) const = default;
};

namespace detail {

inline std::string_view trim(std::string_view s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

class ConfigLine
{
public:
  ConfigLine(std::string source, int line, std::string key, std::string value)
    : source_(std::move(source)), line_(line), key_(std::move(key)), value_(std::move(value))
  {}

  [[noreturn]] void fail(const std::string& msg) const
  {
    throw Error(ErrorKind::config, source_ + ":" + std::to_string(line_) + ": " + key_ + ": " + msg);
  }
  void check(bool ok, const std::string& msg) const
  {
    if (!ok) fail(msg);
  }

  double number() const { return parse_number(value_); }

  long integer() const
  {
    long v = 0;
    const auto* end = value_.data() + value_.size();
    const auto r = std::from_chars(value_.data(), end, v);
    if (r.ec != std::errc() || r.ptr != end) fail("expected an integer, got '" + value_ + "'");
    return v;
  }

  std::size_t count() const
  {
    const long v = integer();
    check(v >= 0, "must be nonnegative");
    return static_cast<std::size_t>(v);
  }

  bool boolean() const
  {
    if (value_ == "true" || value_ == "1") return true;
    if (value_ == "false" || value_ == "0") return false;
    fail("expected true or false, got '" + value_ + "'");
  }

  std::vector<double> numbers() const
  {
    std::vector<double> out;
    for (const auto& tok : tokens()) out.push_back(parse_number(tok));
    return out;
  }

  std::vector<int> integers() const
  {
    std::vector<int> out;
    for (const auto& tok : tokens()) {
      int v = 0;
      const auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (r.ec != std::errc() || r.ptr != tok.data() + tok.size()) fail("expected integers, got '" + tok + "'");
      out.push_back(v);
    }
    return out;
  }

  std::string word(std::initializer_list<const char*> allowed) const
  {
    for (const char* a : allowed)
      if (value_ == a) return value_;
    std::string list;
    for (const char* a : allowed) list += std::string(list.empty() ? "" : ", ") + a;
    fail("unknown value '" + value_ + "' (expected one of " + list + ")");
  }

  const std::string& value() const { return value_; }

private:
  double parse_number(const std::string& s) const
  {
    double v = 0.0;
    const auto* end = s.data() + s.size();
    const auto r = std::from_chars(s.data(), end, v);
    if (r.ec != std::errc() || r.ptr != end || !std::isfinite(v)) fail("expected a finite number, got '" + s + "'");
    return v;
  }

  std::vector<std::string> tokens() const
  {
    std::string tmp = value_;
    std::replace(tmp.begin(), tmp.end(), ',', ' ');
    std::istringstream ss(tmp);
    std::vector<std::string> out;
    for (std::string t; ss >> t;) out.push_back(t);
    if (out.empty()) fail("expected a list of values");
    return out;
  }

  std::string source_;
  int line_;
  std::string key_;
  std::string value_;
};

using KeyHandler = std::function<void(ExperimentConfig&, const ConfigLine&)>;

inline const std::map<std::string, std::map<std::string, KeyHandler>>& config_schema()
{
  using C = ExperimentConfig;
  using L = ConfigLine;
  static const std::map<std::string, std::map<std::string, KeyHandler>> schema = {
    {"run", {{"seed", [](C& c, const L& l) {
                const long v = l.integer();
                l.check(v >= 0, "seed must be nonnegative");
                c.seed = static_cast<std::uint64_t>(v);
              }}}},
    {"domain",
     {{"lo", [](C& c, const L& l) { c.domain.lo = l.numbers(); }},
      {"hi", [](C& c, const L& l) { c.domain.hi = l.numbers(); }},
      {"resolution", [](C& c, const L& l) { c.domain.resolution = l.integers(); }}}},
    {"space",
     {{"components", [](C& c, const L& l) {
         c.space.components = static_cast<int>(l.integer());
         l.check(c.space.components >= 1, "must be positive");
       }},
      {"exponent", [](C& c, const L& l) {
         c.space.exponent = l.number();
         l.check(c.space.exponent >= 1.0, "must be at least 1");
       }}}},
    {"integrand",
     {{"id", [](C& c, const L& l) { c.integrand.id = l.word({"zero", "dirichlet", "elastic", "barrier"}); }},
      {"exponent", [](C& c, const L& l) {
         c.integrand.exponent = l.number();
         l.check(c.integrand.exponent >= 1.0, "must be at least 1");
       }},
      {"mass", [](C& c, const L& l) {
         c.integrand.mass = l.number();
         l.check(c.integrand.mass >= 0.0, "must be nonnegative");
       }},
      {"stiffness", [](C& c, const L& l) {
         c.integrand.stiffness = l.number();
         l.check(c.integrand.stiffness >= 0.0, "must be nonnegative");
       }},
      {"gamma", [](C& c, const L& l) {
         c.integrand.gamma = l.number();
         l.check(c.integrand.gamma >= 0.0, "must be nonnegative");
       }},
      {"target", [](C& c, const L& l) { c.integrand.target = l.number(); }},
      {"barrier", [](C& c, const L& l) {
         c.integrand.barrier = l.number();
         l.check(c.integrand.barrier > 0.0, "must be positive");
       }}}},
    {"growth",
     {{"a", [](C& c, const L& l) {
         c.growth.a = l.number();
         l.check(c.growth.a >= 0.0, "must be nonnegative");
       }},
      {"b", [](C& c, const L& l) {
         c.growth.b = l.number();
         l.check(c.growth.b >= 0.0, "must be nonnegative");
       }},
      {"c", [](C& c, const L& l) {
         c.growth.c = l.number();
         l.check(c.growth.c >= 0.0, "must be nonnegative");
       }},
      {"exponent", [](C& c, const L& l) {
         c.growth.exponent = l.number();
         l.check(c.growth.exponent >= 1.0, "must be at least 1");
       }},
      {"samples", [](C& c, const L& l) {
         c.growth.samples = l.count();
         l.check(c.growth.samples > 0, "must be positive");
       }}}},
    {"operator",
     {{"id", [](C& c, const L& l) {
         c.op.id = l.word({"zero", "identity", "linear-smoothing", "pointwise-cubic", "composed"});
       }},
      {"width", [](C& c, const L& l) {
         c.op.width = l.number();
         l.check(c.op.width > 0.0, "must be positive");
       }},
      {"stride", [](C& c, const L& l) {
         c.op.stride = static_cast<int>(l.integer());
         l.check(c.op.stride >= 1, "must be positive");
       }},
      {"data_dim", [](C& c, const L& l) {
         c.op.data_dim = l.integer();
         l.check(c.op.data_dim >= 0, "must be nonnegative");
       }}}},
    {"solution",
     {{"constant", [](C& c, const L& l) { c.solution.constant = l.numbers(); }},
      {"linear", [](C& c, const L& l) { c.solution.linear = l.numbers(); }},
      {"quadratic", [](C& c, const L& l) { c.solution.quadratic = l.numbers(); }},
      {"wave", [](C& c, const L& l) { c.solution.wave = l.numbers(); }}}},
    {"conditions",
     {{"beta1", [](C& c, const L& l) {
         c.conditions.beta1 = l.number();
         l.check(c.conditions.beta1 >= 0.0 && c.conditions.beta1 < 1.0, "must lie in [0, 1)");
       }},
      {"beta2", [](C& c, const L& l) {
         if (l.value() == "auto") {
           c.conditions.beta2.reset();
           return;
         }
         c.conditions.beta2 = l.number();
         l.check(*c.conditions.beta2 > 0.0, "must be positive or 'auto'");
       }},
      {"alpha_bar", [](C& c, const L& l) {
         c.conditions.alpha_bar = l.number();
         l.check(c.conditions.alpha_bar > 0.0, "must be positive");
       }},
      {"rho", [](C& c, const L& l) {
         c.conditions.rho = l.number();
         l.check(c.conditions.rho > 0.0, "must be positive");
       }}}},
    {"sampling",
     {{"count", [](C& c, const L& l) {
         c.sampling.count = l.count();
         l.check(c.sampling.count > 0, "must be positive");
       }},
      {"t_min", [](C& c, const L& l) {
         c.sampling.t_min = l.number();
         l.check(c.sampling.t_min >= 0.0, "must be nonnegative");
       }},
      {"t_max", [](C& c, const L& l) {
         c.sampling.t_max = l.number();
         l.check(c.sampling.t_max >= 0.0, "must be nonnegative");
       }},
      {"directions", [](C& c, const L& l) { c.sampling.directions = l.count(); }},
      {"minimality_samples", [](C& c, const L& l) { c.sampling.minimality_samples = l.count(); }},
      {"sweep_radii", [](C& c, const L& l) {
         c.sampling.sweep_radii = l.numbers();
         for (double r : c.sampling.sweep_radii) l.check(r > 0.0, "radii must be positive");
       }},
      {"sweep_inner_ratio", [](C& c, const L& l) {
         c.sampling.sweep_inner_ratio = l.number();
         l.check(c.sampling.sweep_inner_ratio > 0.0 && c.sampling.sweep_inner_ratio <= 1.0, "must lie in (0, 1]");
       }}}},
    {"solver",
     {{"method", [](C& c, const L& l) { c.solver.method = l.word({"gradient-descent", "lbfgs"}); }},
      {"max_iters", [](C& c, const L& l) { c.solver.max_iters = l.count(); }},
      {"grad_tol", [](C& c, const L& l) {
         c.solver.grad_tol = l.number();
         l.check(c.solver.grad_tol > 0.0, "must be positive");
       }},
      {"armijo", [](C& c, const L& l) {
         c.solver.armijo = l.number();
         l.check(c.solver.armijo > 0.0 && c.solver.armijo < 1.0, "must lie in (0, 1)");
       }},
      {"stagnation_limit", [](C& c, const L& l) {
         c.solver.stagnation_limit = l.count();
         l.check(c.solver.stagnation_limit > 0, "must be positive");
       }},
      {"trace", [](C& c, const L& l) { c.solver.trace = l.boolean(); }}}},
    {"rate",
     {{"deltas", [](C& c, const L& l) {
         c.rate.deltas = l.numbers();
         for (double d : c.rate.deltas) l.check(d >= 0.0, "noise levels must be nonnegative");
       }},
      {"alpha_coefficient", [](C& c, const L& l) {
         c.rate.alpha_coefficient = l.number();
         l.check(c.rate.alpha_coefficient > 0.0, "must be positive");
       }},
      {"alpha_exponent", [](C& c, const L& l) { c.rate.alpha_exponent = l.number(); }},
      {"slope_min", [](C& c, const L& l) { c.rate.slope_min = l.number(); }},
      {"slope_max", [](C& c, const L& l) { c.rate.slope_max = l.number(); }}}},
    {"gradients",
     {{"pairs", [](C& c, const L& l) {
         c.gradients.pairs = l.count();
         l.check(c.gradients.pairs > 0, "must be positive");
       }},
      {"matrices", [](C& c, const L& l) { c.gradients.matrices = l.count(); }},
      {"fields", [](C& c, const L& l) { c.gradients.fields = l.count(); }},
      {"bias", [](C& c, const L& l) {
         c.gradients.bias = l.number();
         l.check(c.gradients.bias > 0.0, "must be positive");
       }},
      {"amplitude", [](C& c, const L& l) {
         c.gradients.amplitude = l.number();
         l.check(c.gradients.amplitude > 0.0, "must be positive");
       }},
      {"offset", [](C& c, const L& l) { c.gradients.offset = l.number(); }}}},
  };
  return schema;
}

} // namespace detail

/**
 * Parses configuration text. `source` names the input in error messages,
 * which have the form "source:line: key: message". Cross-key consistency
 * (list lengths, parameter ranges) is checked after reading and reported
 * at the line of the offending key.
 */
inline ExperimentConfig parse_config(std::string_view text, const std::string& source = "config")
{
  const auto& schema = detail::config_schema();
  ExperimentConfig cfg;
  std::map<std::string, int> key_lines;
  std::string section;
  int lineno = 0;
  auto fail = [&source](int line, const std::string& msg) {
    throw Error(ErrorKind::config, source + ":" + std::to_string(line) + ": " + msg);
  };

  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++lineno;
    const auto cpos = raw.find_first_of("#;");
    std::string_view line = detail::trim(cpos == std::string_view::npos ? raw : raw.substr(0, cpos));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(lineno, "unterminated section header");
      section = std::string(detail::trim(line.substr(1, line.size() - 2)));
      if (!schema.count(section)) fail(lineno, "unknown section [" + section + "]");
      if (section == "growth") cfg.growth.configured = true;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail(lineno, "expected 'key = value'");
    const std::string key(detail::trim(line.substr(0, eq)));
    const std::string value(detail::trim(line.substr(eq + 1)));
    if (section.empty()) fail(lineno, "key '" + key + "' outside any section");
    if (key.empty()) fail(lineno, "missing key before '='");
    if (value.empty()) fail(lineno, key + ": missing value");
    const auto& keys = schema.at(section);
    const auto it = keys.find(key);
    if (it == keys.end()) fail(lineno, "unknown key '" + key + "' in [" + section + "]");
    const std::string full = section + "." + key;
    if (key_lines.count(full)) fail(lineno, "duplicate key '" + key + "' (first set on line " +
                                              std::to_string(key_lines[full]) + ")");
    key_lines[full] = lineno;
    it->second(cfg, detail::ConfigLine(source, lineno, key, value));
  }

  auto line_of = [&](const std::string& full) {
    const auto it = key_lines.find(full);
    return it == key_lines.end() ? 0 : it->second;
  };
  auto check = [&](bool ok, const std::string& full, const std::string& msg) {
    if (!ok) fail(line_of(full), full + ": " + msg);
  };

  const std::size_t n = cfg.domain.resolution.size();
  check(cfg.domain.lo.size() == n && cfg.domain.hi.size() == n, "domain.lo",
        "lo, hi and resolution must have one entry per axis");
  for (std::size_t a = 0; a < n; ++a) {
    check(cfg.domain.hi[a] > cfg.domain.lo[a], "domain.hi", "every axis needs lo < hi");
    check(cfg.domain.resolution[a] >= 2, "domain.resolution", "resolution must be at least 2 per axis");
  }
  const auto N = static_cast<std::size_t>(cfg.space.components);
  check(cfg.space.exponent >= static_cast<double>(std::min(N, n)), "space.exponent", "must satisfy p >= N∧n");
  auto list_len = [&](const std::vector<double>& v, std::size_t len, const std::string& key) {
    check(v.empty() || v.size() == len, key, "expected " + std::to_string(len) + " values");
  };
  list_len(cfg.solution.constant, N, "solution.constant");
  list_len(cfg.solution.linear, N * n, "solution.linear");
  list_len(cfg.solution.quadratic, N * n, "solution.quadratic");
  list_len(cfg.solution.wave, N * n, "solution.wave");
  if (cfg.integrand.id == "elastic" || cfg.integrand.id == "barrier")
    check(N == n && N >= 2, "integrand.id", "elastic integrands need N = n >= 2");
  check(cfg.sampling.t_max == 0.0 || (cfg.sampling.t_min > 0.0 && cfg.sampling.t_min <= cfg.sampling.t_max),
        "sampling.t_min", "need 0 < t_min <= t_max (or t_max = 0)");
  if (cfg.rate.slope_min && cfg.rate.slope_max)
    check(*cfg.rate.slope_min <= *cfg.rate.slope_max, "rate.slope_max", "must not be below slope_min");
  return cfg;
}

/// Canonical text form; parse_config(serialize_config(c)) == c.
inline std::string serialize_config(const ExperimentConfig& c)
{
  std::ostringstream o;
  auto num = [](double x) { return format_double(x); };
  auto list = [](const auto& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) s += ' ';
      if constexpr (std::is_same_v<std::decay_t<decltype(v[i])>, double>)
        s += format_double(v[i]);
      else
        s += std::to_string(v[i]);
    }
    return s;
  };
  auto opt_list = [&](const char* key, const std::vector<double>& v) {
    if (!v.empty()) o << key << " = " << list(v) << "\n";
  };

  o << "[run]\nseed = " << c.seed << "\n\n";
  o << "[domain]\nlo = " << list(c.domain.lo) << "\nhi = " << list(c.domain.hi)
    << "\nresolution = " << list(c.domain.resolution) << "\n\n";
  o << "[space]\ncomponents = " << c.space.components << "\nexponent = " << num(c.space.exponent) << "\n\n";
  o << "[integrand]\nid = " << c.integrand.id << "\nexponent = " << num(c.integrand.exponent)
    << "\nmass = " << num(c.integrand.mass) << "\nstiffness = " << num(c.integrand.stiffness)
    << "\ngamma = " << num(c.integrand.gamma) << "\ntarget = " << num(c.integrand.target)
    << "\nbarrier = " << num(c.integrand.barrier) << "\n\n";
  if (c.growth.configured)
    o << "[growth]\na = " << num(c.growth.a) << "\nb = " << num(c.growth.b) << "\nc = " << num(c.growth.c)
      << "\nexponent = " << num(c.growth.exponent) << "\nsamples = " << c.growth.samples << "\n\n";
  o << "[operator]\nid = " << c.op.id << "\nwidth = " << num(c.op.width) << "\nstride = " << c.op.stride
    << "\ndata_dim = " << c.op.data_dim << "\n\n";
  o << "[solution]\n";
  opt_list("constant", c.solution.constant);
  opt_list("linear", c.solution.linear);
  opt_list("quadratic", c.solution.quadratic);
  opt_list("wave", c.solution.wave);
  o << "\n[conditions]\nbeta1 = " << num(c.conditions.beta1)
    << "\nbeta2 = " << (c.conditions.beta2 ? num(*c.conditions.beta2) : std::string("auto"))
    << "\nalpha_bar = " << num(c.conditions.alpha_bar) << "\nrho = " << num(c.conditions.rho) << "\n\n";
  o << "[sampling]\ncount = " << c.sampling.count << "\nt_min = " << num(c.sampling.t_min)
    << "\nt_max = " << num(c.sampling.t_max) << "\ndirections = " << c.sampling.directions
    << "\nminimality_samples = " << c.sampling.minimality_samples << "\n";
  opt_list("sweep_radii", c.sampling.sweep_radii);
  o << "sweep_inner_ratio = " << num(c.sampling.sweep_inner_ratio) << "\n\n";
  o << "[solver]\nmethod = " << c.solver.method << "\nmax_iters = " << c.solver.max_iters
    << "\ngrad_tol = " << num(c.solver.grad_tol) << "\narmijo = " << num(c.solver.armijo)
    << "\nstagnation_limit = " << c.solver.stagnation_limit << "\ntrace = " << (c.solver.trace ? "true" : "false")
    << "\n\n";
  o << "[rate]\n";
  opt_list("deltas", c.rate.deltas);
  o << "alpha_coefficient = " << num(c.rate.alpha_coefficient) << "\nalpha_exponent = " << num(c.rate.alpha_exponent)
    << "\n";
  if (c.rate.slope_min) o << "slope_min = " << num(*c.rate.slope_min) << "\n";
  if (c.rate.slope_max) o << "slope_max = " << num(*c.rate.slope_max) << "\n";
  o << "\n[gradients]\npairs = " << c.gradients.pairs << "\nmatrices = " << c.gradients.matrices
    << "\nfields = " << c.gradients.fields << "\nbias = " << num(c.gradients.bias)
    << "\namplitude = " << num(c.gradients.amplitude) << "\noffset = " << num(c.gradients.offset) << "\n";
  return o.str();
}

inline ExperimentConfig load_config(const std::filesystem::path& path)
{
  return parse_config(read_text_file(path), path.string());
}

// ---------------------------------------------------------------------------
// Building library objects

inline GridDomain build_domain(const ExperimentConfig& c)
{
  return GridDomain(c.domain.lo, c.domain.hi, c.domain.resolution);
}

inline IntegrandPtr build_integrand(const ExperimentConfig& c)
{
  const MinorsShape shape(c.space.components, static_cast<int>(c.domain.resolution.size()));
  const auto& s = c.integrand;
  const ElasticIntegrand::Params prm{s.stiffness, s.exponent, s.gamma, s.target, s.mass};
  if (s.id == "zero") return std::make_shared<ZeroIntegrand>(shape);
  if (s.id == "dirichlet") return std::make_shared<DirichletIntegrand>(shape, s.exponent, s.mass);
  if (s.id == "elastic") return std::make_shared<ElasticIntegrand>(shape, prm);
  if (s.id == "barrier") return std::make_shared<BarrierIntegrand>(shape, prm, s.barrier);
  throw Error(ErrorKind::config, "unknown integrand '" + s.id + "'");
}

inline std::shared_ptr<const Regularizer> build_regularizer(const ExperimentConfig& c, const GridDomain& dom)
{
  return std::make_shared<Regularizer>(build_integrand(c),
                                       FunctionSpaceConfig(c.space.components, c.space.exponent, dom.dim()), dom);
}

inline OperatorPtr build_operator(const ExperimentConfig& c, const GridDomain& dom)
{
  const int N = c.space.components;
  const auto& o = c.op;
  if (o.id == "zero") {
    const Eigen::Index m = o.data_dim > 0 ? o.data_dim : static_cast<Eigen::Index>(dom.node_count()) * N;
    return std::make_shared<ZeroOperator>(dom, N, m);
  }
  if (o.id == "identity") return std::make_shared<IdentitySampling>(dom, N);
  if (o.id == "linear-smoothing") return std::make_shared<LinearSmoothing>(dom, N, o.width, o.stride);
  if (o.id == "pointwise-cubic") return std::make_shared<PointwiseCubic>(dom, N, o.stride);
  if (o.id == "composed") return std::make_shared<SmoothedCubic>(dom, N, o.width, o.stride);
  throw Error(ErrorKind::config, "unknown operator '" + o.id + "'");
}

inline GridField build_solution(const ExperimentConfig& c, const GridDomain& dom)
{
  const int N = c.space.components;
  const int n = dom.dim();
  const auto& s = c.solution;
  auto coef = [](const std::vector<double>& v, std::size_t i) { return v.empty() ? 0.0 : v[i]; };
  return GridField::sample(dom, N, [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    Eigen::VectorXd out(N);
    for (int i = 0; i < N; ++i) {
      double val = coef(s.constant, static_cast<std::size_t>(i));
      for (int j = 0; j < n; ++j) {
        const auto k = static_cast<std::size_t>(i * n + j);
        val += coef(s.linear, k) * x(j) + coef(s.quadratic, k) * x(j) * x(j) +
               coef(s.wave, k) * std::sin(std::numbers::pi * x(j));
      }
      out(i) = val;
    }
    return out;
  });
}

inline std::optional<GrowthCertificate> build_growth(const ExperimentConfig& c, const GridDomain& dom)
{
  if (!c.growth.configured) return std::nullopt;
  return GrowthCertificate::constant(dom, c.growth.a, c.growth.b, c.growth.c, c.growth.exponent);
}

inline SolverConfig build_solver(const ExperimentConfig& c)
{
  SolverConfig s;
  s.method = c.solver.method == "lbfgs" ? SolverMethod::lbfgs : SolverMethod::gradient_descent;
  s.max_iters = c.solver.max_iters;
  s.grad_tol = c.solver.grad_tol;
  s.armijo = c.solver.armijo;
  s.stagnation_limit = c.solver.stagnation_limit;
  return s;
}

} // namespace polyreg

#endif
